//! The compensating operator and the martingale built from it.

use semimarkov::diagnostics::{apply_l, martingale_residual, DEFAULT_INNER_SAMPLES};
use semimarkov::{HoldingTime, RngStreams, SemiMarkovModel, State, TransitionKernel};

fn main() -> semimarkov::Result<()> {
    let model = SemiMarkovModel::homogeneous(
        TransitionKernel::gaussian_walk(1.0),
        HoldingTime::weibull(0.7, 1.0)?,
        State::scalar(0.0),
    )?;
    let square = |x: &State| x[0] * x[0];
    let streams = RngStreams::new(5);
    let l = apply_l(&model, square, &State::scalar(1.0), 20_000, &streams)?;
    println!(
        "Lφ(1) = {:.4} ± {:.4} (exact {:.4})",
        l.value,
        l.stderr,
        model.q(&State::scalar(1.0))
    );
    for k in 1..=5 {
        let r = martingale_residual(
            &model,
            square,
            k,
            10_000,
            DEFAULT_INNER_SAMPLES,
            &streams.fork_index(k as u64),
        )?;
        println!("k = {k}: residual {:+.4} ± {:.4}", r.value, r.stderr);
    }
    Ok(())
}
