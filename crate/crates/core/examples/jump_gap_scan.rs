//! `sup_x d^n_x(t)` for exponential clocks under diffusion scaling.

use semimarkov::diagnostics::{scan_condition_iii, DEFAULT_THRESHOLD};
use semimarkov::scaling::{ScaledFamily, ScalingScheme};
use semimarkov::{HoldingTime, RngStreams, SemiMarkovModel, State, TransitionKernel};

fn main() -> semimarkov::Result<()> {
    let base = SemiMarkovModel::homogeneous(
        TransitionKernel::symmetric_walk(1.0),
        HoldingTime::exponential(2.0)?,
        State::scalar(0.0),
    )?;
    let family = ScaledFamily::new(base, ScalingScheme::diffusion(), vec![1, 10, 100])?
        .to_family_spec(vec![State::scalar(0.0)])?;
    let table = scan_condition_iii(&family, &[1.0, 0.1, 0.01], 2000, DEFAULT_THRESHOLD, &RngStreams::new(7))?;
    for r in table.rows.iter().filter(|r| r.x == "sup") {
        println!(
            "n = {:>3}  t = {:<5} sup d = {:.5} ± {:.5}",
            r.u, r.t, r.value, r.stderr
        );
    }
    println!("verdict: {}", table.verdict);
    Ok(())
}
