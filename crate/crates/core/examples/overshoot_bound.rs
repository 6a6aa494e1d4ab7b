//! `J_n(t)` for Pareto clocks under averaging scaling, closed form against quadrature,
//! and one simulated check of `d^n_0(t) <= J_n(t)`.

use semimarkov::scaling::{theorem3_j, theorem3_j_quadrature, verify_d_bound, ScalingScheme};
use semimarkov::{HoldingTime, RngStreams, SemiMarkovModel, State, TransitionKernel};

fn main() -> semimarkov::Result<()> {
    let base = SemiMarkovModel::homogeneous(
        TransitionKernel::symmetric_walk(1.0),
        HoldingTime::pareto(3.0, 1.0)?,
        State::scalar(0.0),
    )?;
    let scheme = ScalingScheme::averaging();
    let probes = [State::scalar(0.0)];
    for n in [1, 10, 100, 100_000] {
        for t in [1.0, 0.1, 0.01] {
            let closed = theorem3_j(&base, &scheme, n, t, &probes)?;
            let quad = theorem3_j_quadrature(&base, &scheme, n, t, &probes, 1e-10)?;
            println!("n = {n:>6}  t = {t:<5} J = {closed:.8}  quadrature = {quad:.8}");
        }
    }
    let table = verify_d_bound(&base, &scheme, 10, 0.1, &probes, 10_000, &RngStreams::new(2))?;
    println!("d bound at n = 10, t = 0.1: {}", table.verdict);
    Ok(())
}
