//! Means, tails and mean residual lives of the built-in holding-time laws.

use semimarkov::HoldingTime;

fn main() -> semimarkov::Result<()> {
    let laws = [
        HoldingTime::exponential(2.0)?,
        HoldingTime::pareto(3.0, 1.0)?,
        HoldingTime::weibull(0.7, 1.0)?,
        HoldingTime::two_point(0.1, 1.0, 0.5)?,
        HoldingTime::deterministic(1.0)?,
    ];
    println!("{:<32} {:>10} {:>10} {:>14}", "law", "mean", "tail(1)", "residual(1)");
    for law in &laws {
        let residual = law.mean_residual(1.0).map_or("-".to_string(), |r| format!("{r:.6}"));
        println!(
            "{:<32} {:>10.6} {:>10.6} {:>14}",
            law.name(),
            law.mean(),
            law.tail(1.0),
            residual
        );
    }
    Ok(())
}
