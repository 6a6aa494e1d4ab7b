//! The two-atom family: the submartingale inequality holds for every `n`, yet
//! `P(w'(0.05; 2) > 0.5)` does not vanish.

use semimarkov::counterexample::{analytic_exceedance, demonstrate_condition_d, demonstrate_nontightness};
use semimarkov::RngStreams;

fn main() -> semimarkov::Result<()> {
    let streams = RngStreams::new(2024);
    let n_list: Vec<u64> = vec![5, 10, 19, 21, 50, 200, 1000];
    let table = demonstrate_nontightness(&n_list, 0.05, 0.5, 2.0, 4000, &streams)?;
    for r in table.rows.iter().filter(|r| r.x == "empirical") {
        let n: u64 = r.u.parse().unwrap();
        println!(
            "n = {n:>4}: P(w' > 0.5) = {:.4} ± {:.4}   analytic {:.4}",
            r.value,
            r.stderr,
            analytic_exceedance(n, 0.05, 0.5, 2.0)?
        );
    }
    for n in [1, 4, 100] {
        println!(
            "condition D at n = {n}: {}",
            demonstrate_condition_d(n, 10_000, &streams)?.verdict
        );
    }
    Ok(())
}
