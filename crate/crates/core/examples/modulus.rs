//! `w'(δ; T)` and the sup-norm of a hand-built path.

use semimarkov::skorokhod::{oscillation_stats, sup_norm, w_prime};
use semimarkov::{JumpPath, State};

fn main() -> semimarkov::Result<()> {
    let path = JumpPath::new(
        State::scalar(0.0),
        vec![
            (0.5, State::scalar(1.0)),
            (0.52, State::scalar(0.0)),
            (1.4, State::scalar(-0.5)),
        ],
        2.0,
    )?;
    for delta in [0.01, 0.05, 0.5, 1.0] {
        println!("w'({delta}; 2) = {}", w_prime(&path, delta, 2.0)?);
    }
    println!("sup |x| = {}", sup_norm(&path, 2.0)?);
    println!("{:?}", oscillation_stats(&path, 0.5, 2.0)?);
    Ok(())
}
