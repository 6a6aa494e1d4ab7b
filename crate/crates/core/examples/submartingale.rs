//! Condition D for a bump function on a two-atom clock, and the smallest `A_f`.

use semimarkov::diagnostics::{check_condition_d, search_a_f, BumpFunction, ConditionDParams};
use semimarkov::{HoldingTime, RngStreams, SemiMarkovModel, State, TransitionKernel};

fn main() -> semimarkov::Result<()> {
    let model = SemiMarkovModel::homogeneous(
        TransitionKernel::symmetric_walk(0.5),
        HoldingTime::two_point(0.1, 1.0, 0.5)?,
        State::scalar(0.0),
    )?;
    let f = BumpFunction::new(State::scalar(0.0), 0.3)?;
    let translations = vec![State::scalar(0.0), State::scalar(0.5), State::scalar(-0.5)];
    let streams = RngStreams::new(3);
    let params = ConditionDParams::new(4.0, translations, 3, 5000);
    let table = check_condition_d(&model, &f, &params, &streams)?;
    println!("A_f = 4: {} ({} rows)", table.verdict, table.rows.len());
    let (found, _) = search_a_f(&model, &f, &params, &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0], &streams)?;
    println!("smallest passing A_f on the grid: {found:?}");
    Ok(())
}
