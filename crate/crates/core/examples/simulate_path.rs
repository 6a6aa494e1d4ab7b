//! One path of a symmetric walk with heavy-tailed clocks, printed as jump times.

use semimarkov::renewal::simulate_path;
use semimarkov::{HoldingTime, RngStreams, SemiMarkovModel, State, TransitionKernel};

fn main() -> semimarkov::Result<()> {
    let model = SemiMarkovModel::homogeneous(
        TransitionKernel::symmetric_walk(1.0),
        HoldingTime::pareto(1.5, 1.0)?,
        State::scalar(0.0),
    )?;
    let mut rng = RngStreams::new(1).replica(0);
    let path = simulate_path(&model, 10.0, semimarkov::DEFAULT_STEP_LIMIT, &mut rng)?;
    path.write_csv(std::io::stdout().lock())?;
    Ok(())
}
