//! The Markov renewal chain `(x_n, τ_n)` and its semi-Markov path.

use std::io::Write;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::SemiMarkovModel;
use crate::report::fmt_f64;
use crate::state::State;
use crate::DEFAULT_STEP_LIMIT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// The last jump time exceeds the horizon.
    HorizonReached,
    /// The last state has the absorbing holding law.
    Absorbed,
    /// The jump budget ran out first.
    StepLimit,
}

/// States `x_0..x_N` and jump times `0 = τ_0 <= τ_1 <= ... <= τ_N`.
#[derive(Clone, Debug)]
pub struct RenewalRecord {
    states: Vec<State>,
    jump_times: Vec<f64>,
    truncation: Truncation,
}

impl RenewalRecord {
    pub fn new(states: Vec<State>, jump_times: Vec<f64>, truncation: Truncation) -> Result<Self> {
        if states.is_empty() || states.len() != jump_times.len() {
            return Err(Error::invalid(
                "jump_times",
                format!("{} states but {} jump times", states.len(), jump_times.len()),
            ));
        }
        if jump_times[0] != 0.0 {
            return Err(Error::invalid("jump_times", "τ_0 must be 0"));
        }
        if jump_times.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::invalid("jump_times", "must be non-decreasing"));
        }
        let d = states[0].dimension();
        if let Some(bad) = states.iter().find(|s| s.dimension() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.dimension(),
            });
        }
        Ok(RenewalRecord {
            states,
            jump_times,
            truncation,
        })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Number of jumps `N`.
    pub fn jumps(&self) -> usize {
        self.states.len() - 1
    }

    /// Holding times `θ_n = τ_{n+1} - τ_n`.
    pub fn holding_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.jump_times.windows(2).map(|w| w[1] - w[0])
    }

    /// Number of jumps in `(0, t]`.
    pub fn count_up_to(&self, t: f64) -> usize {
        self.jump_times[1..].partition_point(|&s| s <= t)
    }
}

fn simulate_from(
    model: &SemiMarkovModel,
    x0: State,
    horizon: f64,
    step_limit: usize,
    rng: &mut dyn RngCore,
) -> RenewalRecord {
    let mut states = vec![x0];
    let mut times = vec![0.0];
    let truncation = loop {
        let n = states.len() - 1;
        let (x, tau) = (&states[n], times[n]);
        if tau > horizon {
            break Truncation::HorizonReached;
        }
        let law = model.holding(x);
        if law.is_never() {
            break Truncation::Absorbed;
        }
        if n >= step_limit {
            break Truncation::StepLimit;
        }
        let theta = law.sample(rng);
        if theta.is_infinite() {
            break Truncation::Absorbed;
        }
        let next = model.kernel().sample_dyn(x, rng);
        states.push(next);
        times.push(tau + theta);
    };
    RenewalRecord {
        states,
        jump_times: times,
        truncation,
    }
}

/// Simulates the chain from the model's initial law until the first jump
/// after `horizon`, absorption, or `step_limit` jumps.
///
/// The next state and the holding time are drawn independently given the
/// current state.
pub fn simulate_chain<R: RngCore>(
    model: &SemiMarkovModel,
    horizon: f64,
    step_limit: usize,
    rng: &mut R,
) -> Result<RenewalRecord> {
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon", "must be positive"));
    }
    if step_limit == 0 {
        return Err(Error::invalid("step_limit", "must be at least 1"));
    }
    let x0 = model.sample_initial(rng);
    model.check_state(&x0)?;
    Ok(simulate_from(model, x0, horizon, step_limit, rng))
}

/// Exactly `steps` transitions of the chain from `x0` (fewer if absorbed).
pub fn simulate_steps<R: RngCore>(
    model: &SemiMarkovModel,
    x0: State,
    steps: usize,
    rng: &mut R,
) -> Result<RenewalRecord> {
    model.check_state(&x0)?;
    Ok(simulate_from(model, x0, f64::INFINITY, steps, rng))
}

/// Piecewise-constant càdlàg path on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpPath {
    initial: State,
    jumps: Vec<(f64, State)>,
    horizon: f64,
}

impl JumpPath {
    /// Normalises the jump list: jumps after `horizon` are discarded, jumps at
    /// a repeated time overwrite the earlier value, and jumps that do not
    /// change the value are dropped.
    pub fn new(initial: State, jumps: Vec<(f64, State)>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("horizon", "must be finite and positive"));
        }
        let d = initial.dimension();
        let mut current = initial;
        let mut out: Vec<(f64, State)> = Vec::with_capacity(jumps.len());
        let mut last_time = 0.0;
        for (t, v) in jumps {
            if v.dimension() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.dimension(),
                });
            }
            if !(t >= last_time) {
                return Err(Error::invalid("jumps", "jump times must be sorted and non-negative"));
            }
            last_time = t;
            if t > horizon {
                break;
            }
            if t == 0.0 {
                current = v;
                continue;
            }
            if let Some((lt, _)) = out.last() {
                if *lt == t {
                    out.pop();
                }
            }
            let prev = out.last().map(|(_, s)| s).unwrap_or(&current);
            if *prev != v {
                out.push((t, v));
            }
        }
        Ok(JumpPath {
            initial: current,
            jumps: out,
            horizon,
        })
    }

    pub fn constant(value: State, horizon: f64) -> Result<Self> {
        JumpPath::new(value, Vec::new(), horizon)
    }

    pub fn initial(&self) -> &State {
        &self.initial
    }

    pub fn jumps(&self) -> &[(f64, State)] {
        &self.jumps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dimension(&self) -> usize {
        self.initial.dimension()
    }

    /// `x(t)`: value of the last jump at a time `<= t`, else the initial value.
    pub fn value_at(&self, t: f64) -> &State {
        let k = self.jumps.partition_point(|(s, _)| *s <= t);
        if k == 0 {
            &self.initial
        } else {
            &self.jumps[k - 1].1
        }
    }

    /// CSV rows `time,x1,...,xd`: one for the initial value at time 0 and one per jump.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("time".to_string())
            .chain((1..=self.dimension()).map(|i| format!("x{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        let rows = std::iter::once((0.0, &self.initial)).chain(self.jumps.iter().map(|(t, v)| (*t, v)));
        for (t, v) in rows {
            let cells: Vec<String> = std::iter::once(fmt_f64(t))
                .chain(v.iter().map(|c| fmt_f64(*c)))
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Semi-Markov path `x(t) = x_{ν(t)}` of a record on `[0, horizon]`.
///
/// The record must cover the horizon: either its last jump time exceeds the
/// horizon or the chain was absorbed.
pub fn to_path(record: &RenewalRecord, horizon: f64) -> Result<JumpPath> {
    let last = *record.jump_times.last().expect("records are non-empty");
    let covered = last > horizon || record.truncation == Truncation::Absorbed;
    if !covered {
        return Err(Error::Uncovered {
            horizon,
            reason: format!("last jump time {last} with truncation {:?}", record.truncation),
        });
    }
    let jumps = record.jump_times[1..]
        .iter()
        .zip(record.states[1..].iter())
        .take_while(|(t, _)| **t <= horizon)
        .map(|(t, s)| (*t, s.clone()))
        .collect();
    JumpPath::new(record.states[0].clone(), jumps, horizon)
}

/// Simulates a path on `[0, horizon]` from the initial law. Returns the
/// [`Error::StepLimit`] error when the jump budget is exhausted first.
pub fn simulate_path<R: RngCore>(
    model: &SemiMarkovModel,
    horizon: f64,
    step_limit: usize,
    rng: &mut R,
) -> Result<JumpPath> {
    let record = simulate_chain(model, horizon, step_limit, rng)?;
    if record.truncation == Truncation::StepLimit {
        return Err(Error::StepLimit {
            limit: step_limit,
            time: *record.jump_times.last().unwrap(),
        });
    }
    to_path(&record, horizon)
}

/// Outcome of one forward-jump draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForwardJump {
    /// `τ̂_0(t) - t`: time from `t` to the next jump.
    Gap(f64),
    /// No jump after `t` occurred before the censoring horizon.
    HorizonExceeded,
}

/// Censoring horizon used when none is given: `t + 10^6 · max(1, t)`.
pub fn default_forward_horizon(t: f64) -> f64 {
    t + 1e6 * t.max(1.0)
}

/// Starts the chain at `(x, 0)` and returns the gap between `t` and the
/// first jump time strictly after `t`.
pub fn forward_jump<R: RngCore>(
    model: &SemiMarkovModel,
    x: &State,
    t: f64,
    horizon: Option<f64>,
    step_limit: usize,
    rng: &mut R,
) -> Result<ForwardJump> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t", "must be non-negative"));
    }
    let horizon = horizon.unwrap_or_else(|| default_forward_horizon(t));
    if !(horizon > t) {
        return Err(Error::invalid("horizon", "must exceed t"));
    }
    model.check_state(x)?;
    let mut state = x.clone();
    let mut tau = 0.0;
    let mut steps = 0usize;
    loop {
        let law = model.holding(&state);
        if law.is_never() {
            return Ok(ForwardJump::HorizonExceeded);
        }
        if steps >= step_limit {
            return Err(Error::StepLimit {
                limit: step_limit,
                time: tau,
            });
        }
        let theta = law.sample(rng);
        tau += theta;
        steps += 1;
        if tau > horizon || theta.is_infinite() {
            return Ok(ForwardJump::HorizonExceeded);
        }
        if tau > t {
            return Ok(ForwardJump::Gap(tau - t));
        }
        state = model.kernel().sample(&state, rng);
    }
}

/// [`forward_jump`] with the default horizon and step limit.
pub fn forward_jump_default<R: RngCore>(
    model: &SemiMarkovModel,
    x: &State,
    t: f64,
    rng: &mut R,
) -> Result<ForwardJump> {
    forward_jump(model, x, t, None, DEFAULT_STEP_LIMIT, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{HoldingTime, TransitionKernel};
    use crate::rng::RngStreams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn det_model(c: f64) -> SemiMarkovModel {
        SemiMarkovModel::homogeneous(
            TransitionKernel::shift(1.0),
            HoldingTime::deterministic(c).unwrap(),
            State::scalar(0.0),
        )
        .unwrap()
    }

    fn two_state_absorbing() -> SemiMarkovModel {
        let kernel = TransitionKernel::constant(State::scalar(1.0));
        SemiMarkovModel::new(
            kernel,
            |x| {
                if x[0] == 0.0 {
                    HoldingTime::two_point(0.25, 1.0, 0.5).unwrap()
                } else {
                    HoldingTime::never()
                }
            },
            |_| State::scalar(0.0),
        )
    }

    #[test]
    fn deterministic_clock_stops_after_horizon() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = simulate_chain(&det_model(1.0), 2.5, 100, &mut rng).unwrap();
        assert_eq!(r.jump_times(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(r.truncation(), Truncation::HorizonReached);
        assert_eq!(r.states().len(), 4);
    }

    #[test]
    fn absorbing_model_jumps_once() {
        let m = two_state_absorbing();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let r = simulate_chain(&m, 2.0, 100, &mut rng).unwrap();
            assert_eq!(r.jumps(), 1);
            assert_eq!(r.truncation(), Truncation::Absorbed);
            assert!(m.holding(r.states().last().unwrap()).is_never());
        }
    }

    #[test]
    fn step_limit_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = simulate_chain(&det_model(1e-3), 10.0, 50, &mut rng).unwrap();
        assert_eq!(r.truncation(), Truncation::StepLimit);
        assert_eq!(r.jumps(), 50);
        assert!(to_path(&r, 10.0).is_err());
        assert!(matches!(
            simulate_path(&det_model(1e-3), 10.0, 50, &mut rng),
            Err(Error::StepLimit { limit: 50, .. })
        ));
    }

    #[test]
    fn poisson_jump_count() {
        // Poisson(1000) counts: mean of 10^4 replicas has sd sqrt(1000/10^4) ≈ 0.316,
        // so [985, 1015] is far wider than 3σ.
        let m = SemiMarkovModel::homogeneous(
            TransitionKernel::symmetric_walk(1.0),
            HoldingTime::exponential(1.0).unwrap(),
            State::scalar(0.0),
        )
        .unwrap();
        let s = RngStreams::new(99).fork("poisson");
        let counts = s.replicate(10_000, |rng| {
            let r = simulate_chain(&m, 1000.0, 1_000_000, rng).unwrap();
            r.count_up_to(1000.0) as f64
        });
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        assert!((985.0..=1015.0).contains(&mean), "{mean}");
        assert!((mean - 1000.0).abs() < 3.0 * (1000.0f64 / 1e4).sqrt(), "{mean}");
    }

    #[test]
    fn to_path_examples() {
        let s = State::scalar;
        let r = RenewalRecord::new(vec![s(0.0), s(1.0)], vec![0.0, 0.3], Truncation::Absorbed).unwrap();
        let p = to_path(&r, 1.0).unwrap();
        assert_eq!(p.initial(), &s(0.0));
        assert_eq!(p.jumps(), &[(0.3, s(1.0))]);

        let r = RenewalRecord::new(vec![s(0.0), s(0.0)], vec![0.0, 0.3], Truncation::Absorbed).unwrap();
        assert!(to_path(&r, 1.0).unwrap().jumps().is_empty());

        let r = RenewalRecord::new(
            vec![s(0.0), s(1.0), s(2.0)],
            vec![0.0, 0.3, 0.6],
            Truncation::HorizonReached,
        )
        .unwrap();
        let p = to_path(&r, 0.5).unwrap();
        assert_eq!(p.jumps(), &[(0.3, s(1.0))]);
        assert_eq!(p.value_at(0.29), &s(0.0));
        assert_eq!(p.value_at(0.3), &s(1.0));

        // last jump at 0.6 does not cover [0, 1]
        assert!(matches!(to_path(&r, 1.0), Err(Error::Uncovered { .. })));
    }

    #[test]
    fn record_invariants_are_checked() {
        let s = State::scalar;
        assert!(RenewalRecord::new(vec![s(0.0)], vec![0.1], Truncation::Absorbed).is_err());
        assert!(RenewalRecord::new(vec![s(0.0), s(1.0)], vec![0.0, -1.0], Truncation::Absorbed).is_err());
        assert!(RenewalRecord::new(vec![s(0.0)], vec![0.0, 1.0], Truncation::Absorbed).is_err());
    }

    #[test]
    fn path_reproduces_chain_at_jump_times() {
        let m = SemiMarkovModel::homogeneous(
            TransitionKernel::gaussian_walk(1.0),
            HoldingTime::pareto(2.5, 1.0).unwrap(),
            State::scalar(0.0),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let r = simulate_chain(&m, 20.0, 10_000, &mut rng).unwrap();
            let p = to_path(&r, 20.0).unwrap();
            for (t, x) in r.jump_times().iter().zip(r.states()) {
                if *t <= 20.0 {
                    assert_eq!(p.value_at(*t), x);
                }
            }
        }
    }

    #[test]
    fn forward_jump_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = forward_jump_default(&det_model(1.0), &State::scalar(7.0), 0.25, &mut rng).unwrap();
        assert_eq!(g, ForwardJump::Gap(0.75));
        let g = forward_jump_default(&det_model(1.0), &State::scalar(7.0), 1.0, &mut rng).unwrap();
        assert_eq!(g, ForwardJump::Gap(1.0));
        let g = forward_jump_default(&two_state_absorbing(), &State::scalar(1.0), 0.3, &mut rng).unwrap();
        assert_eq!(g, ForwardJump::HorizonExceeded);
        assert!(forward_jump(&det_model(1.0), &State::scalar(0.0), 2.0, Some(1.0), 10, &mut rng).is_err());
    }

    #[test]
    fn path_csv_layout() {
        let p = JumpPath::new(State::new([0.0, 1.0]), vec![(0.5, State::new([3.0, 4.0]))], 1.0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,x1,x2");
        assert_eq!(lines.len(), 3);
        let cells: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells, vec![0.5, 3.0, 4.0]);
    }

    #[test]
    fn path_normalisation() {
        let s = State::scalar;
        let p = JumpPath::new(
            s(0.0),
            vec![
                (0.0, s(2.0)),
                (0.1, s(2.0)),
                (0.2, s(3.0)),
                (0.2, s(4.0)),
                (0.5, s(5.0)),
                (2.0, s(9.0)),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(p.initial(), &s(2.0));
        assert_eq!(p.jumps(), &[(0.2, s(4.0)), (0.5, s(5.0))]);
        assert!(JumpPath::new(s(0.0), vec![(0.5, s(1.0)), (0.4, s(2.0))], 1.0).is_err());
    }
}
