//! Monte Carlo estimators and verdict tables for the tightness hypotheses.
//!
//! All estimators take an [`RngStreams`] and fork it per operation and per
//! table cell, so every number in a table is reproducible from the master
//! seed alone. Limits in `u`, `t` and `δ` are only ever approximated on finite
//! grids; every table carries the note "finite-sample evidence, not a proof".

mod compensator;
mod jump_gap;
mod submartingale;
mod tightness;

pub use compensator::{apply_l, apply_l_time, martingale_residual, DEFAULT_INNER_SAMPLES};
pub use jump_gap::{check_condition_iv, estimate_d, estimate_d_with, scan_condition_iii, MIN_D_SAMPLES};
pub use submartingale::{check_condition_d, search_a_f, ConditionDParams, DEFAULT_BINS, MIN_BIN_SAMPLES};
pub use tightness::{check_compact_containment, estimate_modulus_tail};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::SemiMarkovModel;
use crate::renewal::simulate_chain;
use crate::report::ser_ext;
use crate::rng::RngStreams;
use crate::state::State;
use crate::DEFAULT_STEP_LIMIT;

/// Default threshold for the limit verdicts.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// Monte Carlo point estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "ser_ext")]
    pub value: f64,
    /// Sample standard deviation over `sqrt(n_samples)`.
    #[serde(serialize_with = "ser_ext")]
    pub stderr: f64,
    pub n_samples: u64,
    /// Samples that hit the censoring horizon; when positive, `value` is a lower bound.
    pub censored: u64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64], censored: u64, seed: u64) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            value: mean,
            stderr,
            n_samples: n as u64,
            censored,
            seed,
        }
    }

    /// Binomial proportion `hits / n` with stderr `sqrt(p (1 - p) / n)`.
    pub fn proportion(hits: u64, n: u64, seed: u64) -> Self {
        let p = hits as f64 / n as f64;
        Estimate {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
            censored: 0,
            seed,
        }
    }

    pub fn is_lower_bound(&self) -> bool {
        self.censored > 0
    }

    pub fn all_censored(&self) -> bool {
        self.n_samples > 0 && self.censored == self.n_samples
    }

    /// `|value - target| <= k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Smooth bump `x ↦ exp(1 - 1 / (1 - (|x - c| / r)^2))` on `|x - c| < r`, zero outside.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BumpFunction {
    pub center: State,
    pub radius: f64,
}

impl BumpFunction {
    pub fn new(center: State, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("radius", "must be finite and positive"));
        }
        Ok(BumpFunction { center, radius })
    }

    pub fn eval(&self, x: &State) -> f64 {
        let z = x.distance(&self.center) / self.radius;
        if z >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - z * z)).exp()
        }
    }

    /// `f_q(x) = f(x - q)`.
    pub fn translate(&self, q: &State) -> BumpFunction {
        BumpFunction {
            center: self.center.add(q),
            radius: self.radius,
        }
    }

    pub fn sup(&self) -> f64 {
        1.0
    }
}

/// How the probe set for `sup_x` is augmented by pilot simulations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PilotConfig {
    pub paths: usize,
    pub horizon: f64,
    /// Visited states added on top of the declared probes, at most.
    pub max_states: usize,
}

impl Default for PilotConfig {
    fn default() -> Self {
        PilotConfig {
            paths: 100,
            horizon: 1.0,
            max_states: 8,
        }
    }
}

impl PilotConfig {
    pub fn disabled() -> Self {
        PilotConfig {
            paths: 0,
            ..PilotConfig::default()
        }
    }
}

/// One member `u` of a family of semi-Markov processes.
#[derive(Clone, Debug)]
pub struct Member {
    pub index: u64,
    pub model: SemiMarkovModel,
}

/// A finite family `u ↦ model` standing in for a sequence `u → ∞`, together
/// with the probe states over which `sup_x` is approximated.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    label: String,
    members: Vec<Member>,
    probe_states: Vec<State>,
    pilot: PilotConfig,
}

impl FamilySpec {
    /// Members are kept in the given order; the last ones stand for `u → ∞`.
    pub fn new(
        label: impl Into<String>,
        members: Vec<(u64, SemiMarkovModel)>,
        probe_states: Vec<State>,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("members", "a family needs at least one member"));
        }
        if probe_states.is_empty() {
            return Err(Error::invalid("probe_states", "at least one probe state is required"));
        }
        let d = members[0].1.dimension();
        for (_, m) in &members {
            if m.dimension() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: m.dimension(),
                });
            }
        }
        for p in &probe_states {
            if p.dimension() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dimension(),
                });
            }
        }
        Ok(FamilySpec {
            label: label.into(),
            members: members
                .into_iter()
                .map(|(index, model)| Member { index, model })
                .collect(),
            probe_states,
            pilot: PilotConfig::default(),
        })
    }

    pub fn with_pilot(mut self, pilot: PilotConfig) -> Self {
        self.pilot = pilot;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn probe_states(&self) -> &[State] {
        &self.probe_states
    }

    pub fn pilot(&self) -> &PilotConfig {
        &self.pilot
    }

    /// Indices of the members treated as the tail `u → ∞`: the last half, rounded up.
    pub(crate) fn tail_range(&self) -> std::ops::Range<usize> {
        let n = self.members.len();
        n / 2..n
    }

    /// Declared probes followed by up to `pilot.max_states` distinct states
    /// visited by pilot paths of `member`, evenly spread over the sorted visits.
    pub fn probes_for(&self, member: &Member, streams: &RngStreams) -> Vec<State> {
        let mut probes = self.probe_states.clone();
        if self.pilot.paths == 0 || self.pilot.max_states == 0 {
            return probes;
        }
        let pilot = streams.fork("pilot").fork_index(member.index);
        let horizon = self.pilot.horizon;
        let visits = pilot.replicate(self.pilot.paths as u64, |rng| {
            simulate_chain(&member.model, horizon, DEFAULT_STEP_LIMIT, rng)
                .map(|r| {
                    r.states()
                        .iter()
                        .zip(r.jump_times())
                        .filter(|(_, t)| **t <= horizon)
                        .map(|(s, _)| s.clone())
                        .collect::<Vec<_>>()
                })
                .unwrap_or_default()
        });
        let mut visited: Vec<State> = visits.into_iter().flatten().filter(|s| s.is_finite()).collect();
        visited.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        visited.dedup();
        visited.retain(|s| !probes.contains(s));
        let k = self.pilot.max_states.min(visited.len());
        for i in 0..k {
            // evenly spaced order statistics, endpoints included
            let idx = if k == 1 { 0 } else { i * (visited.len() - 1) / (k - 1) };
            probes.push(visited[idx].clone());
        }
        probes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{HoldingTime, TransitionKernel};

    #[test]
    fn bump_function_shape() {
        let f = BumpFunction::new(State::scalar(0.0), 0.5).unwrap();
        assert_eq!(f.eval(&State::scalar(0.0)), 1.0);
        assert_eq!(f.eval(&State::scalar(0.5)), 0.0);
        assert_eq!(f.eval(&State::scalar(-0.7)), 0.0);
        for k in 0..=100 {
            let v = f.eval(&State::scalar(-0.6 + k as f64 * 0.012));
            assert!((0.0..=1.0).contains(&v));
        }
        let g = f.translate(&State::scalar(2.0));
        assert_eq!(g.eval(&State::scalar(2.0)), 1.0);
        assert_eq!(g.eval(&State::scalar(0.0)), 0.0);
        assert!(BumpFunction::new(State::scalar(0.0), 0.0).is_err());
    }

    #[test]
    fn bump_function_is_flat_at_the_boundary() {
        // first and second finite-difference derivatives vanish as |x - c| -> r
        let f = BumpFunction::new(State::scalar(0.0), 1.0).unwrap();
        let ev = |x: f64| f.eval(&State::scalar(x));
        for h in [5e-3, 2.5e-3, 1.25e-3] {
            let x = 1.0 - 2.0 * h;
            let d1 = (ev(x + h) - ev(x - h)) / (2.0 * h);
            let d2 = (ev(x + h) - 2.0 * ev(x) + ev(x - h)) / (h * h);
            assert!(d1.abs() < 1e-6 && d2.abs() < 1e-3, "h={h}: {d1} {d2}");
        }
    }

    #[test]
    fn estimate_moments() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0], 0, 1);
        assert_eq!(e.value, 2.5);
        assert!((e.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(!e.is_lower_bound());
        let p = Estimate::proportion(25, 100, 1);
        assert_eq!(p.value, 0.25);
        assert!((p.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn family_validation_and_probes() {
        let m = SemiMarkovModel::homogeneous(
            TransitionKernel::symmetric_walk(1.0),
            HoldingTime::exponential(5.0).unwrap(),
            State::scalar(0.0),
        )
        .unwrap();
        assert!(FamilySpec::new("empty", vec![], vec![State::scalar(0.0)]).is_err());
        assert!(FamilySpec::new("no probes", vec![(1, m.clone())], vec![]).is_err());
        let fam = FamilySpec::new("walk", vec![(1, m.clone()), (2, m)], vec![State::scalar(0.0)]).unwrap();
        let s = RngStreams::new(3);
        let probes = fam.probes_for(&fam.members()[0], &s);
        assert_eq!(probes[0], State::scalar(0.0));
        assert!(probes.len() > 1 && probes.len() <= 9);
        assert_eq!(probes, fam.probes_for(&fam.members()[0], &s));
        let no_pilot = fam.clone().with_pilot(PilotConfig::disabled());
        assert_eq!(no_pilot.probes_for(&no_pilot.members()[0], &s).len(), 1);
        assert_eq!(fam.tail_range(), 1..2);
    }
}
