//! TOML experiment configs.
//!
//! Unknown keys are rejected everywhere. Every semantic check runs in
//! [`ExperimentConfig::validate`], before any simulation, and reports the
//! offending key path (for example `model.holding.rate`).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::diagnostics::{BumpFunction, FamilySpec, PilotConfig, DEFAULT_BINS, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::kernels::{HoldingTime, SemiMarkovModel, TransitionKernel};
use crate::scaling::{ScaledFamily, ScalingScheme, Sequence};
use crate::state::State;
use crate::{counterexample, DEFAULT_STEP_LIMIT};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SAMPLES: u64 = 10_000;

fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_step_limit() -> usize {
    DEFAULT_STEP_LIMIT
}
fn default_pilot_paths() -> usize {
    PilotConfig::default().paths
}
fn default_pilot_horizon() -> f64 {
    PilotConfig::default().horizon
}
fn default_pilot_max_states() -> usize {
    PilotConfig::default().max_states
}
fn default_one() -> f64 {
    1.0
}
fn default_half() -> f64 {
    0.5
}
fn default_horizon() -> f64 {
    counterexample::DEFAULT_HORIZON
}
fn default_radius() -> f64 {
    counterexample::DEFAULT_RADIUS
}
fn default_centers() -> Vec<f64> {
    counterexample::DEFAULT_CENTERS.to_vec()
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_steps() -> usize {
    1
}
fn default_k_list() -> Vec<usize> {
    vec![1, 2, 3, 4, 5]
}
fn default_inner() -> usize {
    crate::diagnostics::DEFAULT_INNER_SAMPLES
}
fn default_paths() -> u64 {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_step_limit")]
    pub step_limit: usize,
    #[serde(default)]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    pub op: OpConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    SemiMarkov {
        initial: Vec<f64>,
        kernel: KernelConfig,
        holding: HoldingConfig,
    },
    Counterexample {
        n: u64,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Shift { step: f64 },
    SymmetricWalk { step: f64 },
    GaussianWalk { sigma: f64 },
    Constant { target: Vec<f64> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum HoldingConfig {
    Exponential {
        rate: f64,
    },
    /// Lomax form `F̄(u) = (1 + u / scale)^(-shape)`.
    Pareto {
        shape: f64,
        #[serde(default = "default_one")]
        scale: f64,
    },
    Deterministic {
        value: f64,
    },
    TwoPoint {
        first: f64,
        second: f64,
        #[serde(default = "default_half")]
        p_first: f64,
    },
    Weibull {
        shape: f64,
        #[serde(default = "default_one")]
        scale: f64,
    },
    Never,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Members `x(a_n t) / b_n` of the `[model]` base.
    Scaled,
    /// The two-atom family, one member per index.
    Counterexample,
    /// The `[model]` itself for every index.
    Replicated,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    pub index: Vec<u64>,
    #[serde(default)]
    pub scheme: Option<SchemeConfig>,
    #[serde(default)]
    pub probe_states: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_pilot_paths")]
    pub pilot_paths: usize,
    #[serde(default = "default_pilot_horizon")]
    pub pilot_horizon: f64,
    #[serde(default = "default_pilot_max_states")]
    pub pilot_max_states: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub a: SequenceConfig,
    pub b: SequenceConfig,
}

/// `"n"`, `"n^p"` or an explicit list `[a_1, a_2, ...]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SequenceConfig {
    Formula(String),
    List(Vec<f64>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiConfig {
    Identity,
    Square,
    Constant { value: f64 },
    Bump { center: Vec<f64>, radius: f64 },
}

pub type PhiFn = Box<dyn Fn(&State) -> f64 + Send + Sync>;

impl PhiConfig {
    pub fn evaluator(&self) -> Result<PhiFn> {
        Ok(match self {
            PhiConfig::Identity => Box::new(|x: &State| x[0]),
            PhiConfig::Square => Box::new(|x: &State| x.iter().map(|v| v * v).sum()),
            PhiConfig::Constant { value } => {
                let v = *value;
                Box::new(move |_: &State| v)
            }
            PhiConfig::Bump { center, radius } => {
                let f = BumpFunction::new(State::from(center.clone()), *radius)?;
                Box::new(move |x: &State| f.eval(x))
            }
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum OpConfig {
    EstimateD {
        /// Defaults to the model's initial state.
        #[serde(default)]
        states: Option<Vec<Vec<f64>>>,
        t_grid: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: u64,
    },
    ScanConditionIii {
        t_grid: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    CheckConditionIv {
        a: f64,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    CheckCompactContainment {
        horizon: f64,
        a_grid: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    CheckConditionD {
        center: Vec<f64>,
        radius: f64,
        a_f: f64,
        translations: Vec<Vec<f64>>,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default = "default_bins")]
        bins: usize,
    },
    SearchAF {
        center: Vec<f64>,
        radius: f64,
        translations: Vec<Vec<f64>>,
        a_grid: Vec<f64>,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default = "default_bins")]
        bins: usize,
    },
    ApplyL {
        phi: PhiConfig,
        #[serde(default)]
        states: Option<Vec<Vec<f64>>>,
        #[serde(default = "default_samples")]
        samples: u64,
    },
    MartingaleResidual {
        phi: PhiConfig,
        #[serde(default = "default_k_list")]
        steps: Vec<usize>,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default = "default_inner")]
        inner_samples: usize,
    },
    EstimateModulusTail {
        delta_grid: Vec<f64>,
        rho: f64,
        horizon: f64,
        #[serde(default = "default_samples")]
        samples: u64,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    ScanTheorem3 {
        t_grid: Vec<f64>,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    VerifyDBound {
        t_grid: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: u64,
    },
    DemonstrateNontightness {
        #[serde(default)]
        n_list: Option<Vec<u64>>,
        /// Inclusive `[first, last]`.
        #[serde(default)]
        n_range: Option<[u64; 2]>,
        delta: f64,
        rho: f64,
        #[serde(default = "default_horizon")]
        horizon: f64,
        #[serde(default = "default_samples")]
        samples: u64,
    },
    DemonstrateConditionD {
        n_list: Vec<u64>,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_centers")]
        centers: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: u64,
    },
    SimulatePath {
        horizon: f64,
        #[serde(default = "default_paths")]
        paths: u64,
    },
}

impl OpConfig {
    pub fn name(&self) -> &'static str {
        match self {
            OpConfig::EstimateD { .. } => "estimate_d",
            OpConfig::ScanConditionIii { .. } => "scan_condition_iii",
            OpConfig::CheckConditionIv { .. } => "check_condition_iv",
            OpConfig::CheckCompactContainment { .. } => "check_compact_containment",
            OpConfig::CheckConditionD { .. } => "check_condition_d",
            OpConfig::SearchAF { .. } => "search_a_f",
            OpConfig::ApplyL { .. } => "apply_l",
            OpConfig::MartingaleResidual { .. } => "martingale_residual",
            OpConfig::EstimateModulusTail { .. } => "estimate_modulus_tail",
            OpConfig::ScanTheorem3 { .. } => "scan_theorem3",
            OpConfig::VerifyDBound { .. } => "verify_d_bound",
            OpConfig::DemonstrateNontightness { .. } => "demonstrate_nontightness",
            OpConfig::DemonstrateConditionD { .. } => "demonstrate_condition_d",
            OpConfig::SimulatePath { .. } => "simulate_path",
        }
    }
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Re-roots a library parameter error under the config key `prefix`.
fn at(prefix: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidParameter { name, reason } => config_err(format!("{prefix}.{name}"), reason),
        Error::DimensionMismatch { expected, got } => {
            config_err(prefix, format!("dimension mismatch: expected {expected}, got {got}"))
        }
        other => other,
    }
}

/// Parses TOML text. Syntax errors and schema violations carry the key path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::new(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().to_string();
        config_err(if path == "." { String::new() } else { path }, message)
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<(ExperimentConfig, Vec<u8>)> {
    let bytes = std::fs::read(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| config_err("", "config is not UTF-8"))?;
    Ok((parse_config(text)?, bytes))
}

fn check_positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(path, format!("must be finite and positive, got {v}")))
    }
}

fn check_samples(path: &str, n: u64, min: u64) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(config_err(path, format!("must be at least {min}, got {n}")))
    }
}

fn check_threshold(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(config_err(path, format!("must lie in (0, 1], got {v}")))
    }
}

fn check_grid(path: &str, grid: &[f64], increasing: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(config_err(path, "must be non-empty"));
    }
    for (i, v) in grid.iter().enumerate() {
        check_positive(&format!("{path}[{i}]"), *v)?;
    }
    let ordered = grid
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
    if !ordered {
        let dir = if increasing { "increasing" } else { "decreasing" };
        return Err(config_err(path, format!("must be strictly {dir}")));
    }
    Ok(())
}

fn build_state(path: &str, v: &[f64], dimension: usize) -> Result<State> {
    if v.len() != dimension {
        return Err(config_err(
            path,
            format!("expected {dimension} components, got {}", v.len()),
        ));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(path, "components must be finite"));
    }
    Ok(State::from(v.to_vec()))
}

pub fn build_holding(h: &HoldingConfig) -> Result<HoldingTime> {
    let law = match h {
        HoldingConfig::Exponential { rate } => HoldingTime::exponential(*rate),
        HoldingConfig::Pareto { shape, scale } => HoldingTime::pareto(*shape, *scale),
        HoldingConfig::Deterministic { value } => HoldingTime::deterministic(*value),
        HoldingConfig::TwoPoint { first, second, p_first } => HoldingTime::two_point(*first, *second, *p_first),
        HoldingConfig::Weibull { shape, scale } => HoldingTime::weibull(*shape, *scale),
        HoldingConfig::Never => Ok(HoldingTime::never()),
    };
    law.map_err(at("model.holding"))
}

fn build_kernel(k: &KernelConfig) -> Result<TransitionKernel> {
    let finite = |path: &str, v: f64| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(config_err(path, "must be finite"))
        }
    };
    Ok(match k {
        KernelConfig::Shift { step } => {
            finite("model.kernel.step", *step)?;
            TransitionKernel::shift(*step)
        }
        KernelConfig::SymmetricWalk { step } => {
            finite("model.kernel.step", *step)?;
            TransitionKernel::symmetric_walk(*step)
        }
        KernelConfig::GaussianWalk { sigma } => {
            if !(*sigma >= 0.0) || !sigma.is_finite() {
                return Err(config_err("model.kernel.sigma", "must be finite and non-negative"));
            }
            TransitionKernel::gaussian_walk(*sigma)
        }
        KernelConfig::Constant { target } => {
            if target.is_empty() {
                return Err(config_err("model.kernel.target", "must have at least one component"));
            }
            TransitionKernel::constant(build_state("model.kernel.target", target, target.len())?)
        }
    })
}

pub fn build_model(m: &ModelConfig) -> Result<SemiMarkovModel> {
    match m {
        ModelConfig::SemiMarkov {
            initial,
            kernel,
            holding,
        } => {
            let kernel = build_kernel(kernel)?;
            let law = build_holding(holding)?;
            let x0 = build_state("model.initial", initial, kernel.dimension())?;
            SemiMarkovModel::homogeneous(kernel, law, x0).map_err(at("model"))
        }
        ModelConfig::Counterexample { n } => Ok(counterexample::build_counterexample(*n)
            .map_err(at("model"))?
            .model()
            .clone()),
    }
}

fn parse_sequence(path: &str, s: &SequenceConfig) -> Result<Sequence> {
    match s {
        SequenceConfig::List(v) => {
            if v.is_empty() {
                return Err(config_err(path, "explicit lists must be non-empty"));
            }
            Ok(Sequence::Explicit(v.clone()))
        }
        SequenceConfig::Formula(f) => {
            let f = f.trim();
            if f == "n" {
                return Ok(Sequence::Power(1.0));
            }
            let p = f
                .strip_prefix("n^")
                .and_then(|p| p.trim().parse::<f64>().ok())
                .filter(|p| p.is_finite())
                .ok_or_else(|| config_err(path, format!("expected \"n\", \"n^p\" or a list, got \"{f}\"")))?;
            Ok(Sequence::Power(p))
        }
    }
}

pub fn build_scheme(s: &SchemeConfig) -> Result<ScalingScheme> {
    let a = parse_sequence("family.scheme.a", &s.a)?;
    let b = parse_sequence("family.scheme.b", &s.b)?;
    let name = s.name.clone().unwrap_or_else(|| format!("a_n = {a}, b_n = {b}"));
    Ok(ScalingScheme::new(name, a, b))
}

impl ExperimentConfig {
    pub fn model(&self) -> Result<SemiMarkovModel> {
        match &self.model {
            Some(m) => build_model(m),
            None => Err(config_err(
                "model",
                format!("op {} needs a [model] table", self.op.name()),
            )),
        }
    }

    fn family_config(&self) -> Result<&FamilyConfig> {
        self.family
            .as_ref()
            .ok_or_else(|| config_err("family", format!("op {} needs a [family] table", self.op.name())))
    }

    pub fn dimension(&self) -> Result<usize> {
        match &self.model {
            Some(m) => Ok(build_model(m)?.dimension()),
            None => Ok(1),
        }
    }

    pub fn probe_states(&self) -> Result<Vec<State>> {
        let fam = self.family_config()?;
        let d = self.dimension()?;
        match &fam.probe_states {
            Some(ps) if !ps.is_empty() => ps
                .iter()
                .enumerate()
                .map(|(i, p)| build_state(&format!("family.probe_states[{i}]"), p, d))
                .collect(),
            Some(_) => Err(config_err("family.probe_states", "must be non-empty")),
            None => Ok(vec![State::zeros(d)]),
        }
    }

    pub fn scheme(&self) -> Result<ScalingScheme> {
        let fam = self.family_config()?;
        match (&fam.kind, &fam.scheme) {
            (FamilyKind::Scaled, Some(s)) => {
                let scheme = build_scheme(s)?;
                scheme.validate(&fam.index).map_err(at("family.scheme"))?;
                Ok(scheme)
            }
            (FamilyKind::Scaled, None) => Err(config_err("family.scheme", "scaled families need a scheme")),
            _ => Err(config_err(
                "family.kind",
                format!("op {} needs a scaled family", self.op.name()),
            )),
        }
    }

    pub fn family(&self) -> Result<FamilySpec> {
        let fam = self.family_config()?;
        if fam.index.is_empty() {
            return Err(config_err("family.index", "must be non-empty"));
        }
        if fam.index.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config_err("family.index", "must be strictly increasing"));
        }
        let probes = self.probe_states()?;
        let spec = match fam.kind {
            FamilyKind::Scaled => {
                let base = self.model()?;
                ScaledFamily::new(base, self.scheme()?, fam.index.clone())
                    .map_err(at("family"))?
                    .to_family_spec(probes)
            }
            FamilyKind::Counterexample => {
                let members = fam
                    .index
                    .iter()
                    .map(|n| {
                        Ok((
                            *n,
                            counterexample::build_counterexample(*n)
                                .map_err(at("family.index"))?
                                .model()
                                .clone(),
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FamilySpec::new("two-atom family", members, probes)
            }
            FamilyKind::Replicated => {
                let m = self.model()?;
                let members = fam.index.iter().map(|n| (*n, m.clone())).collect();
                FamilySpec::new(format!("{} (replicated)", m.label()), members, probes)
            }
        }
        .map_err(at("family"))?;
        if !(fam.pilot_horizon > 0.0) || !fam.pilot_horizon.is_finite() {
            return Err(config_err("family.pilot_horizon", "must be finite and positive"));
        }
        Ok(spec.with_pilot(PilotConfig {
            paths: fam.pilot_paths,
            horizon: fam.pilot_horizon,
            max_states: fam.pilot_max_states,
        }))
    }

    pub fn n_list(&self) -> Result<Vec<u64>> {
        match &self.op {
            OpConfig::DemonstrateNontightness { n_list, n_range, .. } => {
                let list = match (n_list, n_range) {
                    (Some(l), None) => l.clone(),
                    (None, Some([a, b])) => {
                        if a > b {
                            return Err(config_err("op.n_range", "first must not exceed last"));
                        }
                        (*a..=*b).collect()
                    }
                    _ => return Err(config_err("op.n_list", "give exactly one of n_list and n_range")),
                };
                if list.is_empty() || list.contains(&0) {
                    return Err(config_err("op.n_list", "must be non-empty with entries >= 1"));
                }
                Ok(list)
            }
            OpConfig::DemonstrateConditionD { n_list, .. } => {
                if n_list.is_empty() || n_list.contains(&0) {
                    return Err(config_err("op.n_list", "must be non-empty with entries >= 1"));
                }
                Ok(n_list.clone())
            }
            _ => Ok(Vec::new()),
        }
    }

    /// States listed under `op.states`, defaulting to the model's initial state.
    pub fn op_states(&self, rng_free_initial: &SemiMarkovModel) -> Result<Vec<State>> {
        let states = match &self.op {
            OpConfig::EstimateD { states, .. } | OpConfig::ApplyL { states, .. } => states,
            _ => &None,
        };
        let d = rng_free_initial.dimension();
        match states {
            Some(v) if !v.is_empty() => v
                .iter()
                .enumerate()
                .map(|(i, s)| build_state(&format!("op.states[{i}]"), s, d))
                .collect(),
            Some(_) => Err(config_err("op.states", "must be non-empty")),
            None => {
                let mut rng = crate::rng::RngStreams::new(self.seed).fork("initial").replica(0);
                Ok(vec![rng_free_initial.sample_initial(&mut rng)])
            }
        }
    }

    /// Schema and range checks; builds (but does not simulate) every model.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.step_limit == 0 {
            return Err(config_err("step_limit", "must be at least 1"));
        }
        if let Some(m) = &self.model {
            build_model(m)?;
        }
        match &self.op {
            OpConfig::EstimateD { t_grid, samples, .. } => {
                let m = self.model()?;
                for (i, t) in t_grid.iter().enumerate() {
                    if !(*t >= 0.0) || !t.is_finite() {
                        return Err(config_err(format!("op.t_grid[{i}]"), "must be finite and non-negative"));
                    }
                }
                if t_grid.is_empty() {
                    return Err(config_err("op.t_grid", "must be non-empty"));
                }
                check_samples("op.samples", *samples, crate::diagnostics::MIN_D_SAMPLES)?;
                self.op_states(&m)?;
            }
            OpConfig::ScanConditionIii {
                t_grid,
                samples,
                threshold,
            } => {
                check_grid("op.t_grid", t_grid, false)?;
                check_samples("op.samples", *samples, crate::diagnostics::MIN_D_SAMPLES)?;
                check_threshold("op.threshold", *threshold)?;
                self.family()?;
            }
            OpConfig::CheckConditionIv { a, samples, threshold } => {
                check_positive("op.a", *a)?;
                check_samples("op.samples", *samples, 1)?;
                check_threshold("op.threshold", *threshold)?;
                self.family()?;
            }
            OpConfig::CheckCompactContainment {
                horizon,
                a_grid,
                samples,
                threshold,
            } => {
                check_positive("op.horizon", *horizon)?;
                check_grid("op.a_grid", a_grid, true)?;
                check_samples("op.samples", *samples, 1)?;
                check_threshold("op.threshold", *threshold)?;
                self.family()?;
            }
            OpConfig::CheckConditionD {
                center,
                radius,
                a_f,
                translations,
                steps,
                samples,
                bins,
            } => {
                let m = self.model()?;
                build_state("op.center", center, m.dimension())?;
                check_positive("op.radius", *radius)?;
                if !(*a_f >= 0.0) || !a_f.is_finite() {
                    return Err(config_err("op.a_f", "must be finite and non-negative"));
                }
                self.check_translations(translations, m.dimension())?;
                self.check_steps_bins(*steps, *samples, *bins)?;
            }
            OpConfig::SearchAF {
                center,
                radius,
                translations,
                a_grid,
                steps,
                samples,
                bins,
            } => {
                let m = self.model()?;
                build_state("op.center", center, m.dimension())?;
                check_positive("op.radius", *radius)?;
                if a_grid.is_empty() || a_grid[0] < 0.0 || a_grid.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(config_err(
                        "op.a_grid",
                        "must be non-empty, non-negative and strictly increasing",
                    ));
                }
                self.check_translations(translations, m.dimension())?;
                self.check_steps_bins(*steps, *samples, *bins)?;
            }
            OpConfig::ApplyL { phi, samples, .. } => {
                let m = self.model()?;
                phi.evaluator().map_err(at("op.phi")).map(drop)?;
                check_samples("op.samples", *samples, 1)?;
                self.op_states(&m)?;
            }
            OpConfig::MartingaleResidual {
                phi,
                steps,
                samples,
                inner_samples,
            } => {
                self.model()?;
                phi.evaluator().map_err(at("op.phi")).map(drop)?;
                if steps.is_empty() || steps.contains(&0) {
                    return Err(config_err("op.steps", "must be non-empty with entries >= 1"));
                }
                check_samples("op.samples", *samples, 2)?;
                if *inner_samples == 0 {
                    return Err(config_err("op.inner_samples", "must be at least 1"));
                }
            }
            OpConfig::EstimateModulusTail {
                delta_grid,
                rho,
                horizon,
                samples,
                threshold,
            } => {
                check_positive("op.horizon", *horizon)?;
                check_positive("op.rho", *rho)?;
                if delta_grid.is_empty() {
                    return Err(config_err("op.delta_grid", "must be non-empty"));
                }
                for (i, d) in delta_grid.iter().enumerate() {
                    if !(*d > 0.0 && d < horizon) {
                        return Err(config_err(format!("op.delta_grid[{i}]"), "must lie in (0, horizon)"));
                    }
                }
                check_samples("op.samples", *samples, 1)?;
                check_threshold("op.threshold", *threshold)?;
                self.family()?;
            }
            OpConfig::ScanTheorem3 { t_grid, threshold } => {
                check_grid("op.t_grid", t_grid, false)?;
                check_threshold("op.threshold", *threshold)?;
                self.model()?;
                self.scheme()?;
                self.probe_states()?;
            }
            OpConfig::VerifyDBound { t_grid, samples } => {
                if t_grid.is_empty() {
                    return Err(config_err("op.t_grid", "must be non-empty"));
                }
                for (i, t) in t_grid.iter().enumerate() {
                    check_positive(&format!("op.t_grid[{i}]"), *t)?;
                }
                check_samples("op.samples", *samples, crate::scaling::MIN_BOUND_SAMPLES)?;
                self.model()?;
                self.scheme()?;
                self.probe_states()?;
            }
            OpConfig::DemonstrateNontightness {
                delta,
                rho,
                horizon,
                samples,
                ..
            } => {
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(config_err("op.delta", "must lie in (0, 1)"));
                }
                check_positive("op.rho", *rho)?;
                if !(*horizon >= 1.0) || !horizon.is_finite() {
                    return Err(config_err("op.horizon", "must be finite and at least 1"));
                }
                check_samples("op.samples", *samples, 1)?;
                self.n_list()?;
            }
            OpConfig::DemonstrateConditionD {
                radius,
                centers,
                samples,
                ..
            } => {
                check_positive("op.radius", *radius)?;
                if centers.is_empty() || centers.iter().any(|c| !c.is_finite()) {
                    return Err(config_err("op.centers", "must be non-empty and finite"));
                }
                check_samples("op.samples", *samples, 1)?;
                self.n_list()?;
            }
            OpConfig::SimulatePath { horizon, paths } => {
                self.model()?;
                check_positive("op.horizon", *horizon)?;
                check_samples("op.paths", *paths, 1)?;
            }
        }
        Ok(())
    }

    fn check_translations(&self, translations: &[Vec<f64>], d: usize) -> Result<()> {
        if translations.is_empty() {
            return Err(config_err("op.translations", "must be non-empty"));
        }
        for (i, q) in translations.iter().enumerate() {
            build_state(&format!("op.translations[{i}]"), q, d)?;
        }
        Ok(())
    }

    fn check_steps_bins(&self, steps: usize, samples: u64, bins: usize) -> Result<()> {
        if steps == 0 {
            return Err(config_err("op.steps", "must be at least 1"));
        }
        check_samples("op.samples", samples, 1)?;
        if bins == 0 {
            return Err(config_err("op.bins", "must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn states(path: &str, v: &[Vec<f64>], d: usize) -> Result<Vec<State>> {
    v.iter()
        .enumerate()
        .map(|(i, s)| build_state(&format!("{path}[{i}]"), s, d))
        .collect()
}
