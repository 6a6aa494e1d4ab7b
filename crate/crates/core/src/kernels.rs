//! Holding-time laws, Markov transition kernels and product semi-Markov models.
//!
//! A [`SemiMarkovModel`] pairs a [`TransitionKernel`] `P(x, ·)` with a
//! state-indexed [`HoldingTime`] law `F_x`, so that the next state and the
//! holding time are drawn independently given the current state.
//!
//! Extended reals are plain `f64` with `f64::INFINITY` standing for `+∞`
//! (absorbing states, infinite means and infinite integrated tails).

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp, Weibull};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};
use crate::numeric::{integrate_decreasing_tail, QUADRATURE_TOLERANCE};
use crate::state::State;

pub type SamplerFn = dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync;
pub type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied holding law given as a (sampler, CDF, integrated tail) triple.
///
/// When the integrated tail is omitted it is computed from the CDF by
/// quadrature with absolute tolerance [`QUADRATURE_TOLERANCE`].
#[derive(Clone)]
pub struct CustomLaw {
    name: String,
    sampler: Arc<SamplerFn>,
    cdf: Arc<RealFn>,
    integrated_tail: Option<Arc<RealFn>>,
}

impl CustomLaw {
    pub fn new(
        name: impl Into<String>,
        sampler: impl Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomLaw {
            name: name.into(),
            sampler: Arc::new(sampler),
            cdf: Arc::new(cdf),
            integrated_tail: None,
        }
    }

    pub fn with_integrated_tail(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.integrated_tail = Some(Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_integrated_tail(&self) -> bool {
        self.integrated_tail.is_some()
    }
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("name", &self.name)
            .field("closed_form_tail", &self.integrated_tail.is_some())
            .finish()
    }
}

/// The built-in holding laws.
#[derive(Clone, Debug)]
pub enum Law {
    /// Tail `e^{-rate t}`.
    Exponential {
        rate: f64,
    },
    /// Lomax form, tail `(1 + t / scale)^{-shape}`, so that `F(0) = 0`.
    Pareto {
        shape: f64,
        scale: f64,
    },
    /// Point mass at `value`.
    Deterministic {
        value: f64,
    },
    /// `first` with probability `p_first`, otherwise `second`.
    TwoPoint {
        first: f64,
        second: f64,
        p_first: f64,
    },
    /// Tail `exp(-(t / scale)^shape)`.
    Weibull {
        shape: f64,
        scale: f64,
    },
    /// Absorbing: the holding time is `+∞`.
    Never,
    Custom(CustomLaw),
}

/// A holding-time distribution `F_x` with validated parameters.
#[derive(Clone, Debug)]
pub struct HoldingTime {
    law: Law,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be a finite positive number, got {v}"),
        ))
    }
}

/// `e^z Γ(a, z)`, stable for large `z`.
/// Regularised upper incomplete gamma `Q(a, z)`, with `Q(a, 0) = 1`.
fn upper_gamma_q(a: f64, z: f64) -> f64 {
    if z <= 0.0 {
        1.0
    } else {
        gamma_ur(a, z)
    }
}

fn scaled_upper_gamma(a: f64, z: f64) -> f64 {
    if z < 600.0 {
        return z.exp() * upper_gamma_q(a, z) * gamma(a);
    }
    // asymptotic series z^{a-1} Σ_k (a-1)(a-2)...(a-k) / z^k
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        term *= (a - k as f64) / z;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    z.powf(a - 1.0) * sum
}

impl HoldingTime {
    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(HoldingTime {
            law: Law::Exponential { rate },
        })
    }

    /// Lomax law with tail `(1 + t / scale)^{-shape}`; `shape > 1` keeps the mean finite.
    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        positive("scale", scale)?;
        if !(shape.is_finite() && shape > 1.0) {
            return Err(Error::invalid("shape", format!("must exceed 1, got {shape}")));
        }
        Ok(HoldingTime {
            law: Law::Pareto { shape, scale },
        })
    }

    pub fn deterministic(value: f64) -> Result<Self> {
        positive("value", value)?;
        Ok(HoldingTime {
            law: Law::Deterministic { value },
        })
    }

    pub fn two_point(first: f64, second: f64, p_first: f64) -> Result<Self> {
        positive("first", first)?;
        positive("second", second)?;
        if !(0.0..=1.0).contains(&p_first) {
            return Err(Error::invalid("p_first", format!("must lie in [0, 1], got {p_first}")));
        }
        Ok(HoldingTime {
            law: Law::TwoPoint { first, second, p_first },
        })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("scale", scale)?;
        Ok(HoldingTime {
            law: Law::Weibull { shape, scale },
        })
    }

    pub fn never() -> Self {
        HoldingTime { law: Law::Never }
    }

    pub fn custom(law: CustomLaw) -> Self {
        HoldingTime { law: Law::Custom(law) }
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn is_never(&self) -> bool {
        matches!(self.law, Law::Never)
    }

    pub fn name(&self) -> String {
        match &self.law {
            Law::Exponential { rate } => format!("exponential(rate={rate})"),
            Law::Pareto { shape, scale } => format!("pareto(shape={shape}, scale={scale})"),
            Law::Deterministic { value } => format!("deterministic({value})"),
            Law::TwoPoint { first, second, p_first } => format!("two_point({first}, {second}, p={p_first})"),
            Law::Weibull { shape, scale } => format!("weibull(shape={shape}, scale={scale})"),
            Law::Never => "never".to_string(),
            Law::Custom(c) => c.name.clone(),
        }
    }

    /// One holding time; `+∞` for [`Law::Never`].
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            Law::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            Law::Pareto { shape, scale } => {
                let u: f64 = 1.0 - rng.random::<f64>();
                scale * (u.powf(-1.0 / shape) - 1.0)
            }
            Law::Deterministic { value } => *value,
            Law::TwoPoint { first, second, p_first } => {
                if rng.random::<f64>() < *p_first {
                    *first
                } else {
                    *second
                }
            }
            Law::Weibull { shape, scale } => Weibull::new(*scale, *shape).expect("validated weibull").sample(rng),
            Law::Never => f64::INFINITY,
            Law::Custom(c) => {
                let mut dyn_rng = DynRng(rng);
                (c.sampler)(&mut dyn_rng).max(0.0)
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.tail(t)
    }

    /// `F̄(t) = P(θ > t)`.
    pub fn tail(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match &self.law {
            Law::Exponential { rate } => (-rate * t).exp(),
            Law::Pareto { shape, scale } => (1.0 + t / scale).powf(-shape),
            Law::Deterministic { value } => indicator(t < *value),
            Law::TwoPoint { first, second, p_first } => {
                p_first * indicator(t < *first) + (1.0 - p_first) * indicator(t < *second)
            }
            Law::Weibull { shape, scale } => (-(t / scale).powf(*shape)).exp(),
            Law::Never => 1.0,
            Law::Custom(c) => (1.0 - (c.cdf)(t)).clamp(0.0, 1.0),
        }
    }

    /// `ln F̄(t)`, computed without underflow for the exponential-type laws.
    pub fn log_tail(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.law {
            Law::Exponential { rate } => -rate * t,
            Law::Pareto { shape, scale } => -shape * (t / scale).ln_1p(),
            Law::Weibull { shape, scale } => -(t / scale).powf(*shape),
            _ => self.tail(t).ln(),
        }
    }

    /// `m = ∫_0^∞ t F(dt)`.
    pub fn mean(&self) -> f64 {
        match &self.law {
            Law::Exponential { rate } => 1.0 / rate,
            Law::Pareto { shape, scale } => scale / (shape - 1.0),
            Law::Deterministic { value } => *value,
            Law::TwoPoint { first, second, p_first } => p_first * first + (1.0 - p_first) * second,
            Law::Weibull { shape, scale } => scale * gamma(1.0 + 1.0 / shape),
            Law::Never => f64::INFINITY,
            Law::Custom(_) => self.integrated_tail(0.0),
        }
    }

    /// `∫_s^∞ F̄(r) dr`.
    pub fn integrated_tail(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match &self.law {
            Law::Exponential { rate } => (-rate * s).exp() / rate,
            Law::Pareto { shape, scale } => scale / (shape - 1.0) * (1.0 + s / scale).powf(1.0 - shape),
            Law::Deterministic { value } => (value - s).max(0.0),
            Law::TwoPoint { first, second, p_first } => {
                p_first * (first - s).max(0.0) + (1.0 - p_first) * (second - s).max(0.0)
            }
            Law::Weibull { shape, scale } => {
                let a = 1.0 / shape;
                let z = (s / scale).powf(*shape);
                scale / shape * gamma(a) * upper_gamma_q(a, z)
            }
            Law::Never => f64::INFINITY,
            Law::Custom(c) => match &c.integrated_tail {
                Some(f) => f(s),
                None => integrate_decreasing_tail(|v| self.tail(s + v), QUADRATURE_TOLERANCE),
            },
        }
    }

    /// Mean residual life `∫_s^∞ F̄(r) dr / F̄(s)`; `None` when `F̄(s) = 0`.
    pub fn mean_residual(&self, s: f64) -> Option<f64> {
        let s = s.max(0.0);
        if self.log_tail(s) == f64::NEG_INFINITY {
            return None;
        }
        Some(match &self.law {
            Law::Exponential { rate } => 1.0 / rate,
            Law::Pareto { shape, scale } => (scale + s) / (shape - 1.0),
            Law::Weibull { shape, scale } => {
                let a = 1.0 / shape;
                let z = (s / scale).powf(*shape);
                scale / shape * scaled_upper_gamma(a, z)
            }
            Law::Never => f64::INFINITY,
            _ => self.integrated_tail(s) / self.tail(s),
        })
    }

    /// Law of `factor · θ` for `θ` drawn from this law.
    pub fn time_scaled(&self, factor: f64) -> HoldingTime {
        debug_assert!(factor > 0.0 && factor.is_finite());
        let law = match &self.law {
            Law::Exponential { rate } => Law::Exponential { rate: rate / factor },
            Law::Pareto { shape, scale } => Law::Pareto {
                shape: *shape,
                scale: scale * factor,
            },
            Law::Deterministic { value } => Law::Deterministic { value: value * factor },
            Law::TwoPoint { first, second, p_first } => Law::TwoPoint {
                first: first * factor,
                second: second * factor,
                p_first: *p_first,
            },
            Law::Weibull { shape, scale } => Law::Weibull {
                shape: *shape,
                scale: scale * factor,
            },
            Law::Never => Law::Never,
            Law::Custom(c) => {
                let sampler = c.sampler.clone();
                let cdf = c.cdf.clone();
                let it = c.integrated_tail.clone();
                Law::Custom(CustomLaw {
                    name: format!("{}*{factor}", c.name),
                    sampler: Arc::new(move |rng: &mut dyn RngCore| factor * sampler(rng)),
                    cdf: Arc::new(move |t| cdf(t / factor)),
                    integrated_tail: it.map(|f| Arc::new(move |s: f64| factor * f(s / factor)) as Arc<RealFn>),
                })
            }
        };
        HoldingTime { law }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Adapts a generic `Rng + ?Sized` to `&mut dyn RngCore`.
struct DynRng<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

pub type KernelFn = dyn Fn(&State, &mut dyn RngCore) -> State + Send + Sync;

/// Markov kernel `P(x, ·)` given as a sampler.
#[derive(Clone)]
pub struct TransitionKernel {
    dimension: usize,
    description: String,
    sampler: Arc<KernelFn>,
}

impl fmt::Debug for TransitionKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransitionKernel")
            .field("dimension", &self.dimension)
            .field("description", &self.description)
            .finish()
    }
}

impl TransitionKernel {
    pub fn new(
        dimension: usize,
        description: impl Into<String>,
        sampler: impl Fn(&State, &mut dyn RngCore) -> State + Send + Sync + 'static,
    ) -> Self {
        TransitionKernel {
            dimension,
            description: description.into(),
            sampler: Arc::new(sampler),
        }
    }

    /// `x ↦ x + step`.
    pub fn shift(step: f64) -> Self {
        TransitionKernel::new(1, format!("shift({step})"), move |x, _| State::scalar(x[0] + step))
    }

    /// `x ↦ x ± step` with probability 1/2 each.
    pub fn symmetric_walk(step: f64) -> Self {
        TransitionKernel::new(1, format!("symmetric_walk({step})"), move |x, rng| {
            let s = if rng.next_u64() >> 63 == 0 { step } else { -step };
            State::scalar(x[0] + s)
        })
    }

    /// `x ↦ x + sigma · N(0, 1)`.
    pub fn gaussian_walk(sigma: f64) -> Self {
        TransitionKernel::new(1, format!("gaussian_walk({sigma})"), move |x, rng| {
            let z: f64 = rand_distr::StandardNormal.sample(rng);
            State::scalar(x[0] + sigma * z)
        })
    }

    /// Every state jumps to `target`.
    pub fn constant(target: State) -> Self {
        let d = target.dimension();
        TransitionKernel::new(d, format!("constant({target})"), move |_, _| target.clone())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn sample<R: RngCore>(&self, x: &State, rng: &mut R) -> State {
        (self.sampler)(x, rng)
    }

    pub(crate) fn sample_dyn(&self, x: &State, rng: &mut dyn RngCore) -> State {
        (self.sampler)(x, rng)
    }
}

pub type HoldingFn = dyn Fn(&State) -> HoldingTime + Send + Sync;
pub type InitialFn = dyn Fn(&mut dyn RngCore) -> State + Send + Sync;

/// Product semi-Markov kernel `Q(x, B, t) = P(x, B) F_x(t)` with an initial law.
#[derive(Clone)]
pub struct SemiMarkovModel {
    dimension: usize,
    kernel: TransitionKernel,
    holding: Arc<HoldingFn>,
    initial: Arc<InitialFn>,
    label: String,
}

impl fmt::Debug for SemiMarkovModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemiMarkovModel")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("kernel", &self.kernel)
            .finish()
    }
}

impl SemiMarkovModel {
    /// `holding` must be a deterministic function of the state.
    pub fn new(
        kernel: TransitionKernel,
        holding: impl Fn(&State) -> HoldingTime + Send + Sync + 'static,
        initial: impl Fn(&mut dyn RngCore) -> State + Send + Sync + 'static,
    ) -> Self {
        let dimension = kernel.dimension();
        SemiMarkovModel {
            label: kernel.description().to_string(),
            dimension,
            kernel,
            holding: Arc::new(holding),
            initial: Arc::new(initial),
        }
    }

    /// Same holding law at every state, deterministic start at `initial`.
    pub fn homogeneous(kernel: TransitionKernel, law: HoldingTime, initial: State) -> Result<Self> {
        if initial.dimension() != kernel.dimension() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dimension(),
                got: initial.dimension(),
            });
        }
        let label = format!("{} / {}", kernel.description(), law.name());
        Ok(SemiMarkovModel::new(kernel, move |_| law.clone(), move |_| initial.clone()).with_label(label))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Replaces the initial law by a point mass at `x`.
    pub fn started_at(&self, x: State) -> Self {
        let mut m = self.clone();
        m.initial = Arc::new(move |_| x.clone());
        m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn holding(&self, x: &State) -> HoldingTime {
        (self.holding)(x)
    }

    pub fn sample_initial<R: RngCore>(&self, rng: &mut R) -> State {
        (self.initial)(rng)
    }

    pub(crate) fn holding_fn(&self) -> Arc<HoldingFn> {
        self.holding.clone()
    }

    pub(crate) fn initial_fn(&self) -> Arc<InitialFn> {
        self.initial.clone()
    }

    /// Jump intensity `q(x) = 1 / m(x)`, zero when `m(x) = +∞`.
    pub fn q(&self, x: &State) -> f64 {
        let m = self.holding(x).mean();
        if m.is_infinite() {
            0.0
        } else {
            1.0 / m
        }
    }

    pub(crate) fn check_state(&self, x: &State) -> Result<()> {
        if x.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.dimension(),
            });
        }
        Ok(())
    }
}

/// `m(x)`: mean of the holding law at `x`.
pub fn mean_holding(model: &SemiMarkovModel, x: &State) -> Result<f64> {
    model.check_state(x)?;
    Ok(model.holding(x).mean())
}

/// `F̄_x(t)`.
pub fn tail(model: &SemiMarkovModel, x: &State, t: f64) -> Result<f64> {
    model.check_state(x)?;
    if t < 0.0 {
        return Err(Error::invalid("t", "must be non-negative"));
    }
    Ok(model.holding(x).tail(t))
}

/// `∫_s^∞ F̄_x(r) dr`.
pub fn integrated_tail(model: &SemiMarkovModel, x: &State, s: f64) -> Result<f64> {
    model.check_state(x)?;
    if s < 0.0 {
        return Err(Error::invalid("s", "must be non-negative"));
    }
    Ok(model.holding(x).integrated_tail(s))
}
