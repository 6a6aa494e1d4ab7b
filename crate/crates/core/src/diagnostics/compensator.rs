//! The compensating operator `𝕃` and the martingale it induces.

use rand::RngCore;

use super::Estimate;
use crate::error::{Error, Result};
use crate::kernels::SemiMarkovModel;
use crate::rng::RngStreams;
use crate::state::State;

/// Kernel draws per `𝕃φ(x_i)` evaluation inside [`martingale_residual`].
pub const DEFAULT_INNER_SAMPLES: usize = 16;

fn exact_zero(seed: u64) -> Estimate {
    Estimate {
        value: 0.0,
        stderr: 0.0,
        n_samples: 0,
        censored: 0,
        seed,
    }
}

/// `𝕃φ(x) = q(x) (E φ(Y) - φ(x))`, `Y ~ P(x, ·)`, from `n` kernel draws.
/// Exactly zero when `q(x) = 0`.
pub fn apply_l<F>(model: &SemiMarkovModel, phi: F, x: &State, n: u64, streams: &RngStreams) -> Result<Estimate>
where
    F: Fn(&State) -> f64 + Sync,
{
    model.check_state(x)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let q = model.q(x);
    if q == 0.0 {
        return Ok(exact_zero(streams.seed()));
    }
    let base = phi(x);
    let samples = streams
        .fork("apply_l")
        .replicate(n, |rng| q * (phi(&model.kernel().sample(x, rng)) - base));
    Ok(Estimate::from_samples(&samples, 0, streams.seed()))
}

/// `𝕃φ(x, t) = q(x) (E φ(Y, t + θ) - φ(x, t))` with `Y ~ P(x, ·)` and
/// `θ ~ F_x` drawn jointly. Exactly zero when `q(x) = 0`.
pub fn apply_l_time<F>(
    model: &SemiMarkovModel,
    phi: F,
    x: &State,
    t: f64,
    n: u64,
    streams: &RngStreams,
) -> Result<Estimate>
where
    F: Fn(&State, f64) -> f64 + Sync,
{
    model.check_state(x)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let q = model.q(x);
    if q == 0.0 {
        return Ok(exact_zero(streams.seed()));
    }
    let law = model.holding(x);
    let base = phi(x, t);
    let samples = streams.fork("apply_l_time").replicate(n, |rng| {
        let theta = law.sample(rng);
        let y = model.kernel().sample(x, rng);
        q * (phi(&y, t + theta) - base)
    });
    Ok(Estimate::from_samples(&samples, 0, streams.seed()))
}

fn inner_l<F, R>(model: &SemiMarkovModel, phi: &F, x: &State, n_inner: usize, rng: &mut R) -> f64
where
    F: Fn(&State) -> f64,
    R: RngCore,
{
    let q = model.q(x);
    if q == 0.0 {
        return 0.0;
    }
    let base = phi(x);
    let sum: f64 = (0..n_inner).map(|_| phi(&model.kernel().sample(x, rng)) - base).sum();
    q * sum / n_inner as f64
}

/// `E[Z_k - Z_0]` for `Z_n = φ(x_n) - Σ_{i<n} θ_i 𝕃φ(x_i)`, where each
/// `𝕃φ(x_i)` is re-estimated from `n_inner` fresh kernel draws.
///
/// A chain that reaches an absorbing state stops there; its remaining
/// increments are zero. The result should vanish within its error.
pub fn martingale_residual<F>(
    model: &SemiMarkovModel,
    phi: F,
    k: usize,
    n: u64,
    n_inner: usize,
    streams: &RngStreams,
) -> Result<Estimate>
where
    F: Fn(&State) -> f64 + Sync,
{
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if n == 0 || n_inner == 0 {
        return Err(Error::invalid("n", "sample counts must be at least 1"));
    }
    let runs = streams.fork("martingale_residual").replicate(n, |rng| -> Result<f64> {
        let x0 = model.sample_initial(rng);
        model.check_state(&x0)?;
        let mut x = x0.clone();
        let mut compensator = 0.0;
        for _ in 0..k {
            let law = model.holding(&x);
            if law.is_never() {
                break;
            }
            let theta = law.sample(rng);
            let l = inner_l(model, &phi, &x, n_inner, rng);
            compensator += theta * l;
            x = model.kernel().sample(&x, rng);
        }
        Ok(phi(&x) - phi(&x0) - compensator)
    });
    let samples = runs.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&samples, 0, streams.seed()))
}
