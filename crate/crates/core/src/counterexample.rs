//! The two-atom family: the discrete submartingale condition holds with
//! `A_f = 4 sup|f|`, yet the laws are not tight.
//!
//! Member `n` starts at 0, jumps to 1 at time `1/n` or `1` with probability
//! 1/2 each, and stays at 1 forever.

use std::io::Write;

use rand::RngCore;

use crate::diagnostics::{check_condition_d, BumpFunction, ConditionDParams};
use crate::error::{Error, Result};
use crate::kernels::{HoldingTime, SemiMarkovModel, TransitionKernel};
use crate::renewal::{simulate_path, JumpPath};
use crate::report::{fmt_f64, Row, Table, Verdict};
use crate::rng::RngStreams;
use crate::skorokhod::w_prime;
use crate::state::State;
use crate::DEFAULT_STEP_LIMIT;

/// Default path horizon; the late jump at time 1 is then interior.
pub const DEFAULT_HORIZON: f64 = 2.0;
/// Bump radius used by [`demonstrate_condition_d`].
pub const DEFAULT_RADIUS: f64 = 0.2;
/// Translate centers used by [`demonstrate_condition_d`].
pub const DEFAULT_CENTERS: [f64; 6] = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

#[derive(Clone, Debug)]
pub struct CounterexampleModel {
    n: u64,
    model: SemiMarkovModel,
}

impl CounterexampleModel {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn model(&self) -> &SemiMarkovModel {
        &self.model
    }

    /// The two possible jump times `(1/n, 1)`.
    pub fn atoms(&self) -> (f64, f64) {
        (1.0 / self.n as f64, 1.0)
    }
}

pub fn build_counterexample(n: u64) -> Result<CounterexampleModel> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let early = HoldingTime::two_point(1.0 / n as f64, 1.0, 0.5)?;
    let model = SemiMarkovModel::new(
        TransitionKernel::constant(State::scalar(1.0)),
        move |x: &State| {
            if x[0] == 0.0 {
                early.clone()
            } else {
                HoldingTime::never()
            }
        },
        |_: &mut dyn RngCore| State::scalar(0.0),
    )
    .with_label(format!("two-atom family n = {n}"));
    Ok(CounterexampleModel { n, model })
}

/// `P(w'(δ; T) > ρ)` computed from the two atoms, each with weight 1/2.
pub fn analytic_exceedance(n: u64, delta: f64, rho: f64, horizon: f64) -> Result<f64> {
    let cx = build_counterexample(n)?;
    let (early, late) = cx.atoms();
    let mut p = 0.0;
    for c in [early, late] {
        let path = JumpPath::new(State::scalar(0.0), vec![(c, State::scalar(1.0))], horizon)?;
        if w_prime(&path, delta, horizon)? > rho {
            p += 0.5;
        }
    }
    Ok(p)
}

fn validate_nontightness(delta: f64, rho: f64, horizon: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie in (0, 1)"));
    }
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", "must be positive"));
    }
    if !(horizon >= 1.0) || !horizon.is_finite() {
        return Err(Error::invalid("T", "must be finite and at least 1"));
    }
    Ok(())
}

/// Empirical `P(w'(δ; T) > ρ)` for each `n`, next to its two-atom value.
///
/// Rows with `x = "empirical"` carry the estimates and rows with
/// `x = "analytic"` the exact values; `t` is `δ`. The notes name the first `n`
/// with `1/n < δ` and the mean estimate over those `n` (the plateau).
///
/// `ρ >= 1` is accepted: every estimate is then 0 because the jump height is 1.
pub fn demonstrate_nontightness(
    n_list: &[u64],
    delta: f64,
    rho: f64,
    horizon: f64,
    samples: u64,
    streams: &RngStreams,
) -> Result<Table> {
    const OP: &str = "demonstrate_nontightness";
    validate_nontightness(delta, rho, horizon)?;
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "must be non-empty"));
    }
    if samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let streams = streams.fork(OP);
    let mut table = Table::new(OP, "two-atom family");
    let mut plateau = Vec::new();
    for &n in n_list {
        let cx = build_counterexample(n)?;
        let draws = streams.fork_index(n).replicate(samples, |rng| -> Result<bool> {
            let path = simulate_path(cx.model(), horizon, DEFAULT_STEP_LIMIT, rng)?;
            Ok(w_prime(&path, delta, horizon)? > rho)
        });
        let mut hits = 0u64;
        for d in draws {
            hits += u64::from(d?);
        }
        let p = hits as f64 / samples as f64;
        let se = (p * (1.0 - p) / samples as f64).sqrt();
        let expected = analytic_exceedance(n, delta, rho, horizon)?;
        if 1.0 / (n as f64) < delta {
            plateau.push(p);
        }
        table.rows.push(Row {
            op: OP.into(),
            u: n.to_string(),
            x: "empirical".into(),
            t: delta,
            value: p,
            stderr: se,
            n: samples,
            censored: 0,
            verdict: None,
        });
        table.rows.push(Row {
            op: OP.into(),
            u: n.to_string(),
            x: "analytic".into(),
            t: delta,
            value: expected,
            stderr: 0.0,
            n: 0,
            censored: 0,
            verdict: None,
        });
    }
    table.notes.push(format!(
        "delta = {delta}, rho = {rho}, T = {horizon}, event w' > rho (strict)"
    ));
    match n_list.iter().find(|n| 1.0 / (**n as f64) < delta) {
        Some(n) => table.notes.push(format!(
            "transition: 1/n < delta from n = {n}; plateau mean {} over {} values of n",
            plateau.iter().sum::<f64>() / plateau.len() as f64,
            plateau.len()
        )),
        None => table.notes.push("no n in the list has 1/n < delta".into()),
    }
    Ok(table)
}

/// Writes the empirical `(n, probability)` curve of a [`demonstrate_nontightness`] table.
pub fn write_curve_csv<W: Write>(table: &Table, mut w: W) -> Result<()> {
    writeln!(w, "n,probability")?;
    for r in table.rows.iter().filter(|r| r.x == "empirical") {
        writeln!(w, "{},{}", r.u, fmt_f64(r.value))?;
    }
    Ok(())
}

/// [`demonstrate_condition_d`] with the default radius and translate centers.
pub fn demonstrate_condition_d(n: u64, samples: u64, streams: &RngStreams) -> Result<Table> {
    demonstrate_condition_d_with(n, DEFAULT_RADIUS, &DEFAULT_CENTERS, samples, streams)
}

/// Evaluates `f_q(1) + A_f (1/n + 1)/2 - f_q(0)` exactly for `A_f = 4 sup|f| = 4`
/// and every center `q`, records the failing `A_f = 0` contrast at `q = 0`,
/// then runs the Monte Carlo condition check with `A_f = 4` and one step.
///
/// PASS-evidence iff every `A_f = 4` inequality holds and the Monte Carlo check passes.
pub fn demonstrate_condition_d_with(
    n: u64,
    radius: f64,
    centers: &[f64],
    samples: u64,
    streams: &RngStreams,
) -> Result<Table> {
    const OP: &str = "demonstrate_condition_d";
    let cx = build_counterexample(n)?;
    let f = BumpFunction::new(State::scalar(0.0), radius)?;
    let a_f = 4.0 * f.sup();
    let mean_theta = (1.0 / n as f64 + 1.0) / 2.0;
    let mut table = Table::new(OP, cx.model().label());
    let mut analytic_ok = true;
    let push = |table: &mut Table, u: &str, q: f64, a: f64| -> bool {
        let fq = f.translate(&State::scalar(q));
        let lhs = fq.eval(&State::scalar(1.0)) + a * mean_theta;
        let rhs = fq.eval(&State::scalar(0.0));
        let ok = lhs >= rhs;
        table.rows.push(Row {
            op: OP.into(),
            u: u.into(),
            x: format!("q={q}"),
            t: n as f64,
            value: lhs - rhs,
            stderr: 0.0,
            n: 0,
            censored: 0,
            verdict: Some(Verdict::from_pass(ok)),
        });
        ok
    };
    for &q in centers {
        analytic_ok &= push(&mut table, "analytic A_f=4", q, a_f);
    }
    push(&mut table, "analytic A_f=0", 0.0, 0.0);
    let params = ConditionDParams::new(a_f, centers.iter().map(|q| State::scalar(*q)).collect(), 1, samples);
    let mc = check_condition_d(cx.model(), &f, &params, &streams.fork(OP))?;
    table.notes.push(format!(
        "sup|f| = 1 for the bump, so A_f = 4 sup|f| = {a_f}; value = f_q(1) + A_f E[tau_1] - f_q(0) with E[tau_1] = {mean_theta}"
    ));
    table
        .notes
        .push("the A_f = 0 row is the expected failing contrast and does not enter the verdict".into());
    table.notes.push(format!("Monte Carlo condition check: {}", mc.verdict));
    table.verdict = Verdict::from_pass(analytic_ok && mc.verdict == Verdict::PassEvidence);
    table.witness = mc.witness.clone();
    table.rows.extend(mc.rows);
    Ok(table)
}
