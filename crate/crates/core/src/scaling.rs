//! Space-time scaled families `ζ^n(t) = x(a_n t) / b_n` and the overshoot
//! functional `J_n(t) = (1/a_n) sup_x ∫_{a_n t}^∞ F̄_x(r) / F̄_x(a_n t) dr`.

use std::fmt;
use std::io::Write;

use crate::diagnostics::{estimate_d, FamilySpec};
use crate::error::{Error, Result};
use crate::kernels::{Law, SemiMarkovModel, TransitionKernel};
use crate::numeric::integrate_decreasing_tail;
use crate::report::{fmt_f64, Row, Table, Verdict, Witness};
use crate::rng::RngStreams;
use crate::state::State;

/// A positive sequence indexed by `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Sequence {
    /// `n^p`.
    Power(f64),
    /// `values[n - 1]`.
    Explicit(Vec<f64>),
}

impl Sequence {
    pub fn value(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::invalid("n", "indices start at 1"));
        }
        match self {
            Sequence::Power(p) => Ok((n as f64).powf(*p)),
            Sequence::Explicit(v) => v
                .get(n as usize - 1)
                .copied()
                .ok_or_else(|| Error::invalid("n", format!("explicit sequence has only {} entries", v.len()))),
        }
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::Power(p) if *p == 1.0 => write!(f, "n"),
            Sequence::Power(p) => write!(f, "n^{p}"),
            Sequence::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingScheme {
    name: String,
    a: Sequence,
    b: Sequence,
}

impl ScalingScheme {
    pub fn new(name: impl Into<String>, a: Sequence, b: Sequence) -> Self {
        ScalingScheme {
            name: name.into(),
            a,
            b,
        }
    }

    /// `a_n = n^2`, `b_n = n`.
    pub fn diffusion() -> Self {
        ScalingScheme::new("diffusion", Sequence::Power(2.0), Sequence::Power(1.0))
    }

    /// `a_n = n`, `b_n = n`.
    pub fn averaging() -> Self {
        ScalingScheme::new("averaging", Sequence::Power(1.0), Sequence::Power(1.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn a(&self, n: u64) -> Result<f64> {
        self.a.value(n)
    }

    pub fn b(&self, n: u64) -> Result<f64> {
        self.b.value(n)
    }

    pub fn a_sequence(&self) -> &Sequence {
        &self.a
    }

    pub fn b_sequence(&self) -> &Sequence {
        &self.b
    }

    /// Both sequences are finite and positive along the strictly increasing
    /// `indices`; `a` must be strictly increasing and `b` non-decreasing.
    pub fn validate(&self, indices: &[u64]) -> Result<()> {
        if indices.is_empty() {
            return Err(Error::invalid("index", "must be non-empty"));
        }
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("index", "must be strictly increasing"));
        }
        for (name, seq) in [("a", &self.a), ("b", &self.b)] {
            let vals = indices.iter().map(|n| seq.value(*n)).collect::<Result<Vec<f64>>>()?;
            if vals.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::invalid(name, "values must be finite and positive"));
            }
            let strict = name == "a";
            if vals.windows(2).any(|w| if strict { w[1] <= w[0] } else { w[1] < w[0] }) {
                let how = if strict { "strictly increasing" } else { "non-decreasing" };
                return Err(Error::invalid(name, format!("must be {how} along the index list")));
            }
        }
        Ok(())
    }
}

/// The family `n ↦ ζ^n` built from one base model.
#[derive(Clone, Debug)]
pub struct ScaledFamily {
    base: SemiMarkovModel,
    scheme: ScalingScheme,
    indices: Vec<u64>,
}

impl ScaledFamily {
    pub fn new(base: SemiMarkovModel, scheme: ScalingScheme, indices: Vec<u64>) -> Result<Self> {
        scheme.validate(&indices)?;
        Ok(ScaledFamily { base, scheme, indices })
    }

    pub fn base(&self) -> &SemiMarkovModel {
        &self.base
    }

    pub fn scheme(&self) -> &ScalingScheme {
        &self.scheme
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    /// Member `n`: kernel `x ↦ P(b_n x) / b_n`, holding law of `θ / a_n` with
    /// `θ ~ F_{b_n x}`, and initial law of `x_0 / b_n`.
    pub fn member(&self, n: u64) -> Result<SemiMarkovModel> {
        scaled_member(&self.base, &self.scheme, n)
    }

    pub fn to_family_spec(&self, probe_states: Vec<State>) -> Result<FamilySpec> {
        let members = self
            .indices
            .iter()
            .map(|n| Ok((*n, self.member(*n)?)))
            .collect::<Result<Vec<_>>>()?;
        let label = format!(
            "{} scaled by {} (a_n = {}, b_n = {})",
            self.base.label(),
            self.scheme.name,
            self.scheme.a,
            self.scheme.b
        );
        FamilySpec::new(label, members, probe_states)
    }
}

pub fn scaled_member(base: &SemiMarkovModel, scheme: &ScalingScheme, n: u64) -> Result<SemiMarkovModel> {
    let a = scheme.a(n)?;
    let b = scheme.b(n)?;
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(
            "scheme",
            format!("a_{n} and b_{n} must be finite and positive"),
        ));
    }
    let base_kernel = base.kernel().clone();
    let kernel = TransitionKernel::new(
        base.dimension(),
        format!("{} / {b}", base_kernel.description()),
        move |x, rng| base_kernel.sample_dyn(&x.scaled(b), rng).scaled(1.0 / b),
    );
    let holding = base.holding_fn();
    let initial = base.initial_fn();
    let label = format!("{} [n = {n}, a_n = {a}, b_n = {b}]", base.label());
    Ok(SemiMarkovModel::new(
        kernel,
        move |x: &State| holding(&x.scaled(b)).time_scaled(1.0 / a),
        move |rng: &mut dyn rand::RngCore| initial(rng).scaled(1.0 / b),
    )
    .with_label(label))
}

fn check_probes(base: &SemiMarkovModel, probes: &[State]) -> Result<()> {
    if probes.is_empty() {
        return Err(Error::invalid("probe_states", "at least one probe state is required"));
    }
    for p in probes {
        base.check_state(p)?;
    }
    Ok(())
}

/// `J_n(t)`, with the supremum over member-space `probes` (the base law at
/// `b_n y` is used for probe `y`). A probe whose tail vanishes at `a_n t`
/// contributes 0.
pub fn theorem3_j(base: &SemiMarkovModel, scheme: &ScalingScheme, n: u64, t: f64, probes: &[State]) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", "must be finite and positive"));
    }
    check_probes(base, probes)?;
    let a = scheme.a(n)?;
    let b = scheme.b(n)?;
    let s = a * t;
    Ok(probes
        .iter()
        .map(|y| base.holding(&y.scaled(b)).mean_residual(s).map_or(0.0, |m| m / a))
        .fold(0.0, f64::max))
}

/// [`theorem3_j`] by numerical integration of `exp(log F̄(s + v) - log F̄(s))`,
/// independent of the closed forms.
pub fn theorem3_j_quadrature(
    base: &SemiMarkovModel,
    scheme: &ScalingScheme,
    n: u64,
    t: f64,
    probes: &[State],
    abs_tol: f64,
) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", "must be finite and positive"));
    }
    check_probes(base, probes)?;
    let a = scheme.a(n)?;
    let b = scheme.b(n)?;
    let s = a * t;
    let mut sup: f64 = 0.0;
    for y in probes {
        let law = base.holding(&y.scaled(b));
        let ls = law.log_tail(s);
        if ls == f64::NEG_INFINITY {
            continue;
        }
        let v = integrate_decreasing_tail(|v| (law.log_tail(s + v) - ls).exp(), abs_tol);
        sup = sup.max(v / a);
    }
    Ok(sup)
}

fn closed_form(base: &SemiMarkovModel, scheme: &ScalingScheme, n: u64, probes: &[State]) -> Result<bool> {
    let b = scheme.b(n)?;
    Ok(probes.iter().all(|y| match base.holding(&y.scaled(b)).law() {
        Law::Custom(c) => c.has_integrated_tail(),
        _ => true,
    }))
}

/// Table of `J_n(t)` over `indices × t_grid`; `x` holds the evaluation form
/// (`closed` or `quadrature`).
///
/// PASS-evidence iff along the last index `J` does not increase as `t`
/// decreases and its value at the smallest `t` is below `threshold`.
pub fn scan_theorem3(
    base: &SemiMarkovModel,
    scheme: &ScalingScheme,
    indices: &[u64],
    t_grid: &[f64],
    probes: &[State],
    threshold: f64,
) -> Result<Table> {
    const OP: &str = "scan_theorem3";
    scheme.validate(indices)?;
    if t_grid.is_empty() {
        return Err(Error::invalid("t_grid", "must be non-empty"));
    }
    let mut table = Table::new(OP, format!("{} under the {} scheme", base.label(), scheme.name));
    let mut last_row = Vec::new();
    for &n in indices {
        let form = if closed_form(base, scheme, n, probes)? {
            "closed"
        } else {
            "quadrature"
        };
        for &t in t_grid {
            let j = theorem3_j(base, scheme, n, t, probes)?;
            table.rows.push(Row {
                op: OP.into(),
                u: n.to_string(),
                x: form.into(),
                t,
                value: j,
                stderr: 0.0,
                n: 0,
                censored: 0,
                verdict: None,
            });
            if n == *indices.last().unwrap() {
                last_row.push((t, j));
            }
        }
    }
    table
        .notes
        .push(format!("a_n = {}, b_n = {}, threshold {threshold}", scheme.a, scheme.b));
    last_row.sort_by(|p, q| p.0.total_cmp(&q.0));
    let n_last = *indices.last().unwrap();
    let rises = last_row.windows(2).find(|w| w[0].1 > w[1].1 * (1.0 + 1e-12));
    let (t0, j0) = last_row[0];
    if let Some(w) = rises {
        table.verdict = Verdict::FailEvidence;
        table.witness = Some(Witness {
            u: n_last.to_string(),
            x: String::new(),
            t: w[0].0,
            reason: format!("J increases from {} to {} as t decreases", w[1].1, w[0].1),
        });
    } else if j0 < threshold {
        table.verdict = Verdict::PassEvidence;
    } else {
        table.verdict = Verdict::FailEvidence;
        table.witness = Some(Witness {
            u: n_last.to_string(),
            x: String::new(),
            t: t0,
            reason: format!("J = {j0} at the smallest t is not below the threshold {threshold}"),
        });
    }
    Ok(table)
}

/// Writes a [`scan_theorem3`] table as CSV with columns `n,t,J,form`.
pub fn write_j_csv<W: Write>(table: &Table, mut w: W) -> Result<()> {
    writeln!(w, "n,t,J,form")?;
    for r in &table.rows {
        writeln!(w, "{},{},{},{}", r.u, fmt_f64(r.t), fmt_f64(r.value), r.x)?;
    }
    Ok(())
}

/// Smallest sample count accepted by [`verify_d_bound`].
pub const MIN_BOUND_SAMPLES: u64 = 1000;

/// Checks `d^n_y(t) <= J_n(t) + 3 stderr` on member `n` at every probe `y`.
///
/// Deterministic clocks are rejected: `J_n` is not an upper bound for them
/// when the chain is observed mid-cycle. A censored estimate that does not
/// already exceed the bound is reported as insufficient.
#[allow(clippy::too_many_arguments)]
pub fn verify_d_bound(
    base: &SemiMarkovModel,
    scheme: &ScalingScheme,
    n: u64,
    t: f64,
    probes: &[State],
    samples: u64,
    streams: &RngStreams,
) -> Result<Table> {
    const OP: &str = "verify_d_bound";
    if samples < MIN_BOUND_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("at least {MIN_BOUND_SAMPLES} samples are required"),
        ));
    }
    check_probes(base, probes)?;
    let b = scheme.b(n)?;
    for y in probes {
        if matches!(base.holding(&y.scaled(b)).law(), Law::Deterministic { .. }) {
            return Err(Error::invalid(
                "holding",
                "deterministic clocks are excluded from bound verification",
            ));
        }
    }
    let member = scaled_member(base, scheme, n)?;
    let j = theorem3_j(base, scheme, n, t, probes)?;
    let streams = streams.fork(OP).fork_index(n);
    let mut table = Table::new(OP, member.label());
    table.rows.push(Row {
        op: OP.into(),
        u: n.to_string(),
        x: "J".into(),
        t,
        value: j,
        stderr: 0.0,
        n: 0,
        censored: 0,
        verdict: None,
    });
    let mut verdict = Verdict::PassEvidence;
    for (i, y) in probes.iter().enumerate() {
        let e = estimate_d(&member, y, t, samples, &streams.fork_index(i as u64))?;
        let within = e.value <= j + 3.0 * e.stderr;
        let v = match (within, e.is_lower_bound()) {
            (false, _) => Verdict::FailEvidence,
            (true, true) => Verdict::Insufficient,
            (true, false) => Verdict::PassEvidence,
        };
        if v == Verdict::FailEvidence && verdict != Verdict::FailEvidence {
            verdict = v;
            table.witness = Some(Witness {
                u: n.to_string(),
                x: y.to_string(),
                t,
                reason: format!("d = {} exceeds J = {j} by more than 3 stderr", e.value),
            });
        } else if v == Verdict::Insufficient && verdict == Verdict::PassEvidence {
            verdict = v;
        }
        table.rows.push(Row {
            op: OP.into(),
            u: n.to_string(),
            x: y.to_string(),
            t,
            value: e.value,
            stderr: e.stderr,
            n: e.n_samples,
            censored: e.censored,
            verdict: Some(v),
        });
    }
    table.verdict = verdict;
    Ok(table)
}
