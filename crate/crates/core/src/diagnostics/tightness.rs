//! Path-level tightness functionals: compact containment and the `w'` tail.

use super::{Estimate, FamilySpec, Member};
use crate::error::{Error, Result};
use crate::renewal::{simulate_path, JumpPath};
use crate::report::{Row, Table, Verdict, Witness};
use crate::rng::RngStreams;
use crate::skorokhod::{sup_norm, w_prime};

struct PathSample {
    paths: Vec<JumpPath>,
    step_limited: u64,
}

fn sample_paths(member: &Member, horizon: f64, n: u64, step_limit: usize, streams: &RngStreams) -> Result<PathSample> {
    let draws = streams
        .fork_index(member.index)
        .replicate(n, |rng| simulate_path(&member.model, horizon, step_limit, rng));
    let mut paths = Vec::with_capacity(n as usize);
    let mut step_limited = 0;
    for d in draws {
        match d {
            Ok(p) => paths.push(p),
            Err(Error::StepLimit { .. }) => step_limited += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(PathSample { paths, step_limited })
}

fn proportion_row(op: &str, u: u64, x: &str, t: f64, hits: u64, sample: &PathSample, seed: u64) -> Row {
    let n = sample.paths.len() as u64;
    let (value, stderr) = if n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let e = Estimate::proportion(hits, n, seed);
        (e.value, e.stderr)
    };
    Row {
        op: op.into(),
        u: u.to_string(),
        x: x.into(),
        t,
        value,
        stderr,
        n,
        censored: sample.step_limited,
        verdict: None,
    }
}

/// `P(sup_{[0,T]} |x(t)| >= a)` per member and level `a`.
///
/// Paths that exhaust `step_limit` are excluded and counted in the censored
/// column. PASS-evidence iff the maximum over members at the largest level is
/// below `threshold`.
pub fn check_compact_containment(
    family: &FamilySpec,
    horizon: f64,
    a_grid: &[f64],
    n: u64,
    threshold: f64,
    step_limit: usize,
    streams: &RngStreams,
) -> Result<Table> {
    const OP: &str = "check_compact_containment";
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid("horizon", "must be finite and positive"));
    }
    if a_grid.is_empty() || a_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("a_grid", "must be non-empty and strictly increasing"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let streams = streams.fork(OP);
    let mut table = Table::new(OP, family.label());
    let top = *a_grid.last().unwrap();
    let mut worst: Option<(u64, f64)> = None;
    let mut empty = false;
    for member in family.members() {
        let sample = sample_paths(member, horizon, n, step_limit, &streams)?;
        let norms = sample
            .paths
            .iter()
            .map(|p| sup_norm(p, horizon))
            .collect::<Result<Vec<f64>>>()?;
        empty |= norms.is_empty();
        for &a in a_grid {
            let hits = norms.iter().filter(|s| **s >= a).count() as u64;
            let row = proportion_row(OP, member.index, "", a, hits, &sample, streams.seed());
            if a == top && worst.is_none_or(|(_, v)| row.value > v) {
                worst = Some((member.index, row.value));
            }
            table.rows.push(row);
        }
    }
    table
        .notes
        .push(format!("T = {horizon}, {n} paths per member, step limit {step_limit}"));
    let (u, v) = worst.expect("families are non-empty");
    table.verdict = if empty {
        Verdict::Insufficient
    } else if v < threshold {
        Verdict::PassEvidence
    } else {
        table.witness = Some(Witness {
            u: u.to_string(),
            x: String::new(),
            t: top,
            reason: format!("P(sup |x| >= a) = {v} at the largest level is not below the threshold {threshold}"),
        });
        Verdict::FailEvidence
    };
    Ok(table)
}

/// `P(w'(δ; T) >= ρ)` per member over a grid of `δ`.
///
/// PASS-evidence iff the estimate for the last member at the smallest `δ` is
/// below `threshold`. Paths that exhaust `step_limit` are excluded and counted.
#[allow(clippy::too_many_arguments)]
pub fn estimate_modulus_tail(
    family: &FamilySpec,
    delta_grid: &[f64],
    rho: f64,
    horizon: f64,
    n: u64,
    threshold: f64,
    step_limit: usize,
    streams: &RngStreams,
) -> Result<Table> {
    const OP: &str = "estimate_modulus_tail";
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", "must be positive"));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid("horizon", "must be finite and positive"));
    }
    if delta_grid.is_empty() || delta_grid.iter().any(|d| !(*d > 0.0) || *d >= horizon) {
        return Err(Error::invalid("delta_grid", "entries must lie in (0, T)"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let streams = streams.fork(OP);
    let mut table = Table::new(OP, family.label());
    let smallest = delta_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let last = family.members().len() - 1;
    let mut decisive = f64::NAN;
    for (ui, member) in family.members().iter().enumerate() {
        let sample = sample_paths(member, horizon, n, step_limit, &streams)?;
        for &delta in delta_grid {
            let mut hits = 0;
            for p in &sample.paths {
                if w_prime(p, delta, horizon)? >= rho {
                    hits += 1;
                }
            }
            let row = proportion_row(OP, member.index, "w'>=rho", delta, hits, &sample, streams.seed());
            if ui == last && delta == smallest {
                decisive = row.value;
            }
            table.rows.push(row);
        }
    }
    table.notes.push(format!(
        "rho = {rho}, T = {horizon}, {n} paths per member, step limit {step_limit}"
    ));
    table.verdict = if decisive.is_nan() {
        Verdict::Insufficient
    } else if decisive < threshold {
        Verdict::PassEvidence
    } else {
        table.witness = Some(Witness {
            u: family.members()[last].index.to_string(),
            x: String::new(),
            t: smallest,
            reason: format!("P(w' >= rho) = {decisive} at the smallest delta is not below the threshold {threshold}"),
        });
        Verdict::FailEvidence
    };
    Ok(table)
}
