//! The forward jump gap `d^u_x(t)` and the two conditions built on holding times.

use super::{Estimate, FamilySpec};
use crate::error::{Error, Result};
use crate::kernels::SemiMarkovModel;
use crate::renewal::{default_forward_horizon, forward_jump, ForwardJump};
use crate::report::{Row, Table, Verdict, Witness};
use crate::rng::RngStreams;
use crate::state::State;
use crate::DEFAULT_STEP_LIMIT;

/// Smallest sample count accepted by [`estimate_d`].
pub const MIN_D_SAMPLES: u64 = 100;

/// `d_x(t) = E[τ̂(t) - t | X_0 = x]` from `n` forward-jump draws with the
/// default censoring horizon and step limit.
pub fn estimate_d(model: &SemiMarkovModel, x: &State, t: f64, n: u64, streams: &RngStreams) -> Result<Estimate> {
    estimate_d_with(model, x, t, n, None, DEFAULT_STEP_LIMIT, streams)
}

/// [`estimate_d`] with an explicit censoring horizon and step limit.
///
/// A censored draw contributes `horizon - t`, so any censoring makes the
/// value a lower bound. When every draw is censored the value is `+∞`.
pub fn estimate_d_with(
    model: &SemiMarkovModel,
    x: &State,
    t: f64,
    n: u64,
    horizon: Option<f64>,
    step_limit: usize,
    streams: &RngStreams,
) -> Result<Estimate> {
    if n < MIN_D_SAMPLES {
        return Err(Error::invalid(
            "n",
            format!("at least {MIN_D_SAMPLES} samples are required"),
        ));
    }
    let horizon = horizon.unwrap_or_else(|| default_forward_horizon(t));
    let draws = streams.replicate(n, |rng| forward_jump(model, x, t, Some(horizon), step_limit, rng));
    let mut samples = Vec::with_capacity(n as usize);
    let mut censored = 0;
    for d in draws {
        match d? {
            ForwardJump::Gap(g) => samples.push(g),
            ForwardJump::HorizonExceeded => {
                censored += 1;
                samples.push(horizon - t);
            }
        }
    }
    if censored == n {
        return Ok(Estimate {
            value: f64::INFINITY,
            stderr: 0.0,
            n_samples: n,
            censored,
            seed: streams.seed(),
        });
    }
    Ok(Estimate::from_samples(&samples, censored, streams.seed()))
}

pub(crate) fn estimate_row(op: &str, u: impl ToString, x: impl ToString, t: f64, e: &Estimate) -> Row {
    Row {
        op: op.to_string(),
        u: u.to_string(),
        x: x.to_string(),
        t,
        value: e.value,
        stderr: e.stderr,
        n: e.n_samples,
        censored: e.censored,
        verdict: None,
    }
}

fn probe_note(family: &FamilySpec, probes: &[(u64, Vec<State>)]) -> String {
    let list = probes
        .iter()
        .map(|(u, ps)| {
            format!(
                "u={u}: [{}]",
                ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    format!(
        "probe states for family '{}' ({} pilot paths): {list}",
        family.label(),
        family.pilot().paths
    )
}

/// Scans `D[t][u] = max_x d^u_x(t)` over a descending `t_grid`.
///
/// Rows: one per `(u, x, t)` cell and one `x = "sup"` row per `(u, t)`.
/// PASS-evidence iff, over the tail half of the family, the row maxima do not
/// increase as `t` decreases (up to three combined standard errors) and the
/// smallest-`t` maximum is below `threshold`.
pub fn scan_condition_iii(
    family: &FamilySpec,
    t_grid: &[f64],
    n: u64,
    threshold: f64,
    streams: &RngStreams,
) -> Result<Table> {
    const OP: &str = "scan_condition_iii";
    if t_grid.is_empty() {
        return Err(Error::invalid("t_grid", "must be non-empty"));
    }
    if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::invalid("t_grid", "entries must be finite and positive"));
    }
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("t_grid", "must be strictly decreasing toward 0"));
    }
    let streams = streams.fork(OP);
    let mut table = Table::new(OP, family.label());
    // sup[u][k] = (value, stderr, argmax probe)
    let mut sup: Vec<Vec<(Estimate, State)>> = Vec::new();
    let mut probe_sets = Vec::new();
    let mut witness = None;
    for member in family.members() {
        let probes = family.probes_for(member, &streams);
        let cell_streams = streams.fork_index(member.index);
        let mut per_t: Vec<Option<(Estimate, State)>> = vec![None; t_grid.len()];
        for (i, x) in probes.iter().enumerate() {
            for (k, &t) in t_grid.iter().enumerate() {
                let e = estimate_d(
                    &member.model,
                    x,
                    t,
                    n,
                    &cell_streams.fork_index(i as u64).fork_index(k as u64),
                )?;
                table.rows.push(estimate_row(OP, member.index, x, t, &e));
                if e.all_censored() && witness.is_none() {
                    witness = Some(Witness {
                        u: member.index.to_string(),
                        x: x.to_string(),
                        t,
                        reason: "every forward-jump draw was censored: d = +inf (evidence)".into(),
                    });
                }
                let better = match &per_t[k] {
                    None => true,
                    Some((best, _)) => e.value > best.value,
                };
                if better {
                    per_t[k] = Some((e, x.clone()));
                }
            }
        }
        let per_t: Vec<(Estimate, State)> = per_t.into_iter().map(|c| c.expect("probes are non-empty")).collect();
        for (k, (e, _)) in per_t.iter().enumerate() {
            table.rows.push(estimate_row(OP, member.index, "sup", t_grid[k], e));
        }
        sup.push(per_t);
        probe_sets.push((member.index, probes));
    }
    table.notes.push(probe_note(family, &probe_sets));
    table.notes.push(format!(
        "threshold {threshold}; tail members are the last {} of {}",
        family.tail_range().len(),
        family.members().len()
    ));

    if let Some(w) = witness {
        table.verdict = Verdict::FailEvidence;
        table.witness = Some(w);
        return Ok(table);
    }
    // row maxima over the tail of u
    let members = family.members();
    let tail = family.tail_range();
    let row_max: Vec<(f64, f64, usize)> = (0..t_grid.len())
        .map(|k| {
            tail.clone()
                .map(|ui| (sup[ui][k].0.value, sup[ui][k].0.stderr, ui))
                .fold(
                    (f64::NEG_INFINITY, 0.0, tail.start),
                    |a, b| if b.0 > a.0 { b } else { a },
                )
        })
        .collect();
    for k in 1..row_max.len() {
        let (prev, se_prev, _) = row_max[k - 1];
        let (cur, se_cur, ui) = row_max[k];
        if cur > prev + 3.0 * (se_prev * se_prev + se_cur * se_cur).sqrt() {
            table.verdict = Verdict::FailEvidence;
            table.witness = Some(Witness {
                u: members[ui].index.to_string(),
                x: sup[ui][k].1.to_string(),
                t: t_grid[k],
                reason: format!("sup d increases from {prev} to {cur} as t decreases"),
            });
            return Ok(table);
        }
    }
    let k = t_grid.len() - 1;
    let (last, _, ui) = row_max[k];
    if last < threshold {
        table.verdict = Verdict::PassEvidence;
    } else {
        table.verdict = Verdict::FailEvidence;
        table.witness = Some(Witness {
            u: members[ui].index.to_string(),
            x: sup[ui][k].1.to_string(),
            t: t_grid[k],
            reason: format!("sup d = {last} at the smallest t is not below the threshold {threshold}"),
        });
    }
    Ok(table)
}

/// `P(θ_0 < a | X_0 = x)` per member and probe state.
///
/// PASS-evidence iff every estimate for the last member is below `threshold`.
pub fn check_condition_iv(family: &FamilySpec, a: f64, n: u64, threshold: f64, streams: &RngStreams) -> Result<Table> {
    const OP: &str = "check_condition_iv";
    if !(a > 0.0) {
        return Err(Error::invalid("a", "must be positive"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let streams = streams.fork(OP);
    let mut table = Table::new(OP, family.label());
    let mut probe_sets = Vec::new();
    let last = family.members().len() - 1;
    let mut verdict = Verdict::PassEvidence;
    for (ui, member) in family.members().iter().enumerate() {
        let probes = family.probes_for(member, &streams);
        let cell_streams = streams.fork_index(member.index);
        for (i, x) in probes.iter().enumerate() {
            member.model.check_state(x)?;
            let law = member.model.holding(x);
            let hits: u64 = cell_streams
                .fork_index(i as u64)
                .replicate(n, |rng| u64::from(law.sample(rng) < a))
                .into_iter()
                .sum();
            let e = Estimate::proportion(hits, n, streams.seed());
            let mut row = estimate_row(OP, member.index, x, a, &e);
            if ui == last && e.value >= threshold {
                row.verdict = Some(Verdict::FailEvidence);
                if verdict == Verdict::PassEvidence {
                    verdict = Verdict::FailEvidence;
                    table.witness = Some(Witness {
                        u: member.index.to_string(),
                        x: x.to_string(),
                        t: a,
                        reason: format!("P(theta < a) = {} is not below the threshold {threshold}", e.value),
                    });
                }
            }
            table.rows.push(row);
        }
        probe_sets.push((member.index, probes));
    }
    table.notes.push(probe_note(family, &probe_sets));
    table.verdict = verdict;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::PilotConfig;
    use crate::kernels::{HoldingTime, TransitionKernel};

    fn model(law: HoldingTime) -> SemiMarkovModel {
        SemiMarkovModel::homogeneous(TransitionKernel::symmetric_walk(1.0), law, State::scalar(0.0)).unwrap()
    }

    #[test]
    fn memoryless_gap() {
        let m = model(HoldingTime::exponential(2.0).unwrap());
        let e = estimate_d(&m, &State::scalar(0.0), 0.5, 10_000, &RngStreams::new(1)).unwrap();
        assert!(e.within(0.5, 3.0), "{e:?}");
        assert_eq!(e.censored, 0);
        assert!(estimate_d(&m, &State::scalar(0.0), 0.5, 99, &RngStreams::new(1)).is_err());
    }

    #[test]
    fn gap_at_zero_is_the_mean() {
        let m = model(HoldingTime::two_point(0.25, 1.0, 0.5).unwrap());
        let e = estimate_d(&m, &State::scalar(0.0), 0.0, 10_000, &RngStreams::new(2)).unwrap();
        assert!(e.within(0.625, 3.0), "{e:?}");
    }

    #[test]
    fn absorbing_state_is_censored() {
        let m = model(HoldingTime::never());
        let e = estimate_d(&m, &State::scalar(1.0), 0.5, 100, &RngStreams::new(3)).unwrap();
        assert!(e.all_censored() && e.value.is_infinite());
    }

    #[test]
    fn deterministic_clock_scan_fails_threshold() {
        let m = model(HoldingTime::deterministic(1.0).unwrap());
        let fam = FamilySpec::new("det", vec![(1, m.clone()), (2, m)], vec![State::scalar(0.0)])
            .unwrap()
            .with_pilot(PilotConfig::disabled());
        let t = scan_condition_iii(&fam, &[0.5], 200, 0.1, &RngStreams::new(4)).unwrap();
        assert_eq!(t.verdict, Verdict::FailEvidence);
        for r in &t.rows {
            assert!((r.value - 0.5).abs() < 1e-12);
        }
        assert!(scan_condition_iii(&fam, &[0.1, 0.5], 200, 0.1, &RngStreams::new(4)).is_err());
    }

    #[test]
    fn condition_iv_examples() {
        let det = model(HoldingTime::deterministic(1.0).unwrap());
        let fam = FamilySpec::new("det", vec![(1, det)], vec![State::scalar(0.0)]).unwrap();
        let t = check_condition_iv(&fam, 0.5, 1000, 0.05, &RngStreams::new(5)).unwrap();
        assert_eq!(t.verdict, Verdict::PassEvidence);
        assert!(t.rows.iter().all(|r| r.value == 0.0));

        let exp = model(HoldingTime::exponential(1.0).unwrap());
        let fam = FamilySpec::new("exp", vec![(1, exp)], vec![State::scalar(0.0)])
            .unwrap()
            .with_pilot(PilotConfig::disabled());
        let t = check_condition_iv(&fam, 0.5, 10_000, 0.05, &RngStreams::new(5)).unwrap();
        assert_eq!(t.verdict, Verdict::FailEvidence);
        let r = &t.rows[0];
        assert!((r.value - (1.0 - (-0.5f64).exp())).abs() <= 3.0 * r.stderr);
    }
}
