//! Dispatch from a parsed config to the library routines.

use super::config::{ExperimentConfig, OpConfig};
use crate::counterexample::{demonstrate_condition_d_with, demonstrate_nontightness, write_curve_csv};
use crate::diagnostics::{
    apply_l, check_compact_containment, check_condition_d, check_condition_iv, estimate_d_with, estimate_modulus_tail,
    martingale_residual, scan_condition_iii, search_a_f, BumpFunction, ConditionDParams, Estimate,
};
use crate::error::Result;
use crate::renewal::simulate_path;
use crate::report::{Row, Table, Verdict, Witness};
use crate::rng::RngStreams;
use crate::scaling::{scan_theorem3, verify_d_bound, write_j_csv};
use crate::state::State;

/// Everything one op produces: verdict tables plus auxiliary CSV files.
#[derive(Debug, Default)]
pub struct OpOutput {
    pub tables: Vec<Table>,
    /// `(file name, contents)`.
    pub files: Vec<(String, Vec<u8>)>,
}

/// One entry of `list-ops`.
pub struct OpInfo {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const OPS: &[OpInfo] = &[
    OpInfo {
        name: "apply_l",
        summary: "compensating operator q(x)(Pφ(x) - φ(x)) at given states",
    },
    OpInfo {
        name: "check_compact_containment",
        summary: "P(sup_[0,T] |x(t)| >= a) over members and levels",
    },
    OpInfo {
        name: "check_condition_d",
        summary: "discrete submartingale condition for a bump f and its translates",
    },
    OpInfo {
        name: "check_condition_iv",
        summary: "P(θ_0 > a) uniformly over the family",
    },
    OpInfo {
        name: "demonstrate_condition_d",
        summary: "two-atom family: submartingale inequality, exact and simulated",
    },
    OpInfo {
        name: "demonstrate_nontightness",
        summary: "two-atom family: P(w'(δ; T) > ρ) against n",
    },
    OpInfo {
        name: "estimate_d",
        summary: "forward jump gap d_x(t) at given states and times",
    },
    OpInfo {
        name: "estimate_modulus_tail",
        summary: "P(w'(δ; T) >= ρ) over members and δ",
    },
    OpInfo {
        name: "martingale_residual",
        summary: "mean of φ(x_k) - φ(x_0) - Σ θ_i 𝕃φ(x_i), should vanish",
    },
    OpInfo {
        name: "scan_condition_iii",
        summary: "limsup_u sup_x d^u_x(t) as t decreases to 0",
    },
    OpInfo {
        name: "scan_theorem3",
        summary: "closed-form overshoot bound J_n(t) for a scaled family",
    },
    OpInfo {
        name: "search_a_f",
        summary: "smallest submartingale constant A_f on a grid",
    },
    OpInfo {
        name: "simulate_path",
        summary: "sample paths written as jump-time CSV",
    },
    OpInfo {
        name: "verify_d_bound",
        summary: "simulated d^n_y(t) against the bound J_n(t)",
    },
];

fn estimate_row(op: &str, u: impl ToString, x: impl ToString, t: f64, e: &Estimate) -> Row {
    Row {
        op: op.into(),
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

fn bump(center: &[f64], radius: f64) -> Result<BumpFunction> {
    BumpFunction::new(State::from(center.to_vec()), radius)
}

pub fn run_op(config: &ExperimentConfig) -> Result<OpOutput> {
    let streams = RngStreams::new(config.seed);
    let step_limit = config.step_limit;
    let mut out = OpOutput::default();
    match &config.op {
        OpConfig::EstimateD { t_grid, samples, .. } => {
            const OP: &str = "estimate_d";
            let model = config.model()?;
            let states = config.op_states(&model)?;
            let streams = streams.fork(OP);
            let mut table = Table::new(OP, model.label());
            for (i, x) in states.iter().enumerate() {
                for (j, &t) in t_grid.iter().enumerate() {
                    let s = streams.fork_index(i as u64).fork_index(j as u64);
                    let e = estimate_d_with(&model, x, t, *samples, None, step_limit, &s)?;
                    table.rows.push(estimate_row(OP, "", x, t, &e));
                }
            }
            if table.rows.iter().any(|r| r.censored > 0) {
                table.notes.push("rows with censored draws are lower bounds".into());
            }
            out.tables.push(table);
        }
        OpConfig::ScanConditionIii {
            t_grid,
            samples,
            threshold,
        } => {
            out.tables.push(scan_condition_iii(
                &config.family()?,
                t_grid,
                *samples,
                *threshold,
                &streams,
            )?);
        }
        OpConfig::CheckConditionIv { a, samples, threshold } => {
            out.tables.push(check_condition_iv(
                &config.family()?,
                *a,
                *samples,
                *threshold,
                &streams,
            )?);
        }
        OpConfig::CheckCompactContainment {
            horizon,
            a_grid,
            samples,
            threshold,
        } => {
            out.tables.push(check_compact_containment(
                &config.family()?,
                *horizon,
                a_grid,
                *samples,
                *threshold,
                step_limit,
                &streams,
            )?);
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
            let model = config.model()?;
            let f = bump(center, *radius)?;
            let translations = super::config::states("op.translations", translations, model.dimension())?;
            let mut params = ConditionDParams::new(*a_f, translations, *steps, *samples);
            params.bins = *bins;
            out.tables.push(check_condition_d(&model, &f, &params, &streams)?);
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
            let model = config.model()?;
            let f = bump(center, *radius)?;
            let translations = super::config::states("op.translations", translations, model.dimension())?;
            let mut params = ConditionDParams::new(0.0, translations, *steps, *samples);
            params.bins = *bins;
            let (found, mut table) = search_a_f(&model, &f, &params, a_grid, &streams)?;
            table.notes.push(match found {
                Some(a) => format!("smallest passing A_f on the grid: {a}"),
                None => "no grid value passes".into(),
            });
            out.tables.push(table);
        }
        OpConfig::ApplyL { phi, samples, .. } => {
            const OP: &str = "apply_l";
            let model = config.model()?;
            let phi = phi.evaluator()?;
            let streams = streams.fork(OP);
            let mut table = Table::new(OP, model.label());
            for (i, x) in config.op_states(&model)?.iter().enumerate() {
                let e = apply_l(&model, &phi, x, *samples, &streams.fork_index(i as u64))?;
                table.rows.push(estimate_row(OP, "", x, 0.0, &e));
            }
            out.tables.push(table);
        }
        OpConfig::MartingaleResidual {
            phi,
            steps,
            samples,
            inner_samples,
        } => {
            const OP: &str = "martingale_residual";
            let model = config.model()?;
            let phi = phi.evaluator()?;
            let streams = streams.fork(OP);
            let mut table = Table::new(OP, model.label());
            let mut pass = true;
            for &k in steps {
                let e = martingale_residual(&model, &phi, k, *samples, *inner_samples, &streams.fork_index(k as u64))?;
                let ok = e.within(0.0, 3.0);
                let mut row = estimate_row(OP, "", "", k as f64, &e);
                row.verdict = Some(Verdict::from_pass(ok));
                if !ok && pass {
                    table.witness = Some(Witness {
                        u: String::new(),
                        x: String::new(),
                        t: k as f64,
                        reason: format!("residual {} is more than 3 stderr from 0", e.value),
                    });
                }
                pass &= ok;
                table.rows.push(row);
            }
            table.notes.push("t is the number of chain steps k".into());
            table.verdict = Verdict::from_pass(pass);
            out.tables.push(table);
        }
        OpConfig::EstimateModulusTail {
            delta_grid,
            rho,
            horizon,
            samples,
            threshold,
        } => {
            out.tables.push(estimate_modulus_tail(
                &config.family()?,
                delta_grid,
                *rho,
                *horizon,
                *samples,
                *threshold,
                step_limit,
                &streams,
            )?);
        }
        OpConfig::ScanTheorem3 { t_grid, threshold } => {
            let fam = config.family.as_ref().expect("validated");
            let table = scan_theorem3(
                &config.model()?,
                &config.scheme()?,
                &fam.index,
                t_grid,
                &config.probe_states()?,
                *threshold,
            )?;
            let mut csv = Vec::new();
            write_j_csv(&table, &mut csv)?;
            out.files.push(("j_table.csv".into(), csv));
            out.tables.push(table);
        }
        OpConfig::VerifyDBound { t_grid, samples } => {
            let fam = config.family.as_ref().expect("validated");
            let (base, scheme, probes) = (config.model()?, config.scheme()?, config.probe_states()?);
            for &n in &fam.index {
                for (j, &t) in t_grid.iter().enumerate() {
                    let s = streams.fork_index(j as u64);
                    out.tables
                        .push(verify_d_bound(&base, &scheme, n, t, &probes, *samples, &s)?);
                }
            }
        }
        OpConfig::DemonstrateNontightness {
            delta,
            rho,
            horizon,
            samples,
            ..
        } => {
            let table = demonstrate_nontightness(&config.n_list()?, *delta, *rho, *horizon, *samples, &streams)?;
            let mut csv = Vec::new();
            write_curve_csv(&table, &mut csv)?;
            out.files.push(("curve.csv".into(), csv));
            out.tables.push(table);
        }
        OpConfig::DemonstrateConditionD {
            radius,
            centers,
            samples,
            ..
        } => {
            for n in config.n_list()? {
                out.tables
                    .push(demonstrate_condition_d_with(n, *radius, centers, *samples, &streams)?);
            }
        }
        OpConfig::SimulatePath { horizon, paths } => {
            const OP: &str = "simulate_path";
            let model = config.model()?;
            let draws = streams
                .fork(OP)
                .replicate(*paths, |rng| simulate_path(&model, *horizon, step_limit, rng));
            let mut table = Table::new(OP, model.label());
            for (i, path) in draws.into_iter().enumerate() {
                let path = path?;
                let mut csv = Vec::new();
                path.write_csv(&mut csv)?;
                out.files.push((format!("path_{i}.csv"), csv));
                table.rows.push(Row {
                    op: OP.into(),
                    u: i.to_string(),
                    x: path.value_at(*horizon).to_string(),
                    t: *horizon,
                    value: path.jumps().len() as f64,
                    stderr: 0.0,
                    n: 1,
                    censored: 0,
                    verdict: None,
                });
            }
            table
                .notes
                .push("value is the number of jumps in [0, T]; x is x(T)".into());
            out.tables.push(table);
        }
    }
    Ok(out)
}

/// Worst verdict across tables: any FAIL wins, then PASS, then insufficient.
pub fn overall_verdict(tables: &[Table]) -> Verdict {
    let has = |v: Verdict| tables.iter().any(|t| t.verdict == v);
    if has(Verdict::FailEvidence) {
        Verdict::FailEvidence
    } else if has(Verdict::PassEvidence) {
        Verdict::PassEvidence
    } else if has(Verdict::Insufficient) {
        Verdict::Insufficient
    } else {
        Verdict::Informational
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ops_are_sorted_and_unique() {
        let names: Vec<_> = OPS.iter().map(|o| o.name).collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(names, sorted);
        assert_eq!(names.len(), 14);
    }

    #[test]
    fn verdict_precedence() {
        let t = |v| Table {
            verdict: v,
            ..Table::new("x", "y")
        };
        assert_eq!(
            overall_verdict(&[t(Verdict::PassEvidence), t(Verdict::FailEvidence)]),
            Verdict::FailEvidence
        );
        assert_eq!(
            overall_verdict(&[t(Verdict::Insufficient), t(Verdict::PassEvidence)]),
            Verdict::PassEvidence
        );
        assert_eq!(overall_verdict(&[t(Verdict::Informational)]), Verdict::Informational);
    }
}
