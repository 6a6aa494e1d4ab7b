//! Acceptance criteria, one pass/fail line each. Criteria 1-8 run on a
//! one-thread pool and again on an eight-thread pool; criterion 9 compares the
//! two JSON encodings byte for byte.

mod common;

use std::time::{Duration, Instant};

use common::{grid_w_prime, seeded, GridPath, UNIT};
use rand::Rng;
use semimarkov::counterexample::{demonstrate_condition_d, demonstrate_nontightness};
use semimarkov::diagnostics::{estimate_d, martingale_residual, DEFAULT_INNER_SAMPLES};
use semimarkov::scaling::{scaled_member, theorem3_j, theorem3_j_quadrature, verify_d_bound, ScalingScheme, Sequence};
use semimarkov::skorokhod::w_prime;
use semimarkov::{HoldingTime, Result, RngStreams, Row, SemiMarkovModel, State, Table, TransitionKernel, Verdict};

const SEED: u64 = 20_250_101;

struct Outcome {
    pass: bool,
    detail: String,
    tables: Vec<Table>,
}

fn row(op: &str, u: impl ToString, x: impl ToString, t: f64, value: f64, stderr: f64, n: u64) -> Row {
    Row {
        op: op.into(),
        u: u.to_string(),
        x: x.to_string(),
        t,
        value,
        stderr,
        n,
        censored: 0,
        verdict: None,
    }
}

fn walk(law: HoldingTime) -> SemiMarkovModel {
    SemiMarkovModel::homogeneous(TransitionKernel::symmetric_walk(1.0), law, State::scalar(0.0)).unwrap()
}

fn find<'a>(t: &'a Table, u: &str, x: &str) -> &'a Row {
    t.rows.iter().find(|r| r.u == u && r.x == x).expect("row present")
}

fn c1_plateau(streams: &RngStreams) -> Result<Outcome> {
    let main = demonstrate_nontightness(&[10, 200], 0.05, 0.5, 2.0, 20_000, &streams.fork("c1"))?;
    let wide = demonstrate_nontightness(&[10], 0.2, 0.5, 2.0, 20_000, &streams.fork("c1-wide"))?;
    let p200 = find(&main, "200", "empirical");
    let p10 = find(&main, "10", "empirical");
    let w10 = find(&wide, "10", "empirical");
    let in_band = (0.4894..=0.5106).contains(&p200.value);
    let zero = p10.value == 0.0;
    let plateau = (w10.value - 0.5).abs() <= 3.0 * w10.stderr;
    Ok(Outcome {
        pass: in_band && zero && plateau,
        detail: format!(
            "n=200 δ=0.05: {:.4} in [0.4894, 0.5106]; n=10 δ=0.05: {}; n=10 δ=0.2: {:.4} (plateau 1/2)",
            p200.value, p10.value, w10.value
        ),
        tables: vec![main, wide],
    })
}

fn c2_submartingale(streams: &RngStreams) -> Result<Outcome> {
    let mut tables = Vec::new();
    let mut pass = true;
    let mut analytic = 0;
    for n in [1, 4, 100] {
        let t = demonstrate_condition_d(n, 10_000, &streams.fork("c2").fork_index(n))?;
        let rows: Vec<_> = t.rows.iter().filter(|r| r.u == "analytic A_f=4").collect();
        analytic += rows.len();
        pass &= rows.len() == 6 && rows.iter().all(|r| r.verdict == Some(Verdict::PassEvidence));
        pass &= t.verdict == Verdict::PassEvidence;
        tables.push(t);
    }
    Ok(Outcome {
        pass,
        detail: format!(
            "{analytic} exact inequalities; Monte Carlo verdicts {:?}",
            tables.iter().map(|t| t.verdict.as_str()).collect::<Vec<_>>()
        ),
        tables,
    })
}

fn c3_memoryless(streams: &RngStreams) -> Result<Outcome> {
    const OP: &str = "memoryless_d";
    let base = walk(HoldingTime::exponential(2.0)?);
    let scheme = ScalingScheme::new("time only", Sequence::Power(1.0), Sequence::Power(0.0));
    let mut table = Table::new(OP, base.label());
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for a in [1u64, 100, 10_000] {
        let member = scaled_member(&base, &scheme, a)?;
        let target = 1.0 / (2.0 * a as f64);
        let mut cells = Vec::new();
        for (j, t) in [0.01, 0.1, 1.0].into_iter().enumerate() {
            let e = estimate_d(
                &member,
                &State::scalar(0.0),
                t,
                10_000,
                &streams.fork(OP).fork_index(a).fork_index(j as u64),
            )?;
            pass &= e.within(target, 3.0) && e.censored == 0;
            worst = worst.max((e.value - target).abs() / e.stderr);
            table.rows.push(row(OP, a, "0", t, e.value, e.stderr, e.n_samples));
            cells.push(e);
        }
        for i in 0..cells.len() {
            for k in i + 1..cells.len() {
                let se = cells[i].stderr.hypot(cells[k].stderr);
                pass &= (cells[i].value - cells[k].value).abs() <= 3.0 * se;
            }
        }
    }
    Ok(Outcome {
        pass,
        detail: format!("9 cells, largest deviation {worst:.2} stderr"),
        tables: vec![table],
    })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c4_closed_forms(_: &RngStreams) -> Result<Outcome> {
    const OP: &str = "closed_forms";
    let scheme = ScalingScheme::averaging();
    let probes = [State::scalar(0.0)];
    let alpha_exp = 2.0;
    let alpha_par = 3.0;
    let exp = walk(HoldingTime::exponential(alpha_exp)?);
    let par = walk(HoldingTime::pareto(alpha_par, 1.0)?);
    let mut table = Table::new(OP, "exponential(2) and pareto(3) under averaging scaling");
    let (mut worst_closed, mut worst_quad): (f64, f64) = (0.0, 0.0);
    let mut pairs = 0;
    for (name, model) in [("exponential", &exp), ("pareto", &par)] {
        for n in [1u64, 10, 100, 1000, 10_000] {
            for t in [0.01, 1.0] {
                let a = n as f64;
                let formula = if name == "exponential" {
                    1.0 / (alpha_exp * a)
                } else {
                    (1.0 + a * t) / ((alpha_par - 1.0) * a)
                };
                let j = theorem3_j(model, &scheme, n, t, &probes)?;
                let q = theorem3_j_quadrature(model, &scheme, n, t, &probes, 1e-10)?;
                worst_closed = worst_closed.max(rel_err(j, formula));
                worst_quad = worst_quad.max(rel_err(q, j));
                pairs += 1;
                table.rows.push(row(OP, n, name, t, j, 0.0, 0));
                table.rows.push(row(OP, n, format!("{name} quadrature"), t, q, 0.0, 0));
            }
        }
    }
    let mut worst_limit: f64 = 0.0;
    for t in [0.01, 0.1, 1.0] {
        let j = theorem3_j(&par, &scheme, 100_000, t, &probes)?;
        worst_limit = worst_limit.max((j - t / (alpha_par - 1.0)).abs());
        table.rows.push(row(OP, 100_000, "pareto limit", t, j, 0.0, 0));
    }
    Ok(Outcome {
        pass: pairs == 20 && worst_closed <= 1e-12 && worst_quad <= 1e-6 && worst_limit <= 1e-3,
        detail: format!(
            "{pairs} pairs; closed form rel err {worst_closed:.1e}, quadrature rel err {worst_quad:.1e}, n=1e5 limit err {worst_limit:.1e}"
        ),
        tables: vec![table],
    })
}

fn c5_bound(streams: &RngStreams) -> Result<Outcome> {
    let base = walk(HoldingTime::pareto(3.0, 1.0)?);
    let scheme = ScalingScheme::averaging();
    let probes = [State::scalar(0.0)];
    let mut tables = Vec::new();
    let mut pass = true;
    let mut censored = 0;
    let mut slack = f64::INFINITY;
    for n in [1u64, 10, 100] {
        for (j, t) in [0.01, 0.1, 1.0].into_iter().enumerate() {
            let table = verify_d_bound(
                &base,
                &scheme,
                n,
                t,
                &probes,
                10_000,
                &streams.fork("c5").fork_index(j as u64),
            )?;
            let bound = find(&table, &n.to_string(), "J").value;
            for r in table.rows.iter().filter(|r| r.x != "J") {
                pass &= r.value <= bound + 3.0 * r.stderr;
                slack = slack.min((bound + 3.0 * r.stderr - r.value) / bound);
                censored += r.censored;
            }
            tables.push(table);
        }
    }
    Ok(Outcome {
        pass,
        detail: format!("9 cells, smallest relative slack {slack:.3}, {censored} censored draws"),
        tables,
    })
}

fn c6_w_prime(_: &RngStreams) -> Result<Outcome> {
    const OP: &str = "w_prime_oracle";
    let mut rng = seeded(SEED);
    let mut table = Table::new(OP, "random grid paths on [0, 2]");
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let g = GridPath::random_with(&mut rng, 32, 6, |r| r.random::<f64>());
        let d = rng.random_range(1..=12);
        let exact = w_prime(&g.to_path(), d as f64 * UNIT, g.horizon())?;
        let oracle = grid_w_prime(&g, d);
        pass &= exact <= oracle + 1e-9;
        worst = worst.max((exact - oracle).abs());
        table.rows.push(row(
            OP,
            i,
            format!("oracle {oracle:.17e}"),
            d as f64 * UNIT,
            exact,
            0.0,
            1,
        ));
    }
    pass &= worst <= 1e-9;
    Ok(Outcome {
        pass,
        detail: format!("200 paths, largest |DP - oracle| {worst:.1e}"),
        tables: vec![table],
    })
}

fn c7_martingale(streams: &RngStreams) -> Result<Outcome> {
    const OP: &str = "martingale_residual";
    let drift = SemiMarkovModel::homogeneous(
        TransitionKernel::new(1, "drift walk(+1: 0.7, -1: 0.3)", |x, rng| {
            let up = rng.next_u64() as f64 / u64::MAX as f64 <= 0.7;
            State::scalar(x[0] + if up { 1.0 } else { -1.0 })
        }),
        HoldingTime::exponential(1.5)?,
        State::scalar(0.0),
    )?;
    let clock = walk(HoldingTime::deterministic(1.0)?);
    let weibull = SemiMarkovModel::homogeneous(
        TransitionKernel::gaussian_walk(1.0),
        HoldingTime::weibull(0.7, 1.0)?,
        State::scalar(0.0),
    )?;
    type Phi = fn(&State) -> f64;
    let systems: [(&str, &SemiMarkovModel, Phi); 3] = [
        ("drift walk, φ = x", &drift, |x| x[0]),
        ("symmetric walk, deterministic clock, φ = x²", &clock, |x| x[0] * x[0]),
        ("gaussian walk, φ = 3", &weibull, |_| 3.0),
    ];
    let mut tables = Vec::new();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (i, (label, model, phi)) in systems.into_iter().enumerate() {
        let mut table = Table::new(OP, label);
        for k in 1..=5 {
            let s = streams.fork("c7").fork_index(i as u64).fork_index(k as u64);
            let e = martingale_residual(model, phi, k, 100_000, DEFAULT_INNER_SAMPLES, &s)?;
            pass &= e.within(0.0, 3.0);
            if e.stderr > 0.0 {
                worst = worst.max(e.value.abs() / e.stderr);
            }
            table
                .rows
                .push(row(OP, i, label, k as f64, e.value, e.stderr, e.n_samples));
        }
        tables.push(table);
    }
    Ok(Outcome {
        pass,
        detail: format!("15 residuals, largest {worst:.2} stderr"),
        tables,
    })
}

fn c8_gap_at_zero(streams: &RngStreams) -> Result<Outcome> {
    const OP: &str = "d_at_zero";
    let laws = [
        HoldingTime::exponential(2.0)?,
        HoldingTime::pareto(3.0, 1.0)?,
        HoldingTime::two_point(0.1, 1.0, 0.5)?,
        HoldingTime::deterministic(0.75)?,
    ];
    let mut table = Table::new(OP, "d_x(0) against the mean holding time");
    let mut pass = true;
    for (i, law) in laws.into_iter().enumerate() {
        let m = walk(law.clone());
        let e = estimate_d(
            &m,
            &State::scalar(0.0),
            0.0,
            10_000,
            &streams.fork(OP).fork_index(i as u64),
        )?;
        pass &= e.within(law.mean(), 3.0);
        table.rows.push(row(
            OP,
            law.name(),
            format!("mean {}", law.mean()),
            0.0,
            e.value,
            e.stderr,
            e.n_samples,
        ));
    }
    Ok(Outcome {
        pass,
        detail: table
            .rows
            .iter()
            .map(|r| format!("{} {:.4}", r.u, r.value))
            .collect::<Vec<_>>()
            .join("; "),
        tables: vec![table],
    })
}

type Criterion = fn(&RngStreams) -> Result<Outcome>;

const CRITERIA: [(&str, Criterion, Option<Duration>); 8] = [
    ("counterexample plateau", c1_plateau, Some(Duration::from_secs(10))),
    ("counterexample submartingale inequality", c2_submartingale, None),
    ("memoryless jump gap", c3_memoryless, Some(Duration::from_secs(30))),
    ("closed forms against quadrature", c4_closed_forms, None),
    ("jump gap below the overshoot bound", c5_bound, None),
    ("w' against the grid oracle", c6_w_prime, Some(Duration::from_secs(60))),
    ("martingale residuals", c7_martingale, None),
    ("jump gap at t = 0 equals the mean", c8_gap_at_zero, None),
];

struct Run {
    outcomes: Vec<Result<Outcome>>,
    elapsed: Vec<Duration>,
}

fn run_all(threads: usize) -> Run {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let streams = RngStreams::new(SEED);
        let mut run = Run {
            outcomes: Vec::new(),
            elapsed: Vec::new(),
        };
        for (_, f, _) in CRITERIA {
            let start = Instant::now();
            run.outcomes.push(f(&streams));
            run.elapsed.push(start.elapsed());
        }
        run
    })
}

fn json(run: &Run) -> Vec<String> {
    run.outcomes
        .iter()
        .map(|o| match o {
            Ok(o) => serde_json::to_string(&o.tables).unwrap(),
            Err(e) => format!("error: {e}"),
        })
        .collect()
}

fn main() {
    let mut all = true;
    let first = run_all(1);
    for (i, ((name, _, limit), (outcome, elapsed))) in CRITERIA
        .iter()
        .zip(first.outcomes.iter().zip(&first.elapsed))
        .enumerate()
    {
        let secs = elapsed.as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(o) => {
                let in_time = limit.is_none_or(|l| *elapsed <= l);
                let timing = match limit {
                    Some(l) => format!("{secs:.2} s, limit {} s", l.as_secs()),
                    None => format!("{secs:.2} s"),
                };
                (o.pass && in_time, format!("{} ({timing})", o.detail))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        all &= pass;
        println!("{} {}. {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    let second = run_all(8);
    let (a, b) = (json(&first), json(&second));
    let differing: Vec<usize> = (0..a.len()).filter(|i| a[*i] != b[*i]).map(|i| i + 1).collect();
    let pass = differing.is_empty();
    all &= pass;
    let bytes: usize = a.iter().map(String::len).sum();
    println!(
        "{} 9. identical JSON on 1 and 8 workers: {}",
        if pass { "PASS" } else { "FAIL" },
        if pass {
            format!("{bytes} bytes compared")
        } else {
            format!("criteria {differing:?} differ")
        }
    );
    if !all {
        std::process::exit(1);
    }
}
