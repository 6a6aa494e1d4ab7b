//! The `smtight` command line.
//!
//! ```text
//! smtight run --config exp.toml [--seed N] [--out DIR] [--workers N] [--format csv|json|both]
//! smtight validate --config exp.toml
//! smtight list-ops
//! smtight <op-name> --config exp.toml ...
//! ```
//!
//! Exit codes: 0 for PASS-evidence, informational or insufficient results,
//! 2 for FAIL-evidence, 1 for usage, config and runtime errors.

pub mod config;
mod ops;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{load_config, parse_config, ExperimentConfig, OpConfig, SCHEMA_VERSION};
pub use ops::{overall_verdict, run_op, OpInfo, OpOutput, OPS};

use crate::error::{Error, Result};
use crate::report::{Table, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config `out`, default `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Size of the rayon pool. Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    pub format: OutputFormat,
}

#[derive(Debug, Parser)]
#[command(
    name = "smtight",
    version,
    about = "Semi-Markov simulation and tightness diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the op named in the config.
    Run(RunArgs),
    /// Parse and check a config without simulating.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the available ops.
    ListOps,
    /// `<op-name> --config ...`: run a config whose op has that name.
    #[command(external_subcommand)]
    Op(Vec<OsString>),
}

#[derive(Debug, Parser)]
#[command(name = "smtight")]
struct OpCli {
    #[command(flatten)]
    args: RunArgs,
}

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct Provenance {
    seed: u64,
    config_hash: String,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    tool: Tool,
    provenance: Provenance,
    op: &'a str,
    verdict: Verdict,
    results: std::collections::BTreeMap<&'a str, &'a [Table]>,
}

/// Result of [`execute`]: the tables, their verdict and the rendered report.
#[derive(Debug)]
pub struct Execution {
    pub op: &'static str,
    pub verdict: Verdict,
    pub output: OpOutput,
    pub report_json: String,
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs a config and renders `report.json` in memory.
pub fn execute(config: &ExperimentConfig, config_bytes: &[u8]) -> Result<Execution> {
    let output = run_op(config)?;
    let verdict = overall_verdict(&output.tables);
    let op = config.op.name();
    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool: Tool {
            name: "smtight",
            version: env!("CARGO_PKG_VERSION"),
        },
        provenance: Provenance {
            seed: config.seed,
            config_hash: config_hash(config_bytes),
        },
        op,
        verdict,
        results: [(op, output.tables.as_slice())].into_iter().collect(),
    };
    let report_json = serde_json::to_string_pretty(&report)?;
    Ok(Execution {
        op,
        verdict,
        output,
        report_json,
    })
}

fn table_file_name(op: &str, i: usize, count: usize) -> String {
    if count == 1 {
        format!("{op}.csv")
    } else {
        format!("{op}_{i}.csv")
    }
}

/// Writes the report, one CSV per table and the auxiliary files into `dir`.
pub fn write_outputs(exec: &Execution, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, bytes)?;
        written.push(p);
        Ok(())
    };
    if format != OutputFormat::Csv {
        put("report.json", exec.report_json.as_bytes())?;
    }
    if format != OutputFormat::Json {
        let count = exec.output.tables.len();
        for (i, t) in exec.output.tables.iter().enumerate() {
            put(&table_file_name(exec.op, i, count), t.to_csv_string().as_bytes())?;
        }
        for (name, bytes) in &exec.output.files {
            put(name, bytes)?;
        }
    }
    Ok(written)
}

pub fn exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::FailEvidence => EXIT_FAIL,
        _ => EXIT_OK,
    }
}

fn run(args: &RunArgs, expected_op: Option<&str>, stdout: &mut dyn Write) -> Result<i32> {
    let path = args.config.as_ref().ok_or_else(|| Error::Config {
        path: String::new(),
        message: "--config is required".into(),
    })?;
    let (mut config, bytes) = load_config(path)?;
    if let Some(name) = expected_op {
        if config.op.name() != name {
            return Err(Error::Config {
                path: "op.name".into(),
                message: format!("config runs `{}`, not `{name}`", config.op.name()),
            });
        }
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let exec = match args.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config {
                    path: "--workers".into(),
                    message: e.to_string(),
                })?;
            pool.install(|| execute(&config, &bytes))?
        }
        None => execute(&config, &bytes)?,
    };
    write_outputs(&exec, &out, args.format)?;
    for t in &exec.output.tables {
        writeln!(stdout, "{}: {} ({} rows)", t.op, t.verdict, t.rows.len())?;
        if let Some(w) = &t.witness {
            writeln!(stdout, "  witness u={} x={} t={}: {}", w.u, w.x, w.t, w.reason)?;
        }
    }
    writeln!(stdout, "verdict: {}; outputs in {}", exec.verdict, out.display())?;
    Ok(exit_code(exec.verdict))
}

fn list_ops(stdout: &mut dyn Write) -> Result<()> {
    let width = OPS.iter().map(|o| o.name.len()).max().unwrap_or(0);
    for o in OPS {
        writeln!(stdout, "{:width$}  {}", o.name, o.summary)?;
    }
    Ok(())
}

/// Entry point behind the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    main_with_io(args, &mut stdout, &mut std::io::stderr())
}

pub fn main_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(&args, None, stdout),
        Command::Validate { config } => load_config(&config).and_then(|(c, _)| {
            writeln!(stdout, "{}: ok ({})", config.display(), c.op.name())?;
            Ok(EXIT_OK)
        }),
        Command::ListOps => list_ops(stdout).map(|_| EXIT_OK),
        Command::Op(argv) => {
            let name = argv[0].to_string_lossy().into_owned();
            if !OPS.iter().any(|o| o.name == name) {
                let _ = writeln!(stderr, "error: unknown op or command `{name}`; see `smtight list-ops`");
                return EXIT_ERROR;
            }
            match OpCli::try_parse_from(&argv) {
                Ok(op) => run(&op.args, Some(&name), stdout),
                Err(e) => {
                    let _ = write!(stderr, "{}", e.render());
                    return EXIT_ERROR;
                }
            }
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut argv = vec!["smtight"];
        argv.extend_from_slice(args);
        let code = main_with_io(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn no_arguments_is_a_usage_error() {
        let (code, _, err) = run_cli(&[]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn list_ops_prints_every_op() {
        let (code, out, _) = run_cli(&["list-ops"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), OPS.len());
        assert!(out.starts_with("apply_l"));
    }

    #[test]
    fn unknown_op_is_rejected() {
        let (code, _, err) = run_cli(&["frobnicate", "--config", "x.toml"]);
        assert_eq!(code, EXIT_ERROR);
        assert!(err.contains("frobnicate"));
    }

    #[test]
    fn config_hash_is_sha256_hex() {
        assert_eq!(
            config_hash(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
