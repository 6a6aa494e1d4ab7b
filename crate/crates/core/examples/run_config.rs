//! Runs a TOML experiment in-process, as `smtight run` does, and prints the report.
//!
//! `cargo run --example run_config -- configs/j_table.toml`

use semimarkov::cli::{execute, load_config};

fn main() -> semimarkov::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/j_table.toml").to_string());
    let (config, bytes) = load_config(path.as_ref())?;
    let exec = execute(&config, &bytes)?;
    println!("{}", exec.report_json);
    Ok(())
}
