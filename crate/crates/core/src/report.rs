//! Diagnostic tables and their CSV / JSON encodings.
//!
//! CSV files are UTF-8 with a header row; floats are written with 17
//! significant digits and non-finite values as `inf`, `-inf` or `nan`. In JSON,
//! non-finite values are encoded as the strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt;
use std::io::Write;

use serde::{Serialize, Serializer};

use crate::error::Result;

/// Finite-sample verdict on a limit condition. Never a proof.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS-evidence")]
    PassEvidence,
    #[serde(rename = "FAIL-evidence")]
    FailEvidence,
    #[serde(rename = "insufficient")]
    Insufficient,
    #[serde(rename = "informational")]
    Informational,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::PassEvidence
        } else {
            Verdict::FailEvidence
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::PassEvidence => "PASS-evidence",
            Verdict::FailEvidence => "FAIL-evidence",
            Verdict::Insufficient => "insufficient",
            Verdict::Informational => "informational",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

pub(crate) fn ser_ext<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&fmt_f64(*v))
    }
}

/// `f64` that serializes non-finite values as strings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ser_ext(&self.0, s)
    }
}

/// One line of a diagnostic table.
///
/// `u` is the family index (or another row label), `x` the state or stratum,
/// and `t` the grid parameter of the operation (time, level, step or δ).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub op: String,
    pub u: String,
    pub x: String,
    #[serde(serialize_with = "ser_ext")]
    pub t: f64,
    #[serde(serialize_with = "ser_ext")]
    pub value: f64,
    #[serde(serialize_with = "ser_ext")]
    pub stderr: f64,
    pub n: u64,
    pub censored: u64,
    pub verdict: Option<Verdict>,
}

/// Where a FAIL-evidence verdict was triggered.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub u: String,
    pub x: String,
    #[serde(serialize_with = "ser_ext")]
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub op: String,
    pub label: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
    pub rows: Vec<Row>,
}

pub const CSV_HEADER: &str = "op,u,x,t,value,stderr,n,censored,verdict";

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    pub fn new(op: impl Into<String>, label: impl Into<String>) -> Self {
        Table {
            op: op.into(),
            label: label.into(),
            verdict: Verdict::Informational,
            witness: None,
            notes: vec!["finite-sample evidence, not a proof".to_string()],
            rows: Vec::new(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                csv_cell(&r.op),
                csv_cell(&r.u),
                csv_cell(&r.x),
                fmt_f64(r.t),
                fmt_f64(r.value),
                fmt_f64(r.stderr),
                r.n,
                r.censored,
                r.verdict.map(|v| v.as_str()).unwrap_or("")
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn rows_for<'a>(&'a self, u: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.u == u)
    }
}
