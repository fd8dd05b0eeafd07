//! Inequality reports and their JSON/CSV serialization.
//!
//! JSON output has a fixed field order and prints every float with 17
//! significant digits (`{:.16e}`), so identical runs give byte-identical files.

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    /// Gap in `(-10·tol, -tol)`: a theorem cannot fail, so this asks for a
    /// tolerance or quadrature refinement rather than declaring a violation.
    Inconclusive,
    Failed,
}

impl Status {
    pub fn classify(gap: f64, tolerance: f64) -> Self {
        if gap >= -tolerance {
            Status::Passed
        } else if gap > -10.0 * tolerance {
            Status::Inconclusive
        } else {
            Status::Failed
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportParams {
    #[serde(serialize_with = "opt_f64")]
    pub p: Option<f64>,
    pub dim: usize,
    /// Number of stored terms (or segments for step functions).
    #[serde(rename = "N")]
    pub n: usize,
    /// Truncation length actually used.
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: Option<u64>,
}

/// One (N, ratio) point of a probe trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "f64_17")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub status: Status,
    pub passed: bool,
    /// `λ_min(RHS − LHS)` for Loewner checks, `RHS − LHS` for scalar checks.
    #[serde(serialize_with = "f64_17")]
    pub gap: f64,
    /// `Tr LHS / Tr RHS` with the constant included in RHS; absent when `Tr RHS = 0`.
    #[serde(serialize_with = "opt_f64")]
    pub ratio: Option<f64>,
    #[serde(serialize_with = "f64_17")]
    pub lhs_trace: f64,
    #[serde(serialize_with = "f64_17")]
    pub rhs_trace: f64,
    #[serde(serialize_with = "f64_17")]
    pub tolerance: f64,
    pub params: ReportParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TracePoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityReport {
    pub fn new(
        name: impl Into<String>,
        gap: f64,
        tolerance: f64,
        lhs_trace: f64,
        rhs_trace: f64,
        params: ReportParams,
    ) -> Self {
        let status = Status::classify(gap, tolerance);
        let ratio = (rhs_trace > 0.0).then(|| lhs_trace / rhs_trace);
        Self {
            name: name.into(),
            status,
            passed: status == Status::Passed,
            gap,
            ratio,
            lhs_trace,
            rhs_trace,
            tolerance,
            params,
            trace: None,
            note: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.params.seed = Some(seed);
        self
    }
}

fn f64_17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = RawValue::from_string(format!("{x:.16e}")).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_none()
    }
}

fn opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => f64_17(v, s),
        None => s.serialize_none(),
    }
}

/// Serializes a slice of floats with the fixed 17-digit format.
pub(crate) fn f64_slice_17<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    struct One(f64);
    impl Serialize for One {
        fn serialize<S2: Serializer>(&self, s: S2) -> std::result::Result<S2::Ok, S2::Error> {
            f64_17(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&One(x))?;
    }
    seq.end()
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Input(e.to_string()))
}

pub const CSV_COLUMNS: [&str; 9] = ["name", "p", "dim", "N", "M", "seed", "gap", "ratio", "passed"];

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// One row per report; floats with 17 significant digits, absent values empty.
pub fn to_csv(reports: &[InequalityReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Input(e.to_string());
    w.write_record(CSV_COLUMNS).map_err(err)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.params.p.map(fmt_num).unwrap_or_default(),
            r.params.dim.to_string(),
            r.params.n.to_string(),
            r.params.m.to_string(),
            r.params.seed.map(|s| s.to_string()).unwrap_or_default(),
            fmt_num(r.gap),
            r.ratio.map(fmt_num).unwrap_or_default(),
            r.passed.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Input(e.to_string()))
}
