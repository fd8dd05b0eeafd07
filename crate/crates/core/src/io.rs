//! JSON formats for operator sequences and step functions.
//!
//! Sequence: `{"dim": d, "terms": [[d·d row-major numbers], …]}`.
//! Step function: `{"breakpoints": [x0, …, xm], "values": [matrix, …]}` where
//! each matrix is either a flat row-major array or an array of rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::f64_slice_17;
use crate::sequence::OperatorSequence;
use crate::stepfun::StepOperatorFunction;
use crate::symcore::{SymMatrix, ToleranceSpec};

/// Largest tolerated `|m_ij − m_ji|`, relative to `max(1, max |m_ij|)`.
pub const ASYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    dim: usize,
    terms: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SequenceOut<'a> {
    dim: usize,
    terms: Vec<Flat<'a>>,
}

struct Flat<'a>(&'a [f64]);

impl Serialize for Flat<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        f64_slice_17(self.0, s)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixLiteral {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepFile {
    #[serde(default)]
    dim: Option<usize>,
    breakpoints: Vec<f64>,
    values: Vec<MatrixLiteral>,
}

#[derive(Serialize)]
struct StepOut<'a> {
    dim: usize,
    breakpoints: Flat<'a>,
    values: Vec<Flat<'a>>,
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Input(format!("line {} column {}: {e}", e.line(), e.column()))
}

/// Checks symmetry of a row-major block and returns the symmetrized matrix.
fn checked_matrix(dim: usize, entries: &[f64]) -> Result<SymMatrix> {
    if entries.len() != dim * dim {
        return Err(Error::Shape(format!(
            "expected {} entries (dim {dim}), got {}",
            dim * dim,
            entries.len()
        )));
    }
    if let Some(x) = entries.iter().find(|x| !x.is_finite()) {
        return Err(Error::Shape(format!("non-finite entry {x}")));
    }
    let scale = entries.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    for i in 0..dim {
        for j in (i + 1)..dim {
            let d = (entries[i * dim + j] - entries[j * dim + i]).abs();
            if d > ASYMMETRY_TOL * scale {
                return Err(Error::Shape(format!(
                    "entries ({i},{j}) and ({j},{i}) differ by {d:e}"
                )));
            }
        }
    }
    SymMatrix::from_row_major(dim, entries)
}

pub fn parse_sequence(text: &str, tol: &ToleranceSpec) -> Result<OperatorSequence> {
    let file: SequenceFile = serde_json::from_str(text).map_err(json_err)?;
    if file.dim == 0 {
        return Err(Error::Input("dim must be at least 1".into()));
    }
    let terms = file
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| checked_matrix(file.dim, t).map_err(|e| e.at_term(i)))
        .collect::<Result<Vec<_>>>()?;
    OperatorSequence::new(terms, tol)
}

pub fn sequence_to_json(seq: &OperatorSequence) -> Result<String> {
    let out = SequenceOut {
        dim: seq.dim(),
        terms: seq.terms().iter().map(|t| Flat(t.as_slice())).collect(),
    };
    serde_json::to_string(&out).map_err(json_err)
}

fn literal_to_matrix(lit: &MatrixLiteral, dim_hint: Option<usize>) -> Result<SymMatrix> {
    match lit {
        MatrixLiteral::Flat(v) => {
            let dim = match dim_hint {
                Some(d) => d,
                None => {
                    let d = (v.len() as f64).sqrt().round() as usize;
                    if d * d != v.len() {
                        return Err(Error::Shape(format!("{} entries is not a square count", v.len())));
                    }
                    d
                }
            };
            checked_matrix(dim, v)
        }
        MatrixLiteral::Rows(rows) => {
            let dim = rows.len();
            if let Some(d) = dim_hint.filter(|&d| d != dim) {
                return Err(Error::DimensionMismatch { left: d, right: dim });
            }
            let mut flat = Vec::with_capacity(dim * dim);
            for (i, r) in rows.iter().enumerate() {
                if r.len() != dim {
                    return Err(Error::Shape(format!("row {i} has {} entries, expected {dim}", r.len())));
                }
                flat.extend_from_slice(r);
            }
            checked_matrix(dim, &flat)
        }
    }
}

pub fn parse_step_function(text: &str, tol: &ToleranceSpec) -> Result<StepOperatorFunction> {
    let file: StepFile = serde_json::from_str(text).map_err(json_err)?;
    let values = file
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| literal_to_matrix(v, file.dim).map_err(|e| e.at_term(i)))
        .collect::<Result<Vec<_>>>()?;
    StepOperatorFunction::new(file.breakpoints, values, tol)
}

pub fn step_function_to_json(g: &StepOperatorFunction) -> Result<String> {
    let out = StepOut {
        dim: g.dim(),
        breakpoints: Flat(g.breakpoints()),
        values: g.values().iter().map(|v| Flat(v.as_slice())).collect(),
    };
    serde_json::to_string(&out).map_err(json_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use crate::symcore::random_psd;

    #[test]
    fn scalar_sequence_literal() {
        let s = parse_sequence(r#"{"dim":1,"terms":[[1],[0]]}"#, &ToleranceSpec::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.terms()[0].get(0, 0), 1.0);
        assert_eq!(s.terms()[1].get(0, 0), 0.0);
    }

    #[test]
    fn emit_then_load_is_bit_exact() {
        let mut rng = rng_from(9);
        let terms: Vec<SymMatrix> = (0..5).map(|_| random_psd(3, 2, &mut rng).unwrap().scaled(1.0 / 7.0)).collect();
        let s = OperatorSequence::new(terms, &ToleranceSpec::default()).unwrap();
        let text = sequence_to_json(&s).unwrap();
        let back = parse_sequence(&text, &ToleranceSpec::default()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn negative_eigenvalue_names_term() {
        let text = r#"{"dim":2,"terms":[[1,0,0,1],[1,0,0,-1e-3]]}"#;
        match parse_sequence(text, &ToleranceSpec::default()) {
            Err(Error::Term { index, source }) => {
                assert_eq!(index, 1);
                assert!(matches!(*source, Error::NotPsd { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn asymmetry_and_ragged_rows_rejected() {
        let tol = ToleranceSpec::default();
        let asym = r#"{"dim":2,"terms":[[1,0.5,0.4,1]]}"#;
        assert!(matches!(parse_sequence(asym, &tol), Err(Error::Term { index: 0, .. })));
        let ragged = r#"{"dim":2,"terms":[[1,0,0,1],[1,0,0]]}"#;
        assert!(matches!(parse_sequence(ragged, &tol), Err(Error::Term { index: 1, .. })));
        // within 1e-9 is accepted and symmetrized
        let near = r#"{"dim":2,"terms":[[1,0.5,0.5000000000001,1]]}"#;
        assert!(parse_sequence(near, &tol).is_ok());
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_sequence("{\"dim\": 1,\n \"terms\": [[1],}", &ToleranceSpec::default()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_sequence(r#"{"dim":1,"terms":[[1]],"extra":3}"#, &ToleranceSpec::default()).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn step_function_literals() {
        let tol = ToleranceSpec::default();
        let g = parse_step_function(r#"{"breakpoints":[1,2,4],"values":[[[1,0],[0,2]],[3,0,0,1]]}"#, &tol).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.values()[1].get(0, 0), 3.0);
        let back = parse_step_function(&step_function_to_json(&g).unwrap(), &tol).unwrap();
        assert_eq!(back, g);
        assert!(parse_step_function(r#"{"breakpoints":[2,1],"values":[[1]]}"#, &tol).is_err());
    }
}
