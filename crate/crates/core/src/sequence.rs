//! Finitely supported operator sequences and the Hardy averaging operator.
//!
//! A sequence `a = (a_1, …, a_N)` of PSD matrices stands for the infinite
//! sequence with `a_n = 0` for `n > N`.

use crate::error::{Error, Result};
use crate::symcore::{SymMatrix, ToleranceSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSequence {
    dim: usize,
    terms: Vec<SymMatrix>,
}

impl OperatorSequence {
    /// Validates a non-empty list of same-dimension PSD terms.
    pub fn new(terms: Vec<SymMatrix>, tol: &ToleranceSpec) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Input("a sequence needs at least one term".into()))?;
        let dim = first.dim();
        for (i, t) in terms.iter().enumerate() {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: t.dim(),
                }
                .at_term(i));
            }
            let eig = t.eigh().map_err(|e| e.at_term(i))?;
            let threshold = tol.threshold(eig.spectral_radius());
            if eig.eigenvalues[0] < -threshold {
                return Err(Error::NotPsd {
                    eigenvalue: eig.eigenvalues[0],
                    threshold,
                }
                .at_term(i));
            }
        }
        Ok(Self { dim, terms })
    }

    /// Skips the PSD check; callers guarantee the invariant by construction.
    pub(crate) fn from_terms_unchecked(terms: Vec<SymMatrix>) -> Self {
        debug_assert!(!terms.is_empty());
        Self {
            dim: terms[0].dim(),
            terms,
        }
    }

    /// Dimension-1 sequence from non-negative scalars.
    pub fn scalars(values: &[f64]) -> Result<Self> {
        if let Some(i) = values.iter().position(|&v| !(v >= 0.0)) {
            return Err(Error::NotPsd {
                eigenvalue: values[i],
                threshold: 0.0,
            }
            .at_term(i));
        }
        if values.is_empty() {
            return Err(Error::Input("a sequence needs at least one term".into()));
        }
        Ok(Self::from_terms_unchecked(
            values.iter().map(|&v| SymMatrix::scalar(v)).collect(),
        ))
    }

    pub fn zeros(dim: usize, len: usize) -> Self {
        assert!(len >= 1);
        Self::from_terms_unchecked(vec![SymMatrix::zeros(dim); len])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[SymMatrix] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<SymMatrix> {
        self.terms
    }

    /// `t·a`, `t ≥ 0`.
    pub fn scaled(&self, t: f64) -> Self {
        assert!(t >= 0.0, "scaling must preserve positivity");
        Self::from_terms_unchecked(self.terms.iter().map(|a| a.scaled(t)).collect())
    }

    /// Termwise `(a_n + b_n)/2`; the shorter sequence is zero-padded.
    pub fn midpoint(&self, other: &OperatorSequence) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let len = self.len().max(other.len());
        let a = self.truncate_extend(len);
        let b = other.truncate_extend(len);
        Ok(Self::from_terms_unchecked(
            a.terms
                .iter()
                .zip(&b.terms)
                .map(|(x, y)| (x + y).scaled(0.5))
                .collect(),
        ))
    }

    /// Running averages `(1/n)·Σ_{k≤n} a_k`, one addition per step.
    pub fn hardy_transform(&self) -> Self {
        let mut running = SymMatrix::zeros(self.dim);
        let out = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                running.add_assign(a);
                running.scaled(1.0 / (i + 1) as f64)
            })
            .collect();
        Self::from_terms_unchecked(out)
    }

    /// `Σ_n a_n^p` over the stored terms.
    pub fn power_sum(&self, p: f64) -> Result<SymMatrix> {
        self.power_sum_with(p, &ToleranceSpec::default())
    }

    pub fn power_sum_with(&self, p: f64, tol: &ToleranceSpec) -> Result<SymMatrix> {
        if !(p > 0.0) {
            return Err(Error::ParameterRange(format!("power sum needs p > 0, got {p}")));
        }
        let mut sum = SymMatrix::zeros(self.dim);
        for (i, a) in self.terms.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ap = a.pow_with(p, tol).map_err(|e| e.at_term(i))?;
            sum.add_assign(&ap);
        }
        Ok(sum)
    }

    /// First `min(N, M)` terms, zero-padded up to length `M`.
    pub fn truncate_extend(&self, m: usize) -> Self {
        assert!(m >= 1, "truncation length must be at least 1");
        let mut terms: Vec<SymMatrix> = self.terms.iter().take(m).cloned().collect();
        terms.resize(m, SymMatrix::zeros(self.dim));
        Self::from_terms_unchecked(terms)
    }

    /// Sum of the traces of the terms.
    pub fn trace_sum(&self) -> f64 {
        self.terms.iter().map(SymMatrix::trace).sum()
    }
}
