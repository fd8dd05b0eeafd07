//! Operator power means, the tracial geometric mean and the `Φ_p` functional.
//!
//! `M_p(a_1, …, a_n) = ((1/n)·Σ a_k^{1/p})^p`. For large `p` the average
//! `(1/n)·Σ a_k^{1/p}` is a tiny perturbation of the identity, so it is kept
//! as `D = (1/n)·Σ (a_k^{1/p} − I)` with `a^{1/p} − I` evaluated through
//! `expm1(ln λ / p)`, and `M_p = exp(p·log1p(D))`. This keeps full relative
//! precision up to `p = 2⁴⁰`.

pub mod properties;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::OperatorSequence;
use crate::symcore::{EigenDecomposition, SymMatrix, ToleranceSpec};

/// Smallest eigenvalue accepted by the log-exp formula.
pub const STRICT_POSITIVITY_FLOOR: f64 = 1e-10;

/// Allowed relative increase of `Tr M_p` between consecutive exponents
/// before the sequence is declared non-monotone.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TgMode {
    Limit,
    LogExp,
}

/// Exponents along which the `p → ∞` limit is followed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSchedule {
    exponents: Vec<f64>,
    pub cauchy_tol: f64,
}

impl Default for PSchedule {
    /// `p = 2^k` for `k = 0..=40`, relative Cauchy tolerance `1e-7`.
    fn default() -> Self {
        Self::powers_of_two(40, 1e-7)
    }
}

impl PSchedule {
    pub fn new(exponents: Vec<f64>, cauchy_tol: f64) -> Result<Self> {
        if exponents.is_empty() || exponents.iter().any(|&p| !(p >= 1.0)) {
            return Err(Error::ParameterRange("schedule exponents must be >= 1".into()));
        }
        if exponents.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::ParameterRange("schedule exponents must increase".into()));
        }
        if !(cauchy_tol > 0.0) {
            return Err(Error::ParameterRange("cauchy_tol must be positive".into()));
        }
        Ok(Self {
            exponents,
            cauchy_tol,
        })
    }

    pub fn powers_of_two(max_k: u32, cauchy_tol: f64) -> Self {
        Self {
            exponents: (0..=max_k).map(|k| 2f64.powi(k as i32)).collect(),
            cauchy_tol,
        }
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }
}

/// Running sums `Σ_k (a_k^{1/p} − I)` for every exponent of a schedule.
/// Terms are decomposed once; prefixes can be evaluated after each push.
#[derive(Debug, Clone)]
pub struct PowerMeanAccumulator {
    dim: usize,
    exponents: Vec<f64>,
    sums: Vec<SymMatrix>,
    count: usize,
    tol: ToleranceSpec,
}

impl PowerMeanAccumulator {
    pub fn new(dim: usize, exponents: &[f64]) -> Self {
        Self {
            dim,
            exponents: exponents.to_vec(),
            sums: vec![SymMatrix::zeros(dim); exponents.len()],
            count: 0,
            tol: ToleranceSpec::default(),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn push(&mut self, a: &SymMatrix) -> Result<()> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: a.dim(),
            });
        }
        let eig = a.eigh()?;
        self.push_decomposed(&eig)
    }

    pub fn push_decomposed(&mut self, eig: &EigenDecomposition) -> Result<()> {
        let logs: Vec<f64> = eig
            .clamped_eigenvalues(&self.tol, 0.0)?
            .into_iter()
            .map(f64::ln)
            .collect();
        let mut shifted = vec![0.0; logs.len()];
        for (p, sum) in self.exponents.iter().zip(self.sums.iter_mut()) {
            for (s, l) in shifted.iter_mut().zip(&logs) {
                *s = (l / p).exp_m1();
            }
            sum.add_assign(&eig.reconstruct(&shifted));
        }
        self.count += 1;
        Ok(())
    }

    fn mean_shift(&self, idx: usize) -> Result<EigenDecomposition> {
        if self.count == 0 {
            return Err(Error::Input("power mean of an empty tuple".into()));
        }
        self.sums[idx].scaled(1.0 / self.count as f64).eigh()
    }

    fn mean_eigenvalues(&self, idx: usize, eig: &EigenDecomposition) -> Vec<f64> {
        let p = self.exponents[idx];
        eig.eigenvalues
            .iter()
            .map(|&mu| (p * mu.max(-1.0).ln_1p()).exp())
            .collect()
    }

    /// `M_p` of the pushed terms for `p = exponents[idx]`.
    pub fn mean(&self, idx: usize) -> Result<SymMatrix> {
        let eig = self.mean_shift(idx)?;
        Ok(eig.reconstruct(&self.mean_eigenvalues(idx, &eig)))
    }

    /// `Tr M_p` for `p = exponents[idx]`.
    pub fn trace_mean(&self, idx: usize) -> Result<f64> {
        let eig = self.mean_shift(idx)?;
        Ok(self.mean_eigenvalues(idx, &eig).iter().sum())
    }

    /// `Tr M_p` along the whole schedule.
    pub fn traces(&self) -> Result<Vec<f64>> {
        (0..self.exponents.len()).map(|i| self.trace_mean(i)).collect()
    }

    /// Follows `Tr M_p` along the schedule until two consecutive values agree
    /// to `cauchy_tol` (relative), checking that the values never increase.
    pub fn tg_limit(&self, cauchy_tol: f64) -> Result<TgLimit> {
        let mut trace = Vec::new();
        let mut prev: Option<f64> = None;
        for (i, &p) in self.exponents.iter().enumerate() {
            let t = self.trace_mean(i)?;
            trace.push((p, t));
            if let Some(q) = prev {
                if t > q + MONOTONE_SLACK * q.abs().max(1.0) {
                    return Err(Error::NumericalIntegrity { p, prev: q, next: t });
                }
                if (q - t).abs() <= cauchy_tol * t.abs() {
                    return Ok(TgLimit {
                        value: t,
                        p,
                        converged: true,
                        trace,
                    });
                }
            }
            prev = Some(t);
        }
        let (p, value) = *trace.last().expect("non-empty schedule");
        Ok(TgLimit {
            value,
            p,
            converged: false,
            trace,
        })
    }
}

fn common_dim(terms: &[SymMatrix]) -> Result<usize> {
    let first = terms
        .first()
        .ok_or_else(|| Error::Input("mean of an empty tuple".into()))?;
    for t in terms {
        if t.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                left: first.dim(),
                right: t.dim(),
            });
        }
    }
    Ok(first.dim())
}

/// `M_p = ((1/n)·Σ a_k^{1/p})^p`, `p ≥ 1`.
pub fn power_mean(terms: &[SymMatrix], p: f64) -> Result<SymMatrix> {
    if !(p >= 1.0) {
        return Err(Error::ParameterRange(format!("power mean needs p >= 1, got {p}")));
    }
    let mut acc = PowerMeanAccumulator::new(common_dim(terms)?, &[p]);
    for (i, t) in terms.iter().enumerate() {
        acc.push(t).map_err(|e| e.at_term(i))?;
    }
    acc.mean(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TgLimit {
    pub value: f64,
    /// Exponent at which the value was taken.
    pub p: f64,
    pub converged: bool,
    /// `(p, Tr M_p)` along the schedule up to `p`.
    pub trace: Vec<(f64, f64)>,
}

/// Tracial geometric mean as the limit of `Tr M_p`. Accepts singular PSD input.
pub fn tg_limit(terms: &[SymMatrix], schedule: &PSchedule) -> Result<TgLimit> {
    let mut acc = PowerMeanAccumulator::new(common_dim(terms)?, schedule.exponents());
    for (i, t) in terms.iter().enumerate() {
        acc.push(t).map_err(|e| e.at_term(i))?;
    }
    acc.tg_limit(schedule.cauchy_tol)
}

/// `log a` for a term that must be strictly positive.
pub(crate) fn strict_log(a: &SymMatrix, index: usize, floor: f64) -> Result<SymMatrix> {
    let eig = a.eigh().map_err(|e| e.at_term(index))?;
    let min = eig.eigenvalues[0];
    if !(min > floor) {
        return Err(Error::NotStrictlyPositive {
            index,
            eigenvalue: min,
            floor,
        });
    }
    let logs: Vec<f64> = eig.eigenvalues.iter().map(|l| l.ln()).collect();
    Ok(eig.reconstruct(&logs))
}

/// `Tr exp((1/n)·Σ log a_k)`; every term must have smallest eigenvalue
/// above [`STRICT_POSITIVITY_FLOOR`].
pub fn tg_logexp(terms: &[SymMatrix]) -> Result<f64> {
    let dim = common_dim(terms)?;
    let mut sum = SymMatrix::zeros(dim);
    for (i, t) in terms.iter().enumerate() {
        sum.add_assign(&strict_log(t, i, STRICT_POSITIVITY_FLOOR)?);
    }
    Ok(sum.scaled(1.0 / terms.len() as f64).exp()?.trace())
}

pub fn tg(terms: &[SymMatrix], mode: TgMode, schedule: &PSchedule) -> Result<f64> {
    match mode {
        TgMode::Limit => Ok(tg_limit(terms, schedule)?.value),
        TgMode::LogExp => tg_logexp(terms),
    }
}

/// `Φ_p(a) = Tr[(Σ a_n^p)^{1/p}]`, `p > 0`.
pub fn phi(a: &OperatorSequence, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::ParameterRange(format!("phi needs p > 0, got {p}")));
    }
    Ok(a.power_sum(p)?.pow(1.0 / p)?.trace())
}

/// `ln Φ_p(a)`, finite even where `Φ_p` itself overflows (small `p`);
/// `−∞` for the zero sequence.
pub fn phi_ln(a: &OperatorSequence, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::ParameterRange(format!("phi needs p > 0, got {p}")));
    }
    let tol = ToleranceSpec::default();
    let logs: Vec<f64> = a
        .power_sum(p)?
        .eigh()?
        .clamped_eigenvalues(&tol, 0.0)?
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| l.ln() / p)
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(top);
    }
    Ok(top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use crate::symcore::random_psd;
    use rand::Rng;

    fn a22() -> SymMatrix {
        SymMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap()
    }

    #[test]
    fn power_mean_examples() {
        let mut rng = rng_from(1);
        let terms: Vec<SymMatrix> = (0..3).map(|_| random_psd(3, 3, &mut rng).unwrap()).collect();
        let am = (&(&terms[0] + &terms[1]) + &terms[2]).scaled(1.0 / 3.0);
        assert!(power_mean(&terms, 1.0).unwrap().max_abs_diff(&am) < 1e-12);

        let a = a22();
        for p in [1.0, 2.0, 7.5, 1e6] {
            let m = power_mean(&[a.clone(), a.clone(), a.clone()], p).unwrap();
            assert!(m.max_abs_diff(&a) < 1e-9, "p={p}");
        }

        let m = power_mean(&[SymMatrix::scalar(1.0), SymMatrix::scalar(4.0)], 2.0).unwrap();
        assert!((m.get(0, 0) - 2.25).abs() < 1e-14);
        assert!(power_mean(std::slice::from_ref(&a), 0.5).is_err());
    }

    #[test]
    fn power_mean_matches_direct_formula() {
        let mut rng = rng_from(2);
        for _ in 0..20 {
            let dim = rng.random_range(1..5);
            let terms: Vec<SymMatrix> = (0..3).map(|_| random_psd(dim, dim, &mut rng).unwrap()).collect();
            let p = rng.random_range(1.0..6.0);
            let mut s = SymMatrix::zeros(dim);
            for t in &terms {
                s.add_assign(&t.pow(1.0 / p).unwrap());
            }
            let direct = s.scaled(1.0 / 3.0).pow(p).unwrap();
            let stable = power_mean(&terms, p).unwrap();
            assert!(stable.max_abs_diff(&direct) < 1e-10 * direct.max_abs().max(1.0));
        }
    }

    #[test]
    fn tg_limit_examples() {
        let s = PSchedule::default();
        let a = a22();
        let r = tg_limit(&[a.clone(), a.clone()], &s).unwrap();
        for &(_, t) in &r.trace {
            assert!((t - 4.0).abs() < 1e-12);
        }
        assert!(r.converged);

        let r = tg_limit(
            &[SymMatrix::from_diagonal(&[1.0, 4.0]), SymMatrix::from_diagonal(&[9.0, 16.0])],
            &s,
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.value - 11.0).abs() < 1e-5, "{}", r.value);

        let r = tg_limit(&[SymMatrix::scalar(2.0), SymMatrix::scalar(8.0)], &s).unwrap();
        assert!((r.value - 4.0).abs() < 1e-6);
        for w in r.trace.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-15);
        }
    }

    #[test]
    fn tg_limit_accepts_singular_input() {
        // commuting singular pair: the geometric mean of (1,0) and (4,1) per coordinate is (2, 0)
        let s = PSchedule::default();
        let r = tg_limit(
            &[SymMatrix::from_diagonal(&[1.0, 0.0]), SymMatrix::from_diagonal(&[4.0, 1.0])],
            &s,
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-5, "{}", r.value);
        assert!(matches!(
            tg_logexp(&[SymMatrix::from_diagonal(&[1.0, 0.0]), SymMatrix::identity(2)]),
            Err(Error::NotStrictlyPositive { index: 0, .. })
        ));
    }

    #[test]
    fn tg_logexp_examples() {
        let a = a22();
        assert!((tg_logexp(&[a.clone(), a.clone(), a.clone()]).unwrap() - 4.0).abs() < 1e-12);
        let v = tg_logexp(&[SymMatrix::from_diagonal(&[1.0, 4.0]), SymMatrix::from_diagonal(&[9.0, 16.0])]).unwrap();
        assert!((v - 11.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_validation() {
        assert!(PSchedule::new(vec![], 1e-7).is_err());
        assert!(PSchedule::new(vec![0.5, 2.0], 1e-7).is_err());
        assert!(PSchedule::new(vec![2.0, 1.0], 1e-7).is_err());
        assert!(PSchedule::new(vec![1.0, 2.0], 0.0).is_err());
        let s = PSchedule::default();
        assert_eq!(s.exponents().len(), 41);
        assert_eq!(s.exponents()[40], 2f64.powi(40));
    }

    #[test]
    fn phi_examples() {
        let a = a22();
        let single = OperatorSequence::new(vec![a.clone()], &ToleranceSpec::default()).unwrap();
        for p in [0.3, 1.0, 1.7, 4.0] {
            assert!((phi(&single, p).unwrap() - 4.0).abs() < 1e-12);
        }
        let s = OperatorSequence::scalars(&[3.0, 4.0]).unwrap();
        assert!((phi(&s, 2.0).unwrap() - 5.0).abs() < 1e-14);
        let s = OperatorSequence::new(
            vec![SymMatrix::from_diagonal(&[1.0, 0.0]), SymMatrix::from_diagonal(&[0.0, 1.0])],
            &ToleranceSpec::default(),
        )
        .unwrap();
        assert!((phi(&s, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(phi(&s, 0.0).is_err());
    }

    #[test]
    fn phi_ln_matches_and_survives_small_p() {
        let s = OperatorSequence::scalars(&[3.0, 4.0, 0.0]).unwrap();
        for p in [0.5, 1.0, 2.0] {
            assert!((phi_ln(&s, p).unwrap() - phi(&s, p).unwrap().ln()).abs() < 1e-13);
        }
        let ones = OperatorSequence::scalars(&[1.0; 6]).unwrap();
        assert!(phi(&ones, 1e-3).is_err());
        assert!((phi_ln(&ones, 1e-3).unwrap() - 1e3 * 6f64.ln()).abs() < 1e-9);
        assert_eq!(phi_ln(&OperatorSequence::zeros(2, 2), 1.0).unwrap(), f64::NEG_INFINITY);
    }
}
