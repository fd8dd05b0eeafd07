//! Inequality checkers for operator sequences and the seeded suite runner.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::means::properties::{phi_midpoint_trial, positive_tuple, tg_dual_trial, tg_property_trial, PropertyTolerances};
use crate::means::{phi, strict_log, PSchedule, PowerMeanAccumulator, TgMode, STRICT_POSITIVITY_FLOOR};
use crate::par::map_indexed;
use crate::report::{InequalityReport, ReportParams, Status};
use crate::seed::{rng_from, trial_seed};
use crate::sequence::OperatorSequence;
use crate::stepfun::{
    check_lemma_convexity, check_lemma_tracial, check_theorem_continuous, integral_avg_power, integral_power,
    QuadratureSpec, StepOperatorFunction, Weight,
};
use crate::symcore::{loewner_leq, random_psd, SymMatrix, ToleranceSpec};

/// `(p/(p−1))^p`.
pub fn hardy_constant(p: f64) -> f64 {
    (p / (p - 1.0)).powf(p)
}

fn truncation(a: &OperatorSequence, m: Option<usize>) -> Result<usize> {
    let m = m.unwrap_or(2 * a.len());
    if m < a.len() {
        return Err(Error::ParameterRange(format!(
            "truncation M = {m} is shorter than the sequence (N = {})",
            a.len()
        )));
    }
    Ok(m)
}

fn seq_params(a: &OperatorSequence, p: Option<f64>, m: usize) -> ReportParams {
    ReportParams {
        p,
        dim: a.dim(),
        n: a.len(),
        m,
        seed: None,
    }
}

/// `Σ_{n≤M} h(a)_n^p`.
pub fn hardy_lhs(a: &OperatorSequence, p: f64, m: usize, tol: &ToleranceSpec) -> Result<SymMatrix> {
    a.truncate_extend(m).hardy_transform().power_sum_with(p, tol)
}

/// Loewner form `Σ_{n≤M} h(a)_n^p ≤ (p/(p−1))^p·Σ a_n^p`, `1 < p ≤ 2`.
/// `m` defaults to `2N`.
pub fn check_discrete_hardy(
    a: &OperatorSequence,
    p: f64,
    m: Option<usize>,
    tol: &ToleranceSpec,
) -> Result<InequalityReport> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::ParameterRange(format!(
            "the operator Hardy inequality is claimed for 1 < p <= 2, got {p}; use the tracial check for larger p"
        )));
    }
    let m = truncation(a, m)?;
    let lhs = hardy_lhs(a, p, m, tol)?;
    let rhs = a.power_sum_with(p, tol)?.scaled(hardy_constant(p));
    let cmp = loewner_leq(&lhs, &rhs, tol)?;
    Ok(InequalityReport::new(
        "discrete_hardy",
        cmp.gap,
        cmp.threshold,
        lhs.trace(),
        rhs.trace(),
        seq_params(a, Some(p), m),
    ))
}

/// Trace form of the discrete inequality, any `p > 1`.
pub fn check_tracial_hardy(
    a: &OperatorSequence,
    p: f64,
    m: Option<usize>,
    tol: &ToleranceSpec,
) -> Result<InequalityReport> {
    if !(p > 1.0) {
        return Err(Error::ParameterRange(format!("the tracial Hardy inequality needs p > 1, got {p}")));
    }
    let m = truncation(a, m)?;
    let lhs = hardy_lhs(a, p, m, tol)?.trace();
    let rhs = hardy_constant(p) * a.power_sum_with(p, tol)?.trace();
    Ok(InequalityReport::new(
        "tracial_hardy",
        rhs - lhs,
        tol.threshold(rhs),
        lhs,
        rhs,
        seq_params(a, Some(p), m),
    ))
}

/// `Φ_p(h(a)) ≤ p/(p−1)·Φ_p(a)`, `1 < p ≤ 2`; `h(a)` is taken over `M` terms.
pub fn check_phi_bound(
    a: &OperatorSequence,
    p: f64,
    m: Option<usize>,
    tol: &ToleranceSpec,
) -> Result<InequalityReport> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::ParameterRange(format!("the Φ_p bound needs 1 < p <= 2, got {p}")));
    }
    let m = truncation(a, m)?;
    let lhs = phi(&a.truncate_extend(m).hardy_transform(), p)?;
    let rhs = p / (p - 1.0) * phi(a, p)?;
    Ok(InequalityReport::new(
        "phi_bound",
        rhs - lhs,
        tol.threshold(rhs),
        lhs,
        rhs,
        seq_params(a, Some(p), m),
    ))
}

/// Prefix tracial geometric means `TG(a_1, …, a_n)` for `n = 1..=N`.
pub fn prefix_tg(a: &OperatorSequence, mode: TgMode, schedule: &PSchedule) -> Result<Vec<f64>> {
    match mode {
        TgMode::LogExp => {
            let mut logs = SymMatrix::zeros(a.dim());
            a.terms()
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    logs.add_assign(&strict_log(t, i, STRICT_POSITIVITY_FLOOR)?);
                    Ok(logs.scaled(1.0 / (i + 1) as f64).exp()?.trace())
                })
                .collect()
        }
        TgMode::Limit => {
            let mut acc = PowerMeanAccumulator::new(a.dim(), schedule.exponents());
            a.terms()
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    acc.push(t).map_err(|e| e.at_term(i))?;
                    Ok(acc.tg_limit(schedule.cauchy_tol)?.value)
                })
                .collect()
        }
    }
}

/// `Σ_{n≤N} TG(a_1, …, a_n) ≤ e·Σ_{n≤N} Tr a_n`.
pub fn check_carleman(
    a: &OperatorSequence,
    tol: &ToleranceSpec,
    mode: TgMode,
    schedule: &PSchedule,
) -> Result<InequalityReport> {
    let lhs: f64 = prefix_tg(a, mode, schedule)?.iter().sum();
    let rhs = std::f64::consts::E * a.trace_sum();
    let name = match mode {
        TgMode::Limit => "carleman_limit",
        TgMode::LogExp => "carleman_logexp",
    };
    Ok(InequalityReport::new(
        name,
        rhs - lhs,
        tol.threshold(rhs),
        lhs,
        rhs,
        seq_params(a, None, a.len()),
    ))
}

/// Checker names understood by [`run_suite`].
pub const CHECKERS: &[&str] = &[
    "discrete_hardy",
    "tracial_hardy",
    "phi_bound",
    "carleman_logexp",
    "carleman_limit",
    "lemma_convexity",
    "lemma_tracial",
    "theorem_continuous",
    "theorem_continuous_tracial",
    "fubini",
    "quadrature_doubling",
    "tg_dual",
    "tg_properties",
    "phi_concave",
    "phi_convex",
];

/// Whether `p` lies in the range the checker is stated for; `None` when the
/// checker takes no exponent.
pub fn p_admissible(checker: &str, p: f64) -> Option<bool> {
    let ok = match checker {
        "discrete_hardy" | "phi_bound" | "theorem_continuous" => p > 1.0 && p <= 2.0,
        "tracial_hardy" | "theorem_continuous_tracial" => p > 1.0 && p.is_finite(),
        "lemma_convexity" | "phi_convex" => (1.0..=2.0).contains(&p),
        "lemma_tracial" | "quadrature_doubling" => p >= 1.0 && p.is_finite(),
        "phi_concave" => p > 0.0 && p <= 1.0,
        _ => return None,
    };
    Some(ok)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub checker: String,
    pub trials: usize,
    /// Dimensions sampled uniformly.
    pub dims: Vec<usize>,
    /// Upper bound on sequence length (or step-function segments).
    pub max_terms: usize,
    /// `p` is drawn uniformly from `(lo, hi]`.
    #[serde(default)]
    pub p_range: Option<(f64, f64)>,
    /// Draw `p` from this list instead of `p_range`.
    #[serde(default)]
    pub p_grid: Option<Vec<f64>>,
    /// Absolute truncation length; `2N` when absent.
    #[serde(default)]
    pub truncation: Option<usize>,
    pub tol: f64,
}

impl CheckSpec {
    pub fn new(checker: &str, trials: usize, max_dim: usize, max_terms: usize, p_range: Option<(f64, f64)>, tol: f64) -> Self {
        Self {
            checker: checker.into(),
            trials,
            dims: (1..=max_dim).collect(),
            max_terms,
            p_range,
            p_grid: None,
            truncation: None,
            tol,
        }
    }

    fn sample_p<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let Some(grid) = self.p_grid.as_ref().filter(|g| !g.is_empty()) {
            return grid[rng.random_range(0..grid.len())];
        }
        let (lo, hi) = self.p_range.unwrap_or((1.0, 2.0));
        let u: f64 = rng.random();
        hi - u * (hi - lo)
    }

    fn sample_dim<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.dims.is_empty() {
            1
        } else {
            self.dims[rng.random_range(0..self.dims.len())]
        }
    }

    fn sample_len<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let max = match self.truncation {
            Some(m) => self.max_terms.min(m),
            None => self.max_terms,
        };
        rng.random_range(1..=max.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub seed: u64,
    pub checks: Vec<CheckSpec>,
}

impl SuiteSpec {
    pub fn empty(seed: u64) -> Self {
        Self {
            seed,
            checks: Vec::new(),
        }
    }

    /// The full verification suite, sized like the acceptance criteria.
    pub fn default_suite(seed: u64) -> Self {
        let c = CheckSpec::new;
        Self {
            seed,
            checks: vec![
                c("discrete_hardy", 1000, 6, 64, Some((1.0, 2.0)), 1e-8),
                c("tracial_hardy", 1000, 6, 64, Some((1.0, 8.0)), 1e-8),
                c("phi_bound", 500, 6, 32, Some((1.0, 2.0)), 1e-8),
                c("carleman_logexp", 500, 4, 24, None, 1e-8),
                c("carleman_limit", 500, 4, 24, None, 1e-8),
                c("lemma_convexity", 200, 4, 8, Some((1.0, 2.0)), 1e-8),
                c("lemma_tracial", 200, 4, 8, Some((1.0, 8.0)), 1e-8),
                c("theorem_continuous", 200, 4, 8, Some((1.0, 2.0)), 1e-8),
                c("theorem_continuous_tracial", 200, 4, 8, Some((1.0, 8.0)), 1e-8),
                c("fubini", 200, 4, 8, None, 1e-7),
                c("quadrature_doubling", 200, 4, 8, Some((1.0, 8.0)), 1e-9),
                c("tg_dual", 200, 5, 5, None, 1e-4),
                c("tg_properties", 500, 4, 4, None, 1e-7),
                c("phi_concave", 500, 4, 6, Some((0.0, 1.0)), 1e-7),
                c("phi_convex", 500, 4, 6, Some((1.0, 2.0)), 1e-7),
            ],
        }
    }

    /// Same checkers with a tenth of the trials.
    pub fn quick_suite(seed: u64) -> Self {
        let mut s = Self::default_suite(seed);
        for c in &mut s.checks {
            c.trials = (c.trials / 10).max(1);
        }
        s
    }

    pub fn named(name: &str, seed: u64) -> Result<Self> {
        match name {
            "default" => Ok(Self::default_suite(seed)),
            "quick" => Ok(Self::quick_suite(seed)),
            "empty" => Ok(Self::empty(seed)),
            other => {
                let full = Self::default_suite(seed);
                let checks: Vec<CheckSpec> = full.checks.into_iter().filter(|c| c.checker == other).collect();
                if checks.is_empty() {
                    Err(Error::UnknownChecker(other.into()))
                } else {
                    Ok(Self { seed, checks })
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckerSummary {
    pub checker: String,
    pub reports: usize,
    pub passed: usize,
    pub inconclusive: usize,
    pub failed: usize,
    pub min_gap: f64,
    /// Smallest `gap / tolerance`; below −1 means a failed check.
    pub min_normalized_gap: f64,
    pub max_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<InequalityReport>,
    pub summaries: Vec<CheckerSummary>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

fn random_sequence<R: Rng + ?Sized>(dim: usize, len: usize, rng: &mut R) -> Result<OperatorSequence> {
    let terms = (0..len)
        .map(|_| {
            if rng.random::<f64>() < 0.1 {
                return Ok(SymMatrix::zeros(dim));
            }
            let rank = rng.random_range(1..=dim);
            let scale = rng.random_range(-2.0_f64..2.0).exp();
            Ok(random_psd(dim, rank, rng)?.scaled(scale))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OperatorSequence::from_terms_unchecked(terms))
}

/// Random step function: `x₀` log-uniform in `[0.05, 2]`, segment lengths
/// log-uniform in `[0.05, 3]`, values random PSD of random rank (10% zero).
pub fn random_step_function<R: Rng + ?Sized>(dim: usize, segments: usize, rng: &mut R) -> Result<StepOperatorFunction> {
    let mut bps = vec![rng.random_range(0.05_f64.ln()..2.0_f64.ln()).exp()];
    for _ in 0..segments {
        let last = *bps.last().unwrap();
        bps.push(last + rng.random_range(0.05_f64.ln()..3.0_f64.ln()).exp());
    }
    let values = (0..segments)
        .map(|_| {
            if rng.random::<f64>() < 0.1 {
                return Ok(SymMatrix::zeros(dim));
            }
            let rank = rng.random_range(1..=dim);
            Ok(random_psd(dim, rank, rng)?.scaled(rng.random_range(-1.0_f64..1.0).exp()))
        })
        .collect::<Result<Vec<_>>>()?;
    StepOperatorFunction::new(bps, values, &ToleranceSpec::default())
}

/// Relative change of `integral_avg_power` when the node count doubles.
pub fn quadrature_doubling_change(g: &StepOperatorFunction, p: f64, weight: Weight, quad: &QuadratureSpec) -> Result<f64> {
    let a = integral_avg_power(g, p, weight, quad)?;
    let b = integral_avg_power(g, p, weight, &quad.doubled())?;
    Ok(a.max_abs_diff(&b) / a.max_abs().max(f64::MIN_POSITIVE))
}

fn run_trial(spec: &CheckSpec, seed: u64) -> Result<Vec<InequalityReport>> {
    let mut rng = rng_from(seed);
    let tol = ToleranceSpec::new(spec.tol);
    let quad = QuadratureSpec::default();
    let schedule = PSchedule::default();
    let reports = match spec.checker.as_str() {
        "discrete_hardy" | "tracial_hardy" | "phi_bound" => {
            let dim = spec.sample_dim(&mut rng);
            let len = spec.sample_len(&mut rng);
            let p = spec.sample_p(&mut rng);
            let a = random_sequence(dim, len, &mut rng)?;
            let m = spec.truncation.or(Some(2 * len));
            vec![match spec.checker.as_str() {
                "discrete_hardy" => check_discrete_hardy(&a, p, m, &tol)?,
                "tracial_hardy" => check_tracial_hardy(&a, p, m, &tol)?,
                _ => check_phi_bound(&a, p, m, &tol)?,
            }]
        }
        "carleman_logexp" | "carleman_limit" => {
            let dim = spec.sample_dim(&mut rng);
            let len = spec.sample_len(&mut rng);
            let a = OperatorSequence::from_terms_unchecked(positive_tuple(len, dim, 1e-2, &mut rng));
            let mode = if spec.checker == "carleman_limit" { TgMode::Limit } else { TgMode::LogExp };
            vec![check_carleman(&a, &tol, mode, &schedule)?]
        }
        "lemma_convexity" | "lemma_tracial" | "theorem_continuous" | "theorem_continuous_tracial" | "fubini"
        | "quadrature_doubling" => {
            let dim = spec.sample_dim(&mut rng);
            let segs = spec.sample_len(&mut rng);
            let p = spec.sample_p(&mut rng);
            let g = random_step_function(dim, segs, &mut rng)?;
            match spec.checker.as_str() {
                "lemma_convexity" => vec![check_lemma_convexity(&g, p, &tol, &quad)?],
                "lemma_tracial" => vec![check_lemma_tracial(&g, p, &tol, &quad)?],
                "theorem_continuous" => vec![check_theorem_continuous(&g, p, &tol, false, &quad)?],
                "theorem_continuous_tracial" => vec![check_theorem_continuous(&g, p, &tol, true, &quad)?],
                "fubini" => {
                    let lhs = integral_avg_power(&g, 1.0, Weight::DxOverX, &quad)?;
                    let rhs = integral_power(&g, 1.0, Weight::DxOverX)?;
                    let err = lhs.max_abs_diff(&rhs);
                    vec![InequalityReport::new(
                        "fubini",
                        -err,
                        tol.threshold(rhs.max_abs()),
                        lhs.trace(),
                        rhs.trace(),
                        ReportParams {
                            p: Some(1.0),
                            dim,
                            n: segs,
                            m: g.quadrature_node_count(&quad),
                            seed: None,
                        },
                    )]
                }
                _ => {
                    let mut out = Vec::with_capacity(2);
                    for weight in [Weight::DxOverX, Weight::Dx] {
                        let q = if weight == Weight::Dx { p.max(1.0 + 1e-3) } else { p };
                        let change = quadrature_doubling_change(&g, q, weight, &quad)?;
                        out.push(InequalityReport::new(
                            "quadrature_doubling",
                            -change,
                            spec.tol,
                            change,
                            0.0,
                            ReportParams {
                                p: Some(q),
                                dim,
                                n: segs,
                                m: g.quadrature_node_count(&quad),
                                seed: None,
                            },
                        ));
                    }
                    out
                }
            }
        }
        "tg_dual" => tg_dual_trial(&mut rng, &schedule)?,
        "tg_properties" => tg_property_trial(&mut rng, TgMode::LogExp, &schedule, PropertyTolerances::default())?,
        "phi_concave" | "phi_convex" => {
            let p = spec.sample_p(&mut rng);
            vec![phi_midpoint_trial(&mut rng, p, spec.tol)?]
        }
        other => return Err(Error::UnknownChecker(other.into())),
    };
    Ok(reports)
}

fn error_report(spec: &CheckSpec, err: &Error) -> InequalityReport {
    let mut r = InequalityReport::new(spec.checker.clone(), f64::NEG_INFINITY, spec.tol, 0.0, 0.0, ReportParams::default());
    r.status = Status::Failed;
    r.passed = false;
    r.note = Some(err.to_string());
    r
}

fn summarize(checker: &str, reports: &[InequalityReport]) -> CheckerSummary {
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    CheckerSummary {
        checker: checker.into(),
        reports: reports.len(),
        passed: count(Status::Passed),
        inconclusive: count(Status::Inconclusive),
        failed: count(Status::Failed),
        min_gap: reports.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min),
        min_normalized_gap: reports
            .iter()
            .map(|r| if r.tolerance > 0.0 { r.gap / r.tolerance } else { r.gap })
            .fold(f64::INFINITY, f64::min),
        max_ratio: reports.iter().filter_map(|r| r.ratio).reduce(f64::max),
    }
}

/// Runs every check of the spec. Trial `i` of checker `c` uses the seed
/// `trial_seed(spec.seed, c, i)`; reports come back in trial order.
/// A trial that errors is recorded as a failed report carrying the message.
pub fn run_suite(spec: &SuiteSpec) -> Result<SuiteOutcome> {
    for c in &spec.checks {
        if !CHECKERS.contains(&c.checker.as_str()) {
            return Err(Error::UnknownChecker(c.checker.clone()));
        }
    }
    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    for check in &spec.checks {
        let per_trial = map_indexed(check.trials, |i| {
            let seed = trial_seed(spec.seed, &check.checker, i as u64);
            match run_trial(check, seed) {
                Ok(rs) => rs.into_iter().map(|r| r.with_seed(seed)).collect(),
                Err(e) => vec![error_report(check, &e).with_seed(seed)],
            }
        });
        let flat: Vec<InequalityReport> = per_trial.into_iter().flatten().collect();
        summaries.push(summarize(&check.checker, &flat));
        reports.extend(flat);
    }
    Ok(SuiteOutcome { reports, summaries })
}
