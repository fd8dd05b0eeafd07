//! Sharpness probes for `(p/(p−1))^p` and `e`, and an exploratory search for
//! Loewner-order violations of the discrete operator Hardy inequality at `p > 2`.
//!
//! Nothing here proves anything: a probe ratio below the constant is what the
//! theorems predict, and an empty violation search says nothing about whether
//! a violation exists.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::means::TgMode;
use crate::par::map_indexed;
use crate::report::{InequalityReport, ReportParams, TracePoint};
use crate::seed::{rng_from, trial_seed};
use crate::sequence::OperatorSequence;
use crate::symcore::{loewner_leq, random_psd, DenseMatrix, SymMatrix, ToleranceSpec};
use crate::verify::{hardy_constant, hardy_lhs, prefix_tg};
use crate::PSchedule;

/// Default restart count of [`sharpness_optimize`].
pub const DEFAULT_RESTARTS: usize = 16;

/// Slack allowed above the target constant before a probe is treated as a bug.
pub const PROBE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Achiever {
    Sequence(OperatorSequence),
    Family(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub name: String,
    pub p: Option<f64>,
    pub dim: usize,
    pub target_constant: f64,
    pub best_ratio: f64,
    pub achiever: Achiever,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TracePoint>,
    /// Truncation length used for the largest `N`.
    pub truncation: usize,
}

impl ProbeResult {
    /// `best_ratio / target_constant`.
    pub fn normalized(&self) -> f64 {
        self.best_ratio / self.target_constant
    }

    /// Report with `gap = target − best_ratio` and the `(N, ratio)` trace attached.
    pub fn to_report(&self) -> InequalityReport {
        let n = self.trace.last().map_or(0, |t| t.n);
        let mut r = InequalityReport::new(
            self.name.clone(),
            self.target_constant - self.best_ratio,
            PROBE_TOL,
            self.best_ratio,
            self.target_constant,
            ReportParams {
                p: self.p,
                dim: self.dim,
                n,
                m: self.truncation,
                seed: None,
            },
        );
        r.trace = Some(self.trace.clone());
        r
    }
}

fn trace_ratio(a: &OperatorSequence, p: f64, m: usize) -> Result<f64> {
    let tol = ToleranceSpec::default();
    let lhs = hardy_lhs(a, p, m, &tol)?.trace();
    let rhs = a.power_sum_with(p, &tol)?.trace();
    Ok(if rhs > 0.0 { lhs / rhs } else { 0.0 })
}

fn extremal_profile(p: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| (k as f64).powf(-1.0 / p)).collect()
}

/// `Tr Σ_{n≤4N} h(a)_n^p / Tr Σ a_n^p` for the scalar family `a_n = n^{−1/p}`,
/// `n ≤ N`.
pub fn extremal_family_ratio(p: f64, n: usize) -> Result<ProbeResult> {
    extremal_family_probe(p, &[n])
}

/// [`extremal_family_ratio`] along a grid of `N`; `best_ratio` is the largest.
pub fn extremal_family_probe(p: f64, grid: &[usize]) -> Result<ProbeResult> {
    if !(p > 1.0) {
        return Err(Error::ParameterRange(format!("sharpness probes need p > 1, got {p}")));
    }
    if grid.is_empty() || grid.iter().any(|&n| n < 2) {
        return Err(Error::ParameterRange("the extremal family needs N >= 2".into()));
    }
    let ratios = map_indexed(grid.len(), |i| {
        let a = OperatorSequence::scalars(&extremal_profile(p, grid[i]))?;
        trace_ratio(&a, p, 4 * grid[i])
    });
    let ratios = ratios.into_iter().collect::<Result<Vec<_>>>()?;
    let trace: Vec<TracePoint> = grid
        .iter()
        .zip(&ratios)
        .map(|(&n, &ratio)| TracePoint { n, ratio })
        .collect();
    Ok(ProbeResult {
        name: "extremal_family".into(),
        p: Some(p),
        dim: 1,
        target_constant: hardy_constant(p),
        best_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        achiever: Achiever::Family(format!("a_n = n^(-1/{p})")),
        iterations: grid.len(),
        converged: true,
        trace,
        truncation: 4 * grid.iter().max().copied().unwrap_or(0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSpec {
    pub p: f64,
    pub dim: usize,
    pub n: usize,
    /// Objective evaluations shared by all restarts.
    pub budget: usize,
    pub restarts: usize,
    /// Rotate each term in the (0, 1) plane by a free angle.
    pub rotations: bool,
    pub seed: u64,
}

impl OptimizeSpec {
    pub fn new(p: f64, dim: usize, n: usize, budget: usize, seed: u64) -> Self {
        Self {
            p,
            dim,
            n,
            budget,
            restarts: DEFAULT_RESTARTS,
            rotations: dim >= 2,
            seed,
        }
    }
}

struct Profile<'a> {
    spec: &'a OptimizeSpec,
    direction: SymMatrix,
}

impl Profile<'_> {
    fn params(&self) -> usize {
        self.spec.n * if self.spec.rotations { 2 } else { 1 }
    }

    /// `a_n = c_n·R(θ_n)·B·R(θ_n)ᵀ` with `c_n = exp(x_n)`.
    fn sequence(&self, x: &[f64]) -> Result<OperatorSequence> {
        let n = self.spec.n;
        let terms = (0..n)
            .map(|k| {
                let c = x[k].exp();
                let b = if self.spec.rotations {
                    self.direction.congruence(&plane_rotation(self.direction.dim(), x[n + k]))?
                } else {
                    self.direction.clone()
                };
                Ok(b.scaled(c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OperatorSequence::from_terms_unchecked(terms))
    }

    fn objective(&self, x: &[f64]) -> Result<f64> {
        trace_ratio(&self.sequence(x)?, self.spec.p, 4 * self.spec.n)
    }

    fn seed_point(&self) -> Vec<f64> {
        let mut x: Vec<f64> = extremal_profile(self.spec.p, self.spec.n).iter().map(|c| c.ln()).collect();
        x.resize(self.params(), 0.0);
        x
    }
}

fn plane_rotation(dim: usize, theta: f64) -> DenseMatrix {
    let mut data = DenseMatrix::identity(dim).column(0);
    data.clear();
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    if dim >= 2 {
        let (s, c) = theta.sin_cos();
        m[0] = c;
        m[1] = -s;
        m[dim] = s;
        m[dim + 1] = c;
    }
    DenseMatrix::from_row_major(dim, dim, m).expect("square")
}

struct ClimbResult {
    best: f64,
    point: Vec<f64>,
    evaluations: usize,
    converged: bool,
}

/// Random-coordinate hill climbing with step halving after a full round of
/// failures. Only strict improvements are accepted.
fn hill_climb<R: Rng>(
    start: Vec<f64>,
    start_value: f64,
    budget: usize,
    rng: &mut R,
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<ClimbResult> {
    let dims = start.len();
    let mut x = start;
    let mut best = start_value;
    let mut step = 0.5;
    let mut failures = 0;
    let mut evaluations = 0;
    while evaluations < budget {
        let i = rng.random_range(0..dims);
        let z: f64 = rng.sample(StandardNormal);
        let mut y = x.clone();
        y[i] += step * z;
        let v = objective(&y)?;
        evaluations += 1;
        if v > best {
            best = v;
            x = y;
            failures = 0;
        } else {
            failures += 1;
            if failures >= 2 * dims {
                step *= 0.5;
                failures = 0;
                if step < 1e-6 {
                    return Ok(ClimbResult {
                        best,
                        point: x,
                        evaluations,
                        converged: true,
                    });
                }
            }
        }
    }
    Ok(ClimbResult {
        best,
        point: x,
        evaluations,
        converged: false,
    })
}

/// Derivative-free maximization of the trace ratio over `a_n = c_n·R_n·B·R_nᵀ`,
/// started from the extremal family. `p ≤ 2` targets the operator constant,
/// `p > 2` the tracial one (the constant is the same).
pub fn sharpness_optimize(spec: &OptimizeSpec) -> Result<ProbeResult> {
    if !(spec.p > 1.0) || spec.n < 2 || spec.dim < 1 || spec.restarts < 1 {
        return Err(Error::ParameterRange(format!(
            "sharpness_optimize needs p > 1, N >= 2, dim >= 1, restarts >= 1 (got p = {}, N = {}, dim = {}, restarts = {})",
            spec.p, spec.n, spec.dim, spec.restarts
        )));
    }
    let mut rng = rng_from(trial_seed(spec.seed, "sharpness_direction", 0));
    let b = random_psd(spec.dim, spec.dim, &mut rng)?;
    let direction = b.scaled(1.0 / b.trace());
    let profile = Profile {
        spec,
        direction,
    };
    let seed_point = profile.seed_point();
    let seed_value = profile.objective(&seed_point)?;

    let per_restart = spec.budget / spec.restarts;
    let results = map_indexed(spec.restarts, |r| {
        let mut rng = rng_from(trial_seed(spec.seed, "sharpness_restart", r as u64));
        let budget = per_restart + if r == 0 { spec.budget % spec.restarts } else { 0 };
        if r == 0 || budget == 0 {
            return hill_climb(seed_point.clone(), seed_value, budget, &mut rng, |x| profile.objective(x));
        }
        // the perturbed start costs one evaluation
        let mut x = seed_point.clone();
        for v in x.iter_mut() {
            *v += 0.3 * rng.sample::<f64, _>(StandardNormal);
        }
        let start_value = profile.objective(&x)?;
        let mut climb = hill_climb(x, start_value, budget - 1, &mut rng, |x| profile.objective(x))?;
        climb.evaluations += 1;
        Ok(climb)
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    // first strict maximum: ties go to the lowest restart index
    let mut best_idx = 0;
    for (i, r) in results.iter().enumerate() {
        if r.best > results[best_idx].best {
            best_idx = i;
        }
    }
    let best = &results[best_idx];
    let target = hardy_constant(spec.p);
    if best.best > target + PROBE_TOL {
        return Err(Error::ParameterRange(format!(
            "probe ratio {} exceeds the constant {target}; this indicates a numerical defect",
            best.best
        )));
    }
    let evaluations: usize = results.iter().map(|r| r.evaluations).sum();
    Ok(ProbeResult {
        name: "sharpness_optimize".into(),
        p: Some(spec.p),
        dim: spec.dim,
        target_constant: target,
        best_ratio: best.best.max(seed_value),
        achiever: Achiever::Sequence(profile.sequence(&best.point)?),
        iterations: evaluations,
        converged: best.converged,
        trace: vec![TracePoint {
            n: spec.n,
            ratio: best.best.max(seed_value),
        }],
        truncation: 4 * spec.n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationCandidate {
    #[serde(skip)]
    pub sequence: OperatorSequence,
    /// `λ_min(RHS − LHS) / Tr RHS` as found by the search.
    pub normalized_gap: f64,
    /// Same quantity recomputed with integer powers by repeated multiplication
    /// (integer `p` only) or spectral calculus otherwise.
    pub reverified_gap: f64,
    pub exact_powers: bool,
    /// The re-verification did not confirm the violation at 10× tighter tolerance.
    pub spurious: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationSearch {
    pub p: f64,
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub samples: usize,
    pub min_normalized_gap: f64,
    pub candidate: Option<ViolationCandidate>,
}

fn normalized_gap(a: &OperatorSequence, p: f64, m: usize, exact: bool) -> Result<f64> {
    let tol = ToleranceSpec::default();
    let (lhs, rhs) = if exact {
        let k = p as u32;
        let lhs_terms = a.truncate_extend(m).hardy_transform();
        let mut lhs = SymMatrix::zeros(a.dim());
        for t in lhs_terms.terms() {
            lhs.add_assign(&t.int_power(k));
        }
        let mut rhs = SymMatrix::zeros(a.dim());
        for t in a.terms() {
            rhs.add_assign(&t.int_power(k));
        }
        (lhs, rhs)
    } else {
        (hardy_lhs(a, p, m, &tol)?, a.power_sum_with(p, &tol)?)
    };
    let rhs = rhs.scaled(hardy_constant(p));
    let scale = rhs.trace();
    if !(scale > 0.0) {
        return Ok(0.0);
    }
    Ok(loewner_leq(&lhs, &rhs, &tol)?.gap / scale)
}

/// Hill-climbs `λ_min(C·Σ a_n^p − Σ_{n≤2N} h(a)_n^p) / Tr(C·Σ a_n^p)` downward
/// over `a_n = G_nᵀG_n`. Stops at the first point below `−10·tol.psd_tol` and
/// re-verifies it; `steps` evaluations per trial.
pub fn search_loewner_violation(
    p: f64,
    dim: usize,
    n: usize,
    trials: usize,
    steps: usize,
    seed: u64,
    tol: &ToleranceSpec,
) -> Result<ViolationSearch> {
    if !(p > 2.0) {
        return Err(Error::ParameterRange(format!(
            "the violation search only runs for p > 2 (got {p}); below that the inequality is a theorem"
        )));
    }
    if dim < 1 || n < 1 {
        return Err(Error::ParameterRange("violation search needs dim >= 1 and N >= 1".into()));
    }
    let m = 2 * n;
    let threshold = -10.0 * tol.psd_tol;
    let build = |x: &[f64]| -> Result<OperatorSequence> {
        let terms = (0..n)
            .map(|k| {
                let g = DenseMatrix::from_row_major(dim, dim, x[k * dim * dim..(k + 1) * dim * dim].to_vec())?;
                let gtg = g.transpose().matmul(&g)?;
                SymMatrix::from_row_major(dim, &(0..dim * dim).map(|i| gtg.get(i / dim, i % dim)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OperatorSequence::from_terms_unchecked(terms))
    };

    let mut samples = 0;
    let mut min_gap = f64::INFINITY;
    for t in 0..trials {
        let mut rng = rng_from(trial_seed(seed, "loewner_violation", t as u64));
        let start: Vec<f64> = (0..n * dim * dim).map(|_| rng.sample(StandardNormal)).collect();
        let start_value = normalized_gap(&build(&start)?, p, m, false)?;
        samples += 1;
        let mut hit: Option<Vec<f64>> = (start_value < threshold).then(|| start.clone());
        min_gap = min_gap.min(start_value);
        if hit.is_none() {
            // maximize the negated gap
            let climb = hill_climb(start, -start_value, steps, &mut rng, |x| {
                let v = normalized_gap(&build(x)?, p, m, false)?;
                Ok(-v)
            })?;
            samples += climb.evaluations;
            min_gap = min_gap.min(-climb.best);
            if -climb.best < threshold {
                hit = Some(climb.point);
            }
        }
        if let Some(x) = hit {
            let seq = build(&x)?;
            let found = normalized_gap(&seq, p, m, false)?;
            let exact = p.fract() == 0.0 && p <= 64.0;
            let reverified = normalized_gap(&seq, p, m, exact)?;
            let tight = -10.0 * tol.tightened(10.0).psd_tol;
            return Ok(ViolationSearch {
                p,
                dim,
                n,
                trials,
                samples,
                min_normalized_gap: min_gap,
                candidate: Some(ViolationCandidate {
                    sequence: seq,
                    normalized_gap: found,
                    reverified_gap: reverified,
                    exact_powers: exact,
                    spurious: !(reverified < tight),
                }),
            });
        }
    }
    Ok(ViolationSearch {
        p,
        dim,
        n,
        trials,
        samples,
        min_normalized_gap: if samples == 0 { 0.0 } else { min_gap },
        candidate: None,
    })
}

/// Carleman ratios `Σ_{n≤N} TG(a_1..a_n) / Σ_{n≤N} a_n` for `a_n = 1/n`.
pub fn carleman_constant_probe(grid: &[usize]) -> Result<ProbeResult> {
    if grid.is_empty() || grid.contains(&0) {
        return Err(Error::ParameterRange("the Carleman grid needs N >= 1".into()));
    }
    let n_max = *grid.iter().max().unwrap();
    let terms: Vec<f64> = (1..=n_max).map(|n| 1.0 / n as f64).collect();
    let a = OperatorSequence::scalars(&terms)?;
    let tgs = prefix_tg(&a, TgMode::LogExp, &PSchedule::default())?;
    let mut trace = Vec::with_capacity(grid.len());
    for &n in grid {
        let lhs: f64 = tgs[..n].iter().sum();
        let rhs: f64 = terms[..n].iter().sum();
        trace.push(TracePoint { n, ratio: lhs / rhs });
    }
    Ok(ProbeResult {
        name: "carleman_constant".into(),
        p: None,
        dim: 1,
        target_constant: std::f64::consts::E,
        best_ratio: trace.iter().map(|t| t.ratio).fold(f64::NEG_INFINITY, f64::max),
        achiever: Achiever::Family("a_n = 1/n".into()),
        iterations: grid.len(),
        converged: true,
        trace,
        truncation: n_max,
    })
}
