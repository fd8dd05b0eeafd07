//! Sampled property checks for the tracial geometric mean and `Φ_p`.
//!
//! Each trial draws its inputs from the supplied generator and returns one
//! report per property, so the suite runner can aggregate them like any
//! other inequality check.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::means::{phi_ln, tg, tg_limit, tg_logexp, PSchedule, PowerMeanAccumulator, TgMode};
use crate::report::{InequalityReport, ReportParams};
use crate::sequence::OperatorSequence;
use crate::symcore::{random_orthogonal, random_psd, SymMatrix, ToleranceSpec};

/// Tolerances of the TG property suite: `equality` for (1)–(6), `slack` for
/// the inequalities (7) and (8), both relative to `max(1, value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyTolerances {
    pub equality: f64,
    pub slack: f64,
}

impl Default for PropertyTolerances {
    fn default() -> Self {
        Self {
            equality: 1e-8,
            slack: 1e-7,
        }
    }
}

/// Strictly positive tuple: `random_psd + floor·I`, scaled log-uniformly.
pub fn positive_tuple<R: Rng + ?Sized>(n: usize, dim: usize, floor: f64, rng: &mut R) -> Vec<SymMatrix> {
    (0..n)
        .map(|_| {
            let rank = rng.random_range(1..=dim);
            let scale = rng.random_range(-1.0_f64..1.0).exp();
            let mut a = random_psd(dim, rank, rng).expect("valid rank").scaled(scale);
            a.add_scaled_assign(floor, &SymMatrix::identity(dim));
            a
        })
        .collect()
}

fn params(p: Option<f64>, dim: usize, n: usize) -> ReportParams {
    ReportParams {
        p,
        dim,
        n,
        m: n,
        seed: None,
    }
}

fn equality(name: &str, got: f64, want: f64, tol: f64, dim: usize, n: usize) -> InequalityReport {
    InequalityReport::new(
        name,
        -(got - want).abs(),
        tol * want.abs().max(1.0),
        got,
        want,
        params(None, dim, n),
    )
}

fn at_least(name: &str, larger: f64, smaller: f64, tol: f64, dim: usize, n: usize) -> InequalityReport {
    InequalityReport::new(
        name,
        larger - smaller,
        tol * larger.abs().max(1.0),
        smaller,
        larger,
        params(None, dim, n),
    )
}

/// One sample of each of the eight TG properties.
pub fn tg_property_trial<R: Rng + ?Sized>(
    rng: &mut R,
    mode: TgMode,
    schedule: &PSchedule,
    tol: PropertyTolerances,
) -> Result<Vec<InequalityReport>> {
    let n = rng.random_range(2..=4);
    let dim = rng.random_range(1..=4);
    let tgm = |t: &[SymMatrix]| tg(t, mode, schedule);
    let a = positive_tuple(n, dim, 0.05, rng);
    let base = tgm(&a)?;
    let mut out = Vec::with_capacity(8);

    // (1) commuting entries: Σ_i (Π_k λ_{k,i})^{1/n}
    let u = random_orthogonal(dim, rng);
    let diags: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0.05..5.0)).collect())
        .collect();
    let commuting: Vec<SymMatrix> = diags
        .iter()
        .map(|d| SymMatrix::from_diagonal(d).congruence(&u))
        .collect::<Result<_>>()?;
    let oracle: f64 = (0..dim)
        .map(|i| diags.iter().map(|d| d[i]).product::<f64>().powf(1.0 / n as f64))
        .sum();
    out.push(equality("tg_commuting", tgm(&commuting)?, oracle, tol.equality, dim, n));

    // (2) TG(a, …, a) = Tr a
    let rep = vec![a[0].clone(); n];
    out.push(equality("tg_mean", tgm(&rep)?, a[0].trace(), tol.equality, dim, n));

    // (3) homogeneity
    let t = rng.random_range(-4.6_f64..4.6).exp();
    let scaled: Vec<SymMatrix> = a.iter().map(|x| x.scaled(t)).collect();
    out.push(equality("tg_homogeneous", tgm(&scaled)?, t * base, tol.equality, dim, n));

    // (4) symmetry
    let mut perm = a.clone();
    perm.shuffle(rng);
    out.push(equality("tg_symmetric", tgm(&perm)?, base, tol.equality, dim, n));

    // (5) unitary invariance
    let v = random_orthogonal(dim, rng);
    let rotated: Vec<SymMatrix> = a.iter().map(|x| x.congruence(&v)).collect::<Result<_>>()?;
    out.push(equality("tg_unitary", tgm(&rotated)?, base, tol.equality, dim, n));

    // (6) block additivity
    let dim_b = rng.random_range(1..=3);
    let b = positive_tuple(n, dim_b, 0.05, rng);
    let sums: Vec<SymMatrix> = a.iter().zip(&b).map(|(x, y)| x.direct_sum(y)).collect();
    out.push(equality(
        "tg_block_additive",
        tgm(&sums)?,
        base + tgm(&b)?,
        tol.equality,
        dim + dim_b,
        n,
    ));

    // (7) monotone in each entry: PSD increment with ‖δ‖₂ ≤ 0.1·‖a_k‖₂
    let k = rng.random_range(0..n);
    let dir = random_psd(dim, rng.random_range(1..=dim), rng)?;
    let size = 0.1 * a[k].spectral_radius()? * rng.random_range(0.0..=1.0);
    let dir_norm = dir.spectral_radius()?;
    let mut bigger = a.clone();
    if dir_norm > 0.0 {
        bigger[k].add_scaled_assign(size / dir_norm, &dir);
    }
    out.push(at_least("tg_monotone", tgm(&bigger)?, base, tol.slack, dim, n));

    // (8) midpoint concavity
    let c = positive_tuple(n, dim, 0.05, rng);
    let mid: Vec<SymMatrix> = a.iter().zip(&c).map(|(x, y)| (x + y).scaled(0.5)).collect();
    let avg = 0.5 * (base + tgm(&c)?);
    out.push(at_least("tg_concave", tgm(&mid)?, avg, tol.slack, dim, n));

    Ok(out)
}

/// Tolerance of the limit/log-exp agreement: `max(1e-5, 1e-4·value)`.
pub fn dual_tolerance(value: f64) -> f64 {
    1e-5_f64.max(1e-4 * value.abs())
}

/// Compares both TG characterizations on a strictly positive tuple
/// (`n ≤ 5`, `dim ≤ 5`, smallest eigenvalue ≥ 1e-2) and checks that `Tr M_p`
/// is non-increasing along the whole schedule.
pub fn tg_dual_trial<R: Rng + ?Sized>(rng: &mut R, schedule: &PSchedule) -> Result<Vec<InequalityReport>> {
    let n = rng.random_range(1..=5);
    let dim = rng.random_range(1..=5);
    let a = positive_tuple(n, dim, 1e-2, rng);
    let limit = tg_limit(&a, schedule)?;
    let exact = tg_logexp(&a)?;
    let mut out = Vec::with_capacity(2);
    let mut dual = InequalityReport::new(
        "tg_dual",
        -(limit.value - exact).abs(),
        dual_tolerance(exact),
        limit.value,
        exact,
        params(Some(limit.p), dim, n),
    );
    if !limit.converged {
        dual.passed = false;
        dual.status = crate::report::Status::Inconclusive;
    }
    out.push(dual);

    let mut acc = PowerMeanAccumulator::new(dim, schedule.exponents());
    for t in &a {
        acc.push(t)?;
    }
    let traces = acc.traces()?;
    let worst = traces
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    let worst = if worst.is_finite() { worst } else { 0.0 };
    out.push(InequalityReport::new(
        "tg_power_mean_monotone",
        worst,
        crate::means::MONOTONE_SLACK * traces[0].abs().max(1.0),
        traces[traces.len() - 1],
        traces[0],
        params(None, dim, n),
    ));
    Ok(out)
}

/// Midpoint concavity (`p ≤ 1`) or convexity (`1 ≤ p ≤ 2`) of `Φ_p` on a
/// random pair of strictly positive sequences.
pub fn phi_midpoint_trial<R: Rng + ?Sized>(rng: &mut R, p: f64, slack: f64) -> Result<InequalityReport> {
    let len = rng.random_range(1..=6);
    let dim = rng.random_range(1..=4);
    let tol = ToleranceSpec::default();
    let a = OperatorSequence::new(positive_tuple(len, dim, 1e-2, rng), &tol)?;
    let b = OperatorSequence::new(positive_tuple(len, dim, 1e-2, rng), &tol)?;
    // compare in units of max(1, largest value) so tiny p cannot overflow
    let (la, lb, lm) = (phi_ln(&a, p)?, phi_ln(&b, p)?, phi_ln(&a.midpoint(&b)?, p)?);
    let shift = la.max(lb).max(lm).max(0.0);
    let mid = (lm - shift).exp();
    let avg = 0.5 * ((la - shift).exp() + (lb - shift).exp());
    let (name, larger, smaller) = if p <= 1.0 {
        ("phi_concave", mid, avg)
    } else {
        ("phi_convex", avg, mid)
    };
    let mut r = at_least(name, larger, smaller, slack, dim, len);
    r.params.p = Some(p);
    Ok(r)
}
