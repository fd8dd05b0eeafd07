//! Browser bindings for three interactive views: the extremal-family ratio
//! against `(p/(p−1))^p`, convergence of `Tr M_p` to the tracial geometric
//! mean, and the Loewner/trace gaps of the Hardy inequality as `p` varies.
//!
//! Every export returns a JSON string; the plain functions are usable (and
//! tested) natively.

use opineq::means::properties::positive_tuple;
use opineq::means::{tg_limit, tg_logexp};
use opineq::probe::extremal_family_ratio;
use opineq::seed::{rng_from, trial_seed};
use opineq::symcore::{loewner_leq, random_psd};
use opineq::verify::{hardy_constant, hardy_lhs};
use opineq::{OperatorSequence, PSchedule, ToleranceSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_N: usize = 20_000;
const MAX_DIM: usize = 8;
const MAX_STEPS: usize = 400;

#[derive(Serialize)]
struct CurvePoint {
    p: f64,
    ratio: f64,
    constant: f64,
}

#[derive(Serialize)]
struct TgPoint {
    p: f64,
    trace: f64,
}

#[derive(Serialize)]
struct TgView {
    logexp: Option<f64>,
    limit: f64,
    converged: bool,
    points: Vec<TgPoint>,
}

#[derive(Serialize)]
struct GapPoint {
    p: f64,
    /// `λ_min(C·Σa^p − Σh(a)^p) / Tr(C·Σa^p)`
    loewner: f64,
    /// `(Tr RHS − Tr LHS) / Tr RHS`
    trace: f64,
}

fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, String> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(2..=MAX_STEPS).contains(&steps) {
        return Err(format!("need lo < hi and 2 <= steps <= {MAX_STEPS}"));
    }
    Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// `Tr LHS / Σ a_n^p` for `a_n = n^(-1/p)`, `n ≤ N`, over a grid of `p > 1`.
pub fn extremal_curve_json(p_min: f64, p_max: f64, steps: usize, n: usize) -> Result<String, String> {
    if p_min <= 1.0 {
        return Err("p must exceed 1".into());
    }
    if !(2..=MAX_N).contains(&n) {
        return Err(format!("N must lie in 2..={MAX_N}"));
    }
    let points = grid(p_min, p_max, steps)?
        .into_iter()
        .map(|p| {
            let r = extremal_family_ratio(p, n).map_err(|e| e.to_string())?;
            Ok(CurvePoint {
                p,
                ratio: r.best_ratio,
                constant: r.target_constant,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&points)
}

/// `Tr M_p` along `p = 2^k` for a random strictly positive tuple, with the
/// log-exp value it converges to.
pub fn tg_convergence_json(seed: u64, terms: usize, dim: usize, max_k: u32) -> Result<String, String> {
    if !(1..=12).contains(&terms) || !(1..=MAX_DIM).contains(&dim) || max_k > 48 {
        return Err(format!("need 1 <= terms <= 12, 1 <= dim <= {MAX_DIM}, max_k <= 48"));
    }
    let mut rng = rng_from(trial_seed(seed, "wasm_tg", 0));
    let a = positive_tuple(terms, dim, 1e-2, &mut rng);
    // cauchy_tol 0 walks the whole schedule so the curve is complete
    let schedule = PSchedule::powers_of_two(max_k, 0.0);
    let limit = tg_limit(&a, &schedule).map_err(|e| e.to_string())?;
    to_json(&TgView {
        logexp: tg_logexp(&a).ok(),
        limit: limit.value,
        converged: limit.converged,
        points: limit.trace.iter().map(|&(p, trace)| TgPoint { p, trace }).collect(),
    })
}

/// Normalized Loewner and trace gaps of the discrete Hardy inequality, `M = 2N`,
/// for a random sequence of rank-`rank` terms, over a grid of `p > 1`.
pub fn hardy_gap_scan_json(
    seed: u64,
    dim: usize,
    n: usize,
    rank: usize,
    p_min: f64,
    p_max: f64,
    steps: usize,
) -> Result<String, String> {
    if p_min <= 1.0 {
        return Err("p must exceed 1".into());
    }
    if !(1..=MAX_DIM).contains(&dim) || !(1..=64).contains(&n) || rank == 0 || rank > dim {
        return Err(format!("need 1 <= dim <= {MAX_DIM}, 1 <= N <= 64, 1 <= rank <= dim"));
    }
    let mut rng = rng_from(trial_seed(seed, "wasm_gap", 0));
    let terms = (0..n)
        .map(|_| random_psd(dim, rank, &mut rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let tol = ToleranceSpec::default();
    let a = OperatorSequence::new(terms, &tol).map_err(|e| e.to_string())?;
    let points = grid(p_min, p_max, steps)?
        .into_iter()
        .map(|p| {
            let lhs = hardy_lhs(&a, p, 2 * n, &tol)?;
            let rhs = a.power_sum_with(p, &tol)?.scaled(hardy_constant(p));
            let scale = rhs.trace();
            let gap = loewner_leq(&lhs, &rhs, &tol)?.gap;
            Ok(GapPoint {
                p,
                loewner: gap / scale,
                trace: (scale - lhs.trace()) / scale,
            })
        })
        .collect::<opineq::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    to_json(&points)
}

#[wasm_bindgen]
pub fn extremal_curve(p_min: f64, p_max: f64, steps: usize, n: usize) -> Result<String, JsError> {
    extremal_curve_json(p_min, p_max, steps, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn tg_convergence(seed: u32, terms: usize, dim: usize, max_k: u32) -> Result<String, JsError> {
    tg_convergence_json(seed as u64, terms, dim, max_k).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn hardy_gap_scan(
    seed: u32,
    dim: usize,
    n: usize,
    rank: usize,
    p_min: f64,
    p_max: f64,
    steps: usize,
) -> Result<String, JsError> {
    hardy_gap_scan_json(seed as u64, dim, n, rank, p_min, p_max, steps).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn extremal_curve_below_constant() {
        let v: Value = serde_json::from_str(&extremal_curve_json(1.2, 4.0, 8, 500).unwrap()).unwrap();
        let pts = v.as_array().unwrap();
        assert_eq!(pts.len(), 8);
        for pt in pts {
            assert!(pt["ratio"].as_f64().unwrap() < pt["constant"].as_f64().unwrap());
        }
        assert!(extremal_curve_json(1.0, 2.0, 4, 10).is_err());
        assert!(extremal_curve_json(1.5, 2.0, 1, 10).is_err());
    }

    #[test]
    fn tg_curve_decreases_to_logexp() {
        let v: Value = serde_json::from_str(&tg_convergence_json(3, 3, 3, 30).unwrap()).unwrap();
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 31);
        let traces: Vec<f64> = pts.iter().map(|p| p["trace"].as_f64().unwrap()).collect();
        assert!(traces.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10)));
        let logexp = v["logexp"].as_f64().unwrap();
        assert!((traces[30] - logexp).abs() < 1e-6 * logexp);
    }

    #[test]
    fn gap_scan_trace_gap_nonnegative() {
        let v: Value = serde_json::from_str(&hardy_gap_scan_json(1, 2, 4, 1, 1.1, 6.0, 12).unwrap()).unwrap();
        for pt in v.as_array().unwrap() {
            assert!(pt["trace"].as_f64().unwrap() >= -1e-12);
            if pt["p"].as_f64().unwrap() <= 2.0 {
                assert!(pt["loewner"].as_f64().unwrap() >= -1e-9);
            }
        }
        assert!(hardy_gap_scan_json(1, 2, 4, 3, 1.1, 2.0, 4).is_err());
    }
}
