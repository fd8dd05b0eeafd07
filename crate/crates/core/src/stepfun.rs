//! Piecewise-constant PSD-matrix-valued functions on `(0, ∞)` and the weighted
//! integrals of the continuous Hardy inequalities.
//!
//! `g` equals `values[j]` on `(breakpoints[j], breakpoints[j+1]]` and vanishes on
//! `(0, x₀]` and `(x_m, ∞)`. Right-hand sides `∫ g^p w` are exact. Left-hand
//! sides `∫ A(x)^p w(x) dx` with `A(x) = (1/x)∫₀ˣ g` use Gauss–Legendre on
//! `[x₀, x_m]` plus the closed-form tail over `(x_m, ∞)` where `A(x) = S/x`.
//!
//! Node placement inside a segment `[l, r]`:
//! * the segment is cut at `l·2^k` so every piece `[a, b]` has `b ≤ 2a`, which
//!   keeps the `1/x` behaviour of `A` well resolved;
//! * the first piece uses `x = a + (b − a)·u⁴`, which smooths the `(x − l)^p`
//!   onset of eigenvalues that start at zero on the left breakpoint;
//! * each piece is split into `refinement` equal parts, each with
//!   `nodes_per_segment` Gauss–Legendre nodes.
//!
//! Node contributions are reduced by a fixed pairwise summation tree, so the
//! result does not depend on the number of worker threads.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::report::{InequalityReport, ReportParams};
use crate::symcore::{loewner_leq, SymMatrix, ToleranceSpec};
use crate::verify::hardy_constant;

const GRADING_POWER: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weight {
    /// `dx`
    Dx,
    /// `dx/x`
    DxOverX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_segment: usize,
    pub refinement: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_segment: 32,
            refinement: 4,
        }
    }
}

impl QuadratureSpec {
    pub fn new(nodes_per_segment: usize, refinement: usize) -> Result<Self> {
        if nodes_per_segment < 2 || refinement < 1 {
            return Err(Error::ParameterRange(format!(
                "quadrature needs nodes_per_segment >= 2 and refinement >= 1, got {nodes_per_segment}/{refinement}"
            )));
        }
        Ok(Self {
            nodes_per_segment,
            refinement,
        })
    }

    pub fn doubled(&self) -> Self {
        Self {
            nodes_per_segment: 2 * self.nodes_per_segment,
            refinement: self.refinement,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOperatorFunction {
    breakpoints: Vec<f64>,
    values: Vec<SymMatrix>,
    /// `prefix[j] = ∫₀^{x_j} g`.
    prefix: Vec<SymMatrix>,
}

impl StepOperatorFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<SymMatrix>, tol: &ToleranceSpec) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::Input(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if !(breakpoints[0] > 0.0) || breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("breakpoints must be finite and positive".into()));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Input(format!(
                "breakpoints must be strictly increasing (index {})",
                i + 1
            )));
        }
        let dim = values[0].dim();
        for (i, v) in values.iter().enumerate() {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: v.dim(),
                }
                .at_term(i));
            }
            let eig = v.eigh().map_err(|e| e.at_term(i))?;
            let threshold = tol.threshold(eig.spectral_radius());
            if eig.eigenvalues[0] < -threshold {
                return Err(Error::NotPsd {
                    eigenvalue: eig.eigenvalues[0],
                    threshold,
                }
                .at_term(i));
            }
        }
        let mut prefix = Vec::with_capacity(breakpoints.len());
        let mut acc = SymMatrix::zeros(dim);
        prefix.push(acc.clone());
        for (j, v) in values.iter().enumerate() {
            acc.add_scaled_assign(breakpoints[j + 1] - breakpoints[j], v);
            prefix.push(acc.clone());
        }
        Ok(Self {
            breakpoints,
            values,
            prefix,
        })
    }

    /// Single segment `(a, b]` with constant value `v`.
    pub fn constant(a: f64, b: f64, v: SymMatrix) -> Result<Self> {
        Self::new(vec![a, b], vec![v], &ToleranceSpec::default())
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn segments(&self) -> usize {
        self.values.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[SymMatrix] {
        &self.values
    }

    /// `∫₀^∞ g`.
    pub fn total_integral(&self) -> &SymMatrix {
        self.prefix.last().expect("non-empty")
    }

    pub fn scaled(&self, t: f64) -> Self {
        assert!(t >= 0.0);
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v.scaled(t)).collect(),
            prefix: self.prefix.iter().map(|v| v.scaled(t)).collect(),
        }
    }

    fn average_in_segment(&self, j: usize, x: f64) -> SymMatrix {
        let mut a = self.prefix[j].clone();
        a.add_scaled_assign(x - self.breakpoints[j], &self.values[j]);
        a.scaled(1.0 / x)
    }

    /// `(1/x)·∫₀ˣ g(t) dt` in closed form.
    pub fn cumulative_average(&self, x: f64) -> SymMatrix {
        let x0 = self.breakpoints[0];
        let xm = *self.breakpoints.last().unwrap();
        if x <= x0 {
            return SymMatrix::zeros(self.dim());
        }
        if x > xm {
            return self.total_integral().scaled(1.0 / x);
        }
        // first breakpoint >= x, minus one
        let j = self.breakpoints.partition_point(|&b| b < x) - 1;
        self.average_in_segment(j, x)
    }

    /// `(1/x)·∫₀ˣ g(t)^p dt` in closed form.
    pub fn cumulative_power_average(&self, p: f64, x: f64) -> Result<SymMatrix> {
        let mut acc = SymMatrix::zeros(self.dim());
        for (j, v) in self.values.iter().enumerate() {
            let (l, r) = (self.breakpoints[j], self.breakpoints[j + 1]);
            if x <= l {
                break;
            }
            let len = r.min(x) - l;
            acc.add_scaled_assign(len, &v.pow(p)?);
        }
        Ok(acc.scaled(1.0 / x))
    }

    /// Quadrature nodes as `(segment, x, weight·jacobian)`.
    fn nodes(&self, quad: &QuadratureSpec) -> Vec<(usize, f64, f64)> {
        let n = NonZeroUsize::new(quad.nodes_per_segment.max(1)).unwrap();
        let rule = GaussLegendre::new(n);
        let pairs = rule.as_node_weight_pairs();
        let mut out = Vec::new();
        for j in 0..self.segments() {
            let (l, r) = (self.breakpoints[j], self.breakpoints[j + 1]);
            let mut a = l;
            let mut first = true;
            while a < r {
                let b = (2.0 * a).min(r);
                let h = 1.0 / quad.refinement as f64;
                for s in 0..quad.refinement {
                    let (u0, u1) = (s as f64 * h, (s + 1) as f64 * h);
                    for &(t, w) in pairs {
                        let u = 0.5 * ((u1 - u0) * t + (u1 + u0));
                        let du = 0.5 * (u1 - u0) * w;
                        if first {
                            let x = a + (b - a) * u.powi(GRADING_POWER);
                            let jac = (b - a) * GRADING_POWER as f64 * u.powi(GRADING_POWER - 1);
                            out.push((j, x, du * jac));
                        } else {
                            out.push((j, a + (b - a) * u, du * (b - a)));
                        }
                    }
                }
                first = false;
                a = b;
            }
        }
        out
    }

    pub fn quadrature_node_count(&self, quad: &QuadratureSpec) -> usize {
        self.nodes(quad).len()
    }
}

fn check_power(p: f64, weight: Weight) -> Result<()> {
    match weight {
        Weight::Dx if !(p > 1.0) => Err(Error::DivergentTail { p }),
        Weight::DxOverX if !(p > 0.0) => Err(Error::ParameterRange(format!(
            "weight dx/x needs p > 0, got {p}"
        ))),
        _ => Ok(()),
    }
}

fn weight_at(weight: Weight, x: f64) -> f64 {
    match weight {
        Weight::Dx => 1.0,
        Weight::DxOverX => 1.0 / x,
    }
}

/// Sums in a fixed binary tree so the result is independent of evaluation order.
pub(crate) fn pairwise_sum(terms: &[SymMatrix], dim: usize) -> SymMatrix {
    match terms.len() {
        0 => SymMatrix::zeros(dim),
        1 => terms[0].clone(),
        n if n <= 8 => {
            let mut acc = terms[0].clone();
            for t in &terms[1..] {
                acc.add_assign(t);
            }
            acc
        }
        n => {
            let (l, r) = terms.split_at(n / 2);
            let mut acc = pairwise_sum(l, dim);
            acc.add_assign(&pairwise_sum(r, dim));
            acc
        }
    }
}

/// `∫₀^∞ ((1/x)∫₀ˣ g)^p w(x) dx`.
pub fn integral_avg_power(
    g: &StepOperatorFunction,
    p: f64,
    weight: Weight,
    quad: &QuadratureSpec,
) -> Result<SymMatrix> {
    check_power(p, weight)?;
    let nodes = g.nodes(quad);
    let contributions = map_indexed(nodes.len(), |i| {
        let (j, x, w) = nodes[i];
        g.average_in_segment(j, x)
            .pow(p)
            .map(|m| m.scaled(w * weight_at(weight, x)))
    });
    let contributions = contributions.into_iter().collect::<Result<Vec<_>>>()?;
    let mut total = pairwise_sum(&contributions, g.dim());

    let xm = *g.breakpoints.last().unwrap();
    let tail_factor = match weight {
        Weight::DxOverX => xm.powf(-p) / p,
        Weight::Dx => xm.powf(1.0 - p) / (p - 1.0),
    };
    let s = g.total_integral();
    if !s.is_zero() {
        total.add_scaled_assign(tail_factor, &s.pow(p)?);
    }
    Ok(total)
}

/// `∫₀^∞ g(x)^p w(x) dx`, exact for step functions.
pub fn integral_power(g: &StepOperatorFunction, p: f64, weight: Weight) -> Result<SymMatrix> {
    check_power(p, weight)?;
    let mut total = SymMatrix::zeros(g.dim());
    for (j, v) in g.values.iter().enumerate() {
        let (l, r) = (g.breakpoints[j], g.breakpoints[j + 1]);
        let measure = match weight {
            Weight::Dx => r - l,
            Weight::DxOverX => (r / l).ln(),
        };
        if !v.is_zero() {
            total.add_scaled_assign(measure, &v.pow(p)?);
        }
    }
    Ok(total)
}

fn params(g: &StepOperatorFunction, p: f64, quad: &QuadratureSpec) -> ReportParams {
    ReportParams {
        p: Some(p),
        dim: g.dim(),
        n: g.segments(),
        m: g.quadrature_node_count(quad),
        seed: None,
    }
}

fn loewner_report(
    name: &str,
    lhs: &SymMatrix,
    rhs: &SymMatrix,
    tol: &ToleranceSpec,
    params: ReportParams,
) -> Result<InequalityReport> {
    let cmp = loewner_leq(lhs, rhs, tol)?;
    Ok(InequalityReport::new(
        name,
        cmp.gap,
        cmp.threshold,
        lhs.trace(),
        rhs.trace(),
        params,
    ))
}

fn trace_report(
    name: &str,
    lhs: f64,
    rhs: f64,
    tol: &ToleranceSpec,
    params: ReportParams,
) -> InequalityReport {
    InequalityReport::new(name, rhs - lhs, tol.threshold(rhs), lhs, rhs, params)
}

/// Loewner form with weight `dx/x` and constant one, for `1 ≤ p ≤ 2`.
pub fn check_lemma_convexity(
    g: &StepOperatorFunction,
    p: f64,
    tol: &ToleranceSpec,
    quad: &QuadratureSpec,
) -> Result<InequalityReport> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::ParameterRange(format!(
            "the operator-convexity lemma needs 1 <= p <= 2 (t^p is not operator convex beyond), got {p}; use the tracial lemma"
        )));
    }
    let lhs = integral_avg_power(g, p, Weight::DxOverX, quad)?;
    let rhs = integral_power(g, p, Weight::DxOverX)?;
    loewner_report("lemma_convexity", &lhs, &rhs, tol, params(g, p, quad))
}

/// Trace form with weight `dx/x`, any `p ≥ 1`.
pub fn check_lemma_tracial(
    g: &StepOperatorFunction,
    p: f64,
    tol: &ToleranceSpec,
    quad: &QuadratureSpec,
) -> Result<InequalityReport> {
    if !(p >= 1.0) {
        return Err(Error::ParameterRange(format!("the tracial lemma needs p >= 1, got {p}")));
    }
    let lhs = integral_avg_power(g, p, Weight::DxOverX, quad)?.trace();
    let rhs = integral_power(g, p, Weight::DxOverX)?.trace();
    Ok(trace_report("lemma_tracial", lhs, rhs, tol, params(g, p, quad)))
}

/// Weight `dx` with constant `(p/(p−1))^p`; Loewner form for `1 < p ≤ 2`,
/// trace form for any `p > 1`.
pub fn check_theorem_continuous(
    f: &StepOperatorFunction,
    p: f64,
    tol: &ToleranceSpec,
    tracial: bool,
    quad: &QuadratureSpec,
) -> Result<InequalityReport> {
    if tracial && !(p > 1.0) {
        return Err(Error::ParameterRange(format!("the tracial theorem needs p > 1, got {p}")));
    }
    if !tracial && !(p > 1.0 && p <= 2.0) {
        return Err(Error::ParameterRange(format!(
            "the operator theorem needs 1 < p <= 2, got {p}; use the tracial form for larger p"
        )));
    }
    let lhs = integral_avg_power(f, p, Weight::Dx, quad)?;
    let rhs = integral_power(f, p, Weight::Dx)?.scaled(hardy_constant(p));
    let params = params(f, p, quad);
    if tracial {
        Ok(trace_report(
            "theorem_continuous_tracial",
            lhs.trace(),
            rhs.trace(),
            tol,
            params,
        ))
    } else {
        loewner_report("theorem_continuous", &lhs, &rhs, tol, params)
    }
}
