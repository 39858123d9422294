//! Homogeneous equilibria `B* = σ·1` and their local stability.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::graph::RowStochastic;
use crate::linalg::{self, LinalgError, Matrix};
use crate::power::PowerFunction;

pub const ROOT_GRID: usize = 10_000;
pub const VERDICT_TOL: f64 = 1e-8;
const BISECTION_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-9;
const DEGENERATE_A: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("coefficient (1-σ)f'(σ) - σg'(σ) = {0:e} is too close to zero")]
    DegenerateCoefficient(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
    /// The boundary point does not solve the equilibrium equation.
    NotEquilibrium,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
            Verdict::NotEquilibrium => "not-equilibrium",
        }
    }

    /// `Stable` when `value < threshold`, `Unstable` when above, with a
    /// marginal band of width `VERDICT_TOL` on either side.
    fn below(value: f64, threshold: f64) -> Verdict {
        if value < threshold - VERDICT_TOL {
            Verdict::Stable
        } else if value > threshold + VERDICT_TOL {
            Verdict::Unstable
        } else {
            Verdict::Marginal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Proposition1Spectrum,
    Corollary1Boundary,
    Corollary2Ratio,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposition1Spectrum => "proposition1-spectrum",
            Method::Corollary1Boundary => "corollary1-boundary",
            Method::Corollary2Ratio => "corollary2-ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub sigma: f64,
    pub residual: f64,
    pub verdict: Verdict,
    pub lambda1: Option<Complex64>,
    pub method: Method,
}

/// `h(σ) = (1−σ)f(σ) − σg(σ)`.
pub fn h0_residual(f: &PowerFunction, g: &PowerFunction, sigma: f64) -> f64 {
    (1.0 - sigma) * f.value(sigma) - sigma * g.value(sigma)
}

pub fn find_h0_roots(f: &PowerFunction, g: &PowerFunction) -> Vec<f64> {
    let h = |s: f64| h0_residual(f, g, s);
    let grid: Vec<f64> = (0..=ROOT_GRID).map(|i| i as f64 / ROOT_GRID as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&s| h(s)).collect();
    let mut roots = Vec::new();
    for i in 0..=ROOT_GRID {
        if vals[i] == 0.0 {
            roots.push(grid[i]);
        }
        if i < ROOT_GRID && vals[i] * vals[i + 1] < 0.0 {
            roots.push(bisect(&h, grid[i], grid[i + 1], vals[i]));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= DEDUP_TOL);
    roots
}

fn bisect(h: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut h_lo: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        let h_mid = h(mid);
        if h_mid == 0.0 || (hi - lo <= BISECTION_TOL && h_mid.abs() <= BISECTION_TOL) {
            return mid;
        }
        if mid <= lo || mid >= hi {
            // Interval exhausted in floating point; return the better end.
            return if h_lo.abs() <= h(hi).abs() { lo } else { hi };
        }
        if h_lo * h_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            h_lo = h_mid;
        }
    }
}

/// Right-hand side derivative at the homogeneous state `σ·1`:
/// `(1−σ)f′(σ)·C_B − σg′(σ)·C_R − (f(σ)+g(σ))·I`.
pub fn jacobian_m(
    sigma: f64,
    f: &PowerFunction,
    g: &PowerFunction,
    c_b: &RowStochastic,
    c_r: &RowStochastic,
) -> Matrix {
    let (fv, df) = f.eval(sigma);
    let (gv, dg) = g.eval(sigma);
    assemble_m(c_b, c_r, (1.0 - sigma) * df, -sigma * dg, -(fv + gv))
}

/// `wb·C_B + wr·C_R + diag·I`.
pub(crate) fn assemble_m(
    c_b: &RowStochastic,
    c_r: &RowStochastic,
    wb: f64,
    wr: f64,
    diag: f64,
) -> Matrix {
    assert_eq!(c_b.size(), c_r.size(), "C_B and C_R differ in size");
    let n = c_b.size();
    let mut m = Matrix::zeros(n, n);
    for v in 0..n {
        for (u, w) in c_b.row(v) {
            m[(v, u)] += wb * w;
        }
        for (u, w) in c_r.row(v) {
            m[(v, u)] += wr * w;
        }
        m[(v, v)] += diag;
    }
    m
}

pub fn classify_spectrum(m: &Matrix) -> Result<(Verdict, Complex64), EquilibriumError> {
    let vals = linalg::eigenvalues(m)?;
    let k = linalg::leading_index(&vals).ok_or(LinalgError::EigenSolverFailure(0))?;
    let lambda1 = vals[k];
    Ok((Verdict::below(lambda1.re, 0.0), lambda1))
}

/// Stability of `B* = 0` and `B* = 1` from the boundary derivatives alone.
pub fn classify_boundary(
    f: &PowerFunction,
    g: &PowerFunction,
) -> (EquilibriumReport, EquilibriumReport) {
    let report = |sigma: f64, verdict: Verdict| EquilibriumReport {
        sigma,
        residual: h0_residual(f, g, sigma),
        verdict,
        lambda1: None,
        method: Method::Corollary1Boundary,
    };
    let (f0, df0) = f.eval(0.0);
    let (g0, _) = g.eval(0.0);
    let (f1, _) = f.eval(1.0);
    let (g1, dg1) = g.eval(1.0);
    let zero = if f0.abs() > VERDICT_TOL {
        Verdict::NotEquilibrium
    } else {
        Verdict::below(df0, g0)
    };
    let one = if g1.abs() > VERDICT_TOL {
        Verdict::NotEquilibrium
    } else {
        Verdict::below(-dg1, f1)
    };
    (report(0.0, zero), report(1.0, one))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corollary2 {
    pub verdict: Verdict,
    pub a: f64,
    pub ratio: f64,
}

/// Shared-graph stability test: `a = (1−σ)f′ − σg′`, `ratio = (f+g)/a`,
/// compared against 1 when `a > 0` and against `Re μ₁` when `a < 0`.
pub fn corollary2_classify(
    sigma: f64,
    f: &PowerFunction,
    g: &PowerFunction,
    mu1: Complex64,
) -> Result<Corollary2, EquilibriumError> {
    let (a, ratio) = corollary2_quantities(sigma, f, g)?;
    let verdict = if a > 0.0 {
        // Stable when ratio > 1.
        Verdict::below(-ratio, -1.0)
    } else {
        Verdict::below(ratio, mu1.re)
    };
    Ok(Corollary2 { verdict, a, ratio })
}

pub fn corollary2_quantities(
    sigma: f64,
    f: &PowerFunction,
    g: &PowerFunction,
) -> Result<(f64, f64), EquilibriumError> {
    let (fv, df) = f.eval(sigma);
    let (gv, dg) = g.eval(sigma);
    let a = (1.0 - sigma) * df - sigma * dg;
    if a.abs() <= DEGENERATE_A {
        return Err(EquilibriumError::DegenerateCoefficient(a));
    }
    Ok((a, (fv + gv) / a))
}

/// Every H₀ root, classified by a direct eigensolve of `M`.
pub fn analyze(
    f: &PowerFunction,
    g: &PowerFunction,
    c_b: &RowStochastic,
    c_r: &RowStochastic,
) -> Result<Vec<EquilibriumReport>, EquilibriumError> {
    find_h0_roots(f, g)
        .into_iter()
        .map(|sigma| {
            let m = jacobian_m(sigma, f, g, c_b, c_r);
            let (verdict, lambda1) = classify_spectrum(&m)?;
            Ok(EquilibriumReport {
                sigma,
                residual: h0_residual(f, g, sigma),
                verdict,
                lambda1: Some(lambda1),
                method: Method::Proposition1Spectrum,
            })
        })
        .collect()
}
