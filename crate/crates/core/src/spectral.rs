//! First-order drift of the leading Jacobian eigenvalue and the search for
//! the parameter value at which it crosses the imaginary axis.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::equilibrium::{assemble_m, find_h0_roots, jacobian_m};
use crate::graph::RowStochastic;
use crate::linalg::{self, LinalgError, Matrix};
use crate::power::{PowerError, PowerFunction};

/// Minimum distance from `λ₁` to any other eigenvalue.
pub const SIMPLICITY_GAP: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const CONDITION_TOL: f64 = 1e-12;
/// Largest jump of the tracked root between neighbouring grid points.
pub const MAX_ROOT_JUMP: f64 = 0.1;
const IMAG_TOL: f64 = 1e-8;
const INTERIOR_EPS: f64 = 1e-9;
const REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("leading eigenvalue is not simple (gap {gap:e})")]
    DegenerateLeading { gap: f64 },
    #[error("eigenvector residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
    #[error("left and right eigenvectors are nearly orthogonal (|yᵀx| = {0:e})")]
    IllConditioned(f64),
    #[error("Re(λ₁) does not change sign over [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },
    #[error("tracked interior equilibrium lost at ν = {0}")]
    RootLost(f64),
    #[error("invalid search range: {0}")]
    InvalidRange(String),
    #[error(transparent)]
    Power(#[from] PowerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTriple {
    pub lambda1: Complex64,
    pub right_vec: Vec<Complex64>,
    pub left_vec: Vec<Complex64>,
    /// `y₁ᵀx₁`, unconjugated.
    pub normalization: Complex64,
}

fn unit(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let s = linalg::norm2(&v);
    v.iter_mut().for_each(|z| *z /= s);
    v
}

fn residual(m: &Matrix, lambda: Complex64, x: &[Complex64]) -> f64 {
    m.mul_vec_complex(x)
        .iter()
        .zip(x)
        .map(|(mx, xi)| (mx - lambda * xi).norm())
        .fold(0.0, f64::max)
}

/// Right and left eigenvectors of the eigenvalue with largest real part.
pub fn leading_eigentriple(m: &Matrix) -> Result<SpectralTriple, SpectralError> {
    let right = linalg::eigen(m)?;
    let k = linalg::leading_index(&right.values).ok_or(LinalgError::EigenSolverFailure(0))?;
    let lambda1 = right.values[k];
    let gap = right
        .values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, z)| (z - lambda1).norm())
        .fold(f64::INFINITY, f64::min);
    if gap <= SIMPLICITY_GAP {
        return Err(SpectralError::DegenerateLeading { gap });
    }
    let mt = m.transpose();
    let left = linalg::eigen(&mt)?;
    let j = (0..left.values.len())
        .min_by(|&a, &b| {
            (left.values[a] - lambda1)
                .norm()
                .total_cmp(&(left.values[b] - lambda1).norm())
        })
        .ok_or(LinalgError::EigenSolverFailure(0))?;
    let x = unit(right.vectors[k].clone());
    let y = unit(left.vectors[j].clone());
    let scale = RESIDUAL_TOL * m.inf_norm().max(f64::MIN_POSITIVE);
    let r = residual(m, lambda1, &x).max(residual(&mt, lambda1, &y));
    if r > scale {
        return Err(SpectralError::Residual { residual: r });
    }
    let normalization = linalg::dot_t(&y, &x);
    Ok(SpectralTriple {
        lambda1,
        right_vec: x,
        left_vec: y,
        normalization,
    })
}

/// `δλ₁ ≈ y₁ᵀ·δM·x₁ / (y₁ᵀx₁)`.
pub fn delta_lambda1(triple: &SpectralTriple, dm: &Matrix) -> Result<Complex64, SpectralError> {
    if triple.normalization.norm() <= CONDITION_TOL {
        return Err(SpectralError::IllConditioned(triple.normalization.norm()));
    }
    let dmx = dm.mul_vec_complex(&triple.right_vec);
    Ok(linalg::dot_t(&triple.left_vec, &dmx) / triple.normalization)
}

/// Change of `M` when ν moves by `d_nu` with `σ` held fixed. Functions that
/// do not depend on ν contribute nothing.
pub fn delta_m_parameter(
    sigma: f64,
    f: &PowerFunction,
    g: &PowerFunction,
    c_b: &RowStochastic,
    c_r: &RowStochastic,
    d_nu: f64,
) -> Matrix {
    let (df_nu, dfp_nu) = f.nu_derivatives_or_zero(sigma);
    let (dg_nu, dgp_nu) = g.nu_derivatives_or_zero(sigma);
    assemble_m(
        c_b,
        c_r,
        (1.0 - sigma) * dfp_nu * d_nu,
        -sigma * dgp_nu * d_nu,
        -(df_nu + dg_nu) * d_nu,
    )
}

/// Change of `M` when the graphs are replaced, with `σ`, `f`, `g` fixed.
pub fn delta_m_structure(
    sigma: f64,
    f: &PowerFunction,
    g: &PowerFunction,
    c_b: &RowStochastic,
    c_b_new: &RowStochastic,
    c_r: &RowStochastic,
    c_r_new: &RowStochastic,
) -> Matrix {
    let (_, df) = f.eval(sigma);
    let (_, dg) = g.eval(sigma);
    let mut out = c_b_new.to_dense().sub(&c_b.to_dense()).scaled((1.0 - sigma) * df);
    out.add_scaled(-sigma * dg, &c_r_new.to_dense().sub(&c_r.to_dense()));
    out
}

/// A one-parameter family of models: whichever of `f`, `g` carries ν is
/// re-parameterized at each grid point.
#[derive(Debug, Clone)]
pub struct NuFamily<'a> {
    pub f: &'a PowerFunction,
    pub g: &'a PowerFunction,
    pub c_b: &'a RowStochastic,
    pub c_r: &'a RowStochastic,
}

impl NuFamily<'_> {
    pub fn at(&self, nu: f64) -> Result<(PowerFunction, PowerFunction), SpectralError> {
        let f = self.f.with_nu(nu).unwrap_or_else(|_| self.f.clone());
        let g = self.g.with_nu(nu).unwrap_or_else(|_| self.g.clone());
        if self.f.nu().is_none() && self.g.nu().is_none() {
            return Err(PowerError::NotParameterized(self.g.family_name()).into());
        }
        Ok((f, g))
    }

    fn leading(&self, nu: f64, sigma: f64) -> Result<Complex64, SpectralError> {
        let (f, g) = self.at(nu)?;
        let m = jacobian_m(sigma, &f, &g, self.c_b, self.c_r);
        let vals = linalg::eigenvalues(&m)?;
        let k = linalg::leading_index(&vals).ok_or(LinalgError::EigenSolverFailure(0))?;
        Ok(vals[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfGridPoint {
    pub nu: f64,
    pub sigma: f64,
    pub lambda1: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfSearchResult {
    pub nu_star: f64,
    pub sigma_star: f64,
    pub lambda1_star: Complex64,
    /// Grid points on either side of the sign change.
    pub nu_bracket: (f64, f64),
    pub re_lambda1_bracket: (f64, f64),
    pub grid_step: f64,
    /// `Im λ₁ ≠ 0` on both sides of the crossing.
    pub is_hopf: bool,
    pub refined: bool,
    pub grid: Vec<HopfGridPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HopfOptions {
    /// Bisect the bracket in ν down to 1e-6.
    pub refine: bool,
    /// Starting guess for the tracked interior root; defaults to the
    /// smallest interior root at the first grid point.
    pub sigma_guess: Option<f64>,
}

fn interior_roots(f: &PowerFunction, g: &PowerFunction) -> Vec<f64> {
    find_h0_roots(f, g)
        .into_iter()
        .filter(|&s| s > INTERIOR_EPS && s < 1.0 - INTERIOR_EPS)
        .collect()
}

fn track_root(family: &NuFamily, nu: f64, previous: Option<f64>) -> Result<f64, SpectralError> {
    let (f, g) = family.at(nu)?;
    let roots = interior_roots(&f, &g);
    let pick = match previous {
        None => roots.first().copied(),
        Some(p) => roots
            .iter()
            .copied()
            .min_by(|a, b| (a - p).abs().total_cmp(&(b - p).abs()))
            .filter(|r| (r - p).abs() <= MAX_ROOT_JUMP),
    };
    pick.ok_or(SpectralError::RootLost(nu))
}

/// Scans `ν = lo, lo + step, …, hi` for the first sign change of `Re λ₁`
/// along the tracked interior equilibrium `σ(ν)`.
pub fn find_hopf_critical(
    family: &NuFamily,
    nu_range: (f64, f64),
    step: f64,
    opts: HopfOptions,
) -> Result<HopfSearchResult, SpectralError> {
    let (lo, hi) = nu_range;
    if !(step > 0.0 && lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(SpectralError::InvalidRange(format!(
            "need lo < hi and step > 0, got ({lo}, {hi}) step {step}"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let nus: Vec<f64> = (0..count).map(|k| lo + k as f64 * step).collect();

    let mut sigmas = Vec::with_capacity(count);
    let mut prev = opts.sigma_guess;
    for &nu in &nus {
        let s = track_root(family, nu, prev)?;
        sigmas.push(s);
        prev = Some(s);
    }
    let grid: Vec<HopfGridPoint> = nus
        .par_iter()
        .zip(sigmas.par_iter())
        .map(|(&nu, &sigma)| {
            Ok(HopfGridPoint {
                nu,
                sigma,
                lambda1: family.leading(nu, sigma)?,
            })
        })
        .collect::<Result<_, SpectralError>>()?;

    let k = grid
        .windows(2)
        .position(|w| (w[0].lambda1.re < 0.0) != (w[1].lambda1.re < 0.0))
        .ok_or(SpectralError::NoCrossing { lo, hi })?;
    let (below, above) = (grid[k], grid[k + 1]);
    let is_hopf = below.lambda1.im.abs() > IMAG_TOL && above.lambda1.im.abs() > IMAG_TOL;

    let star = if opts.refine {
        refine_crossing(family, below, above)?
    } else {
        above
    };
    Ok(HopfSearchResult {
        nu_star: star.nu,
        sigma_star: star.sigma,
        lambda1_star: star.lambda1,
        nu_bracket: (below.nu, above.nu),
        re_lambda1_bracket: (below.lambda1.re, above.lambda1.re),
        grid_step: step,
        is_hopf,
        refined: opts.refine,
        grid,
    })
}

/// Bisection in ν; returns the endpoint on the side of `b`.
fn refine_crossing(
    family: &NuFamily,
    mut a: HopfGridPoint,
    mut b: HopfGridPoint,
) -> Result<HopfGridPoint, SpectralError> {
    while (b.nu - a.nu).abs() > REFINE_TOL {
        let nu = 0.5 * (a.nu + b.nu);
        let sigma = track_root(family, nu, Some(a.sigma))?;
        let mid = HopfGridPoint {
            nu,
            sigma,
            lambda1: family.leading(nu, sigma)?,
        };
        if (mid.lambda1.re < 0.0) == (a.lambda1.re < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(b)
}
