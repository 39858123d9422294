//! Defense-power `f` and attack-power `g` functions.
//!
//! The registry is closed: every family carries exact derivatives in the
//! state argument `x` and, for the two ν-families, in the parameter `ν`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("x = {0} outside [0, 1]")]
    Domain(f64),
    #[error("function family `{0}` has no ν parameter")]
    NotParameterized(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PowerFunction {
    /// `c₀ + c₁x + … + c_k x^k`
    Polynomial { coefficients: Vec<f64> },
    /// `1 / (e^{scale·x + shift} + 1)`
    Logistic { scale: f64, shift: f64 },
    /// `(νx − ν/2)²`
    CenteredQuadraticNu { nu: f64 },
    /// `νx − 2x²`
    LinearMinusQuadraticNu { nu: f64 },
}

impl PowerFunction {
    pub fn polynomial(coefficients: impl Into<Vec<f64>>) -> Self {
        Self::Polynomial {
            coefficients: coefficients.into(),
        }
    }

    pub fn logistic(scale: f64, shift: f64) -> Self {
        Self::Logistic { scale, shift }
    }

    pub fn centered_quadratic(nu: f64) -> Self {
        Self::CenteredQuadraticNu { nu }
    }

    pub fn linear_minus_quadratic(nu: f64) -> Self {
        Self::LinearMinusQuadraticNu { nu }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Polynomial { .. } => "polynomial",
            Self::Logistic { .. } => "logistic",
            Self::CenteredQuadraticNu { .. } => "centered-quadratic-nu",
            Self::LinearMinusQuadraticNu { .. } => "linear-minus-quadratic-nu",
        }
    }

    pub fn nu(&self) -> Option<f64> {
        match self {
            Self::CenteredQuadraticNu { nu } | Self::LinearMinusQuadraticNu { nu } => Some(*nu),
            _ => None,
        }
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self, PowerError> {
        match self {
            Self::CenteredQuadraticNu { .. } => Ok(Self::CenteredQuadraticNu { nu }),
            Self::LinearMinusQuadraticNu { .. } => Ok(Self::LinearMinusQuadraticNu { nu }),
            _ => Err(PowerError::NotParameterized(self.family_name())),
        }
    }

    /// Value and `d/dx` without the domain check. Used inside the integrator,
    /// where Runge–Kutta stages may sit a rounding error outside `[0, 1]`.
    #[inline]
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            Self::Polynomial { coefficients } => {
                let mut v = 0.0;
                let mut d = 0.0;
                for &c in coefficients.iter().rev() {
                    d = d * x + v;
                    v = v * x + c;
                }
                (v, d)
            }
            Self::Logistic { scale, shift } => {
                let v = 1.0 / ((scale * x + shift).exp() + 1.0);
                (v, -scale * v * (1.0 - v))
            }
            Self::CenteredQuadraticNu { nu } => {
                let c = x - 0.5;
                (nu * nu * c * c, 2.0 * nu * nu * c)
            }
            Self::LinearMinusQuadraticNu { nu } => (nu * x - 2.0 * x * x, nu - 4.0 * x),
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn evaluate(&self, x: f64) -> Result<(f64, f64), PowerError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(PowerError::Domain(x));
        }
        Ok(self.eval(x))
    }

    /// `(∂φ/∂ν, ∂φ′/∂ν)` at `x`.
    pub fn nu_derivatives(&self, x: f64) -> Result<(f64, f64), PowerError> {
        match self {
            Self::CenteredQuadraticNu { nu } => {
                let c = x - 0.5;
                Ok((2.0 * nu * c * c, 4.0 * nu * c))
            }
            Self::LinearMinusQuadraticNu { .. } => Ok((x, 1.0)),
            _ => Err(PowerError::NotParameterized(self.family_name())),
        }
    }

    /// ν-derivatives, with zeros for families that do not depend on ν.
    pub fn nu_derivatives_or_zero(&self, x: f64) -> (f64, f64) {
        self.nu_derivatives(x).unwrap_or((0.0, 0.0))
    }

    /// The function `x ↦ φ(1 − x)`, used by the blue/red duality map.
    pub fn reflected(&self) -> Self {
        match self {
            Self::Polynomial { coefficients } => {
                // Σ c_k (1−x)^k = Σ_j x^j Σ_k c_k C(k, j) (−1)^j
                let mut out = vec![0.0; coefficients.len()];
                for (k, &c) in coefficients.iter().enumerate() {
                    let mut binom = 1.0;
                    for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        *slot += c * binom * sign;
                        binom = binom * (k - j) as f64 / (j + 1) as f64;
                    }
                }
                Self::Polynomial { coefficients: out }
            }
            Self::Logistic { scale, shift } => Self::Logistic {
                scale: -scale,
                shift: scale + shift,
            },
            Self::CenteredQuadraticNu { .. } => self.clone(),
            Self::LinearMinusQuadraticNu { nu } => {
                Self::polynomial(vec![nu - 2.0, 4.0 - nu, -2.0])
            }
        }
    }

    /// Central finite difference in `x`. Cross-checking only.
    pub fn fd_slope(&self, x: f64, h: f64) -> f64 {
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Defense,
    Attack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomRule {
    /// `f(0) = 0` or `g(1) = 0`
    Zero,
    /// `f > 0` on `(0, 1]`, `g > 0` on `[0, 1)`
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub function: Role,
    pub rule: AxiomRule,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub f_zero_ok: bool,
    pub g_one_ok: bool,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

const ZERO_TOL: f64 = 1e-12;

/// Checks the power-function axioms on a uniform grid of `grid_size` points.
/// Violations are reported rather than raised: several published examples
/// are run deliberately outside the axioms.
pub fn validate_axioms(f: &PowerFunction, g: &PowerFunction, grid_size: usize) -> AxiomReport {
    let grid_size = grid_size.max(2);
    let mut violations = Vec::new();
    let f0 = f.value(0.0);
    let g1 = g.value(1.0);
    let f_zero_ok = f0.abs() <= ZERO_TOL;
    let g_one_ok = g1.abs() <= ZERO_TOL;
    if !f_zero_ok {
        violations.push(AxiomViolation {
            function: Role::Defense,
            rule: AxiomRule::Zero,
            x: 0.0,
            value: f0,
        });
    }
    if !g_one_ok {
        violations.push(AxiomViolation {
            function: Role::Attack,
            rule: AxiomRule::Zero,
            x: 1.0,
            value: g1,
        });
    }
    let last = grid_size - 1;
    for i in 0..grid_size {
        let x = i as f64 / last as f64;
        if i > 0 {
            let v = f.value(x);
            if v <= 0.0 {
                violations.push(AxiomViolation {
                    function: Role::Defense,
                    rule: AxiomRule::Positive,
                    x,
                    value: v,
                });
            }
        }
        if i < last {
            let v = g.value(x);
            if v <= 0.0 {
                violations.push(AxiomViolation {
                    function: Role::Attack,
                    rule: AxiomRule::Positive,
                    x,
                    value: v,
                });
            }
        }
    }
    AxiomReport {
        f_zero_ok,
        g_one_ok,
        violations,
    }
}
