use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Player-specific resource cost, evaluated at the aggregate load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFunction {
    /// `a_0 + a_1 x + ... + a_k x^k`.
    Poly(Vec<f64>),
    /// Mean M/M/1 delay `1 / (mu - x)`, defined for `x < mu`.
    Queue { mu: f64 },
    /// `c (x + b)`.
    AffineScaled { c: f64, b: f64 },
}

impl CostFunction {
    pub fn zero() -> Self {
        Self::Poly(vec![])
    }

    /// `x + 1`.
    pub fn linear_plus_one() -> Self {
        Self::Poly(vec![1.0, 1.0])
    }

    pub fn monomial(coef: f64, degree: usize) -> Self {
        let mut a = vec![0.0; degree + 1];
        a[degree] = coef;
        Self::Poly(a)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self {
            Self::Poly(a) => {
                if let Some(v) = a.iter().find(|v| !v.is_finite() || **v < 0.0) {
                    return bad(format!("polynomial coefficient {v} must be finite and nonnegative"));
                }
            }
            Self::Queue { mu } => {
                if !(mu.is_finite() && *mu > 0.0) {
                    return bad(format!("queue service rate {mu} must be positive"));
                }
            }
            Self::AffineScaled { c, b } => {
                if !(c.is_finite() && b.is_finite() && *c >= 0.0 && *b >= 0.0) {
                    return bad(format!("affine cost c={c}, b={b} must be finite and nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Loads at or above this are outside the domain.
    pub fn capacity(&self) -> f64 {
        match self {
            Self::Queue { mu } => *mu,
            _ => f64::INFINITY,
        }
    }

    /// Value at `x`; `+inf` outside the domain.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Poly(a) => a.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Self::Queue { mu } if x < *mu => 1.0 / (mu - x),
            Self::Queue { .. } => f64::INFINITY,
            Self::AffineScaled { c, b } => c * (x + b),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Self::Poly(a) => a.iter().enumerate().skip(1).rev().fold(0.0, |acc, (j, c)| acc * x + j as f64 * c),
            Self::Queue { mu } if x < *mu => 1.0 / ((mu - x) * (mu - x)),
            Self::Queue { .. } => f64::INFINITY,
            Self::AffineScaled { c, .. } => *c,
        }
    }

    /// Same function multiplied by `gamma`. Queue costs have no scaled form.
    pub fn scaled(&self, gamma: f64) -> Result<Self> {
        match self {
            Self::Poly(a) => Ok(Self::Poly(a.iter().map(|c| c * gamma).collect())),
            Self::Queue { .. } => Err(Error::InvalidSpec("queue costs cannot be rescaled".into())),
            Self::AffineScaled { c, b } => Ok(Self::AffineScaled { c: c * gamma, b: *b }),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Poly(a) => a.iter().all(|c| *c == 0.0),
            Self::Queue { .. } => false,
            Self::AffineScaled { c, .. } => *c == 0.0,
        }
    }
}
