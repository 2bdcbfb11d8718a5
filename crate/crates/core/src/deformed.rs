//! Tsallis q-logarithm and q-exponential, scalar and matrix.
//!
//! `log_q x = (x^{q-1} - 1)/(q - 1)` and its inverse
//! `exp_q x = (1 + (q - 1) x)^{1/(q-1)}` on `1 + (q - 1) x > 0`.
//! Both are evaluated through `expm1`/`ln_1p` so the formulas stay accurate
//! as `q -> 1`; within [`Q_SWITCH`] of 1 they dispatch to `ln`/`exp`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Domain, HermitianMatrix, PositiveDefiniteMatrix};

/// Below this distance from 1 the classical functions are used.
pub const Q_SWITCH: f64 = 1e-12;
/// Margin on `1 + (q - 1) x > 0` that rejects boundary values.
pub const DOMAIN_MARGIN: f64 = 1e-14;

/// Deformation parameter `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QParameter {
    q: f64,
    is_classical: bool,
}

impl QParameter {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::InvalidQ(q));
        }
        Ok(Self {
            q,
            is_classical: (q - 1.0).abs() < Q_SWITCH,
        })
    }

    pub fn classical() -> Self {
        Self {
            q: 1.0,
            is_classical: true,
        }
    }

    pub fn value(&self) -> f64 {
        self.q
    }

    pub fn is_classical(&self) -> bool {
        self.is_classical
    }

    /// `q - 1`
    pub fn deformation(&self) -> f64 {
        self.q - 1.0
    }

    /// Domain of `exp_q`.
    pub fn exp_domain(&self) -> Domain {
        if self.is_classical {
            Domain::Real
        } else {
            Domain::Affine {
                slope: self.deformation(),
                offset: 1.0,
                margin: DOMAIN_MARGIN,
            }
        }
    }

    pub fn log(&self, x: f64) -> f64 {
        log_q_unchecked(x, *self)
    }

    pub fn exp(&self, x: f64) -> f64 {
        exp_q_unchecked(x, *self)
    }
}

pub(crate) fn log_q_unchecked(x: f64, q: QParameter) -> f64 {
    if q.is_classical {
        x.ln()
    } else {
        let r = q.deformation();
        (r * x.ln()).exp_m1() / r
    }
}

pub(crate) fn exp_q_unchecked(x: f64, q: QParameter) -> f64 {
    if q.is_classical {
        x.exp()
    } else {
        let r = q.deformation();
        ((r * x).ln_1p() / r).exp()
    }
}

pub fn log_q_scalar(x: f64, q: QParameter) -> Result<f64> {
    Domain::Positive.check(x)?;
    Ok(log_q_unchecked(x, q))
}

pub fn exp_q_scalar(x: f64, q: QParameter) -> Result<f64> {
    q.exp_domain().check(x)?;
    Ok(exp_q_unchecked(x, q))
}

pub fn log_q_matrix(a: &PositiveDefiniteMatrix, q: QParameter) -> Result<HermitianMatrix> {
    a.eigen().map(|x| log_q_unchecked(x, q), Domain::Positive)
}

pub fn exp_q_matrix(a: &HermitianMatrix, q: QParameter) -> Result<PositiveDefiniteMatrix> {
    let image = a.eig()?.map(|x| exp_q_unchecked(x, q), q.exp_domain())?;
    PositiveDefiniteMatrix::new(image)
}

/// `|log_q(y/x) - (log_q y - (y/x)^{q-1} log_q x)|`.
pub fn log_q_quotient_identity_check(x: f64, y: f64, q: QParameter) -> Result<f64> {
    let lhs = log_q_scalar(y / x, q)?;
    let rhs = log_q_scalar(y, q)? - (y / x).powf(q.deformation()) * log_q_scalar(x, q)?;
    Ok((lhs - rhs).abs())
}

/// `d/dx log_q x = x^{q-2}`.
pub fn dlog_q(x: f64, q: QParameter) -> Result<f64> {
    Domain::Positive.check(x)?;
    Ok(x.powf(q.value() - 2.0))
}

/// `d/dx exp_q x = exp_q(x)^{2-q}`.
pub fn dexp_q(x: f64, q: QParameter) -> Result<f64> {
    q.exp_domain().check(x)?;
    Ok(exp_q_unchecked(x, q).powf(2.0 - q.value()))
}

/// Both closed-form derivatives at `x`; `x` must lie in both domains.
pub fn deformed_derivatives(x: f64, q: QParameter) -> Result<(f64, f64)> {
    Ok((dlog_q(x, q)?, dexp_q(x, q)?))
}
