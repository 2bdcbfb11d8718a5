//! First derivatives of trace functions of Hermitian matrices.
//!
//! [`full_frechet_trace_derivative`] uses the Daleckii–Krein form
//! `Df(X)[Y] = U (f^{[1]}(λ_i, λ_j) ∘ U* Y U) U*`, which needs no commutation
//! hypothesis; the two closed forms are checked against it and against
//! central finite differences.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::deformed::{exp_q_unchecked, log_q_unchecked, QParameter};
use crate::error::{Error, Result};
use crate::matrix::{c, real_trace, trace_product, Domain, HermitianMatrix};

/// Relative gap below which two eigenvalues are treated as equal.
pub const MERGE_TOL: f64 = 1e-8;
/// Relative commutator bound for the commuting-derivative formula.
pub const COMMUTE_TOL: f64 = 1e-9;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar `C¹` function with its derivative and domain.
#[derive(Clone)]
pub struct SmoothFn {
    name: String,
    f: RealFn,
    df: RealFn,
    domain: Domain,
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("SmoothFn").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl SmoothFn {
    pub fn new<F, D>(name: &str, f: F, df: D, domain: Domain) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            f: Arc::new(f),
            df: Arc::new(df),
            domain,
        }
    }

    pub fn identity() -> Self {
        Self::new("id", |x| x, |_| 1.0, Domain::Real)
    }

    pub fn square() -> Self {
        Self::new("x^2", |x| x * x, |x| 2.0 * x, Domain::Real)
    }

    pub fn cube() -> Self {
        Self::new("x^3", |x| x * x * x, |x| 3.0 * x * x, Domain::Real)
    }

    pub fn exp() -> Self {
        Self::new("exp", f64::exp, f64::exp, Domain::Real)
    }

    pub fn log() -> Self {
        Self::new("log", f64::ln, |x| 1.0 / x, Domain::Positive)
    }

    pub fn power(p: f64) -> Self {
        Self::new(&format!("x^{p}"), move |x| x.powf(p), move |x| p * x.powf(p - 1.0), Domain::Positive)
    }

    pub fn log_q(q: QParameter) -> Self {
        let qv = q.value();
        Self::new(
            &format!("log_{qv}"),
            move |x| log_q_unchecked(x, q),
            move |x| x.powf(qv - 2.0),
            Domain::Positive,
        )
    }

    pub fn exp_q(q: QParameter) -> Self {
        let qv = q.value();
        Self::new(
            &format!("exp_{qv}"),
            move |x| exp_q_unchecked(x, q),
            move |x| exp_q_unchecked(x, q).powf(2.0 - qv),
            q.exp_domain(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.checked(&self.f, x)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.checked(&self.df, x)
    }

    fn checked(&self, g: &RealFn, x: f64) -> Result<f64> {
        self.domain.check(x)?;
        let y = g(x);
        if !y.is_finite() {
            return Err(Error::DomainViolation {
                value: x,
                domain: format!("{} (non-finite image under {})", self.domain, self.name),
            });
        }
        Ok(y)
    }

    /// `f(M)`.
    pub fn apply(&self, m: &HermitianMatrix) -> Result<HermitianMatrix> {
        let eig = m.eig()?;
        let values = eig.eigenvalues.iter().map(|&x| self.value(x)).collect::<Result<Vec<_>>>()?;
        Ok(eig.compose(&values))
    }

    /// `f'(M)`.
    pub fn apply_derivative(&self, m: &HermitianMatrix) -> Result<HermitianMatrix> {
        let eig = m.eig()?;
        let values = eig.eigenvalues.iter().map(|&x| self.derivative(x)).collect::<Result<Vec<_>>>()?;
        Ok(eig.compose(&values))
    }

    /// `Tr f(M)`.
    pub fn trace(&self, m: &HermitianMatrix) -> Result<f64> {
        m.eig()?.eigenvalues.iter().map(|&x| self.value(x)).sum()
    }
}

/// First divided differences `f^{[1]}(λ_i, λ_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DividedDifferenceTable {
    pub values: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub f_name: String,
}

pub fn divided_difference(f: &SmoothFn, eigenvalues: &[f64], merge_tol: f64) -> Result<DividedDifferenceTable> {
    let n = eigenvalues.len();
    let fv = eigenvalues.iter().map(|&x| f.value(x)).collect::<Result<Vec<_>>>()?;
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        values[(i, i)] = f.derivative(eigenvalues[i])?;
        for j in 0..i {
            let (x, y) = (eigenvalues[i], eigenvalues[j]);
            let d = if (x - y).abs() > merge_tol * (1.0 + x.abs() + y.abs()) {
                (fv[i] - fv[j]) / (x - y)
            } else {
                f.derivative(0.5 * (x + y))?
            };
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    Ok(DividedDifferenceTable {
        values,
        eigenvalues: eigenvalues.to_vec(),
        f_name: f.name().to_string(),
    })
}

fn hermitian_trace(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    real_trace(trace_product(a.as_matrix(), b.as_matrix()), 1.0 + a.frobenius_norm() * b.frobenius_norm())
}

/// `d/dt Tr f(A + tB)|_{t=0} = Tr f'(A) B`.
pub fn trace_derivative_i(f: &SmoothFn, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    hermitian_trace(&f.apply_derivative(a)?, b)
}

/// `‖XZ - ZX‖_F`.
pub fn commutator_norm(x: &HermitianMatrix, z: &HermitianMatrix) -> f64 {
    let (xm, zm) = (x.as_matrix(), z.as_matrix());
    (xm * zm - zm * xm).norm()
}

/// `d/dt Tr f(X + tY) Z|_{t=0} = Tr Y f'(X) Z`, valid when `XZ = ZX`.
pub fn trace_derivative_ii(
    f: &SmoothFn,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    z: &HermitianMatrix,
    commute_tol: f64,
) -> Result<f64> {
    let norm = commutator_norm(x, z);
    let bound = commute_tol * (1.0 + x.frobenius_norm() * z.frobenius_norm());
    if norm > bound {
        return Err(Error::CommutationViolation { norm, bound });
    }
    let fp = f.apply_derivative(x)?;
    let prod = y.as_matrix() * fp.as_matrix();
    real_trace(
        trace_product(&prod, z.as_matrix()),
        1.0 + y.frobenius_norm() * fp.frobenius_norm() * z.frobenius_norm(),
    )
}

/// Fréchet derivative `Df(X)[Y]` in Daleckii–Krein form.
pub fn frechet_derivative(f: &SmoothFn, x: &HermitianMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = x.eig()?;
    let table = divided_difference(f, &eig.eigenvalues, MERGE_TOL)?;
    let u = &eig.eigenvectors;
    let mut inner = u.adjoint() * y.as_matrix() * u;
    for j in 0..inner.ncols() {
        for i in 0..inner.nrows() {
            inner[(i, j)] *= c(table.values[(i, j)]);
        }
    }
    Ok(HermitianMatrix::symmetrize(u * inner * u.adjoint()))
}

/// `Tr[Df(X)[Y] Z]` without any commutation hypothesis.
pub fn full_frechet_trace_derivative(
    f: &SmoothFn,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    z: &HermitianMatrix,
) -> Result<f64> {
    hermitian_trace(&frechet_derivative(f, x, y)?, z)
}

/// `(g(h) - g(-h)) / 2h`.
pub fn central_difference<G: Fn(f64) -> Result<f64>>(g: G, h: f64) -> Result<f64> {
    Ok((g(h)? - g(-h)?) / (2.0 * h))
}

/// Central difference of `t ↦ Tr f(A + tB)`.
pub fn fd_trace_derivative_i(f: &SmoothFn, a: &HermitianMatrix, b: &HermitianMatrix, h: f64) -> Result<f64> {
    central_difference(|t| f.trace(&a.add(&b.scale(t))), h)
}

/// Central difference of `t ↦ Tr f(X + tY) Z`.
pub fn fd_trace_derivative_z(
    f: &SmoothFn,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    z: &HermitianMatrix,
    h: f64,
) -> Result<f64> {
    central_difference(|t| hermitian_trace(&f.apply(&x.add(&y.scale(t)))?, z), h)
}
