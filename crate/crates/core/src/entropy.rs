//! Reduced relative entropy, its Tsallis deformation, quasi-entropies and the
//! maximal f-divergence.
//!
//! Every functional returns a [`TraceValue`]: the value together with the
//! magnitude scale `1 + Σ |constituent trace|` that tolerances are measured
//! against.

use std::fmt;
use std::sync::Arc;

use crate::deformed::{log_q_unchecked, QParameter};
use crate::error::{Error, Result};
use crate::matrix::{
    c, ensure_unitary, real_trace, trace_product, CMatrix, Contraction, Domain, HermitianMatrix, PositiveDefiniteMatrix,
    SquareMatrix,
};

/// Below this distance from 1 the expanded Tsallis form is refused.
pub const ALT_FORM_Q_GUARD: f64 = 1e-6;
/// Unitarity tolerance for covariance checks.
pub const UNITARY_TOL: f64 = 1e-10;

/// A real trace value and the scale its rounding error is measured against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceValue {
    pub value: f64,
    pub scale: f64,
}

impl TraceValue {
    fn from_terms(terms: &[(f64, f64)]) -> Self {
        let value = terms.iter().map(|(coef, t)| coef * t).sum();
        let scale = 1.0 + terms.iter().map(|(coef, t)| (coef * t).abs()).sum::<f64>();
        Self { value, scale }
    }
}

/// `(A, B, H)` with an optional deformation parameter.
#[derive(Clone, Debug)]
pub struct EntropyInstance {
    pub a: PositiveDefiniteMatrix,
    pub b: PositiveDefiniteMatrix,
    pub h: Contraction,
    pub q: Option<QParameter>,
}

impl EntropyInstance {
    pub fn new(
        a: PositiveDefiniteMatrix,
        b: PositiveDefiniteMatrix,
        h: Contraction,
        q: Option<QParameter>,
    ) -> Result<Self> {
        let n = a.dim();
        for d in [b.dim(), h.dim()] {
            if d != n {
                return Err(Error::DimensionMismatch { expected: n, got: d });
            }
        }
        Ok(Self { a, b, h, q })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn with_q(&self, q: Option<QParameter>) -> Self {
        Self { q, ..self.clone() }
    }
}

fn complex_trace(a: &CMatrix, b: &CMatrix, scale: f64) -> Result<f64> {
    real_trace(trace_product(a, b), scale)
}

/// `Tr[H* X H Y]` for Hermitian `X`, `Y`.
fn sandwich_trace(h: &CMatrix, x: &CMatrix, y: &CMatrix) -> Result<f64> {
    let hxh = h.adjoint() * x * h;
    let scale = 1.0 + hxh.norm() * y.norm();
    complex_trace(&hxh, y, scale)
}

/// `S_H(A|B) = Tr[A log A - H* A H log B - A + B]`.
pub fn reduced_relative_entropy(inst: &EntropyInstance) -> Result<TraceValue> {
    relative_entropy_parts(&inst.a, &inst.b, inst.h.as_matrix())
}

pub(crate) fn relative_entropy_parts(a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix, h: &CMatrix) -> Result<TraceValue> {
    let a_log_a: f64 = a.eigen().eigenvalues.iter().map(|&x| x * x.ln()).sum();
    let cross = sandwich_trace(h, a.as_matrix(), b.log().as_matrix())?;
    Ok(TraceValue::from_terms(&[
        (1.0, a_log_a),
        (-1.0, cross),
        (-1.0, a.trace()),
        (1.0, b.trace()),
    ]))
}

fn require_q(inst: &EntropyInstance) -> Result<QParameter> {
    inst.q
        .ok_or_else(|| Error::ParameterViolation("Tsallis functional needs a q parameter".into()))
}

/// `S_{H,q}(A|B) = Tr[A^{2-q} log_q A - H* A^{2-q} H log_q B - A + B]`.
///
/// A classical `q` dispatches to [`reduced_relative_entropy`].
pub fn reduced_tsallis_entropy(inst: &EntropyInstance) -> Result<TraceValue> {
    let q = require_q(inst)?;
    tsallis_parts(&inst.a, &inst.b, inst.h.as_matrix(), q)
}

pub(crate) fn tsallis_parts(a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix, h: &CMatrix, q: QParameter) -> Result<TraceValue> {
    if q.is_classical() {
        return relative_entropy_parts(a, b, h);
    }
    let e = 2.0 - q.value();
    let own: f64 = a
        .eigen()
        .eigenvalues
        .iter()
        .map(|&x| x.powf(e) * log_q_unchecked(x, q))
        .sum();
    let log_b = b.apply(|x| log_q_unchecked(x, q))?;
    let cross = sandwich_trace(h, a.power(e).as_matrix(), log_b.as_matrix())?;
    Ok(TraceValue::from_terms(&[
        (1.0, own),
        (-1.0, cross),
        (-1.0, a.trace()),
        (1.0, b.trace()),
    ]))
}

/// Expanded Tsallis form
/// `((2-q)/(q-1)) Tr A + Tr B + Tr[(HH* - I) A^{2-q}]/(q-1) + Tr[H* A^{2-q} H B^{q-1}]/(1-q)`.
pub fn reduced_tsallis_alt(inst: &EntropyInstance) -> Result<TraceValue> {
    let q = require_q(inst)?;
    let r = q.deformation();
    if r.abs() < ALT_FORM_Q_GUARD {
        return Err(Error::QTooCloseToOne(q.value()));
    }
    let a_pow = inst.a.power(2.0 - q.value());
    let h = inst.h.as_matrix();
    let defect = h * h.adjoint() - CMatrix::identity(h.nrows(), h.ncols());
    let defect_term = complex_trace(&defect, a_pow.as_matrix(), 1.0 + defect.norm() * a_pow.frobenius_norm())?;
    let cross = sandwich_trace(h, a_pow.as_matrix(), inst.b.power(r).as_matrix())?;
    Ok(TraceValue::from_terms(&[
        ((2.0 - q.value()) / r, inst.a.trace()),
        (1.0, inst.b.trace()),
        (1.0 / r, defect_term),
        (-1.0 / r, cross),
    ]))
}

/// Operator-convexity status of a scalar function on `(0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curvature {
    OperatorConvex,
    OperatorConcave,
}

/// Scalar function with an explicit domain and known operator curvature.
#[derive(Clone)]
pub struct ScalarFn {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    domain: Domain,
    curvature: Option<Curvature>,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("ScalarFn")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("curvature", &self.curvature)
            .finish()
    }
}

impl ScalarFn {
    pub fn custom<F>(name: &str, f: F, domain: Domain, curvature: Option<Curvature>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            f: Arc::new(f),
            domain,
            curvature,
        }
    }

    /// `t log t`, operator convex.
    pub fn t_log_t() -> Self {
        Self::custom("t_log_t", |t| t * t.ln(), Domain::Positive, Some(Curvature::OperatorConvex))
    }

    /// `t^α`; operator convex for `α ∈ [-1, 0] ∪ [1, 2]`, concave for `α ∈ [0, 1]`.
    pub fn power(alpha: f64) -> Self {
        let curvature = if (0.0..=1.0).contains(&alpha) {
            Some(Curvature::OperatorConcave)
        } else if (1.0..=2.0).contains(&alpha) || (-1.0..=0.0).contains(&alpha) {
            Some(Curvature::OperatorConvex)
        } else {
            None
        };
        Self::custom(&format!("t^{alpha}"), move |t| t.powf(alpha), Domain::Positive, curvature)
    }

    pub fn square() -> Self {
        Self::custom("t^2", |t| t * t, Domain::Positive, Some(Curvature::OperatorConvex))
    }

    pub fn identity() -> Self {
        Self::custom("t", |t| t, Domain::Positive, Some(Curvature::OperatorConcave))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn curvature(&self) -> Option<Curvature> {
        self.curvature
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.domain.check(t)?;
        let y = (self.f)(t);
        if !y.is_finite() {
            return Err(Error::DomainViolation {
                value: t,
                domain: format!("{} (non-finite image of {})", self.domain, self.name),
            });
        }
        Ok(y)
    }

    pub(crate) fn raw(&self) -> &(dyn Fn(f64) -> f64 + Send + Sync) {
        self.f.as_ref()
    }
}

/// `S_f^X(ρ‖σ) = Σ_{i,j} μ_j f(λ_i/μ_j) |⟨u_i, X v_j⟩|²`.
pub fn quasi_entropy(
    rho: &PositiveDefiniteMatrix,
    sigma: &PositiveDefiniteMatrix,
    x: &CMatrix,
    f: &ScalarFn,
) -> Result<TraceValue> {
    let (le, me) = (rho.eigen(), sigma.eigen());
    let overlap = le.eigenvectors.adjoint() * x * &me.eigenvectors;
    let mut value = 0.0;
    let mut scale = 1.0;
    for (i, &l) in le.eigenvalues.iter().enumerate() {
        for (j, &m) in me.eigenvalues.iter().enumerate() {
            let w = overlap[(i, j)].norm_sqr();
            let term = m * f.eval(l / m)? * w;
            value += term;
            scale += term.abs();
        }
    }
    Ok(TraceValue { value, scale })
}

/// `Tr[X X* ρ log ρ - X* ρ X log σ]`, the closed form of `S_{t log t}^X`.
pub fn quasi_entropy_t_log_t_explicit(
    rho: &PositiveDefiniteMatrix,
    sigma: &PositiveDefiniteMatrix,
    x: &CMatrix,
) -> Result<TraceValue> {
    let rho_log_rho = rho.apply(|t| t * t.ln())?;
    let xx = x * x.adjoint();
    let first = complex_trace(&xx, rho_log_rho.as_matrix(), 1.0 + xx.norm() * rho_log_rho.frobenius_norm())?;
    let second = sandwich_trace(x, rho.as_matrix(), sigma.log().as_matrix())?;
    Ok(TraceValue::from_terms(&[(1.0, first), (-1.0, second)]))
}

/// `Ŝ_f(A|B) = Tr B f(B^{-1/2} A B^{-1/2})`.
pub fn maximal_f_divergence(a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix, f: &ScalarFn) -> Result<TraceValue> {
    let b_inv_half = b.power(-0.5);
    let inner = HermitianMatrix::symmetrize(b_inv_half.as_matrix() * a.as_matrix() * b_inv_half.as_matrix());
    let eig = inner.eig()?;
    for &t in &eig.eigenvalues {
        f.eval(t)?;
    }
    let fm = eig.map(f.raw(), f.domain())?;
    let value = complex_trace(b.as_matrix(), fm.as_matrix(), 1.0 + b.trace() * fm.frobenius_norm())?;
    Ok(TraceValue::from_terms(&[(1.0, value)]))
}

/// `|S_H(ρ|σ) - (S_{t log t}^H(ρ‖σ) + Tr[(I - HH*) ρ log ρ] + Tr[σ - ρ])|`.
pub fn decomposition_identity_residual(
    rho: &PositiveDefiniteMatrix,
    sigma: &PositiveDefiniteMatrix,
    h: &Contraction,
) -> Result<TraceValue> {
    let s_h = relative_entropy_parts(rho, sigma, h.as_matrix())?;
    let quasi = quasi_entropy(rho, sigma, h.as_matrix(), &ScalarFn::t_log_t())?;
    let rho_log_rho = rho.apply(|t| t * t.ln())?;
    let defect = h.left_defect();
    let defect_term = complex_trace(
        defect.as_matrix(),
        rho_log_rho.as_matrix(),
        1.0 + defect.frobenius_norm() * rho_log_rho.frobenius_norm(),
    )?;
    let linear = sigma.trace() - rho.trace();
    let residual = (s_h.value - (quasi.value + defect_term + linear)).abs();
    Ok(TraceValue {
        value: residual,
        scale: s_h.scale + quasi.scale + defect_term.abs() + linear.abs(),
    })
}

/// `|S_{H,q}(UAU*|UBU*) - S_{U*HU,q}(A|B)|`; the classical functional when `q` is absent.
pub fn unitary_covariance_residual(inst: &EntropyInstance, u: &SquareMatrix) -> Result<TraceValue> {
    let um = u.as_matrix();
    ensure_unitary(um, UNITARY_TOL)?;
    let rotate = |m: &PositiveDefiniteMatrix| PositiveDefiniteMatrix::new(m.as_hermitian().transform(um));
    let ua = rotate(&inst.a)?;
    let ub = rotate(&inst.b)?;
    let h_rot = um.adjoint() * inst.h.as_matrix() * um;
    let q = inst.q.unwrap_or_else(QParameter::classical);
    let lhs = tsallis_parts(&ua, &ub, inst.h.as_matrix(), q)?;
    let rhs = tsallis_parts(&inst.a, &inst.b, &h_rot, q)?;
    Ok(TraceValue {
        value: (lhs.value - rhs.value).abs(),
        scale: lhs.scale.max(rhs.scale),
    })
}

/// Diagonal unitary `diag(e^{iθ_k})`.
pub fn phase_unitary(angles: &[f64]) -> SquareMatrix {
    let n = angles.len();
    let mut m = CMatrix::zeros(n, n);
    for (k, &t) in angles.iter().enumerate() {
        m[(k, k)] = c(t.cos()) + crate::matrix::C64::new(0.0, t.sin());
    }
    SquareMatrix::new(m).expect("phases are finite")
}
