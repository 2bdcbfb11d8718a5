//! Variational expressions for the reduced relative entropy and its Tsallis
//! deformation: objectives, closed-form values and maximizers, and a
//! finite-difference gradient-ascent oracle over the constraint sets.

use serde::{Deserialize, Serialize};

use crate::deformed::{exp_q_unchecked, log_q_unchecked, QParameter};
use crate::entropy::{relative_entropy_parts, tsallis_parts, TraceValue};
use crate::error::{Error, Result};
use crate::matrix::{
    real_trace, trace_product, CMatrix, Contraction, EigenDecomposition, HermitianMatrix, PositiveDefiniteMatrix,
};
use crate::sampling::{Field, Sampler};

/// Tolerance on `Tr X = γ`, relative to `max(1, γ)`.
pub const TRACE_TOL: f64 = 1e-10;
const SAMPLE_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    ClassicalOverX,
    ClassicalOverA,
    DeformedOverX,
    DeformedOverA,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::ClassicalOverX,
        ProblemKind::ClassicalOverA,
        ProblemKind::DeformedOverX,
        ProblemKind::DeformedOverA,
    ];

    pub fn over_x(self) -> bool {
        matches!(self, ProblemKind::ClassicalOverX | ProblemKind::DeformedOverX)
    }
}

fn check_trace(x: &HermitianMatrix, gamma: f64) -> Result<()> {
    let t = x.trace();
    if (t - gamma).abs() > TRACE_TOL * gamma.max(1.0) {
        return Err(Error::TraceConstraintViolation { expected: gamma, got: t });
    }
    Ok(())
}

fn check_deformed(q: QParameter, gamma: f64) -> Result<()> {
    let qv = q.value();
    if !(qv > 1.0 && qv <= 2.0) || q.is_classical() {
        return Err(Error::ParameterViolation(format!("q must lie in (1, 2], got {qv}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::ParameterViolation(format!("trace budget must be positive, got {gamma}")));
    }
    Ok(())
}

fn hermitian_trace(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    real_trace(trace_product(a, b), 1.0 + a.norm() * b.norm())
}

/// `log Σ e^{λ_i}` without overflow.
fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// `A + H log(Y) H*`.
fn classical_exponent(a: &HermitianMatrix, y: &PositiveDefiniteMatrix, h: &Contraction) -> HermitianMatrix {
    a.add(&y.log().transform(h.as_matrix()))
}

/// `A + H log_q(Y) H*`.
fn deformed_exponent(a: &HermitianMatrix, y: &PositiveDefiniteMatrix, h: &Contraction, q: QParameter) -> Result<HermitianMatrix> {
    let log_y = y.apply(|x| log_q_unchecked(x, q))?;
    Ok(a.add(&log_y.transform(h.as_matrix())))
}

/// `exp_q(K)` as a spectral decomposition, after checking `1 + (q-1) K > 0`.
fn exp_q_spectrum(k: &HermitianMatrix, q: QParameter) -> Result<EigenDecomposition> {
    let eig = k.eig()?;
    let domain = q.exp_domain();
    let values = eig
        .eigenvalues
        .iter()
        .map(|&x| {
            domain.check(x)?;
            Ok(exp_q_unchecked(x, q))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenDecomposition {
        eigenvalues: values,
        eigenvectors: eig.eigenvectors,
    })
}

/// `Tr XA - S_H(X|Y)` over unit-trace `X`.
pub fn objective_classical_over_x(
    x: &PositiveDefiniteMatrix,
    a: &HermitianMatrix,
    y: &PositiveDefiniteMatrix,
    h: &Contraction,
) -> Result<TraceValue> {
    check_trace(x.as_hermitian(), 1.0)?;
    let linear = hermitian_trace(x.as_matrix(), a.as_matrix())?;
    let s = relative_entropy_parts(x, y, h.as_matrix())?;
    Ok(TraceValue {
        value: linear - s.value,
        scale: s.scale + linear.abs(),
    })
}

/// `1 - Tr Y + log Tr exp(A + H log(Y) H*)`.
pub fn lemma1_value_i(a: &HermitianMatrix, y: &PositiveDefiniteMatrix, h: &Contraction) -> Result<TraceValue> {
    let k = classical_exponent(a, y, h);
    let lse = log_sum_exp(&k.eig()?.eigenvalues);
    Ok(TraceValue {
        value: 1.0 - y.trace() + lse,
        scale: 2.0 + y.trace() + lse.abs(),
    })
}

/// `X_0 = exp(K) / Tr exp(K)` with `K = A + H log(Y) H*`.
pub fn lemma1_maximizer_i(a: &HermitianMatrix, y: &PositiveDefiniteMatrix, h: &Contraction) -> Result<PositiveDefiniteMatrix> {
    let eig = classical_exponent(a, y, h).eig()?;
    gibbs_state(eig, 1.0)
}

/// `γ e^Z / Tr e^Z` from the spectrum of `Z`.
fn gibbs_state(eig: EigenDecomposition, gamma: f64) -> Result<PositiveDefiniteMatrix> {
    let lse = log_sum_exp(&eig.eigenvalues);
    let values = eig.eigenvalues.iter().map(|v| gamma * (v - lse).exp()).collect();
    PositiveDefiniteMatrix::from_eigen(EigenDecomposition {
        eigenvalues: values,
        eigenvectors: eig.eigenvectors,
    })
}

/// `Tr XA - log Tr exp(A + HBH*) - 1 + Tr e^B` over Hermitian `A`.
pub fn lemma1_objective_over_a(
    a: &HermitianMatrix,
    x: &PositiveDefiniteMatrix,
    b: &HermitianMatrix,
    h: &Contraction,
) -> Result<TraceValue> {
    check_trace(x.as_hermitian(), 1.0)?;
    let linear = hermitian_trace(x.as_matrix(), a.as_matrix())?;
    let lse = log_sum_exp(&a.add(&b.transform(h.as_matrix())).eig()?.eigenvalues);
    let tr_exp_b: f64 = b.eig()?.eigenvalues.iter().map(|v| v.exp()).sum();
    Ok(TraceValue {
        value: linear - lse - 1.0 + tr_exp_b,
        scale: 2.0 + linear.abs() + lse.abs() + tr_exp_b,
    })
}

/// `A_0 = log X - HBH*`.
pub fn lemma1_maximizer_ii(x: &PositiveDefiniteMatrix, b: &HermitianMatrix, h: &Contraction) -> HermitianMatrix {
    x.log().sub(&b.transform(h.as_matrix()))
}

/// `S_H(X | e^B)`.
pub fn lemma1_value_ii(x: &PositiveDefiniteMatrix, b: &HermitianMatrix, h: &Contraction) -> Result<TraceValue> {
    let eb = PositiveDefiniteMatrix::from_eigen(exp_spectrum(b)?)?;
    relative_entropy_parts(x, &eb, h.as_matrix())
}

fn exp_spectrum(b: &HermitianMatrix) -> Result<EigenDecomposition> {
    let eig = b.eig()?;
    Ok(EigenDecomposition {
        eigenvalues: eig.eigenvalues.iter().map(|v| v.exp()).collect(),
        eigenvectors: eig.eigenvectors,
    })
}

/// `Tr[X^{2-q} A] - S_{H,q}(X|Y)` over `Tr X = γ`.
pub fn objective_deformed_over_x(
    x: &PositiveDefiniteMatrix,
    a: &HermitianMatrix,
    y: &PositiveDefiniteMatrix,
    h: &Contraction,
    q: QParameter,
    gamma: f64,
) -> Result<TraceValue> {
    check_deformed(q, gamma)?;
    check_trace(x.as_hermitian(), gamma)?;
    let linear = hermitian_trace(x.power(2.0 - q.value()).as_matrix(), a.as_matrix())?;
    let s = tsallis_parts(x, y, h.as_matrix(), q)?;
    Ok(TraceValue {
        value: linear - s.value,
        scale: s.scale + linear.abs(),
    })
}

/// Checks `A + H log_q(Y) H* > -I/(q-1)`, the hypothesis of the deformed over-`X` problem.
pub fn deformed_over_x_precondition(
    a: &HermitianMatrix,
    y: &PositiveDefiniteMatrix,
    h: &Contraction,
    q: QParameter,
) -> Result<()> {
    check_deformed(q, 1.0)?;
    let k = deformed_exponent(a, y, h, q)?;
    let min = k.min_eigenvalue()?;
    let bound = -1.0 / q.deformation();
    if min <= bound {
        return Err(Error::PreconditionViolation(format!(
            "A + H log_q(Y) H* > -I/(q-1) fails: smallest eigenvalue {min:.6e} <= {bound:.6e}"
        )));
    }
    Ok(())
}

/// `γ log_q[γ^{-1} Tr exp_q(A + H log_q(Y) H*)] + γ - Tr Y`.
pub fn theorem36_value_i(
    a: &HermitianMatrix,
    y: &PositiveDefiniteMatrix,
    h: &Contraction,
    q: QParameter,
    gamma: f64,
) -> Result<TraceValue> {
    check_deformed(q, gamma)?;
    let spec = exp_q_spectrum(&deformed_exponent(a, y, h, q)?, q)?;
    let tr: f64 = spec.eigenvalues.iter().sum();
    let log_term = gamma * log_q_unchecked(tr / gamma, q);
    Ok(TraceValue {
        value: log_term + gamma - y.trace(),
        scale: 1.0 + log_term.abs() + gamma + y.trace(),
    })
}

/// `X_0 = γ exp_q(K) / Tr exp_q(K)` with `K = A + H log_q(Y) H*`.
pub fn theorem36_maximizer_i(
    a: &HermitianMatrix,
    y: &PositiveDefiniteMatrix,
    h: &Contraction,
    q: QParameter,
    gamma: f64,
) -> Result<PositiveDefiniteMatrix> {
    check_deformed(q, gamma)?;
    let spec = exp_q_spectrum(&deformed_exponent(a, y, h, q)?, q)?;
    let tr: f64 = spec.eigenvalues.iter().sum();
    PositiveDefiniteMatrix::from_eigen(EigenDecomposition {
        eigenvalues: spec.eigenvalues.iter().map(|v| gamma * v / tr).collect(),
        eigenvectors: spec.eigenvectors,
    })
}

/// Checks `Tr X = γ`, `log_q X > HBH*` and `B > -I/(q-1)`.
pub fn deformed_over_a_precondition(
    x: &PositiveDefiniteMatrix,
    b: &HermitianMatrix,
    h: &Contraction,
    q: QParameter,
    gamma: f64,
) -> Result<()> {
    check_deformed(q, gamma)?;
    check_trace(x.as_hermitian(), gamma)?;
    let gap = x.apply(|v| log_q_unchecked(v, q))?.sub(&b.transform(h.as_matrix()));
    let gap_min = gap.min_eigenvalue()?;
    if gap_min <= 0.0 {
        return Err(Error::PreconditionViolation(format!(
            "log_q X > HBH* fails: smallest eigenvalue of the difference {gap_min:.6e}"
        )));
    }
    let b_min = b.min_eigenvalue()?;
    let bound = -1.0 / q.deformation();
    if b_min <= bound {
        return Err(Error::PreconditionViolation(format!(
            "B > -I/(q-1) fails: smallest eigenvalue {b_min:.6e} <= {bound:.6e}"
        )));
    }
    Ok(())
}

/// `Tr[X^{2-q} A] - γ log_q[γ^{-1} Tr exp_q(A + HBH*)] - γ + Tr exp_q B` over positive definite `A`.
pub fn theorem36_objective_over_a(
    a: &PositiveDefiniteMatrix,
    x: &PositiveDefiniteMatrix,
    b: &HermitianMatrix,
    h: &Contraction,
    q: QParameter,
    gamma: f64,
) -> Result<TraceValue> {
    deformed_over_a_precondition(x, b, h, q, gamma)?;
    deformed_over_a_unchecked(a, x, b, h, q, gamma)
}

fn deformed_over_a_unchecked(
    a: &PositiveDefiniteMatrix,
    x: &PositiveDefiniteMatrix,
    b: &HermitianMatrix,
    h: &Contraction,
    q: QParameter,
    gamma: f64,
) -> Result<TraceValue> {
    let linear = hermitian_trace(x.power(2.0 - q.value()).as_matrix(), a.as_matrix())?;
    let k = a.as_hermitian().add(&b.transform(h.as_matrix()));
    let tr: f64 = exp_q_spectrum(&k, q)?.eigenvalues.iter().sum();
    let log_term = gamma * log_q_unchecked(tr / gamma, q);
    let tr_exp_b: f64 = exp_q_spectrum(b, q)?.eigenvalues.iter().sum();
    Ok(TraceValue {
        value: linear - log_term - gamma + tr_exp_b,
        scale: 1.0 + linear.abs() + log_term.abs() + gamma + tr_exp_b,
    })
}

/// `A_0 = log_q X - HBH*`.
pub fn theorem36_maximizer_ii(
    x: &PositiveDefiniteMatrix,
    b: &HermitianMatrix,
    h: &Contraction,
    q: QParameter,
) -> Result<PositiveDefiniteMatrix> {
    let a0 = x.apply(|v| log_q_unchecked(v, q))?.sub(&b.transform(h.as_matrix()));
    PositiveDefiniteMatrix::new(a0)
}

/// `S_{H,q}(X | exp_q B)`.
pub fn theorem36_value_ii(
    x: &PositiveDefiniteMatrix,
    b: &HermitianMatrix,
    h: &Contraction,
    q: QParameter,
) -> Result<TraceValue> {
    let eb = PositiveDefiniteMatrix::from_eigen(exp_q_spectrum(b, q)?)?;
    tsallis_parts(x, &eb, h.as_matrix(), q)
}

/// One of the four variational problems with its fixed data.
#[derive(Clone, Debug)]
pub enum VariationalProblem {
    /// `max_X Tr XA - S_H(X|Y)`, `Tr X = 1`.
    ClassicalOverX {
        a: HermitianMatrix,
        y: PositiveDefiniteMatrix,
        h: Contraction,
    },
    /// `max_A Tr XA - log Tr e^{A+HBH*} - 1 + Tr e^B`, `A` Hermitian.
    ClassicalOverA {
        x: PositiveDefiniteMatrix,
        b: HermitianMatrix,
        h: Contraction,
    },
    /// `max_X Tr[X^{2-q}A] - S_{H,q}(X|Y)`, `Tr X = γ`.
    DeformedOverX {
        a: HermitianMatrix,
        y: PositiveDefiniteMatrix,
        h: Contraction,
        q: QParameter,
        gamma: f64,
    },
    /// `max_A Tr[X^{2-q}A] - γ log_q[γ^{-1} Tr exp_q(A+HBH*)] - γ + Tr exp_q B`, `A > 0`.
    DeformedOverA {
        x: PositiveDefiniteMatrix,
        b: HermitianMatrix,
        h: Contraction,
        q: QParameter,
        gamma: f64,
    },
}

impl VariationalProblem {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Self::ClassicalOverX { .. } => ProblemKind::ClassicalOverX,
            Self::ClassicalOverA { .. } => ProblemKind::ClassicalOverA,
            Self::DeformedOverX { .. } => ProblemKind::DeformedOverX,
            Self::DeformedOverA { .. } => ProblemKind::DeformedOverA,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::ClassicalOverX { h, .. }
            | Self::ClassicalOverA { h, .. }
            | Self::DeformedOverX { h, .. }
            | Self::DeformedOverA { h, .. } => h.dim(),
        }
    }

    /// Trace budget of the over-`X` feasible set.
    pub fn gamma(&self) -> f64 {
        match self {
            Self::DeformedOverX { gamma, .. } | Self::DeformedOverA { gamma, .. } => *gamma,
            _ => 1.0,
        }
    }

    /// Checks the hypotheses of the closed form.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::ClassicalOverX { .. } => Ok(()),
            Self::ClassicalOverA { x, .. } => check_trace(x.as_hermitian(), 1.0),
            Self::DeformedOverX { a, y, h, q, gamma } => {
                check_deformed(*q, *gamma)?;
                deformed_over_x_precondition(a, y, h, *q)
            }
            Self::DeformedOverA { x, b, h, q, gamma } => deformed_over_a_precondition(x, b, h, *q, *gamma),
        }
    }

    pub fn closed_form_value(&self) -> Result<TraceValue> {
        match self {
            Self::ClassicalOverX { a, y, h } => lemma1_value_i(a, y, h),
            Self::ClassicalOverA { x, b, h } => lemma1_value_ii(x, b, h),
            Self::DeformedOverX { a, y, h, q, gamma } => theorem36_value_i(a, y, h, *q, *gamma),
            Self::DeformedOverA { x, b, h, q, .. } => theorem36_value_ii(x, b, h, *q),
        }
    }

    /// Closed-form maximizer, an `X` or an `A` depending on the kind.
    pub fn maximizer(&self) -> Result<HermitianMatrix> {
        Ok(match self {
            Self::ClassicalOverX { a, y, h } => lemma1_maximizer_i(a, y, h)?.as_hermitian().clone(),
            Self::ClassicalOverA { x, b, h } => lemma1_maximizer_ii(x, b, h),
            Self::DeformedOverX { a, y, h, q, gamma } => theorem36_maximizer_i(a, y, h, *q, *gamma)?.as_hermitian().clone(),
            Self::DeformedOverA { x, b, h, q, .. } => theorem36_maximizer_ii(x, b, h, *q)?.as_hermitian().clone(),
        })
    }

    /// Objective at a feasible point.
    pub fn objective(&self, point: &HermitianMatrix) -> Result<TraceValue> {
        match self {
            Self::ClassicalOverA { x, b, h } => lemma1_objective_over_a(point, x, b, h),
            _ => self.objective_pd(&PositiveDefiniteMatrix::new(point.clone())?),
        }
    }

    /// Objective at a positive definite point (every kind except `ClassicalOverA` requires one).
    pub fn objective_pd(&self, point: &PositiveDefiniteMatrix) -> Result<TraceValue> {
        match self {
            Self::ClassicalOverX { a, y, h } => objective_classical_over_x(point, a, y, h),
            Self::ClassicalOverA { x, b, h } => lemma1_objective_over_a(point.as_hermitian(), x, b, h),
            Self::DeformedOverX { a, y, h, q, gamma } => objective_deformed_over_x(point, a, y, h, *q, *gamma),
            Self::DeformedOverA { x, b, h, q, gamma } => deformed_over_a_unchecked(point, x, b, h, *q, *gamma),
        }
    }

    /// Random instance of `kind` satisfying the closed-form hypotheses, by
    /// rejection. `q` is ignored by the classical kinds.
    pub fn sample(kind: ProblemKind, n: usize, q: QParameter, s: &mut Sampler, field: Field) -> Result<Self> {
        let mut last = Error::PreconditionViolation("no draw attempted".into());
        for _ in 0..SAMPLE_ATTEMPTS {
            let h = s.contraction(n, false, 0.0, field);
            let p = match kind {
                ProblemKind::ClassicalOverX => Self::ClassicalOverX {
                    a: s.hermitian_in(n, -2.0, 2.0, field),
                    y: s.positive_definite(n, 0.2, 5.0, field),
                    h,
                },
                ProblemKind::ClassicalOverA => Self::ClassicalOverA {
                    x: s.density(n, 0.2, 5.0, field),
                    b: s.hermitian_in(n, -2.0, 2.0, field),
                    h,
                },
                ProblemKind::DeformedOverX => Self::DeformedOverX {
                    a: s.hermitian_in(n, -0.1, 2.0, field),
                    y: s.positive_definite(n, 0.2, 5.0, field),
                    h,
                    q,
                    gamma: s.uniform(0.5, 3.0),
                },
                ProblemKind::DeformedOverA => {
                    let x = s.positive_definite(n, 1.5, 5.0, field);
                    Self::DeformedOverA {
                        gamma: x.trace(),
                        x,
                        b: s.hermitian_in(n, -0.3, 0.3, field),
                        h,
                        q,
                    }
                }
            };
            match p.validate() {
                Ok(()) => return Ok(p),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    /// Random feasible point: a trace-`γ` state for over-`X` kinds, a Hermitian
    /// (resp. positive definite) `A` otherwise.
    pub fn random_feasible_point(&self, s: &mut Sampler, field: Field) -> HermitianMatrix {
        let n = self.dim();
        match self.kind() {
            ProblemKind::ClassicalOverX | ProblemKind::DeformedOverX => {
                let lo = [1e-3, 0.05, 0.2][s.index(3)];
                s.density(n, lo, 1.0, field).as_hermitian().scale(self.gamma())
            }
            ProblemKind::ClassicalOverA => {
                let r = s.uniform(0.1, 4.0);
                s.hermitian_in(n, -r, r, field)
            }
            ProblemKind::DeformedOverA => {
                let hi = s.uniform(0.1, 6.0);
                s.hermitian_in(n, 1e-3 * hi, hi, field)
            }
        }
    }

    /// Unit feasible direction at an interior point: trace-zero for over-`X` kinds.
    pub fn random_direction(&self, s: &mut Sampler, field: Field) -> HermitianMatrix {
        if self.kind().over_x() {
            s.trace_zero_direction(self.dim(), field)
        } else {
            s.hermitian_direction(self.dim(), field)
        }
    }

    /// Central difference of the objective at `point` along `direction`.
    pub fn directional_derivative(&self, point: &HermitianMatrix, direction: &HermitianMatrix, step: f64) -> Result<f64> {
        let plus = self.objective(&point.add(&direction.scale(step)))?.value;
        let minus = self.objective(&point.sub(&direction.scale(step)))?.value;
        Ok((plus - minus) / (2.0 * step))
    }

    /// Numerical maximization over the problem's feasible set.
    pub fn numeric_max(&self, cfg: &OptimizerConfig) -> Result<NumericMax> {
        match self.kind() {
            ProblemKind::ClassicalOverX | ProblemKind::DeformedOverX => {
                numeric_max_over_trace_set(|x| self.objective_pd(x).map(|v| v.value), self.dim(), self.gamma(), cfg)
            }
            ProblemKind::ClassicalOverA => numeric_max_over_hermitian(|a| self.objective(a).map(|v| v.value), self.dim(), cfg),
            ProblemKind::DeformedOverA => {
                numeric_max_over_positive_definite(|a| self.objective_pd(a).map(|v| v.value), self.dim(), cfg)
            }
        }
    }
}

/// Settings of the finite-difference gradient ascent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub step_init: f64,
    pub step_shrink: f64,
    pub grad_tol: f64,
    pub restarts: usize,
    pub fd_step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step_init: 1.0,
            step_shrink: 0.5,
            grad_tol: 1e-8,
            restarts: 5,
            fd_step: 1e-6,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.restarts >= 1
            && self.step_init > 0.0
            && self.step_shrink > 0.0
            && self.step_shrink < 1.0
            && self.grad_tol > 0.0
            && self.fd_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid optimizer configuration {self:?}")))
        }
    }
}

/// Result of a numerical maximization.
#[derive(Clone, Debug)]
pub struct NumericMax {
    pub point: HermitianMatrix,
    pub value: f64,
    /// Gradient criterion met (`‖∇‖ ≤ grad_tol (1 + |value|)`) on the best restart.
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Real coordinates of a Hermitian matrix in an orthonormal basis for the Frobenius inner product.
fn params_to_hermitian(n: usize, theta: &[f64]) -> HermitianMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = crate::matrix::c(theta[k]);
        k += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let z = crate::matrix::C64::new(s * theta[k], s * theta[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    HermitianMatrix::symmetrize(m)
}

fn hermitian_to_params(z: &HermitianMatrix) -> Vec<f64> {
    let n = z.dim();
    let m = z.as_matrix();
    let r = std::f64::consts::SQRT_2;
    let mut theta: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            theta.push(r * m[(i, j)].re);
            theta.push(r * m[(i, j)].im);
        }
    }
    theta
}

struct Ascent {
    theta: Vec<f64>,
    value: f64,
    converged: bool,
    iterations: usize,
    grad_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn fd_gradient<F: Fn(&[f64]) -> Option<f64>>(f: &F, theta: &[f64], f0: f64, h: f64) -> Vec<f64> {
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let plus = f(&probe);
            probe[i] = orig - h;
            let minus = f(&probe);
            probe[i] = orig;
            match (plus, minus) {
                (Some(p), Some(m)) => (p - m) / (2.0 * h),
                (Some(p), None) => (p - f0) / h,
                (None, Some(m)) => (f0 - m) / h,
                (None, None) => 0.0,
            }
        })
        .collect()
}

/// Gradient ascent with Barzilai–Borwein steps safeguarded by Armijo backtracking.
fn ascend<F: Fn(&[f64]) -> Option<f64>>(f: &F, theta0: Vec<f64>, cfg: &OptimizerConfig) -> Option<Ascent> {
    let mut theta = theta0;
    let mut value = f(&theta)?;
    let mut grad = fd_gradient(f, &theta, value, cfg.fd_step);
    let mut step = cfg.step_init / dot(&grad, &grad).sqrt().max(1.0);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        let gnorm2 = dot(&grad, &grad);
        if gnorm2.sqrt() <= cfg.grad_tol * (1.0 + value.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = None;
        let mut t = step;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&grad).map(|(x, g)| x + t * g).collect();
            if let Some(v) = f(&trial) {
                if v >= value + 1e-4 * t * gnorm2 {
                    accepted = Some((trial, v));
                    break;
                }
            }
            t *= cfg.step_shrink;
        }
        let Some((next, next_value)) = accepted else {
            break;
        };
        let next_grad = fd_gradient(f, &next, next_value, cfg.fd_step);
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| b - a).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { t / cfg.step_shrink };
        step = step.clamp(1e-12, 1e6);
        theta = next;
        value = next_value;
        grad = next_grad;
    }
    let grad_norm = dot(&grad, &grad).sqrt();
    converged |= grad_norm <= cfg.grad_tol * (1.0 + value.abs());
    Some(Ascent {
        theta,
        value,
        converged,
        iterations,
        grad_norm,
    })
}

fn multistart<F, M>(f: F, to_point: M, n: usize, cfg: &OptimizerConfig) -> Result<NumericMax>
where
    F: Fn(&[f64]) -> Option<f64>,
    M: Fn(&[f64]) -> Option<HermitianMatrix>,
{
    cfg.validate()?;
    let mut sampler = Sampler::new(cfg.seed, 0x6f70_7469);
    let mut best: Option<Ascent> = None;
    for r in 0..cfg.restarts {
        let start = if r == 0 {
            vec![0.0; n * n]
        } else {
            hermitian_to_params(&sampler.hermitian_in(n, -1.0, 1.0, Field::Complex))
        };
        if let Some(run) = ascend(&f, start, cfg) {
            if best.as_ref().is_none_or(|b| run.value > b.value) {
                best = Some(run);
            }
        }
    }
    let best = best.ok_or(Error::OptimizerDidNotConverge)?;
    let point = to_point(&best.theta).ok_or(Error::OptimizerDidNotConverge)?;
    Ok(NumericMax {
        point,
        value: best.value,
        converged: best.converged,
        iterations: best.iterations,
        grad_norm: best.grad_norm,
    })
}

/// Maximizes `objective` over `{X > 0 : Tr X = γ}` through `X = γ e^Z / Tr e^Z`.
pub fn numeric_max_over_trace_set<O>(objective: O, dim: usize, gamma: f64, cfg: &OptimizerConfig) -> Result<NumericMax>
where
    O: Fn(&PositiveDefiniteMatrix) -> Result<f64>,
{
    if !(gamma > 0.0) {
        return Err(Error::ParameterViolation(format!("trace budget must be positive, got {gamma}")));
    }
    let to_state = move |theta: &[f64]| -> Option<PositiveDefiniteMatrix> {
        let eig = params_to_hermitian(dim, theta).eig().ok()?;
        gibbs_state(eig, gamma).ok()
    };
    let f = |theta: &[f64]| to_state(theta).and_then(|x| objective(&x).ok()).filter(|v| v.is_finite());
    multistart(f, |theta| to_state(theta).map(|x| x.as_hermitian().clone()), dim, cfg)
}

/// Maximizes `objective` over all Hermitian matrices.
pub fn numeric_max_over_hermitian<O>(objective: O, dim: usize, cfg: &OptimizerConfig) -> Result<NumericMax>
where
    O: Fn(&HermitianMatrix) -> Result<f64>,
{
    let f = |theta: &[f64]| objective(&params_to_hermitian(dim, theta)).ok().filter(|v| v.is_finite());
    multistart(f, |theta| Some(params_to_hermitian(dim, theta)), dim, cfg)
}

/// Maximizes `objective` over positive definite matrices through `A = e^Z`.
pub fn numeric_max_over_positive_definite<O>(objective: O, dim: usize, cfg: &OptimizerConfig) -> Result<NumericMax>
where
    O: Fn(&PositiveDefiniteMatrix) -> Result<f64>,
{
    let to_pd = move |theta: &[f64]| -> Option<PositiveDefiniteMatrix> {
        let eig = params_to_hermitian(dim, theta).eig().ok()?;
        PositiveDefiniteMatrix::from_eigen(exp_spectrum_of(eig)).ok()
    };
    let f = |theta: &[f64]| to_pd(theta).and_then(|a| objective(&a).ok()).filter(|v| v.is_finite());
    multistart(f, |theta| to_pd(theta).map(|a| a.as_hermitian().clone()), dim, cfg)
}

fn exp_spectrum_of(eig: EigenDecomposition) -> EigenDecomposition {
    EigenDecomposition {
        eigenvalues: eig.eigenvalues.iter().map(|v| v.exp()).collect(),
        eigenvectors: eig.eigenvectors,
    }
}
