//! Dense complex Hermitian linear algebra.
//!
//! Everything in the crate is carried by [`CMatrix`], a dense `n x n` matrix of
//! [`C64`] entries. The validated wrappers [`SquareMatrix`], [`HermitianMatrix`],
//! [`PositiveDefiniteMatrix`] and [`Contraction`] enforce their class invariants
//! at construction and are immutable afterwards.
//!
//! Matrix functions `f(A)` are evaluated spectrally, `U f(Λ) U*`, through
//! [`apply_fn`]. Real symmetric inputs are embedded with zero imaginary parts.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative asymmetry accepted when validating a Hermitian matrix.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Smallest eigenvalue of a positive definite matrix, relative to its largest.
pub const PD_FLOOR: f64 = 1e-12;
/// Slack on the largest singular value of a contraction.
pub const CONTRACTION_TOL: f64 = 1e-10;
/// Smallest singular value for a contraction to count as invertible.
pub const SIGMA_MIN_FLOOR: f64 = 1e-6;
/// Relative clamp for tiny negative eigenvalues in fractional powers.
pub const PSD_CLAMP: f64 = 1e-10;
/// Imaginary part of a trace (relative to its scale) tolerated before erroring.
pub const IMAG_TOL: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITERS: usize = 10_000;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `Tr(AB)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Real part of a trace, rejecting an imaginary residue above `IMAG_TOL * scale`.
pub fn real_trace(z: C64, scale: f64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * scale.max(1.0) {
        return Err(Error::ImaginaryResidue {
            imag: z.im,
            scale,
        });
    }
    Ok(z.re)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Predicate describing where a scalar function may be evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Real,
    Positive,
    NonNegative,
    /// `slope * x + offset > margin`.
    Affine { slope: f64, offset: f64, margin: f64 },
}

impl Domain {
    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match *self {
            Domain::Real => true,
            Domain::Positive => x > 0.0,
            Domain::NonNegative => x >= 0.0,
            Domain::Affine {
                slope,
                offset,
                margin,
            } => slope * x + offset > margin,
        }
    }

    pub(crate) fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::DomainViolation {
                value: x,
                domain: self.to_string(),
            })
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Real => write!(f, "x in R"),
            Domain::Positive => write!(f, "x > 0"),
            Domain::NonNegative => write!(f, "x >= 0"),
            Domain::Affine {
                slope,
                offset,
                margin,
            } => write!(f, "{slope}*x + {offset} > {margin}"),
        }
    }
}

/// Dense square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix(CMatrix);

impl SquareMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    /// Row-major real entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| c(entries[i * dim + j])))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(CMatrix::from_fn(n, n, |i, j| if i == j { c(d[i]) } else { c(0.0) }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> SquareMatrix {
        SquareMatrix(self.0.adjoint())
    }
}

/// Hermitian matrix stored in exactly symmetrized form `(M + M*)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let m = SquareMatrix::new(m)?.into_inner();
        let asymmetry = max_abs(&(&m - m.adjoint()));
        let bound = HERMITIAN_TOL * (1.0 + max_abs(&m));
        if asymmetry > bound {
            return Err(Error::NotHermitian { asymmetry, bound });
        }
        Ok(Self(hermitian_part(&m)))
    }

    /// Hermitian part of an arbitrary finite square matrix, without the asymmetry check.
    pub(crate) fn symmetrize(m: CMatrix) -> Self {
        Self(hermitian_part(&m))
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(SquareMatrix::from_real(dim, entries)?.into_inner())
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        Self(SquareMatrix::from_real_diagonal(d).into_inner())
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        Self(self.0.map(|z| z * s))
    }

    /// `self + s I`.
    pub fn shift(&self, s: f64) -> HermitianMatrix {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] += c(s);
        }
        Self(m)
    }

    /// `t * a + (1 - t) * b`.
    pub fn interpolate(t: f64, a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
        Self(a.0.map(|z| z * t) + b.0.map(|z| z * (1.0 - t)))
    }

    /// `h* M h`.
    pub fn congruence(&self, h: &CMatrix) -> HermitianMatrix {
        Self::symmetrize(h.adjoint() * &self.0 * h)
    }

    /// `h M h*`.
    pub fn transform(&self, h: &CMatrix) -> HermitianMatrix {
        Self::symmetrize(h * &self.0 * h.adjoint())
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.eigenvalues[0])
    }
}

/// Eigendecomposition `M = U diag(λ) U*` with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `U diag(values) U*` for arbitrary real values.
    pub fn compose(&self, values: &[f64]) -> HermitianMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        HermitianMatrix::symmetrize(scaled * u.adjoint())
    }

    /// Spectral application of `f` after checking every eigenvalue against `domain`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F, domain: Domain) -> Result<HermitianMatrix> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&x| {
                domain.check(x)?;
                let y = f(x);
                if !y.is_finite() {
                    return Err(Error::DomainViolation {
                        value: x,
                        domain: format!("{domain} (non-finite image)"),
                    });
                }
                Ok(y)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.compose(&values))
    }

    /// `Tr f(M)` straight from the spectrum.
    pub fn trace_of<F: Fn(f64) -> f64>(&self, f: F, domain: Domain) -> Result<f64> {
        let mut acc = 0.0;
        for &x in &self.eigenvalues {
            domain.check(x)?;
            acc += f(x);
        }
        Ok(acc)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.compose(&self.eigenvalues)
    }
}

/// Hermitian eigendecomposition with deterministic ordering and phases.
///
/// Eigenvalues are sorted ascending; each eigenvector is rotated so that its
/// first non-negligible component is real and positive.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), EIG_EPS, EIG_MAX_ITERS)
        .ok_or(Error::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    if order.iter().any(|&k| !eig.eigenvalues[k].is_finite()) {
        return Err(Error::ConvergenceFailure);
    }
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        let pivot = col
            .iter()
            .copied()
            .find(|z| z.norm() > 1e-8)
            .unwrap_or(c(1.0));
        let phase = pivot.conj() / pivot.norm();
        for i in 0..n {
            eigenvectors[(i, j)] = col[i] * phase;
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `f(M)` via the spectral theorem.
pub fn apply_fn<F: Fn(f64) -> f64>(m: &HermitianMatrix, f: F, domain: Domain) -> Result<HermitianMatrix> {
    eig_hermitian(m)?.map(f, domain)
}

/// `M^exponent` for an `M` that is positive semidefinite up to round-off.
///
/// Eigenvalues in `[-psd_clamp * |M|, 0)` are clamped to `psd_clamp * |M|`;
/// anything more negative is a domain violation.
pub fn matrix_power_fractional(m: &HermitianMatrix, exponent: f64, psd_clamp: f64) -> Result<HermitianMatrix> {
    let eig = eig_hermitian(m)?;
    let norm = eig.min().abs().max(eig.max().abs());
    let floor = psd_clamp * norm;
    let mut values = Vec::with_capacity(eig.dim());
    for &x in &eig.eigenvalues {
        if x < -floor {
            return Err(Error::DomainViolation {
                value: x,
                domain: format!("x >= -{floor:.3e}"),
            });
        }
        let x = if x < 0.0 { floor } else { x };
        let y = x.powf(exponent);
        if !y.is_finite() {
            return Err(Error::DomainViolation {
                value: x,
                domain: format!("x^{exponent} finite"),
            });
        }
        values.push(y);
    }
    Ok(eig.compose(&values))
}

/// Full SVD `(U, σ, V)` of a square matrix with `G = U diag(σ) V*`, σ descending.
pub fn svd(g: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    if g.nrows() != g.ncols() {
        return Err(Error::NotSquare {
            rows: g.nrows(),
            cols: g.ncols(),
        });
    }
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            if !g[(i, j)].re.is_finite() || !g[(i, j)].im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    let n = g.nrows();
    let d = faer::Mat::<C64>::from_fn(n, n, |i, j| g[(i, j)])
        .svd()
        .map_err(|_| Error::ConvergenceFailure)?;
    let u = CMatrix::from_fn(n, n, |i, j| d.U()[(i, j)]);
    let v = CMatrix::from_fn(n, n, |i, j| d.V()[(i, j)]);
    let sigma = (0..n).map(|j| d.S().column_vector()[j].re).collect();
    Ok((u, sigma, v))
}

/// `f(G G*)` from the singular value decomposition of `G`.
///
/// The spectrum of `G G*` is read off as `σ_i²`, so small eigenvalues keep
/// relative accuracy `κ(G) ε` instead of the `κ(G)² ε` of an eigensolver run on
/// the formed product.
pub fn gram_apply<F: Fn(f64) -> f64>(g: &CMatrix, f: F, domain: Domain) -> Result<HermitianMatrix> {
    let (u, sigma, _) = svd(g)?;
    let values = sigma
        .iter()
        .map(|s| {
            let x = s * s;
            domain.check(x)?;
            let y = f(x);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::DomainViolation {
                    value: x,
                    domain: "finite image".into(),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scaled = u.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    Ok(HermitianMatrix::symmetrize(scaled * u.adjoint()))
}

/// Hermitian matrix whose spectrum strictly exceeds `PD_FLOOR * λ_max`.
#[derive(Clone, Debug)]
pub struct PositiveDefiniteMatrix {
    matrix: HermitianMatrix,
    eig: EigenDecomposition,
}

impl PositiveDefiniteMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let eig = eig_hermitian(&matrix)?;
        let floor = PD_FLOOR * eig.max().max(0.0);
        if !(eig.min() > floor) || eig.max() <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min: eig.min(),
                floor,
            });
        }
        Ok(Self { matrix, eig })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Builds `U diag(λ) U*` from a known spectral decomposition, skipping the eigensolver.
    pub fn from_eigen(eig: EigenDecomposition) -> Result<Self> {
        let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let floor = PD_FLOOR * max.max(0.0);
        if !(min > floor) || !(max > 0.0) || !max.is_finite() {
            return Err(Error::NotPositiveDefinite { min, floor });
        }
        let mut order: Vec<usize> = (0..eig.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = CMatrix::from_fn(eig.dim(), eig.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        let eig = EigenDecomposition {
            eigenvalues,
            eigenvectors,
        };
        Ok(Self {
            matrix: eig.reconstruct(),
            eig,
        })
    }

    pub fn from_real_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(d))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(HermitianMatrix::identity(dim)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.matrix.as_matrix()
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig.max()
    }

    /// `f(A)` using the cached eigendecomposition.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> Result<HermitianMatrix> {
        self.eig.map(f, Domain::Positive)
    }

    pub fn log(&self) -> HermitianMatrix {
        self.eig.compose(&self.eig.eigenvalues.iter().map(|x| x.ln()).collect::<Vec<_>>())
    }

    pub fn power(&self, p: f64) -> HermitianMatrix {
        self.eig.compose(&self.eig.eigenvalues.iter().map(|x| x.powf(p)).collect::<Vec<_>>())
    }

    /// `s * A` for `s > 0`.
    pub fn scale(&self, s: f64) -> Result<PositiveDefiniteMatrix> {
        Self::new(self.matrix.scale(s))
    }

    pub fn interpolate(t: f64, a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
        Self::new(HermitianMatrix::interpolate(t, &a.matrix, &b.matrix))
    }
}

/// Matrix with largest singular value at most `1 + CONTRACTION_TOL`.
#[derive(Clone, Debug)]
pub struct Contraction {
    matrix: CMatrix,
    invertible: bool,
    sigma_max: f64,
    sigma_min: f64,
}

impl Contraction {
    pub fn identity(dim: usize) -> Self {
        validate_contraction(&SquareMatrix::identity(dim), false).expect("identity is a contraction")
    }

    pub fn zeros(dim: usize) -> Self {
        validate_contraction(&SquareMatrix::zeros(dim), false).expect("zero is a contraction")
    }

    pub fn from_matrix(m: CMatrix, require_invertible: bool) -> Result<Self> {
        validate_contraction(&SquareMatrix::new(m)?, require_invertible)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> CMatrix {
        self.matrix.adjoint()
    }

    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// `I - H H*`.
    pub fn left_defect(&self) -> HermitianMatrix {
        HermitianMatrix::identity(self.dim()).sub(&HermitianMatrix::symmetrize(&self.matrix * self.matrix.adjoint()))
    }

    /// `I - H* H`.
    pub fn right_defect(&self) -> HermitianMatrix {
        HermitianMatrix::identity(self.dim()).sub(&HermitianMatrix::symmetrize(self.matrix.adjoint() * &self.matrix))
    }
}

/// Validates `‖M‖ ≤ 1` through the spectrum of `M*M`; the matrix is stored unmodified.
pub fn validate_contraction(m: &SquareMatrix, require_invertible: bool) -> Result<Contraction> {
    let gram = HermitianMatrix::symmetrize(m.as_matrix().adjoint() * m.as_matrix());
    let eig = eig_hermitian(&gram)?;
    let sigma_max = eig.max().max(0.0).sqrt();
    let sigma_min = eig.min().max(0.0).sqrt();
    if sigma_max > 1.0 + CONTRACTION_TOL {
        return Err(Error::NotAContraction(sigma_max));
    }
    let invertible = sigma_min >= SIGMA_MIN_FLOOR;
    if require_invertible && !invertible {
        return Err(Error::NotInvertible(sigma_min));
    }
    Ok(Contraction {
        matrix: m.as_matrix().clone(),
        invertible,
        sigma_max,
        sigma_min,
    })
}

/// Frobenius deviation of `U U*` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    (u * u.adjoint() - CMatrix::identity(u.nrows(), u.ncols())).norm()
}

/// Errors with `NotUnitary` when `‖U U* - I‖_F > tol`.
pub fn ensure_unitary(u: &CMatrix, tol: f64) -> Result<()> {
    let d = unitarity_defect(u);
    if d > tol {
        Err(Error::NotUnitary(d))
    } else {
        Ok(())
    }
}

/// Block-diagonal embedding of square blocks.
pub fn block_diagonal(blocks: &[&CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut offset = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((offset, offset), (k, k)).copy_from(*b);
        offset += k;
    }
    out
}
