//! Seeded generators for the constrained matrix classes used by the checks.
//!
//! Every generator draws from a ChaCha8 stream keyed by `(seed, stream)`.
//! ChaCha is counter based, so distinct streams of one seed never overlap and
//! identical keys reproduce identical bits.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, svd, CMatrix, Contraction, HermitianMatrix, PositiveDefiniteMatrix, SquareMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Dimension, spectral window, scalar field and seed for one draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub dim: usize,
    pub spectrum_lo: f64,
    pub spectrum_hi: f64,
    pub field: Field,
    pub seed: u64,
}

impl SamplerSpec {
    pub const DEFAULT_LO: f64 = 0.2;
    pub const DEFAULT_HI: f64 = 5.0;
    /// Heavier-tailed window that stresses conditioning.
    pub const HEAVY_LO: f64 = 1e-2;
    pub const DEFAULT_SIGMA_MIN: f64 = 0.1;

    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            spectrum_lo: Self::DEFAULT_LO,
            spectrum_hi: Self::DEFAULT_HI,
            field: Field::Complex,
            seed,
        }
    }

    pub fn with_spectrum(mut self, lo: f64, hi: f64) -> Self {
        self.spectrum_lo = lo;
        self.spectrum_hi = hi;
        self
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = field;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dim must be at least 1".into()));
        }
        if !(self.spectrum_lo > 0.0 && self.spectrum_lo <= self.spectrum_hi && self.spectrum_hi.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "need 0 < spectrum_lo <= spectrum_hi, got [{}, {}]",
                self.spectrum_lo, self.spectrum_hi
            )));
        }
        Ok(())
    }

    fn sampler(&self, stream: Stream) -> Result<Sampler> {
        self.validate()?;
        Ok(Sampler::new(self.seed, stream as u64))
    }
}

#[derive(Clone, Copy)]
enum Stream {
    Hermitian = 1,
    PositiveDefinite = 2,
    Density = 3,
    Contraction = 4,
    Partition = 5,
    Ordered = 6,
    Unitary = 7,
}

/// Stateful draw sequence on one `(seed, stream)` key.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    /// Matrix of standard Gaussians; complex entries have unit total variance.
    pub fn gaussian(&mut self, rows: usize, cols: usize, field: Field) -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_fn(rows, cols, |_, _| match field {
            Field::Real => c(self.normal()),
            Field::Complex => C64::new(s * self.normal(), s * self.normal()),
        })
    }

    /// Unitary (orthogonal for `Field::Real`) from the phase-fixed QR of a Gaussian matrix.
    pub fn unitary(&mut self, n: usize, field: Field) -> CMatrix {
        if n == 1 {
            return CMatrix::identity(1, 1);
        }
        orthonormal_columns(self.gaussian(n, n, field))
    }

    /// `U diag(λ) U*` with `λ_i` uniform on `[lo, hi]`.
    pub fn hermitian_in(&mut self, n: usize, lo: f64, hi: f64, field: Field) -> HermitianMatrix {
        let values: Vec<f64> = (0..n).map(|_| self.uniform(lo, hi)).collect();
        self.with_spectrum(&values, field)
    }

    /// `U diag(values) U*` for a fresh random `U`.
    pub fn with_spectrum(&mut self, values: &[f64], field: Field) -> HermitianMatrix {
        let n = values.len();
        if n == 1 {
            return HermitianMatrix::from_real_diagonal(values);
        }
        let u = self.unitary(n, field);
        let mut scaled = u.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        HermitianMatrix::symmetrize(scaled * u.adjoint())
    }

    pub fn positive_definite(&mut self, n: usize, lo: f64, hi: f64, field: Field) -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::new(self.hermitian_in(n, lo, hi, field)).expect("spectrum window is positive")
    }

    /// Positive semidefinite, spectrum on `[0, hi]` (zero is hit with probability zero).
    pub fn positive_semidefinite(&mut self, n: usize, hi: f64, field: Field) -> HermitianMatrix {
        self.hermitian_in(n, 0.0, hi, field)
    }

    pub fn density(&mut self, n: usize, lo: f64, hi: f64, field: Field) -> PositiveDefiniteMatrix {
        let values: Vec<f64> = (0..n).map(|_| self.uniform(lo, hi)).collect();
        let total: f64 = values.iter().sum();
        let normalized: Vec<f64> = values.iter().map(|v| v / total).collect();
        PositiveDefiniteMatrix::new(self.with_spectrum(&normalized, field)).expect("density spectrum is positive")
    }

    /// Scaled Gaussian with singular values clipped to `[sigma_min, 1]`
    /// (`[0, 1]` when not invertible).
    pub fn contraction(&mut self, n: usize, invertible: bool, sigma_min: f64, field: Field) -> Contraction {
        let spread = self.uniform(0.5, 1.5) / (n as f64).sqrt();
        let g = self.gaussian(n, n, field).scale(spread);
        let (mut us, sigma, v) = svd(&g).expect("finite square Gaussian");
        let lo = if invertible { sigma_min } else { 0.0 };
        for (j, s) in sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(s.clamp(lo, 1.0));
        }
        let h = us * v.adjoint();
        Contraction::from_matrix(h, invertible).expect("clipped singular values give a contraction")
    }

    /// `k` row blocks of a random `(k n) x n` isometry, so `Σ H_j* H_j = I`.
    pub fn partition_of_identity(&mut self, n: usize, k: usize, field: Field) -> Vec<CMatrix> {
        let q = orthonormal_columns(self.gaussian(k * n, n, field));
        (0..k).map(|j| q.rows(j * n, n).into_owned()).collect()
    }

    /// `(X, Y)` with `Y = I + P1`, `X = Y + P2` and `P1, P2 ⪰ 0` spectra on `[0, spread]`.
    pub fn ordered_pair(&mut self, n: usize, spread: f64, field: Field) -> (PositiveDefiniteMatrix, PositiveDefiniteMatrix) {
        let p1 = self.positive_semidefinite(n, spread, field);
        let p2 = self.positive_semidefinite(n, spread, field);
        let y = p1.shift(1.0);
        let x = y.add(&p2);
        (
            PositiveDefiniteMatrix::new(x).expect("X >= I"),
            PositiveDefiniteMatrix::new(y).expect("Y >= I"),
        )
    }

    /// Gaussian Hermitian matrix with unit Frobenius norm.
    pub fn hermitian_direction(&mut self, n: usize, field: Field) -> HermitianMatrix {
        let g = HermitianMatrix::symmetrize(self.gaussian(n, n, field));
        let norm = g.frobenius_norm();
        g.scale(1.0 / norm)
    }

    /// Trace-zero Hermitian direction with unit Frobenius norm (zero when `n == 1`).
    pub fn trace_zero_direction(&mut self, n: usize, field: Field) -> HermitianMatrix {
        let g = HermitianMatrix::symmetrize(self.gaussian(n, n, field));
        let centered = g.shift(-g.trace() / n as f64);
        let norm = centered.frobenius_norm();
        if norm == 0.0 {
            centered
        } else {
            centered.scale(1.0 / norm)
        }
    }
}

/// Thin `Q` of a QR factorization with the diagonal of `R` made positive.
fn orthonormal_columns(m: CMatrix) -> CMatrix {
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

pub fn random_hermitian(spec: &SamplerSpec) -> Result<HermitianMatrix> {
    let mut s = spec.sampler(Stream::Hermitian)?;
    Ok(s.hermitian_in(spec.dim, -spec.spectrum_hi, spec.spectrum_hi, spec.field))
}

pub fn random_positive_definite(spec: &SamplerSpec) -> Result<PositiveDefiniteMatrix> {
    let mut s = spec.sampler(Stream::PositiveDefinite)?;
    Ok(s.positive_definite(spec.dim, spec.spectrum_lo, spec.spectrum_hi, spec.field))
}

pub fn random_density(spec: &SamplerSpec) -> Result<PositiveDefiniteMatrix> {
    let mut s = spec.sampler(Stream::Density)?;
    Ok(s.density(spec.dim, spec.spectrum_lo, spec.spectrum_hi, spec.field))
}

pub fn random_contraction(spec: &SamplerSpec, invertible: bool, sigma_min: f64) -> Result<Contraction> {
    if invertible && !(sigma_min > 0.0 && sigma_min <= 1.0) {
        return Err(Error::InvalidSpec(format!("sigma_min must lie in (0, 1], got {sigma_min}")));
    }
    let mut s = spec.sampler(Stream::Contraction)?;
    Ok(s.contraction(spec.dim, invertible, sigma_min, spec.field))
}

pub fn random_partition_of_identity(spec: &SamplerSpec, k: usize) -> Result<Vec<CMatrix>> {
    if k == 0 {
        return Err(Error::InvalidSpec("k must be at least 1".into()));
    }
    let mut s = spec.sampler(Stream::Partition)?;
    Ok(s.partition_of_identity(spec.dim, k, spec.field))
}

/// `(X, Y)` with `I ≤ Y ≤ X`; the perturbations have spectra on `[0, (hi - 1)/2]`.
pub fn random_ordered_triple(spec: &SamplerSpec) -> Result<(PositiveDefiniteMatrix, PositiveDefiniteMatrix)> {
    let mut s = spec.sampler(Stream::Ordered)?;
    let spread = ((spec.spectrum_hi - 1.0) / 2.0).max(0.1);
    Ok(s.ordered_pair(spec.dim, spread, spec.field))
}

pub fn random_unitary(spec: &SamplerSpec) -> Result<SquareMatrix> {
    let mut s = spec.sampler(Stream::Unitary)?;
    SquareMatrix::new(s.unitary(spec.dim, spec.field))
}
