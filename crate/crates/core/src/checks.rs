//! One predicate per trace inequality or convexity statement. Each returns a
//! [`CheckReport`] whose signed margin is nonnegative when the statement holds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::deformed::{exp_q_unchecked, log_q_unchecked, QParameter};
use crate::entropy::{quasi_entropy, relative_entropy_parts, tsallis_parts, Curvature, ScalarFn};
use crate::error::{Error, Result};
use crate::matrix::{
    block_diagonal, gram_apply, matrix_power_fractional, real_trace, Domain, trace_product, CMatrix, Contraction, HermitianMatrix,
    PositiveDefiniteMatrix, PSD_CLAMP,
};

/// Default relative tolerance on margins.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-8;
/// Tolerance on algebraic identities reported as sub-checks.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance on `Σ H_j* H_j = I`.
pub const PARTITION_TOL: f64 = 1e-8;
/// Slack on `Σ H_i* H_i ≤ I` and on semidefinite hypotheses.
pub const HYPOTHESIS_SLACK: f64 = 1e-10;
/// Eigenvalue slack on `I ≤ Y ≤ X`.
pub const ORDERING_SLACK: f64 = 1e-10;
/// Tolerance on `Tr X = 1`.
pub const UNIT_TRACE_TOL: f64 = 1e-10;
/// Deformation used for the near-classical branch of the `h_q` check.
pub const NEAR_CLASSICAL_Q: f64 = 1.0 + 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    GtHp,
    Interpolation,
    ReducedJensen,
    LowerBoundClassical,
    QJensen,
    QGoldenThompson,
    LowerBoundTsallis,
    BplFs,
    UpperBoundTsallis,
    ConvexityTsallis,
    PhiQConcavity,
    HqAndClassicalLimits,
    BlockMultivariate,
    QuasiEntropyConvexity,
    SeoFsSpecial,
}

impl CheckId {
    pub const ALL: [CheckId; 15] = [
        CheckId::GtHp,
        CheckId::Interpolation,
        CheckId::ReducedJensen,
        CheckId::LowerBoundClassical,
        CheckId::QJensen,
        CheckId::QGoldenThompson,
        CheckId::LowerBoundTsallis,
        CheckId::BplFs,
        CheckId::UpperBoundTsallis,
        CheckId::ConvexityTsallis,
        CheckId::PhiQConcavity,
        CheckId::HqAndClassicalLimits,
        CheckId::BlockMultivariate,
        CheckId::QuasiEntropyConvexity,
        CheckId::SeoFsSpecial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::GtHp => "check_gt_hp",
            CheckId::Interpolation => "check_interpolation",
            CheckId::ReducedJensen => "check_reduced_jensen",
            CheckId::LowerBoundClassical => "check_lower_bound_classical",
            CheckId::QJensen => "check_q_jensen",
            CheckId::QGoldenThompson => "check_q_golden_thompson",
            CheckId::LowerBoundTsallis => "check_lower_bound_tsallis",
            CheckId::BplFs => "check_bpl_fs",
            CheckId::UpperBoundTsallis => "check_upper_bound_tsallis",
            CheckId::ConvexityTsallis => "check_convexity_tsallis",
            CheckId::PhiQConcavity => "check_phi_q_concavity",
            CheckId::HqAndClassicalLimits => "check_hq_and_classical_limits",
            CheckId::BlockMultivariate => "check_block_multivariate",
            CheckId::QuasiEntropyConvexity => "check_quasi_entropy_convexity",
            CheckId::SeoFsSpecial => "check_seo_fs_special",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            CheckId::GtHp => "Tr e^{S+T} <= Tr (e^{pT/2} e^{pS} e^{pT/2})^{1/p}",
            CheckId::Interpolation => "Tr exp(L + sum H_j* B_j H_j) <= Tr[e^L sum H_j* e^{B_j} H_j], sum H_j* H_j = I",
            CheckId::ReducedJensen => "Tr exp(HBH*) <= Tr[H e^B H*] + Tr[I - HH*]",
            CheckId::LowerBoundClassical => {
                "S_H(X|Y) >= (1/p) Tr[H*XH log(Y^{-p/2} X^p Y^{-p/2})] - Tr[X - Y] - log(1 + Tr[I - HH*])"
            }
            CheckId::QJensen => "Tr exp_q(sum H_j* B_j H_j) <= Tr sum H_j* exp_q(B_j) H_j, q in [1, 2]",
            CheckId::QGoldenThompson => "Tr exp_q(A + B) <= Tr exp_q(A) exp_q(B), A, B >= 0, q in (1, 2]",
            CheckId::LowerBoundTsallis => {
                "S_{H,q}(X|Y) >= Tr[H*X^{2-q}H log_q(Y^{-1/2}XY^{-1/2})] - Tr[X - Y] - g log_q(1 + Tr[I - HH*]/g), I <= Y <= X"
            }
            CheckId::BplFs => "Tr A^{1+t}B^t <= Tr A(A^{s/2}B^sA^{s/2})^{t/s}; Tr A(A^{-s/2}B^sA^{-s/2})^{t/s} <= Tr A^{1-t}B^t",
            CheckId::UpperBoundTsallis => {
                "-(1/(q-1)) Tr[A^{2-q} H B^{q-1} H* - A] <= -Tr[A log_q{A^{-p/2}(HB^{q-1}H*)^{p/(q-1)}A^{-p/2}}^{1/p}]"
            }
            CheckId::ConvexityTsallis => "(A, B) -> S_{H,q}(A|B) convex for q in [0,1) u (1,2], concave for q in [2,3]",
            CheckId::PhiQConcavity => "A -> Tr exp_q(L + H* log_q(A) H) concave for q in (1,2], convex for q in [2,3]",
            CheckId::HqAndClassicalLimits => "A -> log_q phi_q(A) concave on (1,2], convex on [2,3]; Tr exp(L + H* log(A) H) concave",
            CheckId::BlockMultivariate => "(A_1..A_k) -> Tr exp_q(L + sum H_i* log_q(A_i) H_i) concave on (1,2], convex on [2,3]",
            CheckId::QuasiEntropyConvexity => "(rho, sigma) -> S_f^X(rho|sigma) jointly convex (concave) for operator convex (concave) f",
            CheckId::SeoFsSpecial => "Tr[(A - A^{1-a}B^a)/a] <= -Tr[A log_{1+a}(A^{-p/2}B^pA^{-p/2})^{1/p}]",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    /// Accepts the full id or the id without its `check_` prefix.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str() == key || c.as_str().strip_prefix("check_") == Some(key))
            .ok_or_else(|| Error::Config(format!("unknown check id '{s}'")))
    }
}

/// Direction of the comparison between `lhs` and `rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≤ rhs`, margin `rhs - lhs`.
    Le,
    /// `lhs ≥ rhs`, margin `lhs - rhs`.
    Ge,
    /// `lhs = rhs` as an algebraic identity, margin `-|lhs - rhs|`.
    Eq,
    /// Both `≤` and `≥` claimed, margin `-|lhs - rhs|`.
    TwoSided,
}

impl Relation {
    pub fn margin(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Le => rhs - lhs,
            Relation::Ge => lhs - rhs,
            Relation::Eq | Relation::TwoSided => -(lhs - rhs).abs(),
        }
    }
}

/// Midpoint-type curvature claim for a λ-combination check.
fn curvature_relation(q: f64, concave_below_two: bool) -> Relation {
    match (q.partial_cmp(&2.0), concave_below_two) {
        (Some(std::cmp::Ordering::Equal), _) => Relation::TwoSided,
        (Some(std::cmp::Ordering::Less), true) | (Some(std::cmp::Ordering::Greater), false) => Relation::Ge,
        _ => Relation::Le,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub scale: f64,
    pub tolerance: f64,
    /// Tolerance fixed by the check itself; [`CheckReport::with_tol`] leaves it alone.
    pub tolerance_pinned: bool,
    /// `margin ≥ -tolerance · scale`; sub-reports are not included, see [`CheckReport::all_hold`].
    pub holds: bool,
    pub fingerprint: Option<String>,
    pub notes: Option<String>,
    pub sub_reports: Vec<CheckReport>,
}

impl CheckReport {
    pub fn new(check_id: &str, relation: Relation, lhs: f64, rhs: f64, scale: f64) -> Self {
        let margin = relation.margin(lhs, rhs);
        let scale = scale.max(1.0);
        let mut r = Self {
            check_id: check_id.to_string(),
            relation,
            lhs,
            rhs,
            margin,
            scale,
            tolerance: DEFAULT_MARGIN_TOL,
            tolerance_pinned: false,
            holds: false,
            fingerprint: None,
            notes: None,
            sub_reports: Vec::new(),
        };
        r.refresh();
        r
    }

    fn refresh(&mut self) {
        self.holds = self.margin.is_finite() && self.margin >= -self.tolerance * self.scale;
    }

    fn pinned(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self.tolerance_pinned = true;
        self.refresh();
        self
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes = Some(note.into());
        self
    }

    fn with_sub(mut self, sub: CheckReport) -> Self {
        self.sub_reports.push(sub);
        self
    }

    /// Re-evaluates `holds` under `tol` for this report and every unpinned sub-report.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.apply_tol(tol);
        self
    }

    fn apply_tol(&mut self, tol: f64) {
        if !self.tolerance_pinned {
            self.tolerance = tol;
            self.refresh();
        }
        for s in &mut self.sub_reports {
            s.apply_tol(tol);
        }
    }

    pub fn all_hold(&self) -> bool {
        self.holds && self.sub_reports.iter().all(CheckReport::all_hold)
    }

    /// `margin / scale`.
    pub fn relative_margin(&self) -> f64 {
        self.margin / self.scale
    }

    /// Smallest `margin / (tolerance · scale)` over the report tree; below `-1` means failure.
    pub fn worst_normalized_margin(&self) -> f64 {
        let own = self.margin / (self.tolerance * self.scale);
        self.sub_reports
            .iter()
            .map(CheckReport::worst_normalized_margin)
            .fold(own, f64::min)
    }
}

fn hermitian_trace(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    real_trace(trace_product(a, b), 1.0 + a.norm() * b.norm())
}

fn herm(m: CMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrize(m)
}

fn tr_exp(m: &HermitianMatrix) -> Result<f64> {
    Ok(m.eig()?.eigenvalues.iter().map(|v| v.exp()).sum())
}

fn expm(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = m.eig()?;
    let values: Vec<f64> = eig.eigenvalues.iter().map(|v| v.exp()).collect();
    Ok(eig.compose(&values))
}

/// `exp_q` on a spectrum that lies in the closed domain up to round-off.
fn exp_q_clamped(x: f64, q: QParameter, scale: f64) -> Result<f64> {
    if q.is_classical() {
        return Ok(x.exp());
    }
    let base = 1.0 + q.deformation() * x;
    if base > 0.0 {
        return Ok(exp_q_unchecked(x, q));
    }
    if base >= -PSD_CLAMP * scale && q.deformation() > 0.0 {
        return Ok(0.0);
    }
    Err(Error::DomainViolation {
        value: x,
        domain: format!("1 + ({}) x >= 0", q.deformation()),
    })
}

fn exp_q_herm(m: &HermitianMatrix, q: QParameter) -> Result<HermitianMatrix> {
    let eig = m.eig()?;
    let scale = 1.0 + eig.min().abs().max(eig.max().abs()) * q.deformation().abs();
    let values = eig
        .eigenvalues
        .iter()
        .map(|&x| exp_q_clamped(x, q, scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(eig.compose(&values))
}

fn tr_exp_q(m: &HermitianMatrix, q: QParameter) -> Result<f64> {
    Ok(exp_q_herm(m, q)?.trace())
}

fn log_q_pd(a: &PositiveDefiniteMatrix, q: QParameter) -> Result<HermitianMatrix> {
    a.apply(|x| log_q_unchecked(x, q))
}

fn same_dims(n: usize, dims: &[usize]) -> Result<()> {
    for &d in dims {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, got: d });
        }
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterViolation(format!("lambda must lie in (0, 1), got {lambda}")))
    }
}

/// `‖Σ H_j* H_j - I‖_F`.
fn partition_residual(hs: &[CMatrix], n: usize) -> Result<f64> {
    if hs.is_empty() {
        return Err(Error::PartitionOfIdentityViolation(f64::INFINITY));
    }
    let mut sum = CMatrix::zeros(n, n);
    for h in hs {
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h.nrows() });
        }
        sum += h.adjoint() * h;
    }
    Ok((sum - CMatrix::identity(n, n)).norm())
}

fn require_partition(hs: &[CMatrix], n: usize) -> Result<()> {
    let r = partition_residual(hs, n)?;
    if r > PARTITION_TOL {
        return Err(Error::PartitionOfIdentityViolation(r));
    }
    Ok(())
}

fn require_psd(m: &HermitianMatrix, what: &str) -> Result<()> {
    let eig = m.eig()?;
    let floor = PSD_CLAMP * (1.0 + eig.max().abs());
    if eig.min() < -floor {
        return Err(Error::DomainViolation {
            value: eig.min(),
            domain: format!("{what} positive semidefinite"),
        });
    }
    Ok(())
}

/// `Tr e^{S+T} ≤ Tr (e^{pT/2} e^{pS} e^{pT/2})^{1/p}`.
pub fn check_gt_hp(s: &HermitianMatrix, t: &HermitianMatrix, p: f64) -> Result<CheckReport> {
    same_dims(s.dim(), &[t.dim()])?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::ParameterViolation(format!("p must be positive, got {p}")));
    }
    let lhs = tr_exp(&s.add(t))?;
    let g = expm(&t.scale(p / 2.0))?.as_matrix() * expm(&s.scale(p / 2.0))?.as_matrix();
    let rhs = gram_apply(&g, |x| x.powf(1.0 / p), Domain::NonNegative)?.trace();
    Ok(CheckReport::new(CheckId::GtHp.as_str(), Relation::Le, lhs, rhs, 1.0 + lhs.abs() + rhs.abs()))
}

/// `Tr exp(L + Σ H_j* B_j H_j) ≤ Tr[e^L Σ H_j* e^{B_j} H_j]` for a partition of the identity.
pub fn check_interpolation(l: &HermitianMatrix, bs: &[HermitianMatrix], hs: &[CMatrix]) -> Result<CheckReport> {
    let n = l.dim();
    if bs.len() != hs.len() {
        return Err(Error::DimensionMismatch { expected: hs.len(), got: bs.len() });
    }
    same_dims(n, &bs.iter().map(HermitianMatrix::dim).collect::<Vec<_>>())?;
    require_partition(hs, n)?;
    let mut exponent = l.clone();
    let mut mixed = CMatrix::zeros(n, n);
    for (b, h) in bs.iter().zip(hs) {
        exponent = exponent.add(&b.congruence(h));
        mixed += h.adjoint() * expm(b)?.as_matrix() * h;
    }
    let lhs = tr_exp(&exponent)?;
    let rhs = hermitian_trace(expm(l)?.as_matrix(), &mixed)?;
    Ok(CheckReport::new(
        CheckId::Interpolation.as_str(),
        Relation::Le,
        lhs,
        rhs,
        1.0 + lhs.abs() + rhs.abs(),
    ))
}

/// `Tr exp(HBH*) ≤ Tr[H e^B H*] + Tr[I - HH*]`.
pub fn check_reduced_jensen(b: &HermitianMatrix, h: &Contraction) -> Result<CheckReport> {
    same_dims(b.dim(), &[h.dim()])?;
    let lhs = tr_exp(&b.transform(h.as_matrix()))?;
    let first = expm(b)?.transform(h.as_matrix()).trace();
    let defect = h.left_defect().trace();
    let rhs = first + defect;
    Ok(CheckReport::new(
        CheckId::ReducedJensen.as_str(),
        Relation::Le,
        lhs,
        rhs,
        1.0 + lhs.abs() + first.abs() + defect.abs(),
    ))
}

/// `(1/p) Tr[H* X H log(Y^{-p/2} X^p Y^{-p/2})]` and its magnitude.
fn sandwich_log_term(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix, h: &Contraction, p: f64) -> Result<f64> {
    let g = y.power(-p / 2.0).as_matrix() * x.power(p / 2.0).as_matrix();
    let log_inner = gram_apply(&g, f64::ln, Domain::Positive)?;
    let hxh = x.as_hermitian().congruence(h.as_matrix());
    Ok(hermitian_trace(hxh.as_matrix(), log_inner.as_matrix())? / p)
}

/// `S_H(X|Y) ≥ (1/p) Tr[H*XH log(Y^{-p/2}X^pY^{-p/2})] - Tr[X - Y] - log(1 + Tr[I - HH*])`
/// for unit-trace `X`. Sub-reports: the rearranged form and the `p = 1` case.
pub fn check_lower_bound_classical(
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    h: &Contraction,
    p: f64,
) -> Result<CheckReport> {
    same_dims(x.dim(), &[y.dim(), h.dim()])?;
    if (x.trace() - 1.0).abs() > UNIT_TRACE_TOL {
        return Err(Error::TraceConstraintViolation { expected: 1.0, got: x.trace() });
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::ParameterViolation(format!("p must be positive, got {p}")));
    }
    let id = CheckId::LowerBoundClassical.as_str();
    let s = relative_entropy_parts(x, y, h.as_matrix())?;
    let log_defect = (1.0 + h.left_defect().trace()).ln();
    let linear = x.trace() - y.trace();
    let bound = |term: f64| term - linear - log_defect;
    let base_scale = s.scale + linear.abs() + log_defect.abs();

    let term = sandwich_log_term(x, y, h, p)?;
    let main = CheckReport::new(id, Relation::Ge, s.value, bound(term), base_scale + term.abs());

    let x_log_x: f64 = x.eigen().eigenvalues.iter().map(|v| v * v.ln()).sum();
    let cross = hermitian_trace(x.as_hermitian().congruence(h.as_matrix()).as_matrix(), y.log().as_matrix())?;
    let rearranged = CheckReport::new(
        id,
        Relation::Le,
        term - log_defect,
        x_log_x - cross,
        1.0 + term.abs() + log_defect.abs() + x_log_x.abs() + cross.abs(),
    )
    .with_note("rearranged: (1/p) Tr H*XH log(...) - log(1 + Tr[I - HH*]) <= Tr[X log X - H*XH log Y]");

    let term1 = if p == 1.0 { term } else { sandwich_log_term(x, y, h, 1.0)? };
    let p_one = CheckReport::new(id, Relation::Ge, s.value, bound(term1), base_scale + term1.abs()).with_note("p = 1 case");
    Ok(main.with_sub(rearranged).with_sub(p_one))
}

/// `Tr exp_q(Σ H_j* B_j H_j) ≤ Tr Σ H_j* exp_q(B_j) H_j` for `q ∈ [1, 2]`.
pub fn check_q_jensen(bs: &[PositiveDefiniteMatrix], hs: &[CMatrix], q: QParameter) -> Result<CheckReport> {
    if !(1.0..=2.0).contains(&q.value()) {
        return Err(Error::ParameterViolation(format!("q must lie in [1, 2], got {}", q.value())));
    }
    if bs.len() != hs.len() || bs.is_empty() {
        return Err(Error::DimensionMismatch { expected: hs.len(), got: bs.len() });
    }
    let n = bs[0].dim();
    same_dims(n, &bs.iter().map(PositiveDefiniteMatrix::dim).collect::<Vec<_>>())?;
    require_partition(hs, n)?;
    let mut inner = HermitianMatrix::zeros(n);
    let mut rhs = 0.0;
    for (b, h) in bs.iter().zip(hs) {
        inner = inner.add(&b.as_hermitian().congruence(h));
        rhs += exp_q_herm(b.as_hermitian(), q)?.congruence(h).trace();
    }
    let lhs = tr_exp_q(&inner, q)?;
    Ok(CheckReport::new(CheckId::QJensen.as_str(), Relation::Le, lhs, rhs, 1.0 + lhs.abs() + rhs.abs()))
}

/// `Tr exp_q(A + B) ≤ Tr[exp_q(A) exp_q(B)]` for positive semidefinite `A`, `B` and `q ∈ (1, 2]`.
pub fn check_q_golden_thompson(a: &HermitianMatrix, b: &HermitianMatrix, q: QParameter) -> Result<CheckReport> {
    same_dims(a.dim(), &[b.dim()])?;
    if !(q.value() > 1.0 && q.value() <= 2.0) || q.is_classical() {
        return Err(Error::ParameterViolation(format!("q must lie in (1, 2], got {}", q.value())));
    }
    require_psd(a, "A")?;
    require_psd(b, "B")?;
    let lhs = tr_exp_q(&a.add(b), q)?;
    let rhs = hermitian_trace(exp_q_herm(a, q)?.as_matrix(), exp_q_herm(b, q)?.as_matrix())?;
    Ok(CheckReport::new(
        CheckId::QGoldenThompson.as_str(),
        Relation::Le,
        lhs,
        rhs,
        1.0 + lhs.abs() + rhs.abs(),
    ))
}

/// `S_{H,q}(X|Y) ≥ Tr[H* X^{2-q} H log_q(Y^{-1/2} X Y^{-1/2})] - Tr[X - Y] - γ log_q(1 + γ^{-1} Tr[I - HH*])`
/// for `I ≤ Y ≤ X`, `q ∈ (1, 2]` and `γ = Tr X`.
pub fn check_lower_bound_tsallis(
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    h: &Contraction,
    q: QParameter,
) -> Result<CheckReport> {
    same_dims(x.dim(), &[y.dim(), h.dim()])?;
    if !(q.value() > 1.0 && q.value() <= 2.0) || q.is_classical() {
        return Err(Error::ParameterViolation(format!("q must lie in (1, 2], got {}", q.value())));
    }
    let mut failed = Vec::new();
    let y_min = y.min_eigenvalue() - 1.0;
    if y_min < -ORDERING_SLACK {
        failed.push(format!("I <= Y (min eigenvalue of Y - I is {y_min:.3e})"));
    }
    let gap = x.as_hermitian().sub(y.as_hermitian()).min_eigenvalue()?;
    if gap < -ORDERING_SLACK {
        failed.push(format!("Y <= X (min eigenvalue of X - Y is {gap:.3e})"));
    }
    if !failed.is_empty() {
        return Err(Error::OrderingViolation(failed.join("; ")));
    }
    let gamma = x.trace();
    let s = tsallis_parts(x, y, h.as_matrix(), q)?;
    let g = y.power(-0.5).as_matrix() * x.power(0.5).as_matrix();
    let log_inner = gram_apply(&g, |v| log_q_unchecked(v, q), Domain::Positive)?;
    let hxh = x.power(2.0 - q.value()).congruence(h.as_matrix());
    let term = hermitian_trace(hxh.as_matrix(), log_inner.as_matrix())?;
    let linear = x.trace() - y.trace();
    let defect = gamma * log_q_unchecked(1.0 + h.left_defect().trace() / gamma, q);
    let rhs = term - linear - defect;
    Ok(CheckReport::new(
        CheckId::LowerBoundTsallis.as_str(),
        Relation::Ge,
        s.value,
        rhs,
        s.scale + term.abs() + linear.abs() + defect.abs(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BplVariant {
    I,
    Ii,
}

impl BplVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            BplVariant::I => "i",
            BplVariant::Ii => "ii",
        }
    }
}

impl FromStr for BplVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(BplVariant::I),
            "ii" => Ok(BplVariant::Ii),
            _ => Err(Error::ParameterViolation(format!("unknown variant '{s}'"))),
        }
    }
}

/// (i) `Tr A^{1+t} B^t ≤ Tr A (A^{s/2} B^s A^{s/2})^{t/s}`, `s ≥ t > 0`;
/// (ii) `Tr A (A^{-s/2} B^s A^{-s/2})^{t/s} ≤ Tr A^{1-t} B^t`, `s ≥ t`, `0 < t ≤ 1`.
pub fn check_bpl_fs(
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    s: f64,
    t: f64,
    variant: BplVariant,
) -> Result<CheckReport> {
    same_dims(a.dim(), &[b.dim()])?;
    if !(t > 0.0 && s >= t && s.is_finite()) {
        return Err(Error::ParameterViolation(format!("need s >= t > 0, got s = {s}, t = {t}")));
    }
    if variant == BplVariant::Ii && t > 1.0 {
        return Err(Error::ParameterViolation(format!("variant ii needs t <= 1, got {t}")));
    }
    let sign = if variant == BplVariant::I { 1.0 } else { -1.0 };
    let g = a.power(sign * s / 2.0).as_matrix() * b.power(s / 2.0).as_matrix();
    let powered = gram_apply(&g, |x| x.powf(t / s), Domain::NonNegative)?;
    let sandwiched = hermitian_trace(a.as_matrix(), powered.as_matrix())?;
    let plain = hermitian_trace(a.power(1.0 + sign * t).as_matrix(), b.power(t).as_matrix())?;
    let (lhs, rhs) = match variant {
        BplVariant::I => (plain, sandwiched),
        BplVariant::Ii => (sandwiched, plain),
    };
    Ok(CheckReport::new(CheckId::BplFs.as_str(), Relation::Le, lhs, rhs, 1.0 + lhs.abs() + rhs.abs())
        .with_note(format!("variant {}", variant.as_str())))
}

/// `-Tr[A log_q{C}^{1/p}]` with `C = A^{-p/2} M^{p/(q-1)} A^{-p/2} = G G*`, composed into one spectral map.
fn deformed_log_root_trace(a: &PositiveDefiniteMatrix, m: &PositiveDefiniteMatrix, q: QParameter, p: f64) -> Result<f64> {
    let r = q.deformation();
    let g = a.power(-p / 2.0).as_matrix() * m.power(p / (2.0 * r)).as_matrix();
    let f = gram_apply(&g, |x| (r / p * x.ln()).exp_m1() / r, Domain::Positive)?;
    Ok(-hermitian_trace(a.as_matrix(), f.as_matrix())?)
}

fn require_upper_params(q: QParameter, p: f64) -> Result<()> {
    let qv = q.value();
    if !(0.0..=2.0).contains(&qv) || q.is_classical() {
        return Err(Error::ParameterViolation(format!("q must lie in [0, 2] without 1, got {qv}")));
    }
    if !(p >= (qv - 1.0).abs() && p.is_finite()) {
        return Err(Error::ParameterViolation(format!("need p >= |q - 1|, got p = {p}, q = {qv}")));
    }
    Ok(())
}

/// `S_{H,q}(A|B) - Tr[(HH* - I) A^{2-q}]/(q-1) + Tr[A - B]
///  ≤ -Tr[A log_q{A^{-p/2} (H B^{q-1} H*)^{p/(q-1)} A^{-p/2}}^{1/p}]`
/// for invertible `H`, `q ∈ [0, 2] \ {1}` and `p ≥ |q - 1|`.
pub fn check_upper_bound_tsallis(
    a: &PositiveDefiniteMatrix,
    b: &PositiveDefiniteMatrix,
    h: &Contraction,
    q: QParameter,
    p: f64,
) -> Result<CheckReport> {
    same_dims(a.dim(), &[b.dim(), h.dim()])?;
    require_upper_params(q, p)?;
    if !h.is_invertible() {
        return Err(Error::NotInvertible(h.sigma_min()));
    }
    let r = q.deformation();
    let s = tsallis_parts(a, b, h.as_matrix(), q)?;
    let a_pow = a.power(2.0 - q.value());
    let defect = -hermitian_trace(h.left_defect().as_matrix(), a_pow.as_matrix())?;
    let linear = a.trace() - b.trace();
    let lhs = s.value - defect / r + linear;
    let m = PositiveDefiniteMatrix::new(b.power(r).transform(h.as_matrix()))?;
    let rhs = deformed_log_root_trace(a, &m, q, p)?;
    Ok(CheckReport::new(
        CheckId::UpperBoundTsallis.as_str(),
        Relation::Le,
        lhs,
        rhs,
        s.scale + (defect / r).abs() + linear.abs() + rhs.abs(),
    ))
}

/// Two endpoint pairs `(A_1, B_1)`, `(A_2, B_2)` for joint convexity checks.
#[derive(Clone, Debug)]
pub struct PairSample {
    pub a1: PositiveDefiniteMatrix,
    pub b1: PositiveDefiniteMatrix,
    pub a2: PositiveDefiniteMatrix,
    pub b2: PositiveDefiniteMatrix,
}

impl PairSample {
    fn dims(&self) -> [usize; 4] {
        [self.a1.dim(), self.b1.dim(), self.a2.dim(), self.b2.dim()]
    }

    fn mix(&self, lambda: f64) -> Result<(PositiveDefiniteMatrix, PositiveDefiniteMatrix)> {
        Ok((
            PositiveDefiniteMatrix::interpolate(lambda, &self.a1, &self.a2)?,
            PositiveDefiniteMatrix::interpolate(lambda, &self.b1, &self.b2)?,
        ))
    }
}

/// `S_{H,q}` at the λ-combination against the λ-combination of values:
/// convex for `q ∈ [0, 1) ∪ (1, 2]`, concave for `q ∈ [2, 3]`, two-sided at `q = 2`.
pub fn check_convexity_tsallis(pair: &PairSample, h: &Contraction, q: QParameter, lambda: f64) -> Result<CheckReport> {
    let n = h.dim();
    same_dims(n, &pair.dims())?;
    check_lambda(lambda)?;
    let qv = q.value();
    if !(0.0..=3.0).contains(&qv) || q.is_classical() {
        return Err(Error::ParameterViolation(format!("q must lie in [0, 3] without 1, got {qv}")));
    }
    let (am, bm) = pair.mix(lambda)?;
    let mid = tsallis_parts(&am, &bm, h.as_matrix(), q)?;
    let v1 = tsallis_parts(&pair.a1, &pair.b1, h.as_matrix(), q)?;
    let v2 = tsallis_parts(&pair.a2, &pair.b2, h.as_matrix(), q)?;
    let combo = lambda * v1.value + (1.0 - lambda) * v2.value;
    let relation = curvature_relation(qv, false);
    Ok(CheckReport::new(
        CheckId::ConvexityTsallis.as_str(),
        relation,
        mid.value,
        combo,
        mid.scale + v1.scale + v2.scale,
    ))
}

/// `I - H*H + (q-1) L`, checked positive semidefinite.
fn phi_offset(l: &HermitianMatrix, h: &Contraction, q: QParameter) -> Result<HermitianMatrix> {
    let offset = h.right_defect().add(&l.scale(q.deformation()));
    let eig = offset.eig()?;
    if eig.min() < -HYPOTHESIS_SLACK {
        return Err(Error::HypothesisViolation(format!(
            "I - H*H + (q-1)L >= 0 fails: smallest eigenvalue {:.6e}",
            eig.min()
        )));
    }
    Ok(offset)
}

fn phi_q_closed(offset: &HermitianMatrix, a: &PositiveDefiniteMatrix, h: &Contraction, q: QParameter) -> Result<f64> {
    let inner = offset.add(&a.power(q.deformation()).congruence(h.as_matrix()));
    Ok(matrix_power_fractional(&inner, 1.0 / q.deformation(), PSD_CLAMP)?.trace())
}

fn phi_q_exp_form(l: &HermitianMatrix, a: &PositiveDefiniteMatrix, h: &Contraction, q: QParameter) -> Result<f64> {
    tr_exp_q(&l.add(&log_q_pd(a, q)?.congruence(h.as_matrix())), q)
}

/// `φ_q(A) = Tr exp_q(L + H* log_q(A) H)` in closed form, under `I - H*H + (q-1)L ≥ 0`.
pub fn phi_q(l: &HermitianMatrix, h: &Contraction, q: QParameter, a: &PositiveDefiniteMatrix) -> Result<f64> {
    same_dims(h.dim(), &[l.dim(), a.dim()])?;
    require_phi_q(q)?;
    phi_q_closed(&phi_offset(l, h, q)?, a, h, q)
}

fn require_phi_q(q: QParameter) -> Result<()> {
    if !(q.value() > 1.0 && q.value() <= 3.0) || q.is_classical() {
        return Err(Error::ParameterViolation(format!("q must lie in (1, 3], got {}", q.value())));
    }
    Ok(())
}

fn identity_report(id: &str, lhs: f64, rhs: f64, scale: f64, note: &str) -> CheckReport {
    CheckReport::new(id, Relation::Eq, lhs, rhs, scale).pinned(IDENTITY_TOL).with_note(note)
}

/// λ-point concavity (`q ∈ (1, 2]`) or convexity (`q ∈ [2, 3]`) of `φ_q`, with the agreement of its
/// closed form and its `exp_q` form at both endpoints as sub-reports.
pub fn check_phi_q_concavity(
    l: &HermitianMatrix,
    h: &Contraction,
    q: QParameter,
    a1: &PositiveDefiniteMatrix,
    a2: &PositiveDefiniteMatrix,
    lambda: f64,
) -> Result<CheckReport> {
    let n = h.dim();
    same_dims(n, &[l.dim(), a1.dim(), a2.dim()])?;
    require_phi_q(q)?;
    check_lambda(lambda)?;
    let id = CheckId::PhiQConcavity.as_str();
    let offset = phi_offset(l, h, q)?;
    let mid = PositiveDefiniteMatrix::interpolate(lambda, a1, a2)?;
    let (f1, f2) = (phi_q_closed(&offset, a1, h, q)?, phi_q_closed(&offset, a2, h, q)?);
    let fm = phi_q_closed(&offset, &mid, h, q)?;
    let combo = lambda * f1 + (1.0 - lambda) * f2;
    let mut report = CheckReport::new(
        id,
        curvature_relation(q.value(), true),
        fm,
        combo,
        1.0 + fm.abs() + f1.abs() + f2.abs(),
    );
    for (a, closed) in [(a1, f1), (a2, f2)] {
        let exp_form = phi_q_exp_form(l, a, h, q)?;
        report = report.with_sub(identity_report(
            id,
            exp_form,
            closed,
            1.0 + exp_form.abs() + closed.abs(),
            "Tr exp_q(L + H* log_q(A) H) = Tr[I - H*H + (q-1)L + H*A^{q-1}H]^{1/(q-1)}",
        ));
    }
    Ok(report)
}

/// `ψ(A) = Tr exp(L + H* log(A) H)`.
fn classical_trace_fn(l: &HermitianMatrix, h: &Contraction, a: &PositiveDefiniteMatrix) -> Result<f64> {
    tr_exp(&l.add(&a.log().congruence(h.as_matrix())))
}

/// λ-point curvature of `h_q = log_q φ_q`, plus two sub-reports: concavity of the classical
/// `Tr exp(L + H* log(A) H)` on the same data and of `h_q` at `q = 1 + 1e-4` when the
/// hypothesis holds there.
pub fn check_hq_and_classical_limits(
    l: &HermitianMatrix,
    h: &Contraction,
    q: QParameter,
    a1: &PositiveDefiniteMatrix,
    a2: &PositiveDefiniteMatrix,
    lambda: f64,
) -> Result<CheckReport> {
    let n = h.dim();
    same_dims(n, &[l.dim(), a1.dim(), a2.dim()])?;
    require_phi_q(q)?;
    check_lambda(lambda)?;
    let id = CheckId::HqAndClassicalLimits.as_str();
    let mid = PositiveDefiniteMatrix::interpolate(lambda, a1, a2)?;
    let hq_report = |q: QParameter, relation: Relation| -> Result<CheckReport> {
        let offset = phi_offset(l, h, q)?;
        let v = |a: &PositiveDefiniteMatrix| -> Result<f64> { Ok(log_q_unchecked(phi_q_closed(&offset, a, h, q)?, q)) };
        let (v1, v2, vm) = (v(a1)?, v(a2)?, v(&mid)?);
        let combo = lambda * v1 + (1.0 - lambda) * v2;
        Ok(CheckReport::new(id, relation, vm, combo, 1.0 + vm.abs() + v1.abs() + v2.abs()))
    };
    let main = hq_report(q, curvature_relation(q.value(), true))?;

    let (c1, c2, cm) = (
        classical_trace_fn(l, h, a1)?,
        classical_trace_fn(l, h, a2)?,
        classical_trace_fn(l, h, &mid)?,
    );
    let classical = CheckReport::new(
        id,
        Relation::Ge,
        cm,
        lambda * c1 + (1.0 - lambda) * c2,
        1.0 + cm.abs() + c1.abs() + c2.abs(),
    )
    .with_note("classical branch: A -> Tr exp(L + H* log(A) H) concave");

    let near = QParameter::new(NEAR_CLASSICAL_Q)?;
    let near_report = match hq_report(near, Relation::Ge) {
        Ok(r) => r.with_note(format!("h_q at q = {NEAR_CLASSICAL_Q}")),
        Err(Error::HypothesisViolation(msg)) => {
            return Ok(main
                .with_sub(classical)
                .with_note(format!("near-classical branch skipped: {msg}")))
        }
        Err(e) => return Err(e),
    };
    Ok(main.with_sub(classical).with_sub(near_report))
}

fn block_phi_closed(
    offset: &HermitianMatrix,
    tuple: &[PositiveDefiniteMatrix],
    hs: &[CMatrix],
    q: QParameter,
) -> Result<f64> {
    let mut inner = offset.clone();
    for (a, h) in tuple.iter().zip(hs) {
        inner = inner.add(&a.power(q.deformation()).congruence(h));
    }
    Ok(matrix_power_fractional(&inner, 1.0 / q.deformation(), PSD_CLAMP)?.trace())
}

/// `(Tr exp_q(L̂ + Ĥ* log_q(Â) Ĥ), Tr exp_q(L + Σ H_i* log_q(A_i) H_i) + (k-1)n)` with the
/// `kn × kn` block matrices built explicitly.
pub fn block_identity_sides(
    l: &HermitianMatrix,
    tuple: &[PositiveDefiniteMatrix],
    hs: &[CMatrix],
    q: QParameter,
) -> Result<(f64, f64)> {
    let n = l.dim();
    let k = tuple.len();
    let logs = tuple.iter().map(|a| log_q_pd(a, q)).collect::<Result<Vec<_>>>()?;
    let log_blocks: Vec<&CMatrix> = logs.iter().map(HermitianMatrix::as_matrix).collect();
    let a_hat = block_diagonal(&log_blocks);
    let zero = CMatrix::zeros(n, n);
    let mut l_blocks = vec![l.as_matrix()];
    l_blocks.extend(std::iter::repeat_n(&zero, k - 1));
    let l_hat = block_diagonal(&l_blocks);
    let mut h_hat = CMatrix::zeros(k * n, k * n);
    for (i, h) in hs.iter().enumerate() {
        h_hat.view_mut((i * n, 0), (n, n)).copy_from(h);
    }
    let block = herm(l_hat + h_hat.adjoint() * a_hat * &h_hat);
    let block_side = tr_exp_q(&block, q)?;
    let mut reduced = l.clone();
    for (lg, h) in logs.iter().zip(hs) {
        reduced = reduced.add(&lg.congruence(h));
    }
    let reduced_side = tr_exp_q(&reduced, q)? + ((k - 1) * n) as f64;
    Ok((block_side, reduced_side))
}

/// λ-point curvature of `(A_1, .., A_k) -> Tr exp_q(L + Σ H_i* log_q(A_i) H_i)` for
/// `Σ H_i* H_i ≤ I`, `L ⪰ 0`; the block-matrix trace identity is a sub-report.
pub fn check_block_multivariate(
    l: &HermitianMatrix,
    tuple1: &[PositiveDefiniteMatrix],
    tuple2: &[PositiveDefiniteMatrix],
    hs: &[CMatrix],
    q: QParameter,
    lambda: f64,
) -> Result<CheckReport> {
    let n = l.dim();
    let k = hs.len();
    if k == 0 || tuple1.len() != k || tuple2.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: tuple1.len().min(tuple2.len()) });
    }
    let dims: Vec<usize> = tuple1.iter().chain(tuple2).map(PositiveDefiniteMatrix::dim).collect();
    same_dims(n, &dims)?;
    require_phi_q(q)?;
    check_lambda(lambda)?;
    let mut gram = CMatrix::zeros(n, n);
    for h in hs {
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h.nrows() });
        }
        gram += h.adjoint() * h;
    }
    let gram_max = herm(gram.clone()).eig()?.max();
    if gram_max > 1.0 + HYPOTHESIS_SLACK {
        return Err(Error::HypothesisViolation(format!(
            "sum H_i* H_i <= I fails: largest eigenvalue {gram_max:.6e}"
        )));
    }
    let l_min = l.min_eigenvalue()?;
    if l_min < -HYPOTHESIS_SLACK {
        return Err(Error::HypothesisViolation(format!("L >= 0 fails: smallest eigenvalue {l_min:.6e}")));
    }
    let id = CheckId::BlockMultivariate.as_str();
    let offset = HermitianMatrix::identity(n).sub(&herm(gram)).add(&l.scale(q.deformation()));
    let mid = tuple1
        .iter()
        .zip(tuple2)
        .map(|(a, b)| PositiveDefiniteMatrix::interpolate(lambda, a, b))
        .collect::<Result<Vec<_>>>()?;
    let f1 = block_phi_closed(&offset, tuple1, hs, q)?;
    let f2 = block_phi_closed(&offset, tuple2, hs, q)?;
    let fm = block_phi_closed(&offset, &mid, hs, q)?;
    let (block_side, reduced_side) = block_identity_sides(l, tuple1, hs, q)?;
    let identity = identity_report(
        id,
        block_side,
        reduced_side,
        1.0 + block_side.abs() + reduced_side.abs(),
        "Tr exp_q(L^ + H^* log_q(A^) H^) = Tr exp_q(L + sum H_i* log_q(A_i) H_i) + (k-1)n",
    );
    let closed = identity_report(
        id,
        reduced_side - ((k - 1) * n) as f64,
        f1,
        1.0 + reduced_side.abs() + f1.abs(),
        "exp_q form = Tr[I - sum H_i*H_i + (q-1)L + sum H_i*A_i^{q-1}H_i]^{1/(q-1)}",
    );
    Ok(CheckReport::new(
        id,
        curvature_relation(q.value(), true),
        fm,
        lambda * f1 + (1.0 - lambda) * f2,
        1.0 + fm.abs() + f1.abs() + f2.abs(),
    )
    .with_sub(identity)
    .with_sub(closed))
}

/// Joint convexity (operator convex `f`) or concavity (operator concave `f`) of
/// `(ρ, σ) -> S_f^X(ρ‖σ)` at a λ-point.
pub fn check_quasi_entropy_convexity(pair: &PairSample, x: &CMatrix, f: &ScalarFn, lambda: f64) -> Result<CheckReport> {
    let n = x.nrows();
    if x.ncols() != n {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    same_dims(n, &pair.dims())?;
    check_lambda(lambda)?;
    let relation = match f.curvature() {
        Some(Curvature::OperatorConvex) => Relation::Le,
        Some(Curvature::OperatorConcave) => Relation::Ge,
        None => {
            return Err(Error::ParameterViolation(format!(
                "{} has no known operator convexity status",
                f.name()
            )))
        }
    };
    let (rm, sm) = pair.mix(lambda)?;
    let mid = quasi_entropy(&rm, &sm, x, f)?;
    let v1 = quasi_entropy(&pair.a1, &pair.b1, x, f)?;
    let v2 = quasi_entropy(&pair.a2, &pair.b2, x, f)?;
    Ok(CheckReport::new(
        CheckId::QuasiEntropyConvexity.as_str(),
        relation,
        mid.value,
        lambda * v1.value + (1.0 - lambda) * v2.value,
        mid.scale + v1.scale + v2.scale,
    )
    .with_note(format!("f = {}", f.name())))
}

/// `Tr[(A - A^{1-α} B^α)/α] ≤ -Tr[A log_{1+α}(A^{-p/2} B^p A^{-p/2})^{1/p}]` for
/// `α ∈ [-1, 1] \ {0}`, `p ≥ |α|`; agreement with the `H = I` contraction bound is a sub-report.
pub fn check_seo_fs_special(a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix, alpha: f64, p: f64) -> Result<CheckReport> {
    same_dims(a.dim(), &[b.dim()])?;
    if !(alpha.abs() <= 1.0 && alpha != 0.0) {
        return Err(Error::ParameterViolation(format!("alpha must lie in [-1, 1] without 0, got {alpha}")));
    }
    if !(p >= alpha.abs() && p.is_finite()) {
        return Err(Error::ParameterViolation(format!("need p >= |alpha|, got p = {p}, alpha = {alpha}")));
    }
    let id = CheckId::SeoFsSpecial.as_str();
    let q = QParameter::new(1.0 + alpha)?;
    let cross = hermitian_trace(a.power(1.0 - alpha).as_matrix(), b.power(alpha).as_matrix())?;
    let lhs = (a.trace() - cross) / alpha;
    let g = a.power(-p / 2.0).as_matrix() * b.power(p / 2.0).as_matrix();
    let f = gram_apply(&g, |x| (alpha / p * x.ln()).exp_m1() / alpha, Domain::Positive)?;
    let rhs = -hermitian_trace(a.as_matrix(), f.as_matrix())?;
    let report = CheckReport::new(id, Relation::Le, lhs, rhs, 1.0 + (a.trace().abs() + cross.abs()) / alpha.abs() + rhs.abs());
    let general = check_upper_bound_tsallis(a, b, &Contraction::identity(a.dim()), q, p)?;
    let lhs_agree = identity_report(
        id,
        lhs,
        general.lhs,
        report.scale.max(general.scale),
        "lhs agrees with the contraction upper bound at H = I, q = 1 + alpha",
    );
    let rhs_agree = identity_report(
        id,
        rhs,
        general.rhs,
        report.scale.max(general.scale),
        "rhs agrees with the contraction upper bound at H = I, q = 1 + alpha",
    );
    Ok(report.with_sub(lhs_agree).with_sub(rhs_agree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;
    use crate::sampling::{Field, Sampler};

    const EQ: f64 = 1e-10;

    fn q(v: f64) -> QParameter {
        QParameter::new(v).unwrap()
    }

    fn diag(d: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(d)
    }

    fn pd(d: &[f64]) -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::from_real_diagonal(d).unwrap()
    }

    fn assert_equality(r: &CheckReport) {
        assert!(r.margin.abs() <= EQ * r.scale, "{}: margin {} scale {}", r.check_id, r.margin, r.scale);
    }

    fn assert_holds(r: &CheckReport) {
        assert!(r.all_hold(), "{r:#?}");
    }

    /// Commuting pair sharing a random eigenbasis.
    fn commuting_pd(s: &mut Sampler, n: usize) -> (PositiveDefiniteMatrix, PositiveDefiniteMatrix) {
        let u = s.unitary(n, Field::Complex);
        let mk = |s: &mut Sampler| {
            let vals: Vec<f64> = (0..n).map(|_| s.uniform(0.2, 5.0)).collect();
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, vals.iter().map(|&v| c(v))));
            PositiveDefiniteMatrix::new(herm(&u * d * u.adjoint())).unwrap()
        };
        (mk(s), mk(s))
    }

    #[test]
    fn check_ids_round_trip() {
        for id in CheckId::ALL {
            assert_eq!(id.as_str().parse::<CheckId>().unwrap(), id);
            assert_eq!(id.as_str()["check_".len()..].parse::<CheckId>().unwrap(), id);
        }
        assert!("check_nothing".parse::<CheckId>().is_err());
    }

    #[test]
    fn gt_hp_examples() {
        let mut s = Sampler::new(17, 0);
        let (a, b) = commuting_pd(&mut s, 3);
        for p in [0.5, 1.0, 2.0] {
            assert_equality(&check_gt_hp(&a.log(), &b.log(), p).unwrap());
        }
        let z = HermitianMatrix::zeros(3);
        let r = check_gt_hp(&z, &z, 1.0).unwrap();
        assert!((r.lhs - 3.0).abs() < 1e-14 && (r.rhs - 3.0).abs() < 1e-14);
        for p in [0.5, 1.0, 2.0] {
            let st = s.hermitian_in(3, -2.0, 2.0, Field::Complex);
            let tt = s.hermitian_in(3, -2.0, 2.0, Field::Complex);
            let r = check_gt_hp(&st, &tt, p).unwrap();
            assert!(r.margin >= 0.0, "{r:?}");
        }
        assert!(matches!(check_gt_hp(&z, &z, 0.0), Err(Error::ParameterViolation(_))));
    }

    #[test]
    fn interpolation_examples() {
        let mut s = Sampler::new(18, 0);
        let l = s.hermitian_in(3, -1.0, 1.0, Field::Complex);
        let b = s.hermitian_in(3, -1.0, 1.0, Field::Complex);
        let gt = check_interpolation(&l, std::slice::from_ref(&b), &[CMatrix::identity(3, 3)]).unwrap();
        let direct = hermitian_trace(expm(&l).unwrap().as_matrix(), expm(&b).unwrap().as_matrix()).unwrap();
        assert!((gt.rhs - direct).abs() < 1e-12 && gt.margin >= 0.0);

        let hs = s.partition_of_identity(3, 2, Field::Complex);
        let z = HermitianMatrix::zeros(3);
        let r = check_interpolation(&z, &[z.clone(), z.clone()], &hs).unwrap();
        assert!((r.lhs - 3.0).abs() < 1e-12 && (r.rhs - 3.0).abs() < 1e-12);

        let bs = vec![s.hermitian_in(3, -2.0, 2.0, Field::Complex), s.hermitian_in(3, -2.0, 2.0, Field::Complex)];
        assert!(check_interpolation(&l, &bs, &hs).unwrap().margin >= 0.0);

        let bad = vec![hs[0].clone(), hs[1].scale(0.5)];
        assert!(matches!(check_interpolation(&l, &bs, &bad), Err(Error::PartitionOfIdentityViolation(_))));
    }

    #[test]
    fn reduced_jensen_examples() {
        let mut s = Sampler::new(19, 0);
        let b = s.hermitian_in(4, -2.0, 2.0, Field::Complex);
        assert_equality(&check_reduced_jensen(&b, &Contraction::identity(4)).unwrap());
        let r = check_reduced_jensen(&b, &Contraction::zeros(4)).unwrap();
        assert!((r.lhs - 4.0).abs() < 1e-14 && (r.rhs - 4.0).abs() < 1e-14);
        let h = s.contraction(4, false, 0.0, Field::Complex);
        assert!(check_reduced_jensen(&b, &h).unwrap().margin >= 0.0);
    }

    #[test]
    fn lower_bound_classical_examples() {
        let mut s = Sampler::new(20, 0);
        let x = s.density(3, 0.2, 5.0, Field::Complex);
        let r = check_lower_bound_classical(&x, &x, &Contraction::identity(3), 1.0).unwrap();
        assert!(r.lhs.abs() <= EQ * r.scale && r.rhs.abs() <= EQ * r.scale);
        assert_equality(&r);

        let (a, b) = commuting_pd(&mut s, 3);
        let xc = a.scale(1.0 / a.trace()).unwrap();
        let r = check_lower_bound_classical(&xc, &b, &Contraction::identity(3), 1.0).unwrap();
        let direct = hermitian_trace(xc.as_matrix(), xc.log().sub(&b.log()).as_matrix()).unwrap();
        let term = sandwich_log_term(&xc, &b, &Contraction::identity(3), 1.0).unwrap();
        assert!((term - direct).abs() <= EQ * (1.0 + direct.abs()));
        assert_equality(&r);

        let y = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        let h = s.contraction(3, false, 0.0, Field::Complex);
        for p in [0.5, 1.0, 2.0] {
            let r = check_lower_bound_classical(&x, &y, &h, p).unwrap();
            assert!(r.margin >= 0.0 && r.sub_reports.iter().all(|s| s.margin >= 0.0), "{r:?}");
        }
        let heavy = x.scale(2.0).unwrap();
        assert!(matches!(
            check_lower_bound_classical(&heavy, &y, &h, 1.0),
            Err(Error::TraceConstraintViolation { .. })
        ));
    }

    #[test]
    fn q_jensen_examples() {
        let mut s = Sampler::new(21, 0);
        let b = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        let u = s.unitary(3, Field::Complex);
        assert_equality(&check_q_jensen(std::slice::from_ref(&b), &[u], q(1.5)).unwrap());

        let (b1, _) = commuting_pd(&mut s, 3);
        let w = [0.3f64, 0.7];
        let hs: Vec<CMatrix> = w.iter().map(|v| CMatrix::identity(3, 3).scale(v.sqrt())).collect();
        assert_equality(&check_q_jensen(&[b1.clone(), b1], &hs, q(1.5)).unwrap());

        let hs = s.partition_of_identity(3, 2, Field::Complex);
        let bs = vec![s.positive_definite(3, 0.2, 5.0, Field::Complex), s.positive_definite(3, 0.2, 5.0, Field::Complex)];
        assert!(check_q_jensen(&bs, &hs, q(1.5)).unwrap().margin >= 0.0);
        assert!(matches!(check_q_jensen(&bs, &hs, q(2.5)), Err(Error::ParameterViolation(_))));
    }

    #[test]
    fn q_golden_thompson_examples() {
        let mut s = Sampler::new(22, 0);
        let a = s.positive_semidefinite(3, 3.0, Field::Complex);
        assert_equality(&check_q_golden_thompson(&a, &HermitianMatrix::zeros(3), q(1.5)).unwrap());
        let r = check_q_golden_thompson(&diag(&[1.0]), &diag(&[2.0]), q(2.0)).unwrap();
        assert!((r.lhs - 4.0).abs() < 1e-15 && (r.rhs - 6.0).abs() < 1e-15 && (r.margin - 2.0).abs() < 1e-15);
        let b = s.positive_semidefinite(3, 3.0, Field::Complex);
        assert!(check_q_golden_thompson(&a, &b, q(1.5)).unwrap().margin >= 0.0);
        assert!(matches!(
            check_q_golden_thompson(&diag(&[-1.0]), &diag(&[1.0]), q(1.5)),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn lower_bound_tsallis_examples() {
        let id = PositiveDefiniteMatrix::identity(3);
        let r = check_lower_bound_tsallis(&id, &id, &Contraction::identity(3), q(1.5)).unwrap();
        assert!(r.lhs.abs() < 1e-14 && r.rhs.abs() < 1e-14);
        let h1 = Contraction::from_matrix(CMatrix::from_element(1, 1, c(1.0)), false).unwrap();
        let r = check_lower_bound_tsallis(&pd(&[3.0]), &pd(&[1.0]), &h1, q(2.0)).unwrap();
        assert!(r.margin >= -EQ, "{r:?}");
        let mut s = Sampler::new(23, 0);
        let (x, y) = s.ordered_pair(3, 2.0, Field::Complex);
        let h = s.contraction(3, false, 0.0, Field::Complex);
        assert!(check_lower_bound_tsallis(&x, &y, &h, q(1.5)).unwrap().margin >= 0.0);
        let err = check_lower_bound_tsallis(&y, &x, &h, q(1.5)).unwrap_err();
        assert!(matches!(&err, Error::OrderingViolation(m) if m.contains("Y <= X") && !m.contains("I <= Y")));
        let err = check_lower_bound_tsallis(&pd(&[0.5]), &pd(&[0.7]), &h1, q(1.5)).unwrap_err();
        assert!(matches!(&err, Error::OrderingViolation(m) if m.contains("Y <= X") && m.contains("I <= Y")));
    }

    #[test]
    fn bpl_fs_examples() {
        let mut s = Sampler::new(24, 0);
        let (a, b) = commuting_pd(&mut s, 3);
        for v in [BplVariant::I, BplVariant::Ii] {
            assert_equality(&check_bpl_fs(&a, &b, 1.5, 0.5, v).unwrap());
        }
        let a2 = s.positive_definite(2, 0.2, 5.0, Field::Complex);
        let b2 = s.positive_definite(2, 0.2, 5.0, Field::Complex);
        // s = t is an equality case.
        assert_equality(&check_bpl_fs(&a2, &b2, 0.5, 0.5, BplVariant::I).unwrap());
        let mut s = Sampler::new(25, 0);
        let a3 = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        let b3 = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        assert!(check_bpl_fs(&a3, &b3, 1.0, 0.5, BplVariant::Ii).unwrap().margin >= 0.0);
        assert!(matches!(check_bpl_fs(&a3, &b3, 0.5, 1.0, BplVariant::I), Err(Error::ParameterViolation(_))));
        assert!(matches!(check_bpl_fs(&a3, &b3, 3.0, 2.0, BplVariant::Ii), Err(Error::ParameterViolation(_))));
    }

    #[test]
    fn upper_bound_tsallis_examples() {
        let mut s = Sampler::new(26, 0);
        let (a, b) = commuting_pd(&mut s, 3);
        for (qv, p) in [(1.5, 0.5), (1.5, 2.0), (0.5, 1.0), (0.5, 0.5)] {
            assert_equality(&check_upper_bound_tsallis(&a, &b, &Contraction::identity(3), q(qv), p).unwrap());
        }
        let h1 = Contraction::from_matrix(CMatrix::from_element(1, 1, c(0.9)), true).unwrap();
        let r = check_upper_bound_tsallis(&pd(&[2.0]), &pd(&[3.0]), &h1, q(1.5), 1.0).unwrap();
        let lhs = -(2f64.powf(0.5) * 0.81 * 3f64.sqrt() - 2.0) / 0.5;
        let m = 0.81 * 3f64.sqrt();
        let rhs = -2.0 * ((m.powf(2.0) / 2.0).powf(0.5) - 1.0) / 0.5;
        assert!((r.lhs - lhs).abs() < 1e-13 && (r.rhs - rhs).abs() < 1e-13 && r.margin >= 0.0, "{r:?}");

        let a = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        let b = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        let h = s.contraction(3, true, 0.1, Field::Complex);
        for qv in [0.5f64, 1.5] {
            for p in [(qv - 1.0).abs(), 1.0, 2.0] {
                let r = check_upper_bound_tsallis(&a, &b, &h, q(qv), p).unwrap();
                // p = |q - 1| is an equality case.
                assert!(r.margin >= -EQ * r.scale, "{r:?}");
            }
        }
        assert!(matches!(check_upper_bound_tsallis(&a, &b, &h, q(1.5), 0.2), Err(Error::ParameterViolation(_))));
        assert!(matches!(
            check_upper_bound_tsallis(&a, &b, &Contraction::zeros(3), q(1.5), 1.0),
            Err(Error::NotInvertible(_))
        ));
    }

    #[test]
    fn convexity_tsallis_examples() {
        let mut s = Sampler::new(27, 0);
        let a = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        let b = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        let h = s.contraction(3, false, 0.0, Field::Complex);
        let same = PairSample { a1: a.clone(), b1: b.clone(), a2: a.clone(), b2: b.clone() };
        for qv in [0.3, 1.5, 2.0, 2.5] {
            assert_equality(&check_convexity_tsallis(&same, &h, q(qv), 0.5).unwrap());
        }
        let pair = PairSample {
            a1: a,
            b1: b,
            a2: s.positive_definite(3, 0.2, 5.0, Field::Complex),
            b2: s.positive_definite(3, 0.2, 5.0, Field::Complex),
        };
        let r = check_convexity_tsallis(&pair, &Contraction::identity(3), q(2.0), 0.5).unwrap();
        assert_eq!(r.relation, Relation::TwoSided);
        assert_equality(&r);
        for qv in [0.3, 1.5, 2.5] {
            for lambda in [0.25, 0.5, 0.75] {
                let r = check_convexity_tsallis(&pair, &h, q(qv), lambda).unwrap();
                assert!(r.margin >= 0.0, "{r:?}");
                assert_eq!(r.relation, if qv > 2.0 { Relation::Ge } else { Relation::Le });
            }
        }
    }

    fn phi_data(s: &mut Sampler, n: usize) -> (HermitianMatrix, Contraction, PositiveDefiniteMatrix, PositiveDefiniteMatrix) {
        (
            s.positive_semidefinite(n, 2.0, Field::Complex),
            s.contraction(n, false, 0.0, Field::Complex),
            s.positive_definite(n, 0.2, 5.0, Field::Complex),
            s.positive_definite(n, 0.2, 5.0, Field::Complex),
        )
    }

    #[test]
    fn phi_q_examples() {
        let mut s = Sampler::new(28, 0);
        let (l, h, a1, a2) = phi_data(&mut s, 3);
        let r = check_phi_q_concavity(&l, &Contraction::zeros(3), q(1.5), &a1, &a2, 0.3).unwrap();
        assert_equality(&r);
        assert!((r.lhs - r.rhs).abs() < 1e-12);
        assert_equality(&check_phi_q_concavity(&l, &h, q(2.5), &a1, &a1, 0.3).unwrap());
        let r = check_phi_q_concavity(&l, &h, q(1.5), &a1, &a2, 0.5).unwrap();
        assert!(r.margin >= 0.0);
        assert_holds(&r);
        assert!(r.sub_reports.iter().all(|s| s.margin.abs() <= IDENTITY_TOL * s.scale));
        let neg = l.scale(-5.0).shift(-1.0);
        assert!(matches!(
            check_phi_q_concavity(&neg, &h, q(1.5), &a1, &a2, 0.5),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn hq_examples() {
        let mut s = Sampler::new(28, 1);
        let (l, h, a1, a2) = phi_data(&mut s, 3);
        assert_equality(&check_hq_and_classical_limits(&l, &h, q(1.5), &a1, &a1, 0.4).unwrap());
        let z = HermitianMatrix::zeros(3);
        let id = Contraction::identity(3);
        let r = check_hq_and_classical_limits(&z, &id, q(1.5), &a1, &a2, 0.4).unwrap();
        assert_equality(&r.sub_reports[0]);
        let r = check_hq_and_classical_limits(&l, &h, q(1.5), &a1, &a2, 0.5).unwrap();
        assert_holds(&r);
        assert_eq!(r.sub_reports.len(), 2);
        assert!(r.margin >= 0.0 && r.sub_reports[1].margin >= 0.0);
    }

    #[test]
    fn block_examples() {
        let mut s = Sampler::new(29, 0);
        let (l, h, a1, a2) = phi_data(&mut s, 2);
        let r = check_block_multivariate(&l, std::slice::from_ref(&a1), std::slice::from_ref(&a2), &[h.as_matrix().clone()], q(1.5), 0.5).unwrap();
        let (block, reduced) = block_identity_sides(&l, std::slice::from_ref(&a1), &[h.as_matrix().clone()], q(1.5)).unwrap();
        assert!((block - reduced).abs() <= EQ * (1.0 + block.abs()));
        assert_holds(&r);

        let hs: Vec<CMatrix> = s.partition_of_identity(2, 3, Field::Complex).into_iter().take(2).collect();
        let ones = vec![PositiveDefiniteMatrix::identity(2); 2];
        let z = HermitianMatrix::zeros(2);
        let (block, reduced) = block_identity_sides(&z, &ones, &hs, q(1.5)).unwrap();
        assert!((block - 4.0).abs() < 1e-12 && (reduced - 4.0).abs() < 1e-12);
        let r = check_block_multivariate(&z, &ones, &ones, &hs, q(1.5), 0.5).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-12);

        let t1 = vec![s.positive_definite(2, 0.2, 5.0, Field::Complex), s.positive_definite(2, 0.2, 5.0, Field::Complex)];
        let t2 = vec![s.positive_definite(2, 0.2, 5.0, Field::Complex), s.positive_definite(2, 0.2, 5.0, Field::Complex)];
        let r = check_block_multivariate(&l, &t1, &t2, &hs, q(1.5), 0.5).unwrap();
        assert!(r.sub_reports[0].margin.abs() <= IDENTITY_TOL * r.sub_reports[0].scale);
        assert!(r.margin >= 0.0);
        assert_holds(&r);

        let big: Vec<CMatrix> = hs.iter().map(|h| h.scale(2.0)).collect();
        assert!(matches!(
            check_block_multivariate(&l, &t1, &t2, &big, q(1.5), 0.5),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn quasi_entropy_examples() {
        let mut s = Sampler::new(30, 0);
        let mk = |s: &mut Sampler| s.positive_definite(2, 0.2, 5.0, Field::Complex);
        let (r1, s1) = (mk(&mut s), mk(&mut s));
        let same = PairSample { a1: r1.clone(), b1: s1.clone(), a2: r1.clone(), b2: s1.clone() };
        let x = s.gaussian(2, 2, Field::Complex);
        assert_equality(&check_quasi_entropy_convexity(&same, &x, &ScalarFn::t_log_t(), 0.3).unwrap());
        let pair = PairSample { a1: r1, b1: s1, a2: mk(&mut s), b2: mk(&mut s) };
        let r = check_quasi_entropy_convexity(&pair, &CMatrix::zeros(2, 2), &ScalarFn::t_log_t(), 0.3).unwrap();
        assert!(r.lhs == 0.0 && r.rhs == 0.0);
        assert!(check_quasi_entropy_convexity(&pair, &x, &ScalarFn::t_log_t(), 0.5).unwrap().margin >= 0.0);
        assert!(check_quasi_entropy_convexity(&pair, &x, &ScalarFn::power(0.5), 0.5).unwrap().margin >= 0.0);
        let unknown = ScalarFn::power(3.0);
        assert!(matches!(
            check_quasi_entropy_convexity(&pair, &x, &unknown, 0.5),
            Err(Error::ParameterViolation(_))
        ));
    }

    #[test]
    fn seo_fs_examples() {
        let mut s = Sampler::new(31, 0);
        let a = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        let r = check_seo_fs_special(&a, &a, 0.5, 1.0).unwrap();
        assert!(r.lhs.abs() <= EQ * r.scale && r.rhs.abs() <= EQ * r.scale);
        let (ca, cb) = commuting_pd(&mut s, 3);
        for p in [0.5, 1.0, 3.0] {
            assert_equality(&check_seo_fs_special(&ca, &cb, 0.5, p).unwrap());
        }
        let b = s.positive_definite(3, 0.2, 5.0, Field::Complex);
        for alpha in [-0.5f64, 0.5] {
            for p in [alpha.abs(), 1.0] {
                let r = check_seo_fs_special(&a, &b, alpha, p).unwrap();
                // p = |alpha| is an equality case.
                assert!(r.margin >= -EQ * r.scale, "{r:?}");
                assert_holds(&r);
            }
        }
        assert!(matches!(check_seo_fs_special(&a, &b, 0.0, 1.0), Err(Error::ParameterViolation(_))));
        assert!(matches!(check_seo_fs_special(&a, &b, 0.5, 0.25), Err(Error::ParameterViolation(_))));
    }

    #[test]
    fn with_tol_respects_pins() {
        let r = CheckReport::new("x", Relation::Le, 1.0, 1.0 - 5e-9, 1.0)
            .with_sub(CheckReport::new("x", Relation::Eq, 1.0, 1.0 + 5e-9, 1.0).pinned(1e-9));
        assert!(r.holds && !r.all_hold());
        let tight = r.with_tol(1e-10);
        assert!(!tight.holds && tight.sub_reports[0].tolerance == 1e-9);
    }
}
