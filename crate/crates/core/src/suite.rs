//! Grid-driven verification campaign: cell enumeration, seeded trial
//! generation, fingerprints, aggregation, and regeneration of single trials.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checks::{self, BplVariant, CheckId, CheckReport, PairSample, DEFAULT_MARGIN_TOL};
use crate::deformed::QParameter;
use crate::entropy::ScalarFn;
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Contraction, HermitianMatrix, PositiveDefiniteMatrix};
use crate::sampling::{Field, Sampler, SamplerSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Trials per cell in the CI profile.
pub const CI_TRIALS: usize = 200;
/// Trials per cell in the full profile.
pub const FULL_TRIALS: usize = 1000;

pub fn fingerprint_prefix() -> String {
    format!("redent-v{VERSION}")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Config(format!("unknown format '{s}', expected json or csv"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub trials_per_cell: usize,
    pub q_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub margin_tol: f64,
    /// Check ids, or `["all"]`.
    pub checks: Vec<String>,
    pub output_path: Option<PathBuf>,
    pub format: ReportFormat,
    pub verbose_trials: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self::ci()
    }
}

impl SuiteConfig {
    pub fn ci() -> Self {
        Self {
            dims: vec![2, 3, 5, 8],
            trials_per_cell: CI_TRIALS,
            q_grid: vec![0.3, 0.7, 1.5, 2.0, 2.5],
            p_grid: vec![0.5, 1.0, 2.0],
            lambda_grid: vec![0.25, 0.5, 0.75],
            seed: 0,
            margin_tol: DEFAULT_MARGIN_TOL,
            checks: vec!["all".into()],
            output_path: None,
            format: ReportFormat::Json,
            verbose_trials: false,
        }
    }

    pub fn full() -> Self {
        Self {
            trials_per_cell: FULL_TRIALS,
            ..Self::ci()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad(format!("dims must be a non-empty list of positive integers, got {:?}", self.dims));
        }
        if self.trials_per_cell == 0 {
            return bad("trials_per_cell must be at least 1".into());
        }
        if self.q_grid.is_empty() || self.p_grid.is_empty() || self.lambda_grid.is_empty() {
            return bad("q_grid, p_grid and lambda_grid must be non-empty".into());
        }
        for &q in &self.q_grid {
            match QParameter::new(q) {
                Ok(qp) if !qp.is_classical() => {}
                _ => return bad(format!("q_grid entry {q} is invalid or classical")),
            }
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return bad(format!("p_grid entries must be positive, got {p}"));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return bad(format!("lambda_grid entries must lie in (0, 1), got {l}"));
        }
        if !(self.margin_tol > 0.0 && self.margin_tol.is_finite()) {
            return bad(format!("margin_tol must be positive, got {}", self.margin_tol));
        }
        self.selected_checks()?;
        Ok(())
    }

    pub fn selected_checks(&self) -> Result<Vec<CheckId>> {
        if self.checks.is_empty() {
            return Err(Error::Config("checks must be non-empty; use \"all\" for every check".into()));
        }
        if self.checks.iter().any(|c| c == "all") {
            return Ok(CheckId::ALL.to_vec());
        }
        let mut ids = self.checks.iter().map(|c| c.parse()).collect::<Result<Vec<CheckId>>>()?;
        ids.sort();
        ids.dedup();
        Ok(ids)
    }

    /// Every `(check, dim, params)` cell in run order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut out = Vec::new();
        for check in self.selected_checks()? {
            for params in cell_params(check, self) {
                for &dim in &self.dims {
                    out.push(Cell { check, dim, params: params.clone() });
                }
            }
        }
        Ok(out)
    }
}

/// Scalar functions available to the quasi-entropy check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasiFn {
    TLogT,
    Sqrt,
}

impl QuasiFn {
    pub fn as_str(self) -> &'static str {
        match self {
            QuasiFn::TLogT => "t_log_t",
            QuasiFn::Sqrt => "sqrt",
        }
    }

    pub fn scalar_fn(self) -> ScalarFn {
        match self {
            QuasiFn::TLogT => ScalarFn::t_log_t(),
            QuasiFn::Sqrt => ScalarFn::power(0.5),
        }
    }
}

impl FromStr for QuasiFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t_log_t" => Ok(QuasiFn::TLogT),
            "sqrt" => Ok(QuasiFn::Sqrt),
            _ => Err(Error::ParameterViolation(format!("unknown quasi-entropy function '{s}'"))),
        }
    }
}

/// Grid parameters of one cell; unused entries are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<BplVariant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<QuasiFn>,
}

impl fmt::Display for CellParams {
    /// `key=value` pairs joined by `,`, or `-` when empty; floats use their shortest round-trip form.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, v) in [("q", self.q), ("alpha", self.alpha), ("p", self.p), ("t", self.t), ("lambda", self.lambda)] {
            if let Some(v) = v {
                parts.push(format!("{k}={v}"));
            }
        }
        if let Some(v) = self.variant {
            parts.push(format!("variant={}", v.as_str()));
        }
        if let Some(f) = self.f {
            parts.push(format!("f={}", f.as_str()));
        }
        if parts.is_empty() {
            out.write_str("-")
        } else {
            out.write_str(&parts.join(","))
        }
    }
}

impl FromStr for CellParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = CellParams::default();
        if s == "-" {
            return Ok(p);
        }
        let malformed = || Error::FingerprintVersionMismatch(format!("malformed parameter list '{s}'"));
        for part in s.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(malformed)?;
            let num = || v.parse::<f64>().map_err(|_| malformed());
            match k {
                "q" => p.q = Some(num()?),
                "alpha" => p.alpha = Some(num()?),
                "p" => p.p = Some(num()?),
                "t" => p.t = Some(num()?),
                "lambda" => p.lambda = Some(num()?),
                "variant" => p.variant = Some(v.parse().map_err(|_| malformed())?),
                "f" => p.f = Some(v.parse().map_err(|_| malformed())?),
                _ => return Err(malformed()),
            }
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub check: CheckId,
    pub dim: usize,
    pub params: CellParams,
}

fn push_unique(v: &mut Vec<f64>, x: f64) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// `{|q - 1|} ∪ {p ∈ grid : p ≥ |q - 1|}`.
fn admissible_p(threshold: f64, grid: &[f64]) -> Vec<f64> {
    let mut ps = vec![threshold];
    for &p in grid {
        if p >= threshold {
            push_unique(&mut ps, p);
        }
    }
    ps
}

fn cell_params(check: CheckId, cfg: &SuiteConfig) -> Vec<CellParams> {
    let qs = |keep: &dyn Fn(f64) -> bool| -> Vec<f64> { cfg.q_grid.iter().copied().filter(|&q| keep(q)).collect() };
    let with_q = |q: f64| CellParams { q: Some(q), ..Default::default() };
    let q_lambda = |qv: Vec<f64>| -> Vec<CellParams> {
        qv.iter()
            .flat_map(|&q| cfg.lambda_grid.iter().map(move |&l| CellParams { q: Some(q), lambda: Some(l), ..Default::default() }))
            .collect()
    };
    let p_only = || cfg.p_grid.iter().map(|&p| CellParams { p: Some(p), ..Default::default() }).collect();
    match check {
        CheckId::GtHp | CheckId::LowerBoundClassical => p_only(),
        CheckId::Interpolation | CheckId::ReducedJensen => vec![CellParams::default()],
        CheckId::QJensen => qs(&|q| (1.0..=2.0).contains(&q)).into_iter().map(with_q).collect(),
        CheckId::QGoldenThompson | CheckId::LowerBoundTsallis => qs(&|q| q > 1.0 && q <= 2.0).into_iter().map(with_q).collect(),
        CheckId::BplFs => {
            let mut out = Vec::new();
            for variant in [BplVariant::I, BplVariant::Ii] {
                for &t in &cfg.p_grid {
                    if variant == BplVariant::I || t <= 1.0 {
                        out.push(CellParams { t: Some(t), variant: Some(variant), ..Default::default() });
                    }
                }
            }
            out
        }
        CheckId::UpperBoundTsallis => qs(&|q| (0.0..=2.0).contains(&q))
            .into_iter()
            .flat_map(|q| {
                admissible_p((q - 1.0).abs(), &cfg.p_grid)
                    .into_iter()
                    .map(move |p| CellParams { q: Some(q), p: Some(p), ..Default::default() })
            })
            .collect(),
        CheckId::ConvexityTsallis => q_lambda(qs(&|q| (0.0..=3.0).contains(&q))),
        CheckId::PhiQConcavity | CheckId::HqAndClassicalLimits | CheckId::BlockMultivariate => {
            q_lambda(qs(&|q| q > 1.0 && q <= 3.0))
        }
        CheckId::QuasiEntropyConvexity => [QuasiFn::TLogT, QuasiFn::Sqrt]
            .into_iter()
            .flat_map(|f| cfg.lambda_grid.iter().map(move |&l| CellParams { lambda: Some(l), f: Some(f), ..Default::default() }))
            .collect(),
        CheckId::SeoFsSpecial => {
            let mut alphas = Vec::new();
            for &q in &cfg.q_grid {
                let a = q - 1.0;
                if a != 0.0 && a.abs() <= 1.0 {
                    push_unique(&mut alphas, a);
                }
            }
            alphas
                .into_iter()
                .flat_map(|a| {
                    admissible_p(a.abs(), &cfg.p_grid)
                        .into_iter()
                        .map(move |p| CellParams { alpha: Some(a), p: Some(p), ..Default::default() })
                })
                .collect()
        }
    }
}

/// Identity of one trial: `redent-v<version>/<check>/d<dim>/s<seed>/t<trial>/<params>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fingerprint {
    pub check: CheckId,
    pub dim: usize,
    pub seed: u64,
    pub trial: u64,
    pub params: CellParams,
}

impl Fingerprint {
    fn body(&self) -> String {
        format!("{}/d{}/s{}/t{}/{}", self.check, self.dim, self.seed, self.trial, self.params)
    }

    /// Seed of the trial's sampler: the first eight bytes of `SHA-256(body)`.
    pub fn trial_seed(&self) -> u64 {
        let digest = Sha256::digest(self.body().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", fingerprint_prefix(), self.body())
    }
}

impl FromStr for Fingerprint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::FingerprintVersionMismatch(format!("{why}: '{s}'"));
        let parts: Vec<&str> = s.trim().split('/').collect();
        if parts.len() != 6 {
            return Err(bad("expected 6 '/'-separated fields"));
        }
        if parts[0] != fingerprint_prefix() {
            return Err(bad(&format!("expected prefix {}", fingerprint_prefix())));
        }
        let check = parts[1].parse::<CheckId>().map_err(|_| bad("unknown check"))?;
        let field = |p: &str, tag: char| -> Result<u64> {
            p.strip_prefix(tag)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(&format!("bad '{tag}' field")))
        };
        Ok(Self {
            check,
            dim: field(parts[2], 'd')? as usize,
            seed: field(parts[3], 's')?,
            trial: field(parts[4], 't')?,
            params: parts[5].parse()?,
        })
    }
}

/// Matrices and scalars a trial was built from, for manual inspection.
#[derive(Clone, Debug, Default)]
pub struct TrialInstance {
    pub field: Option<Field>,
    pub matrices: Vec<(String, CMatrix)>,
    pub scalars: Vec<(String, f64)>,
}

struct Draw {
    s: Sampler,
    n: usize,
    field: Field,
    lo: f64,
    hi: f64,
    capture: Option<TrialInstance>,
}

impl Draw {
    fn new(fp: &Fingerprint, capture: bool) -> Self {
        let field = if fp.trial.is_multiple_of(2) { Field::Complex } else { Field::Real };
        let lo = if fp.trial % 4 == 3 { SamplerSpec::HEAVY_LO } else { SamplerSpec::DEFAULT_LO };
        Self {
            s: Sampler::new(fp.trial_seed(), 0),
            n: fp.dim,
            field,
            lo,
            hi: SamplerSpec::DEFAULT_HI,
            capture: capture.then(|| TrialInstance { field: Some(field), ..Default::default() }),
        }
    }

    fn keep(&mut self, name: &str, m: &CMatrix) {
        if let Some(c) = &mut self.capture {
            c.matrices.push((name.to_string(), m.clone()));
        }
    }

    fn scalar(&mut self, name: &str, v: f64) -> f64 {
        if let Some(c) = &mut self.capture {
            c.scalars.push((name.to_string(), v));
        }
        v
    }

    fn pd(&mut self, name: &str) -> PositiveDefiniteMatrix {
        let m = self.s.positive_definite(self.n, self.lo, self.hi, self.field);
        self.keep(name, m.as_matrix());
        m
    }

    fn density(&mut self, name: &str) -> PositiveDefiniteMatrix {
        let m = self.s.density(self.n, self.lo, self.hi, self.field);
        self.keep(name, m.as_matrix());
        m
    }

    /// Spectrum uniform on `[-r, r]`.
    fn hermitian(&mut self, name: &str, r: f64) -> HermitianMatrix {
        let m = self.s.hermitian_in(self.n, -r, r, self.field);
        self.keep(name, m.as_matrix());
        m
    }

    fn psd(&mut self, name: &str, hi: f64) -> HermitianMatrix {
        let m = self.s.positive_semidefinite(self.n, hi, self.field);
        self.keep(name, m.as_matrix());
        m
    }

    fn contraction(&mut self, name: &str, invertible: bool) -> Contraction {
        let h = self.s.contraction(self.n, invertible, SamplerSpec::DEFAULT_SIGMA_MIN, self.field);
        self.keep(name, h.as_matrix());
        h
    }

    fn partition(&mut self, name: &str, k: usize) -> Vec<CMatrix> {
        let hs = self.s.partition_of_identity(self.n, k, self.field);
        for (j, h) in hs.iter().enumerate() {
            self.keep(&format!("{name}_{}", j + 1), h);
        }
        hs
    }

    fn pair(&mut self) -> PairSample {
        PairSample {
            a1: self.pd("A1"),
            b1: self.pd("B1"),
            a2: self.pd("A2"),
            b2: self.pd("B2"),
        }
    }

    /// `L = P - u (I - H*H)/(q-1)` with `P ⪰ 0` and `u ∈ [0, 0.9]`, so `I - H*H + (q-1)L ⪰ 0`.
    fn phi_l(&mut self, h: &Contraction, q: f64) -> HermitianMatrix {
        let p = self.s.positive_semidefinite(self.n, 2.0, self.field);
        let u = self.s.uniform(0.0, 0.9);
        let l = p.sub(&h.right_defect().scale(u / (q - 1.0)));
        self.keep("L", l.as_matrix());
        l
    }
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::FingerprintVersionMismatch(format!("cell is missing parameter '{name}'")))
}

/// Builds the instance named by `fp` and evaluates its check.
pub fn run_trial(fp: &Fingerprint, capture: bool) -> Result<(CheckReport, Option<TrialInstance>)> {
    let mut d = Draw::new(fp, capture);
    let p = &fp.params;
    let n = fp.dim;
    let report = match fp.check {
        CheckId::GtHp => {
            let s = d.hermitian("S", 3.0);
            let t = d.hermitian("T", 3.0);
            checks::check_gt_hp(&s, &t, need(p.p, "p")?)
        }
        CheckId::Interpolation => {
            let k = 1 + d.s.index(3);
            let l = d.hermitian("L", 2.0);
            let bs: Vec<HermitianMatrix> = (0..k).map(|j| d.hermitian(&format!("B_{}", j + 1), 2.0)).collect();
            let hs = d.partition("H", k);
            checks::check_interpolation(&l, &bs, &hs)
        }
        CheckId::ReducedJensen => {
            let b = d.hermitian("B", 3.0);
            let h = d.contraction("H", false);
            checks::check_reduced_jensen(&b, &h)
        }
        CheckId::LowerBoundClassical => {
            let x = d.density("X");
            let y = d.pd("Y");
            let h = d.contraction("H", false);
            checks::check_lower_bound_classical(&x, &y, &h, need(p.p, "p")?)
        }
        CheckId::QJensen => {
            let k = 1 + d.s.index(3);
            let bs: Vec<PositiveDefiniteMatrix> = (0..k).map(|j| d.pd(&format!("B_{}", j + 1))).collect();
            let hs = d.partition("H", k);
            checks::check_q_jensen(&bs, &hs, QParameter::new(need(p.q, "q")?)?)
        }
        CheckId::QGoldenThompson => {
            let a = d.psd("A", d.hi);
            let b = d.psd("B", d.hi);
            checks::check_q_golden_thompson(&a, &b, QParameter::new(need(p.q, "q")?)?)
        }
        CheckId::LowerBoundTsallis => {
            let spread = ((d.hi - 1.0) / 2.0).max(0.1);
            let (x, y) = d.s.ordered_pair(n, spread, d.field);
            d.keep("X", x.as_matrix());
            d.keep("Y", y.as_matrix());
            let h = d.contraction("H", false);
            checks::check_lower_bound_tsallis(&x, &y, &h, QParameter::new(need(p.q, "q")?)?)
        }
        CheckId::BplFs => {
            let t = need(p.t, "t")?;
            let variant = p.variant.ok_or_else(|| Error::FingerprintVersionMismatch("cell is missing 'variant'".into()))?;
            let a = d.pd("A");
            let b = d.pd("B");
            let s = if d.s.coin() { t } else { t * d.s.uniform(1.0, 3.0) };
            let s = d.scalar("s", s);
            checks::check_bpl_fs(&a, &b, s, t, variant)
        }
        CheckId::UpperBoundTsallis => {
            let a = d.pd("A");
            let b = d.pd("B");
            let h = d.contraction("H", true);
            checks::check_upper_bound_tsallis(&a, &b, &h, QParameter::new(need(p.q, "q")?)?, need(p.p, "p")?)
        }
        CheckId::ConvexityTsallis => {
            let pair = d.pair();
            let h = d.contraction("H", false);
            checks::check_convexity_tsallis(&pair, &h, QParameter::new(need(p.q, "q")?)?, need(p.lambda, "lambda")?)
        }
        CheckId::PhiQConcavity | CheckId::HqAndClassicalLimits => {
            let q = need(p.q, "q")?;
            let h = d.contraction("H", false);
            let l = d.phi_l(&h, q);
            let a1 = d.pd("A1");
            let a2 = d.pd("A2");
            let (qp, lambda) = (QParameter::new(q)?, need(p.lambda, "lambda")?);
            if fp.check == CheckId::PhiQConcavity {
                checks::check_phi_q_concavity(&l, &h, qp, &a1, &a2, lambda)
            } else {
                checks::check_hq_and_classical_limits(&l, &h, qp, &a1, &a2, lambda)
            }
        }
        CheckId::BlockMultivariate => {
            let k = 2 + d.s.index(2);
            let full = d.s.coin();
            let mut hs = d.s.partition_of_identity(n, if full { k } else { k + 1 }, d.field);
            hs.truncate(k);
            for (j, h) in hs.iter().enumerate() {
                d.keep(&format!("H_{}", j + 1), h);
            }
            let l = d.psd("L", 2.0);
            let t1: Vec<PositiveDefiniteMatrix> = (0..k).map(|j| d.pd(&format!("A_{}", j + 1))).collect();
            let t2: Vec<PositiveDefiniteMatrix> = (0..k).map(|j| d.pd(&format!("A'_{}", j + 1))).collect();
            checks::check_block_multivariate(&l, &t1, &t2, &hs, QParameter::new(need(p.q, "q")?)?, need(p.lambda, "lambda")?)
        }
        CheckId::QuasiEntropyConvexity => {
            let f = p.f.ok_or_else(|| Error::FingerprintVersionMismatch("cell is missing 'f'".into()))?;
            let pair = d.pair();
            let x = d.s.gaussian(n, n, d.field);
            d.keep("X", &x);
            checks::check_quasi_entropy_convexity(&pair, &x, &f.scalar_fn(), need(p.lambda, "lambda")?)
        }
        CheckId::SeoFsSpecial => {
            let a = d.pd("A");
            let b = d.pd("B");
            checks::check_seo_fs_special(&a, &b, need(p.alpha, "alpha")?, need(p.p, "p")?)
        }
    };
    let mut report = match report {
        Ok(r) => r,
        Err(e) => {
            let mut r = CheckReport::new(fp.check.as_str(), checks::Relation::Le, f64::NAN, f64::NAN, 1.0);
            r.notes = Some(format!("evaluation error: {e}"));
            r
        }
    };
    report.fingerprint = Some(fp.to_string());
    Ok((report, d.capture))
}

/// Re-runs the trial named by `fingerprint` at the default tolerance.
pub fn regenerate(fingerprint: &str) -> Result<CheckReport> {
    Ok(run_trial(&fingerprint.parse()?, false)?.0)
}

/// Like [`regenerate`], also returning the sampled matrices.
pub fn regenerate_instance(fingerprint: &str) -> Result<(CheckReport, TrialInstance)> {
    let (r, inst) = run_trial(&fingerprint.parse()?, true)?;
    Ok((r, inst.unwrap_or_default()))
}

/// Worst trial of a cell or a check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    /// Top-level margin of the worst trial.
    pub margin: f64,
    pub relative_margin: f64,
    /// `min margin / (tolerance · scale)` over the report tree; below `-1` is a failure.
    pub normalized_margin: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub fingerprint: String,
}

impl Extremum {
    fn of(r: &CheckReport) -> Self {
        Self {
            margin: r.margin,
            relative_margin: r.relative_margin(),
            normalized_margin: normalized(r),
            lhs: r.lhs,
            rhs: r.rhs,
            fingerprint: r.fingerprint.clone().unwrap_or_default(),
        }
    }
}

fn normalized(r: &CheckReport) -> f64 {
    let v = r.worst_normalized_margin();
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub check_id: String,
    pub dim: usize,
    pub params: String,
    pub trials: usize,
    pub passes: usize,
    pub errors: usize,
    pub worst: Extremum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckAggregate {
    pub check_id: String,
    pub cells: usize,
    pub trials: usize,
    pub passes: usize,
    pub errors: usize,
    pub worst: Option<Extremum>,
}

/// Fields excluded from the determinism contract.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub library_version: String,
    pub config: SuiteConfig,
    pub total_trials: usize,
    pub total_failures: usize,
    pub checks: Vec<CheckAggregate>,
    pub cells: Vec<CellAggregate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<Vec<CheckReport>>,
    pub timing: Timing,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.total_failures == 0
    }

    /// Report with the timing zeroed and per-trial records dropped.
    pub fn deterministic_view(&self) -> SuiteReport {
        SuiteReport {
            trials: None,
            timing: Timing::default(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per cell aggregate.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            w.serialize(CsvRow {
                check_id: &c.check_id,
                dim: c.dim,
                params: &c.params,
                trials: c.trials,
                passes: c.passes,
                errors: c.errors,
                worst_margin: c.worst.margin,
                worst_relative_margin: c.worst.relative_margin,
                worst_normalized_margin: c.worst.normalized_margin,
                worst_lhs: c.worst.lhs,
                worst_rhs: c.worst.rhs,
                worst_fingerprint: &c.worst.fingerprint,
            })
            .map_err(std::io::Error::from)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check_id: &'a str,
    dim: usize,
    params: &'a str,
    trials: usize,
    passes: usize,
    errors: usize,
    worst_margin: f64,
    worst_relative_margin: f64,
    worst_normalized_margin: f64,
    worst_lhs: f64,
    worst_rhs: f64,
    worst_fingerprint: &'a str,
}

fn aggregate_cell(cell: &Cell, reports: &[CheckReport]) -> CellAggregate {
    let passes = reports.iter().filter(|r| r.all_hold()).count();
    let errors = reports.iter().filter(|r| r.margin.is_nan()).count();
    let mut worst = &reports[0];
    for r in &reports[1..] {
        if normalized(r) < normalized(worst) {
            worst = r;
        }
    }
    CellAggregate {
        check_id: cell.check.as_str().to_string(),
        dim: cell.dim,
        params: cell.params.to_string(),
        trials: reports.len(),
        passes,
        errors,
        worst: Extremum::of(worst),
    }
}

/// Runs every selected check over its grid cells. Trials run in parallel; the
/// report does not depend on scheduling.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let started = Instant::now();
    let started_unix_seconds = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let cells = config.cells()?;
    let trials = config.trials_per_cell;
    let flat: Vec<CheckReport> = (0..cells.len() * trials)
        .into_par_iter()
        .map(|i| {
            let cell = &cells[i / trials];
            let fp = Fingerprint {
                check: cell.check,
                dim: cell.dim,
                seed: config.seed,
                trial: (i % trials) as u64,
                params: cell.params.clone(),
            };
            run_trial(&fp, false).map(|(r, _)| r.with_tol(config.margin_tol))
        })
        .collect::<Result<Vec<_>>>()?;

    let cell_aggs: Vec<CellAggregate> = cells
        .iter()
        .zip(flat.chunks(trials))
        .map(|(c, rs)| aggregate_cell(c, rs))
        .collect();
    let mut check_aggs = Vec::new();
    for id in config.selected_checks()? {
        let mine: Vec<&CellAggregate> = cell_aggs.iter().filter(|c| c.check_id == id.as_str()).collect();
        let worst = mine
            .iter()
            .map(|c| &c.worst)
            .fold(None::<&Extremum>, |acc, e| match acc {
                Some(a) if a.normalized_margin <= e.normalized_margin => Some(a),
                _ => Some(e),
            })
            .cloned();
        check_aggs.push(CheckAggregate {
            check_id: id.as_str().to_string(),
            cells: mine.len(),
            trials: mine.iter().map(|c| c.trials).sum(),
            passes: mine.iter().map(|c| c.passes).sum(),
            errors: mine.iter().map(|c| c.errors).sum(),
            worst,
        });
    }
    let total_trials = flat.len();
    let total_failures = total_trials - cell_aggs.iter().map(|c| c.passes).sum::<usize>();
    Ok(SuiteReport {
        library_version: VERSION.to_string(),
        config: config.clone(),
        total_trials,
        total_failures,
        checks: check_aggs,
        cells: cell_aggs,
        trials: config.verbose_trials.then_some(flat),
        timing: Timing {
            started_unix_seconds,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
    })
}
