//! Acceptance criteria 1-10, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;
use redent::checks::{
    self, block_identity_sides, BplVariant, CheckId, CheckReport, PairSample, Relation,
};
use redent::deformed::{log_q_quotient_identity_check, QParameter};
use redent::entropy::{
    decomposition_identity_residual, maximal_f_divergence, phase_unitary, quasi_entropy, reduced_relative_entropy,
    reduced_tsallis_alt, reduced_tsallis_entropy, unitary_covariance_residual, EntropyInstance, ScalarFn,
    TraceValue,
};
use redent::frechet::{
    fd_trace_derivative_i, fd_trace_derivative_z, full_frechet_trace_derivative, trace_derivative_i,
    trace_derivative_ii, SmoothFn, COMMUTE_TOL,
};
use redent::matrix::{CMatrix, Contraction, HermitianMatrix, PositiveDefiniteMatrix, SquareMatrix};
use redent::sampling::{Field, Sampler};
use redent::suite::{regenerate, run_suite, run_trial, Fingerprint, SuiteConfig, SuiteReport};
use redent::variational::{
    lemma1_maximizer_i, theorem36_maximizer_i, OptimizerConfig, ProblemKind, VariationalProblem,
};

const DIMS: [usize; 4] = [2, 3, 5, 8];
const Q_GRID: [f64; 5] = [0.3, 0.7, 1.5, 2.0, 2.5];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn q(v: f64) -> QParameter {
    QParameter::new(v).unwrap()
}

fn field(i: usize) -> Field {
    if i.is_multiple_of(2) {
        Field::Complex
    } else {
        Field::Real
    }
}

fn commuting_pd(s: &mut Sampler, n: usize, f: Field) -> (PositiveDefiniteMatrix, PositiveDefiniteMatrix) {
    let eig = s.hermitian_in(n, -1.0, 1.0, f).eig().unwrap();
    let mk = |s: &mut Sampler| {
        let vals: Vec<f64> = (0..n).map(|_| s.uniform(0.2, 5.0)).collect();
        PositiveDefiniteMatrix::new(eig.compose(&vals)).unwrap()
    };
    (mk(s), mk(s))
}

fn fp(check: CheckId, dim: usize, trial: u64, params: &str) -> Fingerprint {
    format!("redent-v{}/{}/d{dim}/s0/t{trial}/{params}", redent::suite::VERSION, check.as_str())
        .parse()
        .unwrap()
}

fn criterion_1(report: &SuiteReport) -> Outcome {
    let worst = report
        .checks
        .iter()
        .filter_map(|c| c.worst.as_ref().map(|w| (w.normalized_margin, c.check_id.as_str())))
        .fold((f64::INFINITY, ""), |a, b| if b.0 < a.0 { b } else { a });
    let undersized = report.cells.iter().filter(|c| c.trials != 1000).count();
    Outcome::new(
        report.all_pass() && undersized == 0,
        format!(
            "{} checks, {} cells, {} trials, {} failures, worst margin/(tol*scale) {:.3e} ({}), {:.1}s",
            report.checks.len(),
            report.cells.len(),
            report.total_trials,
            report.total_failures,
            worst.0,
            worst.1,
            report.timing.wall_clock_seconds
        ),
    )
}

fn problems(per_kind: usize, dims: &[usize], stream: u64) -> Vec<VariationalProblem> {
    let qs = [1.5, 2.0, 1.2, 1.8];
    ProblemKind::ALL
        .iter()
        .enumerate()
        .flat_map(|(k, &kind)| {
            (0..per_kind).map(move |i| {
                let mut s = Sampler::new(1000 * k as u64 + i as u64, stream);
                VariationalProblem::sample(kind, dims[i % dims.len()], q(qs[i % qs.len()]), &mut s, field(i)).unwrap()
            })
        })
        .collect()
}

fn criterion_2(ps: &[VariationalProblem]) -> Outcome {
    let rows: Vec<(bool, f64, f64)> = ps
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let cf = p.closed_form_value().unwrap();
            let at = p.objective(&p.maximizer().unwrap()).unwrap();
            let attain = (at.value - cf.value).abs() / cf.scale;
            let mut s = Sampler::new(i as u64, 2);
            let mut excess = f64::NEG_INFINITY;
            for t in 0..200 {
                let pt = p.random_feasible_point(&mut s, field(t));
                let v = p.objective(&pt).unwrap().value;
                excess = excess.max((v - cf.value) / cf.scale);
            }
            (attain <= 1e-9 && excess <= 1e-8, attain, excess)
        })
        .collect();
    let attain = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let excess = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    Outcome::new(
        rows.iter().all(|r| r.0),
        format!(
            "{} instances x 200 feasible points, max |objective(X0) - value|/scale {attain:.2e}, max (objective - value)/scale {excess:.2e}",
            rows.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let ps = problems(20, &[2, 3, 4], 3);
    let cfg = OptimizerConfig::default();
    let rows: Vec<(ProblemKind, f64)> = ps
        .par_iter()
        .map(|p| {
            let cf = p.closed_form_value().unwrap().value;
            let m = p.numeric_max(&cfg).unwrap();
            (p.kind(), (m.value - cf).abs() / cf.abs().max(1.0))
        })
        .collect();
    let mut detail = Vec::new();
    for kind in ProblemKind::ALL {
        let worst = rows.iter().filter(|r| r.0 == kind).map(|r| r.1).fold(0.0, f64::max);
        detail.push(format!("{kind:?} {worst:.1e}"));
    }
    Outcome::new(
        rows.iter().all(|r| r.1 <= 1e-5),
        format!("{} instances, worst relative gap: {}", rows.len(), detail.join(", ")),
    )
}

fn criterion_4(ps: &[VariationalProblem]) -> Outcome {
    let worst = ps
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let x0 = p.maximizer().unwrap();
            let scale = p.closed_form_value().unwrap().scale;
            let mut s = Sampler::new(i as u64, 4);
            (0..10)
                .map(|t| {
                    let d = p.random_direction(&mut s, field(t));
                    p.directional_derivative(&x0, &d, 1e-5).unwrap().abs() / scale
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Outcome::new(
        worst <= 1e-6,
        format!("{} maximizers x 10 directions, max |derivative|/scale {worst:.2e}", ps.len()),
    )
}

struct IdentityRun {
    name: &'static str,
    bound: f64,
    worst: f64,
    count: usize,
}

fn sub_identity(r: &CheckReport, prefix: &str) -> Vec<f64> {
    r.sub_reports
        .iter()
        .filter(|s| s.notes.as_deref().is_some_and(|n| n.starts_with(prefix)))
        .map(|s| s.margin.abs() / s.scale)
        .collect()
}

fn criterion_5() -> Outcome {
    let trials = 500usize;
    let nonclassical: Vec<f64> = Q_GRID.to_vec();
    let alt = (0..trials)
        .into_par_iter()
        .map(|i| {
            let f = field(i);
            let n = DIMS[i % 4];
            let mut s = Sampler::new(i as u64, 51);
            let inst = EntropyInstance::new(
                s.positive_definite(n, 0.2, 5.0, f),
                s.positive_definite(n, 0.2, 5.0, f),
                s.contraction(n, false, 0.0, f),
                Some(q(nonclassical[i % nonclassical.len()])),
            )
            .unwrap();
            let a = reduced_tsallis_entropy(&inst).unwrap();
            let b = reduced_tsallis_alt(&inst).unwrap();
            (a.value - b.value).abs() / a.scale.max(b.scale)
        })
        .reduce(|| 0.0, f64::max);
    let decomposition = (0..trials)
        .into_par_iter()
        .map(|i| {
            let f = field(i);
            let n = DIMS[i % 4];
            let mut s = Sampler::new(i as u64, 52);
            let r = decomposition_identity_residual(
                &s.positive_definite(n, 0.2, 5.0, f),
                &s.positive_definite(n, 0.2, 5.0, f),
                &s.contraction(n, false, 0.0, f),
            )
            .unwrap();
            r.value / r.scale
        })
        .reduce(|| 0.0, f64::max);
    let block_qs = ["q=1.5", "q=2", "q=2.5"];
    let block: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let params = format!("{},lambda=0.5", block_qs[i % 3]);
            let (r, _) = run_trial(&fp(CheckId::BlockMultivariate, DIMS[i % 4], i as u64, &params), false).unwrap();
            sub_identity(&r, "Tr exp_q(L^ + H^*")
        })
        .collect();
    let phi: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let params = format!("{},lambda=0.5", block_qs[i % 3]);
            let (r, _) = run_trial(&fp(CheckId::PhiQConcavity, DIMS[i % 4], i as u64, &params), false).unwrap();
            sub_identity(&r, "Tr exp_q(L + H* log_q(A) H) =")
        })
        .collect();
    let quotient = {
        let mut s = Sampler::new(0, 55);
        (0..trials)
            .map(|i| {
                let (x, y) = (s.uniform(0.2, 5.0), s.uniform(0.2, 5.0));
                log_q_quotient_identity_check(x, y, q(Q_GRID[i % 5])).unwrap()
            })
            .fold(0.0, f64::max)
    };
    let runs = [
        IdentityRun { name: "Tsallis two forms", bound: 1e-9, worst: alt, count: trials },
        IdentityRun { name: "decomposition", bound: 1e-10, worst: decomposition, count: trials },
        IdentityRun {
            name: "block (k-1)n",
            bound: 1e-9,
            worst: block.iter().flatten().fold(0.0, |a, &b| a.max(b)),
            count: block.iter().filter(|v| !v.is_empty()).count(),
        },
        IdentityRun {
            name: "phi_q closed vs exp_q",
            bound: 1e-9,
            worst: phi.iter().flatten().fold(0.0, |a, &b| a.max(b)),
            count: phi.iter().filter(|v| !v.is_empty()).count(),
        },
        IdentityRun { name: "log_q quotient (abs)", bound: 1e-13, worst: quotient, count: trials },
    ];
    let pass = runs.iter().all(|r| r.worst <= r.bound && r.count == trials);
    let detail: Vec<String> = runs
        .iter()
        .map(|r| format!("{} {}/{} max {:.1e} (<= {:.0e})", r.name, r.count, trials, r.worst, r.bound))
        .collect();
    Outcome::new(pass, detail.join("; "))
}

fn criterion_6() -> Outcome {
    let per_dim = 100;
    let gaps: Vec<(usize, f64)> = (0..DIMS.len() * per_dim * 2)
        .into_par_iter()
        .map(|i| {
            let n = DIMS[(i / 2) % 4];
            let f = field(i / 2);
            let mut s = Sampler::new((i / 2) as u64, 61);
            let inst = EntropyInstance::new(
                s.positive_definite(n, 0.2, 5.0, f),
                s.positive_definite(n, 0.2, 5.0, f),
                s.contraction(n, false, 0.0, f),
                None,
            )
            .unwrap();
            let classical = reduced_relative_entropy(&inst).unwrap().value;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let deformed = reduced_tsallis_entropy(&inst.with_q(Some(q(1.0 + sign * 1e-4)))).unwrap().value;
            (n, (deformed - classical).abs())
        })
        .collect();
    let failing = gaps.iter().filter(|g| g.1 > 1e-3).count();
    let by_dim: Vec<String> = DIMS
        .iter()
        .map(|&n| {
            let mine: Vec<f64> = gaps.iter().filter(|g| g.0 == n).map(|g| g.1).collect();
            let bad = mine.iter().filter(|&&g| g > 1e-3).count();
            let max = mine.iter().cloned().fold(0.0, f64::max);
            format!("d{n} {bad}/{} over, max {max:.1e}", mine.len())
        })
        .collect();

    let limit = (0..50)
        .into_par_iter()
        .map(|i| {
            let f = field(i);
            let n = DIMS[i % 4];
            let mut s = Sampler::new(i as u64, 62);
            let a = s.hermitian_in(n, -0.1, 2.0, f);
            let y = s.positive_definite(n, 0.2, 5.0, f);
            let h = s.contraction(n, false, 0.0, f);
            let gamma = s.uniform(0.5, 3.0);
            let near = theorem36_maximizer_i(&a, &y, &h, q(1.0 + 1e-4), gamma).unwrap();
            let classical = lemma1_maximizer_i(&a, &y, &h).unwrap();
            (near.as_matrix() - classical.as_matrix().scale(gamma)).norm()
        })
        .reduce(|| 0.0, f64::max);
    Outcome::new(
        failing == 0 && limit <= 1e-3,
        format!(
            "(a) |S_Hq - S_H| <= 1e-3 at q = 1 +- 1e-4: {failing}/{} over [{}]; (b) maximizer gap at q = 1 + 1e-4, 50 instances, max {limit:.1e} (<= 1e-3)",
            gaps.len(),
            by_dim.join(", ")
        ),
    )
}

fn rel(exact: f64, approx: f64, scale: f64) -> f64 {
    (exact - approx).abs() / scale.max(exact.abs()).max(1e-300)
}

struct FdRow {
    err: f64,
    factor: f64,
}

/// Error at `h = 1e-5` and the ratio of errors at `H` and `H/2`, where
/// truncation dominates rounding.
fn fd_row<G: Fn(f64) -> f64>(exact: f64, scale: f64, fd: G) -> FdRow {
    const H: f64 = 1e-2;
    let err = rel(exact, fd(1e-5), scale);
    let coarse = (fd(H) - exact).abs();
    let fine = (fd(H / 2.0) - exact).abs();
    FdRow { err, factor: coarse / fine }
}

fn smooth_fns(i: usize) -> (SmoothFn, bool) {
    match i % 5 {
        0 => (SmoothFn::exp(), false),
        1 => (SmoothFn::log(), true),
        2 => (SmoothFn::power(0.5), true),
        3 => (SmoothFn::log_q(q(1.5)), true),
        _ => (SmoothFn::exp_q(q(0.7)), true),
    }
}

fn base_point(s: &mut Sampler, n: usize, positive: bool, f: Field) -> HermitianMatrix {
    if positive {
        s.positive_definite(n, 0.2, 3.0, f).as_hermitian().clone()
    } else {
        s.hermitian_in(n, -2.0, 2.0, f)
    }
}

fn criterion_7() -> Outcome {
    let instances = 100usize;
    let forms: Vec<(&str, Vec<FdRow>)> = vec![
        (
            "i",
            (0..instances)
                .into_par_iter()
                .map(|i| {
                    let (f, positive) = smooth_fns(i);
                    let fl = field(i);
                    let n = DIMS[i % 4];
                    let mut s = Sampler::new(i as u64, 71);
                    let a = base_point(&mut s, n, positive, fl);
                    let b = s.hermitian_direction(n, fl);
                    let exact = trace_derivative_i(&f, &a, &b).unwrap();
                    let scale = f.apply_derivative(&a).unwrap().frobenius_norm() * b.frobenius_norm();
                    fd_row(exact, scale, |h| fd_trace_derivative_i(&f, &a, &b, h).unwrap())
                })
                .collect(),
        ),
        (
            "ii",
            (0..instances)
                .into_par_iter()
                .map(|i| {
                    let (f, positive) = smooth_fns(i);
                    let fl = field(i);
                    let n = DIMS[i % 4];
                    let mut s = Sampler::new(i as u64, 72);
                    let eig = s.hermitian_in(n, -1.0, 1.0, fl).eig().unwrap();
                    let lo = if positive { 0.2 } else { -2.0 };
                    let xv: Vec<f64> = (0..n).map(|_| s.uniform(lo, if positive { 3.0 } else { 2.0 })).collect();
                    let zv: Vec<f64> = (0..n).map(|_| s.uniform(-1.0, 1.0)).collect();
                    let (x, z) = (eig.compose(&xv), eig.compose(&zv));
                    let y = s.hermitian_direction(n, fl);
                    let exact = trace_derivative_ii(&f, &x, &y, &z, COMMUTE_TOL).unwrap();
                    let scale = f.apply_derivative(&x).unwrap().frobenius_norm() * y.frobenius_norm() * z.frobenius_norm();
                    fd_row(exact, scale, |h| fd_trace_derivative_z(&f, &x, &y, &z, h).unwrap())
                })
                .collect(),
        ),
        (
            "general",
            (0..instances)
                .into_par_iter()
                .map(|i| {
                    let (f, positive) = smooth_fns(i);
                    let fl = field(i);
                    let n = DIMS[i % 4];
                    let mut s = Sampler::new(i as u64, 73);
                    let x = base_point(&mut s, n, positive, fl);
                    let y = s.hermitian_direction(n, fl);
                    let z = s.hermitian_in(n, -1.0, 1.0, fl);
                    let exact = full_frechet_trace_derivative(&f, &x, &y, &z).unwrap();
                    let scale = f.apply_derivative(&x).unwrap().frobenius_norm() * y.frobenius_norm() * z.frobenius_norm();
                    fd_row(exact, scale, |h| fd_trace_derivative_z(&f, &x, &y, &z, h).unwrap())
                })
                .collect(),
        ),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, rows) in &forms {
        let err = rows.iter().map(|r| r.err).fold(0.0, f64::max);
        let lo = rows.iter().map(|r| r.factor).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.factor).fold(0.0, f64::max);
        let outside = rows.iter().filter(|r| !(3.5..=4.5).contains(&r.factor)).count();
        pass &= err <= 1e-7 && outside == 0;
        detail.push(format!(
            "({name}) max rel err {err:.1e}, halving factor [{lo:.3}, {hi:.3}], {outside} outside [3.5, 4.5]"
        ));
    }
    Outcome::new(pass, format!("{instances} instances each: {}", detail.join("; ")))
}

fn criterion_8(report: &SuiteReport) -> Outcome {
    let ids = [
        CheckId::ConvexityTsallis,
        CheckId::PhiQConcavity,
        CheckId::HqAndClassicalLimits,
        CheckId::BlockMultivariate,
        CheckId::QuasiEntropyConvexity,
    ];
    let cells: Vec<_> = report.cells.iter().filter(|c| ids.iter().any(|i| i.as_str() == c.check_id)).collect();
    let ok = cells.iter().all(|c| c.trials == 1000 && c.passes == 1000);
    let trials: usize = cells.iter().map(|c| c.trials).sum();

    let at_two: Vec<CheckReport> = DIMS
        .par_iter()
        .flat_map(|&n| {
            (0..50u64).into_par_iter().map(move |t| {
                run_trial(&fp(CheckId::ConvexityTsallis, n, t, "q=2,lambda=0.5"), false).unwrap().0
            })
        })
        .collect();
    let two_sided = at_two.iter().all(|r| r.relation == Relation::TwoSided && r.all_hold());
    let worst_two = at_two.iter().map(|r| r.margin.abs() / r.scale).fold(0.0, f64::max);
    Outcome::new(
        ok && two_sided,
        format!(
            "{} cells, {trials} trials, failures {}; q = 2: {} two-sided trials hold, max |lhs - rhs|/scale {worst_two:.1e}",
            cells.len(),
            cells.iter().map(|c| c.trials - c.passes).sum::<usize>(),
            at_two.len()
        ),
    )
}

fn criterion_9(first: &SuiteReport) -> Outcome {
    let second = run_suite(&SuiteConfig::full()).unwrap();
    let same = first.deterministic_view().to_json().unwrap() == second.deterministic_view().to_json().unwrap();
    let printed: serde_json::Value = serde_json::from_str(&first.to_json().unwrap()).unwrap();
    let mut targets: Vec<(String, f64, String)> = Vec::new();
    for (i, c) in first.cells.iter().enumerate() {
        let shown = printed["cells"][i]["worst"]["margin"].to_string();
        targets.push((c.worst.fingerprint.clone(), c.worst.margin, shown));
    }
    let mismatches: Vec<String> = targets
        .par_iter()
        .filter_map(|(fp, margin, shown)| {
            let r = regenerate(fp).unwrap();
            let again = serde_json::to_value(r.margin).unwrap().to_string();
            (r.margin.to_bits() != margin.to_bits() || &again != shown).then(|| fp.clone())
        })
        .collect();
    Outcome::new(
        same && mismatches.is_empty(),
        format!(
            "second full run identical: {same}; {} min-margin fingerprints regenerated, {} mismatches",
            targets.len(),
            mismatches.len()
        ),
    )
}

struct Equalities {
    worst: f64,
    count: usize,
    failed: Vec<String>,
}

impl Equalities {
    fn report(&mut self, name: &str, r: &CheckReport) {
        self.value(name, r.margin, r.scale);
    }

    fn trace(&mut self, name: &str, v: TraceValue) {
        self.value(name, v.value, v.scale);
    }

    fn value(&mut self, name: &str, v: f64, scale: f64) {
        let x = v.abs() / scale;
        self.count += 1;
        self.worst = self.worst.max(x);
        if !(x <= 1e-10) {
            self.failed.push(format!("{name} ({x:.1e})"));
        }
    }
}

fn criterion_10() -> Outcome {
    let mut e = Equalities { worst: 0.0, count: 0, failed: Vec::new() };
    for (i, &n) in DIMS.iter().enumerate() {
        let f = field(i);
        let mut s = Sampler::new(i as u64, 100);
        let id = Contraction::identity(n);
        let zero_h = Contraction::zeros(n);
        let z = HermitianMatrix::zeros(n);
        let nf = n as f64;
        let u_id = SquareMatrix::new(CMatrix::identity(n, n)).unwrap();
        let (ca, cb) = commuting_pd(&mut s, n, f);
        let a = s.positive_definite(n, 0.2, 5.0, f);
        let b = s.positive_definite(n, 0.2, 5.0, f);

        for p in [0.5, 1.0, 2.0] {
            e.report("gt_hp commuting", &checks::check_gt_hp(&ca.log(), &cb.log(), p).unwrap());
        }
        let r = checks::check_gt_hp(&z, &z, 1.0).unwrap();
        e.value("gt_hp zero", r.lhs - nf, r.scale);
        e.value("gt_hp zero", r.rhs - nf, r.scale);

        let hs = s.partition_of_identity(n, 2, f);
        let r = checks::check_interpolation(&z, &[z.clone(), z.clone()], &hs).unwrap();
        e.value("interpolation zero", r.lhs - nf, r.scale);
        e.value("interpolation zero", r.rhs - nf, r.scale);

        let bh = s.hermitian_in(n, -2.0, 2.0, f);
        e.report("reduced Jensen H = I", &checks::check_reduced_jensen(&bh, &id).unwrap());
        let r = checks::check_reduced_jensen(&bh, &zero_h).unwrap();
        e.value("reduced Jensen H = 0", r.lhs - nf, r.scale);
        e.value("reduced Jensen H = 0", r.rhs - nf, r.scale);

        let x = s.density(n, 0.2, 5.0, f);
        let r = checks::check_lower_bound_classical(&x, &x, &id, 1.0).unwrap();
        e.value("classical lower bound X = Y", r.lhs, r.scale);
        e.value("classical lower bound X = Y", r.rhs, r.scale);
        let xc = ca.scale(1.0 / ca.trace()).unwrap();
        e.report("classical lower bound commuting", &checks::check_lower_bound_classical(&xc, &cb, &id, 1.0).unwrap());

        let u = s.unitary(n, f);
        e.report("q-Jensen k = 1 unitary", &checks::check_q_jensen(std::slice::from_ref(&a), &[u], q(1.5)).unwrap());
        let w: Vec<CMatrix> = [0.3f64, 0.7].iter().map(|v| CMatrix::identity(n, n).scale(v.sqrt())).collect();
        e.report("q-Jensen degenerate", &checks::check_q_jensen(&[ca.clone(), ca.clone()], &w, q(1.5)).unwrap());

        let psd = s.positive_semidefinite(n, 3.0, f);
        e.report("q-Golden-Thompson B = 0", &checks::check_q_golden_thompson(&psd, &z, q(1.5)).unwrap());

        let one = PositiveDefiniteMatrix::identity(n);
        let r = checks::check_lower_bound_tsallis(&one, &one, &id, q(1.5)).unwrap();
        e.value("Tsallis lower bound X = Y = I", r.lhs, r.scale);
        e.value("Tsallis lower bound X = Y = I", r.rhs, r.scale);

        for v in [BplVariant::I, BplVariant::Ii] {
            e.report("BPL/FS commuting", &checks::check_bpl_fs(&ca, &cb, 1.5, 0.5, v).unwrap());
        }
        for (qv, p) in [(1.5, 0.5), (1.5, 2.0), (0.5, 1.0), (0.3, 0.7)] {
            e.report("upper bound commuting", &checks::check_upper_bound_tsallis(&ca, &cb, &id, q(qv), p).unwrap());
        }

        let h = s.contraction(n, false, 0.0, f);
        let same = PairSample { a1: a.clone(), b1: b.clone(), a2: a.clone(), b2: b.clone() };
        for qv in Q_GRID {
            e.report("convexity identical pairs", &checks::check_convexity_tsallis(&same, &h, q(qv), 0.5).unwrap());
        }
        let pair = PairSample {
            a1: a.clone(),
            b1: b.clone(),
            a2: s.positive_definite(n, 0.2, 5.0, f),
            b2: s.positive_definite(n, 0.2, 5.0, f),
        };
        let r = checks::check_convexity_tsallis(&pair, &id, q(2.0), 0.5).unwrap();
        e.value("convexity q = 2, H = I", r.lhs, r.scale);
        e.value("convexity q = 2, H = I", r.rhs, r.scale);

        let l = s.positive_semidefinite(n, 2.0, f);
        let a2 = s.positive_definite(n, 0.2, 5.0, f);
        e.report("phi_q H = 0", &checks::check_phi_q_concavity(&l, &zero_h, q(1.5), &a, &a2, 0.3).unwrap());
        e.report("phi_q A1 = A2", &checks::check_phi_q_concavity(&l, &h, q(2.5), &a, &a, 0.3).unwrap());
        e.report("h_q A1 = A2", &checks::check_hq_and_classical_limits(&l, &h, q(1.5), &a, &a, 0.4).unwrap());
        let r = checks::check_hq_and_classical_limits(&z, &id, q(1.5), &a, &a2, 0.4).unwrap();
        e.report("classical Tr exp(log A) linear", &r.sub_reports[0]);

        let (block, reduced) = block_identity_sides(&l, std::slice::from_ref(&a), &[h.as_matrix().clone()], q(1.5)).unwrap();
        e.value("block identity k = 1", block - reduced, 1.0 + block.abs());
        let hs2: Vec<CMatrix> = s.partition_of_identity(n, 3, f).into_iter().take(2).collect();
        let ones = vec![one.clone(); 2];
        let (block, reduced) = block_identity_sides(&z, &ones, &hs2, q(1.5)).unwrap();
        e.value("block identity A_i = I", block - 2.0 * nf, 1.0 + block.abs());
        e.value("block identity A_i = I", reduced - 2.0 * nf, 1.0 + reduced.abs());

        let xq = s.gaussian(n, n, f);
        e.report("quasi-entropy identical pairs", &checks::check_quasi_entropy_convexity(&same, &xq, &ScalarFn::t_log_t(), 0.3).unwrap());
        let r = checks::check_quasi_entropy_convexity(&pair, &CMatrix::zeros(n, n), &ScalarFn::t_log_t(), 0.3).unwrap();
        e.value("quasi-entropy X = 0", r.lhs, r.scale);
        e.value("quasi-entropy X = 0", r.rhs, r.scale);

        let r = checks::check_seo_fs_special(&a, &a, 0.5, 1.0).unwrap();
        e.value("Seo/FS A = B", r.lhs, r.scale);
        e.value("Seo/FS A = B", r.rhs, r.scale);
        for p in [0.5, 1.0, 3.0] {
            e.report("Seo/FS commuting", &checks::check_seo_fs_special(&ca, &cb, 0.5, p).unwrap());
        }

        let inst = EntropyInstance::new(a.clone(), a.clone(), id.clone(), None).unwrap();
        e.trace("S_I(A|A)", reduced_relative_entropy(&inst).unwrap());
        let inst = EntropyInstance::new(a.clone(), b.clone(), id.clone(), Some(q(2.0))).unwrap();
        e.trace("S_{I,2}", reduced_tsallis_entropy(&inst).unwrap());
        let inst = EntropyInstance::new(one.clone(), one.clone(), zero_h.clone(), Some(q(1.5))).unwrap();
        e.trace("alternate form at identity inputs", reduced_tsallis_alt(&inst).unwrap());
        e.trace("maximal f-divergence A = B", maximal_f_divergence(&a, &a, &ScalarFn::t_log_t()).unwrap());
        e.trace("quasi-entropy X = 0", quasi_entropy(&a, &b, &CMatrix::zeros(n, n), &ScalarFn::t_log_t()).unwrap());
        let v = quasi_entropy(&a, &b, &CMatrix::identity(n, n), &ScalarFn::identity()).unwrap();
        e.value("quasi-entropy f = t, X = I", v.value - a.trace(), v.scale);
        e.trace("decomposition H = I", decomposition_identity_residual(&a, &b, &id).unwrap());
        e.trace("decomposition H = 0", decomposition_identity_residual(&a, &b, &zero_h).unwrap());
        let inst = EntropyInstance::new(a.clone(), b.clone(), h.clone(), Some(q(1.5))).unwrap();
        e.trace("unitary covariance U = I", unitary_covariance_residual(&inst, &u_id).unwrap());
        let angles: Vec<f64> = (0..n).map(|_| s.uniform(0.0, std::f64::consts::TAU)).collect();
        let diag_pd = |s: &mut Sampler| {
            let v: Vec<f64> = (0..n).map(|_| s.uniform(0.2, 5.0)).collect();
            PositiveDefiniteMatrix::from_real_diagonal(&v).unwrap()
        };
        let dv: Vec<f64> = (0..n).map(|_| s.uniform(-1.0, 1.0)).collect();
        let dh = Contraction::from_matrix(CMatrix::from_fn(n, n, |i, j| if i == j { dv[i].into() } else { 0.0.into() }), false).unwrap();
        let inst = EntropyInstance::new(diag_pd(&mut s), diag_pd(&mut s), dh, Some(q(0.7))).unwrap();
        e.trace("unitary covariance phases", unitary_covariance_residual(&inst, &phase_unitary(&angles)).unwrap());

        let p = VariationalProblem::ClassicalOverX { a: z.clone(), y: x.clone(), h: id.clone() };
        e.trace("-S_I(X|X)", p.objective(x.as_hermitian()).unwrap());
        let v = redent::variational::theorem36_value_i(&z, &one, &id, q(1.5), nf).unwrap();
        e.trace("theorem value at A = 0, Y = I, gamma = n", v);
    }
    let pass = e.failed.is_empty();
    let mut detail = format!("{} equality evaluations, max |margin|/scale {:.1e}", e.count, e.worst);
    if !pass {
        detail.push_str(&format!(", over: {}", e.failed.join(", ")));
    }
    Outcome::new(pass, detail)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let full = run_suite(&SuiteConfig::full()).unwrap();
    let variational = problems(50, &DIMS, 2);
    let outcomes = [
        ("inequality suite, full profile", criterion_1(&full)),
        ("variational attainment", criterion_2(&variational)),
        ("oracle agreement", criterion_3()),
        ("stationarity", criterion_4(&variational)),
        ("algebraic identities", criterion_5()),
        ("classical limits", criterion_6()),
        ("derivative formulas", criterion_7()),
        ("convexity certificates", criterion_8(&full)),
        ("determinism and regeneration", criterion_9(&full)),
        ("equality cases", criterion_10()),
    ];
    let mut failures = 0;
    for (i, (name, o)) in outcomes.iter().enumerate() {
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.pass);
    }
    println!("{failures} of {} criteria failed, {:.1}s", outcomes.len(), start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
