//! The acceptance battery: one check per criterion, each returning a
//! pass/fail line with the measured quantities.

use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{
    certify, h_value, lichnerowicz_constants, liouville_threshold, synthesize_for, weak_case2, CertRange, Certificate,
    SynthesisOptions, Transform,
};
use crate::modelspace::{
    appendix_residual, appendix_space, curvature_bound, ricci_tensor, sharpness_quantity, AppendixSpace, WeightedSpace,
};
use crate::nonlinearity::{threshold_exponent, NonlinearitySpec};
use crate::numerics::linspace;
use crate::pdelab::{
    appendix_error, boundary_sweep, check_estimate, defect_study, diagnostics, effective_k, scaling_check,
    solve_radial_bvp, solve_sweep, verify_elliptic_inequality, DefectStudy, DiagnosticParams, EstimateKind,
    SolutionProfile, SolverConfig,
};
use crate::relations::implication_suite;
use crate::theorem::Theorem;

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<28} {:>8.3}s  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn(u64) -> (bool, String);

/// Tolerances of the battery.
pub mod tol {
    /// Appendix ODE residual on `[0, 100]`.
    pub const APPENDIX_RESIDUAL: f64 = 1e-10;
    /// Sharpness ratio against 8.
    pub const SHARPNESS: f64 = 1e-8;
    /// Dense against closed-form Ricci eigenvalues, relative.
    pub const EIGEN: f64 = 1e-10;
    /// Measured against exact curvature minimum, relative.
    pub const CURVATURE_MIN: f64 = 1e-8;
    /// Discriminant identity and weak-recipe residuals.
    pub const IDENTITY: f64 = 1e-12;
    /// Wall time per certificate, seconds.
    pub const CERTIFY_SECONDS: f64 = 10.0;
    /// Error ratio between 1024 and 2048 intervals is `4 ± SOLVER_RATIO`.
    pub const SOLVER_RATIO: f64 = 0.2;
    /// Solver error at 2048 intervals.
    pub const SOLVER_ERROR: f64 = 1e-6;
    /// Allowed negative defect relative to the diagnostic scale.
    pub const DEFECT: f64 = 1e-4;
    /// Appendix Harnack ratio against its closed form, relative.
    pub const HARNACK_CLOSED: f64 = 1e-12;
    /// Liouville thresholds and `L_abc` values.
    pub const THRESHOLD: f64 = 1e-15;
    /// Scaling deviation.
    pub const SCALING: f64 = 1e-8;
}

/// Identifiers, names and checks of every criterion.
pub const CRITERIA: [(u8, &str, Check); 11] = [
    (1, "appendix exactness", appendix_exactness),
    (2, "eigenvalue cross-check", eigenvalue_cross_check),
    (3, "discriminant identity", discriminant_identity),
    (4, "weak-gradient recipe", weak_recipe_check),
    (5, "certificate floors", certificate_floors),
    (6, "solver order", solver_order),
    (7, "elliptic-inequality defect", elliptic_defect),
    (8, "estimate battery", estimate_battery),
    (9, "harnack arrow", harnack_arrow),
    (10, "lichnerowicz thresholds", lichnerowicz_thresholds),
    (11, "scaling property", scaling_property),
];

/// Runs criterion `id` with the given seed.
pub fn run_one(id: u8, seed: u64) -> Option<Outcome> {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let t = Instant::now();
    let (pass, detail) = check(seed);
    Some(Outcome { id, name, pass, detail, seconds: t.elapsed().as_secs_f64() })
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|c| run_one(c.0, seed)).collect()
}

/// Per-criterion runtime budgets in seconds, where one is stated.
pub fn budget(id: u8) -> Option<f64> {
    match id {
        1 | 2 => Some(1.0),
        _ => None,
    }
}

fn appendix_n5() -> AppendixSpace<f64> {
    appendix_space(5.0, 2.0, 1.0).expect("valid appendix parameters")
}

fn appendix_exactness(_: u64) -> (bool, String) {
    let sp = appendix_n5();
    let params = sp.n == 4 && sp.gamma == -1.0 && (sp.mu - 2f64.sqrt()).abs() <= 1e-15;
    let residual = appendix_residual(&sp, 100.0, 20001);
    let ratio = sharpness_quantity(&sp).ratio;
    let pass = params && residual <= tol::APPENDIX_RESIDUAL && (ratio - 8.0).abs() <= tol::SHARPNESS;
    (pass, format!("n={} Γ={} μ={:.16} residual={residual:.2e} ratio={ratio:.12}", sp.n, sp.gamma, sp.mu))
}

/// Largest deviation between dense and closed-form eigenvalues at random
/// points of `space`.
pub fn eigen_deviation(space: &WeightedSpace<f64>, points: usize, radius: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.n();
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..radius)).collect();
        let m = ricci_tensor(space, &x).expect("matching dimension");
        let dense = DMatrix::from_row_slice(n, n, &m.data);
        let mut numeric: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        numeric.sort_by(f64::total_cmp);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut closed = vec![space.eigen_radial(r)];
        if let Some(t) = space.eigen_tangential(r) {
            closed.extend(std::iter::repeat_n(t, n - 1));
        }
        closed.sort_by(f64::total_cmp);
        for (a, b) in numeric.iter().zip(&closed) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    worst
}

fn eigenvalue_cross_check(seed: u64) -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for (nn, alpha) in [(5.0, 2.0), (5.1, 2.0)] {
        let sp = appendix_space(nn, alpha, 1.0).expect("valid appendix parameters");
        let space = sp.space();
        let dev = eigen_deviation(&space, 100, 3.0 * sp.mu, seed);
        let (case, exact) = sp.case_minimum();
        let numeric = curvature_bound(&space, 10.0 * sp.mu).minimum;
        let err = (numeric - exact).abs() / exact.abs();
        pass &= dev <= tol::EIGEN && err <= tol::CURVATURE_MIN;
        detail.push(format!("N={nn} branch {case}: eig dev {dev:.1e}, min err {err:.1e}"));
    }
    (pass, detail.join("; "))
}

fn discriminant_identity(_: u64) -> (bool, String) {
    let mut worst = 0.0f64;
    for nn in 2..=10 {
        let n = nn as f64;
        let p = threshold_exponent(n);
        let beta = 2.0 / (n - 1.0);
        for upper in linspace(-2.0, p - 1e-3, 20) {
            let h = h_value(beta, 0.0, 0.0, n, upper, 0.0).expect("corner radicands are non-negative");
            worst = worst.max((h - 2.0 * ((n + 3.0) / (n - 1.0) - upper)).abs());
        }
    }
    (worst <= tol::IDENTITY, format!("max |H − 2((N+3)/(N−1) − Λ)| = {worst:.2e} over 9×20 points"))
}

fn weak_recipe_check(_: u64) -> (bool, String) {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [2.0, 3.0, 4.0, 5.0, 8.0] {
        let p = threshold_exponent(n);
        let lo = 1.0 + 4.0 / n;
        for t in [0.1, 0.5, 0.9, 0.99, 1.01, 1.2, 2.0] {
            let alpha = lo + t * (p - lo);
            let (l, _, big_l): (f64, f64, f64) = weak_case2(n, alpha);
            worst = worst.max((4.0 * l / (n * l - 2.0) - (alpha - 1.0)).abs());
            pass &= (big_l > 0.0) == (alpha < p);
            cases += 1;
        }
    }
    let (l, beta, big_l): (f64, f64, f64) = weak_case2(3.0, 2.5);
    let close = |x: f64, y: f64| (x - y).abs() <= tol::IDENTITY;
    let example = close(l, 6.0) && close(beta, 0.25) && close(big_l, 4.0);
    pass &= worst <= tol::IDENTITY && example;
    (pass, format!("{cases} cases, max residual {worst:.1e}; N=3 α=2.5 → l={l}, β={beta}, L={big_l}"))
}

/// The certificate corpus exercised by the floor check.
pub fn certificate_corpus() -> Vec<(Theorem, f64, NonlinearitySpec<f64>, SynthesisOptions<f64>)> {
    let d = SynthesisOptions::default;
    let lich = |a, sigma| NonlinearitySpec::lichnerowicz(a, 1.0, sigma, 1.0, 0.5).expect("valid parameters");
    vec![
        (Theorem::UniversalGradient, 3.0, NonlinearitySpec::power(2.0), d()),
        (Theorem::UniversalGradient, 1.0, NonlinearitySpec::power(5.0), d()),
        (
            Theorem::UniversalGradient,
            5.0,
            NonlinearitySpec::power_sum(vec![(1.0, 1.2), (1.0, 1.8)]).expect("valid"),
            d(),
        ),
        (Theorem::WeakGradient, 3.0, NonlinearitySpec::power(2.5), d()),
        (Theorem::WeakGradient, 4.0, NonlinearitySpec::power(1.5), d()),
        (Theorem::WeakGradient, 4.0, lich(1.0, 2.0), SynthesisOptions { alpha: Some(2.0), ..d() }),
        (Theorem::Regularized, 5.0, NonlinearitySpec::power(2.0), d()),
        (Theorem::Regularized, 3.0, NonlinearitySpec::power(4.0), d()),
        (Theorem::Regularized, 2.0, NonlinearitySpec::power(10.0), d()),
        (Theorem::Regularized, 2.5, NonlinearitySpec::power(5.0), d()),
        (Theorem::LaneEmden, 4.0, NonlinearitySpec::power(2.0), d()),
        (Theorem::LaneEmden, 3.0, NonlinearitySpec::power(4.0), d()),
        (Theorem::LaneEmden, 5.0, NonlinearitySpec::power(2.2), d()),
        (Theorem::Lichnerowicz, 4.0, lich(1.0, 1.4), d()),
        (Theorem::Lichnerowicz, 4.0, lich(1.0, 1.8), d()),
        (Theorem::Lichnerowicz, 4.0, lich(1.0, 3.0), d()),
    ]
}

fn certificate_floors(_: u64) -> (bool, String) {
    let range = CertRange::default();
    let mut pass = true;
    let mut worst = f64::INFINITY;
    let mut slowest = 0.0f64;
    let mut failures = Vec::new();
    let corpus = certificate_corpus();
    for (theorem, n, spec, opts) in &corpus {
        let t = Instant::now();
        let outcome = synthesize_for(spec, *n, *theorem, opts)
            .map_err(|e| e.to_string())
            .and_then(|c| certify(&c, spec, &range).map_err(|e| e.to_string()));
        let secs = t.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        match outcome {
            Ok(c) => {
                let v = c.verification.expect("certified");
                worst = worst.min(v.worst_margin);
                if secs >= tol::CERTIFY_SECONDS {
                    pass = false;
                    failures.push(format!("{theorem} N={n}: {secs:.1}s"));
                }
            }
            Err(e) => {
                pass = false;
                failures.push(format!("{theorem} N={n}: {e}"));
            }
        }
    }
    let mut detail = format!("{} certificates, worst margin {worst:.3e}, slowest {slowest:.2}s", corpus.len());
    if !failures.is_empty() {
        detail.push_str(&format!("; failures: {}", failures.join(", ")));
    }
    (pass && worst > 0.0, detail)
}

fn solver_order(_: u64) -> (bool, String) {
    let app = appendix_n5();
    let big_r = 0.5;
    let bv = app.profile(2.0 * big_r).0;
    let spec = NonlinearitySpec::power(2.0);
    let errs: Result<Vec<f64>, _> = [1024, 2048]
        .iter()
        .map(|&m| {
            let cfg = SolverConfig { intervals: m, ..SolverConfig::default() };
            solve_radial_bvp(&app.space(), &spec, big_r, bv, &cfg).map(|p| appendix_error(&p, &app))
        })
        .collect();
    match errs {
        Ok(e) => {
            let ratio = e[0] / e[1];
            (
                (ratio - 4.0).abs() <= tol::SOLVER_RATIO && e[1] <= tol::SOLVER_ERROR,
                format!("errors {:.3e}, {:.3e}; ratio {ratio:.4}", e[0], e[1]),
            )
        }
        Err(e) => (false, e.to_string()),
    }
}

const DEFECT_LEVELS: [usize; 3] = [1024, 2048, 4096];

fn study_for(
    make: impl Fn(usize) -> Option<SolutionProfile<f64>>,
    spec: &NonlinearitySpec<f64>,
    params: impl Fn(&SolutionProfile<f64>) -> DiagnosticParams<f64>,
    which: Transform,
    k: f64,
) -> Option<DefectStudy<f64>> {
    let mut reports = Vec::new();
    for &m in &DEFECT_LEVELS {
        let p = make(m)?;
        reports.push(verify_elliptic_inequality(&p, spec, &params(&p), which, k).ok()?);
    }
    Some(defect_study(reports))
}

fn lane_emden_cert(n: f64, alpha: f64, theorem: Theorem) -> Option<Certificate<f64>> {
    synthesize_for(&NonlinearitySpec::power(alpha), n, theorem, &SynthesisOptions::default()).ok()
}

fn elliptic_defect(_: u64) -> (bool, String) {
    let power2 = NonlinearitySpec::power(2.0);
    let mut pass = true;
    let mut notes = Vec::new();

    // Appendix solution, first kind, γ = d = ε = 0.
    let app = appendix_n5();
    let Some(cert5) = lane_emden_cert(5.0, 2.0, Theorem::LaneEmden) else {
        return (false, "no certificate for N=5, α=2".into());
    };
    let k = effective_k(&app.space(), 1.0);
    let p0 = DiagnosticParams { beta: cert5.beta, gamma: 0.0, d: 0.0, eps: 0.0, transform: Transform::F };
    match study_for(|m| SolutionProfile::from_appendix(&app, 1.0, m).ok(), &power2, |_| p0, Transform::F, k) {
        Some(s) => {
            let fine = s.reports.last().expect("levels");
            let ok = s.pass && fine.min_defect >= -tol::DEFECT * fine.scale;
            pass &= ok;
            notes.push(format!("appendix min defect {:.3e}", fine.min_defect));
        }
        None => {
            pass = false;
            notes.push("appendix study failed".into());
        }
    }

    // Flat ℝ⁴ Lane–Emden profiles, first kind with the strong-estimate parameters.
    let flat4 = WeightedSpace::flat(4);
    let Some(cert4) = lane_emden_cert(4.0, 2.0, Theorem::LaneEmden) else {
        return (false, "no certificate for N=4, α=2".into());
    };
    let cfg = SolverConfig::default();
    let bvs = boundary_sweep(&flat4, &power2, 1.0, 10, &cfg).unwrap_or_default();
    let mut worst_flat = f64::INFINITY;
    let mut flat_ok = bvs.len() == 10;
    for &b in &bvs {
        let make = |m| solve_radial_bvp(&flat4, &power2, 1.0, b, &SolverConfig { intervals: m, ..cfg.clone() }).ok();
        match study_for(make, &power2, |_| DiagnosticParams::from_certificate(&cert4, 0.0), Transform::F, 0.0) {
            Some(s) => {
                flat_ok &= s.pass;
                worst_flat = worst_flat.min(s.reports.last().expect("levels").min_defect);
            }
            None => flat_ok = false,
        }
    }
    pass &= flat_ok;
    notes.push(format!("{} flat ℝ⁴ profiles, worst {worst_flat:.3e}", bvs.len()));

    // Second kind on flat ℝ³ with f = t⁴ and the regularised parameters.
    let flat3 = WeightedSpace::flat(3);
    let power4 = NonlinearitySpec::power(4.0);
    let Some(cert3) = lane_emden_cert(3.0, 4.0, Theorem::Regularized) else {
        return (false, "no certificate for N=3, Λ=4".into());
    };
    let bvs3 = boundary_sweep(&flat3, &power4, 1.0, 5, &cfg).unwrap_or_default();
    let mut g_ok = bvs3.len() == 5;
    let mut worst_g = f64::INFINITY;
    for &b in &bvs3 {
        let make = |m| solve_radial_bvp(&flat3, &power4, 1.0, b, &SolverConfig { intervals: m, ..cfg.clone() }).ok();
        let params = |p: &SolutionProfile<f64>| DiagnosticParams::from_certificate(&cert3, 0.1 * p.u[0]);
        match study_for(make, &power4, params, Transform::G, 0.0) {
            Some(s) => {
                g_ok &= s.pass;
                worst_g = worst_g.min(s.reports.last().expect("levels").min_defect);
            }
            None => g_ok = false,
        }
    }
    pass &= g_ok;
    notes.push(format!("{} flat ℝ³ second-kind profiles, worst {worst_g:.3e}", bvs3.len()));
    (pass, notes.join("; "))
}

/// The flat ℝ⁴ Lane–Emden corpus with `α = 2`, `R = 1`.
pub fn lane_emden_corpus(count: usize) -> Vec<SolutionProfile<f64>> {
    let space = WeightedSpace::flat(4);
    let spec = NonlinearitySpec::power(2.0);
    let cfg = SolverConfig::default();
    let bvs = boundary_sweep(&space, &spec, 1.0, count, &cfg).unwrap_or_default();
    solve_sweep(&space, &spec, 1.0, &bvs, &cfg).into_iter().filter_map(Result::ok).collect()
}

fn estimate_battery(_: u64) -> (bool, String) {
    let spec = NonlinearitySpec::power(2.0);
    let Some(cert) = lane_emden_cert(4.0, 2.0, Theorem::LaneEmden) else {
        return (false, "no certificate for N=4, α=2".into());
    };
    let corpus = lane_emden_corpus(20);
    let mut pass = corpus.len() == 20;
    let mut worst: f64 = 0.0;
    let mut flips = 0;
    for p in &corpus {
        let mut prev = None;
        for factor in [0.5, 1.0, 2.0, 10.0] {
            let mut c = cert.clone();
            c.c *= factor;
            let Ok(rep) = check_estimate(p, &spec, &c, 0.0, 1.0, EstimateKind::GradientStrong) else {
                pass = false;
                continue;
            };
            if factor == 1.0 {
                worst = worst.max(rep.measured);
                pass &= rep.pass;
            }
            if prev == Some(true) && !rep.pass {
                flips += 1;
            }
            prev = Some(rep.pass);
        }
    }
    pass &= flips == 0 && worst < cert.c;
    (pass, format!("{} profiles, max measured·R² {worst:.4e} < C {:.4e}; flips {flips}", corpus.len(), cert.c))
}

fn harnack_arrow(_: u64) -> (bool, String) {
    let spec = NonlinearitySpec::power(2.0);
    let corpus = lane_emden_corpus(20);
    let flat = match implication_suite(&corpus, 4.0, &spec, 0.0, 1.0) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let app = appendix_n5();
    let exact = SolutionProfile::from_appendix(&app, 1.0, 4096).expect("valid grid");
    let k = effective_k(&app.space(), 1.0);
    let appendix = match implication_suite(std::slice::from_ref(&exact), 5.0, &spec, k, 1.0) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let m2 = app.mu * app.mu;
    let closed = ((m2 + 1.0) / m2).powi(2);
    let measured = appendix.records[0].harnack_ratio;
    let closed_ok = (measured - closed).abs() <= tol::HARNACK_CLOSED * closed;
    let worst =
        flat.records.iter().chain(&appendix.records).map(|r| r.harnack_ratio / r.harnack_bound).fold(0.0, f64::max);
    let pass = flat.arrow_lh && appendix.arrow_lh && closed_ok && corpus.len() == 20;
    (
        pass,
        format!(
            "{} profiles, max ratio/bound {worst:.4}; appendix sup/inf {measured:.12} (closed {closed:.12})",
            corpus.len() + 1
        ),
    )
}

fn lichnerowicz_thresholds(_: u64) -> (bool, String) {
    let l1: f64 = liouville_threshold(4.0, 1.0, 3.0);
    let l2: f64 = liouville_threshold(4.0, 3.0, 1.5);
    let zeros = [(2.0, 3.0), (4.0, 1.5), (7.0, 10.0)].iter().all(|&(n, s)| liouville_threshold(n, 0.0, s) == 0.0);
    let table = lichnerowicz_constants(4.0, 1.0, 3.0, 0.5, 0.7).map(|c| c.l_abc).unwrap_or(f64::NAN);
    let table2 = lichnerowicz_constants(4.0, 3.0, 1.5, 0.5, 0.7).map(|c| c.l_abc).unwrap_or(f64::NAN);
    let spec = NonlinearitySpec::lichnerowicz(1.0, 1.0, 3.0, 0.0, 0.5).expect("valid parameters");
    let space = WeightedSpace::flat(2);
    let cfg = SolverConfig { intervals: 256, ..SolverConfig::default() };
    let equilibrium = solve_radial_bvp(&space, &spec, 1.0, 1.0, &cfg).ok().is_some_and(|p| {
        let params = DiagnosticParams { beta: 1.0, gamma: 0.0, d: 0.0, eps: 0.0, transform: Transform::F };
        let q = diagnostics(&p, &spec, &params);
        p.u.iter().all(|&u| u == 1.0) && q.grad_log_sq.iter().all(|&g| g == 0.0) && spec.value(1.0) == 0.0
    });
    let pass = (l1 - 1.0).abs() <= tol::THRESHOLD
        && (l2 - 1.5).abs() <= tol::THRESHOLD
        && zeros
        && table == 0.7
        && (table2 - 3.0).abs() <= tol::THRESHOLD
        && equilibrium;
    (pass, format!("L(4,1,3)={l1}, L(4,3,1.5)={l2}, L(n,0,σ)=0: {zeros}; L_abc={table}, {table2}; Allen–Cahn u≡1: {equilibrium}"))
}

fn scaling_property(_: u64) -> (bool, String) {
    let space = WeightedSpace::flat(4);
    let spec = NonlinearitySpec::power(2.0);
    let cfg = SolverConfig { intervals: 8192, ..SolverConfig::default() };
    let bvs = boundary_sweep(&space, &spec, 1.0, 3, &cfg).unwrap_or_default();
    let mut worst = 0.0f64;
    let mut pass = bvs.len() == 3;
    for b in bvs {
        let Ok(p) = solve_radial_bvp(&space, &spec, 1.0, b, &cfg) else {
            pass = false;
            continue;
        };
        for s in [0.5, 2.0] {
            match scaling_check(&p, 2.0, s) {
                Ok(r) => worst = worst.max(r.deviation),
                Err(_) => pass = false,
            }
        }
    }
    (pass && worst <= tol::SCALING, format!("max deviation {worst:.3e} for s ∈ {{0.5, 2}}"))
}
