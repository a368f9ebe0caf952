//! `semilab` command-line front end.
//!
//! Exit codes: 0 success, 1 a check did not pass, 2 usage or configuration
//! error.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use semilab::acceptance;
use semilab::constants::{certify, synthesize_for, CertRange, ConstantsError, SynthesisOptions, Transform};
use semilab::modelspace::{
    appendix_residual, appendix_space, curvature_bound, sharpness_quantity, AppendixSpace, SpaceDef, WeightedSpace,
};
use semilab::nonlinearity::{
    check_hypotheses, compute_indices, critical_exponents, Aux, ConditionReport, ExponentSet, IndexReport,
    NonlinearityDef, NonlinearitySpec, SamplingGrid,
};
use semilab::pdelab::{
    boundary_sweep, check_estimate, effective_k, profile_csv, solve_radial_bvp, solve_sweep, DiagnosticParams,
    EstimateKind, EstimateReport, PdeError, SolutionProfile, SolverConfig,
};
use semilab::relations::implication_suite;
use semilab::report::{to_json, Envelope};
use semilab::Theorem;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "semilab", version, about = "Gradient-estimate laboratory for Δu + f(u) = 0 on weighted model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Structural indices, critical exponents and hypothesis table of `f`.
    Indices,
    /// Synthesise and grid-certify the constants of a theorem.
    Certify,
    /// Solve the radial boundary value problem and emit the profile as CSV.
    Solve,
    /// Check an estimate on solved profiles.
    Verify,
    /// Verify the exact appendix family.
    Appendix,
    /// Measure the gradient, universal-bound and Harnack constants of a corpus.
    Implications,
    /// Run the acceptance battery.
    Suite,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Indices => "indices",
            Command::Certify => "certify",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Appendix => "appendix",
            Command::Implications => "implications",
            Command::Suite => "suite",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

type Outcome = Result<bool, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

impl From<ConstantsError> for Failure {
    fn from(e: ConstantsError) -> Self {
        match e {
            ConstantsError::Infeasible { .. } | ConstantsError::HypothesisViolation(_) => Failure::Check(e.to_string()),
            other => usage(other),
        }
    }
}

impl From<PdeError> for Failure {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::InvalidConfig(_) | PdeError::KindMismatch { .. } | PdeError::Nonlinearity(_) => usage(e),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.config.resolve().map_err(Failure::Usage).and_then(|cfg| run(cli.command, &cfg));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, cfg: &RunConfig) -> Outcome {
    match command {
        Command::Indices => indices(cfg),
        Command::Certify => certify_cmd(cfg),
        Command::Solve => solve(cfg),
        Command::Verify => verify(cfg),
        Command::Appendix => appendix(cfg),
        Command::Implications => implications(cfg),
        Command::Suite => suite(cfg),
    }
}

fn nonlinearity(cfg: &RunConfig) -> Result<NonlinearitySpec<f64>, Failure> {
    let text = cfg.f.as_deref().ok_or_else(|| usage("--f is required"))?;
    let def: NonlinearityDef = text.parse().map_err(usage)?;
    def.build().map_err(usage)
}

fn space(cfg: &RunConfig) -> Result<WeightedSpace<f64>, Failure> {
    let text = cfg.space.as_deref().ok_or_else(|| usage("--space is required"))?;
    let def: SpaceDef = text.parse().map_err(usage)?;
    def.build().map_err(usage)
}

fn theorem(cfg: &RunConfig) -> Result<Theorem, Failure> {
    cfg.theorem.as_deref().ok_or_else(|| usage("--theorem is required"))?.parse().map_err(usage)
}

/// `--N`, else the space's effective dimension.
fn dimension(cfg: &RunConfig) -> Result<f64, Failure> {
    match (cfg.big_n, cfg.space.is_some()) {
        (Some(n), _) => Ok(n),
        (None, true) => Ok(space(cfg)?.big_n()),
        (None, false) => Err(usage("--N or --space is required")),
    }
}

fn solver(cfg: &RunConfig) -> Result<SolverConfig<f64>, Failure> {
    let mut s = SolverConfig::default();
    if let Some(m) = cfg.grid {
        s.intervals = m;
    }
    if let Some(t) = cfg.tol {
        if !(t > 0.0) {
            return Err(usage("--tol must be positive"));
        }
        s.tol = t;
    }
    Ok(s)
}

fn options(cfg: &RunConfig) -> SynthesisOptions<f64> {
    SynthesisOptions { alpha: cfg.alpha, ..SynthesisOptions::default() }
}

fn emit<R: Serialize>(cfg: &RunConfig, command: Command, result: R) -> Result<(), Failure> {
    let envelope = Envelope::new(command.name(), &(command.name(), cfg.provenance()), result);
    let text = to_json(&envelope).map_err(usage)?;
    write_or_print(cfg.out.as_deref(), &text)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn plot_data(cfg: &RunConfig, csv: impl FnOnce() -> String) -> Result<(), Failure> {
    match &cfg.emit_plot_data {
        Some(p) => std::fs::write(p, csv()).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct IndicesResult {
    nonlinearity: String,
    #[serde(rename = "N")]
    n: f64,
    indices: IndexReport<f64>,
    exponents: ExponentSet<f64>,
    hypotheses: Vec<ConditionReport<f64>>,
}

fn indices(cfg: &RunConfig) -> Outcome {
    let spec = nonlinearity(cfg)?;
    let n = dimension(cfg)?;
    let grid = SamplingGrid::default();
    let ix = compute_indices(&spec, &grid).map_err(|e| Failure::Check(e.to_string()))?;
    let exponents = critical_exponents(n, Some(ix.upper)).or_else(|_| critical_exponents(n, None)).map_err(usage)?;
    let aux = Aux { alpha: cfg.alpha, beta: None };
    let hypotheses =
        Theorem::ALL.iter().filter_map(|&t| check_hypotheses(&spec, n, t, aux, &grid).ok()).collect::<Vec<_>>();
    let holds: Vec<&str> = hypotheses.iter().filter(|h| h.passed).map(|h| h.theorem.id()).collect();
    eprintln!("λ = {}, Λ = {}, Π = {}; hypotheses hold for: {}", ix.lower, ix.upper, ix.second, holds.join(", "));
    emit(
        cfg,
        Command::Indices,
        IndicesResult { nonlinearity: spec.describe(), n, indices: ix, exponents, hypotheses },
    )?;
    Ok(true)
}

fn certify_cmd(cfg: &RunConfig) -> Outcome {
    let spec = nonlinearity(cfg)?;
    let n = dimension(cfg)?;
    let thm = theorem(cfg)?;
    let cert = synthesize_for(&spec, n, thm, &options(cfg))?;
    let cert = certify(&cert, &spec, &CertRange::default())?;
    let margin = cert.verification.as_ref().map_or(f64::NAN, |v| v.worst_margin);
    eprintln!("theorem {}: C = {:e}, worst margin {margin:e}", thm.id(), cert.c);
    emit(cfg, Command::Certify, &cert)?;
    Ok(margin > 0.0)
}

/// Boundary values for a command: `--boundary`, else a log-spaced sweep.
fn boundary_values(
    cfg: &RunConfig,
    sp: &WeightedSpace<f64>,
    spec: &NonlinearitySpec<f64>,
    default_count: usize,
) -> Result<Vec<f64>, Failure> {
    if let Some(b) = cfg.boundary {
        if !(b > 0.0) {
            return Err(usage("--boundary must be positive"));
        }
        return Ok(vec![b]);
    }
    let count = cfg.count.unwrap_or(default_count);
    let s = solver(cfg)?;
    if count == 1 {
        let sweep = boundary_sweep(sp, spec, cfg.radius(), 3, &s)?;
        return Ok(vec![sweep[1]]);
    }
    Ok(boundary_sweep(sp, spec, cfg.radius(), count, &s)?)
}

fn profiles(
    cfg: &RunConfig,
    sp: &WeightedSpace<f64>,
    spec: &NonlinearitySpec<f64>,
    default_count: usize,
) -> Result<Vec<SolutionProfile<f64>>, Failure> {
    let bvs = boundary_values(cfg, sp, spec, default_count)?;
    let s = solver(cfg)?;
    solve_sweep(sp, spec, cfg.radius(), &bvs, &s).into_iter().map(|r| r.map_err(Failure::from)).collect()
}

fn diagnostic_params(cfg: &RunConfig, spec: &NonlinearitySpec<f64>, n: f64) -> Result<DiagnosticParams<f64>, Failure> {
    match &cfg.theorem {
        Some(_) => {
            let cert = synthesize_for(spec, n, theorem(cfg)?, &options(cfg))?;
            Ok(DiagnosticParams::from_certificate(&cert, 0.0))
        }
        None => Ok(DiagnosticParams { beta: 1.0, gamma: 0.0, d: 0.0, eps: 0.0, transform: Transform::F }),
    }
}

fn solve(cfg: &RunConfig) -> Outcome {
    let spec = nonlinearity(cfg)?;
    let sp = space(cfg)?;
    let b = match cfg.boundary {
        Some(b) => b,
        None => boundary_values(cfg, &sp, &spec, 1)?[0],
    };
    let profile = solve_radial_bvp(&sp, &spec, cfg.radius(), b, &solver(cfg)?)?;
    let params = diagnostic_params(cfg, &spec, sp.big_n())?;
    let csv = profile_csv(&profile, &spec, &params);
    eprintln!(
        "u(0) = {:e}, u(2R) = {b:e}, {} Newton steps, residual {:e}",
        profile.u[0], profile.iterations, profile.residual
    );
    write_or_print(cfg.out.as_deref(), &csv)?;
    plot_data(cfg, || csv.clone())?;
    Ok(true)
}

#[derive(Serialize)]
#[serde(untagged)]
enum VerifyResult {
    One(EstimateReport<f64>),
    Many { pass: bool, reports: Vec<EstimateReport<f64>> },
}

fn verify(cfg: &RunConfig) -> Outcome {
    let spec = nonlinearity(cfg)?;
    let sp = space(cfg)?;
    let thm = theorem(cfg)?;
    let n = cfg.big_n.unwrap_or(sp.big_n());
    let kind: EstimateKind = match &cfg.kind {
        Some(k) => k.parse().map_err(usage)?,
        None => EstimateKind::primary(thm, n),
    };
    let big_r = cfg.radius();
    let k = cfg.k.unwrap_or_else(|| effective_k(&sp, big_r));
    let cert = synthesize_for(&spec, n, thm, &options(cfg))?;
    let corpus = profiles(cfg, &sp, &spec, 1)?;
    let reports =
        corpus.iter().map(|p| check_estimate(p, &spec, &cert, k, big_r, kind)).collect::<Result<Vec<_>, _>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let worst = reports.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    eprintln!(
        "{kind} for theorem {}: {} ({} profiles, worst measured/bound {worst:e})",
        thm.id(),
        if pass { "pass" } else { "FAIL" },
        reports.len()
    );
    if let Some(first) = corpus.first() {
        let params = DiagnosticParams::from_certificate(&cert, reports[0].eps.unwrap_or(0.0));
        plot_data(cfg, || profile_csv(first, &spec, &params))?;
    }
    let result = if reports.len() == 1 {
        VerifyResult::One(reports.into_iter().next().expect("one report"))
    } else {
        VerifyResult::Many { pass, reports }
    };
    emit(cfg, Command::Verify, result)?;
    Ok(pass)
}

#[derive(Serialize)]
struct AppendixBundle {
    space: AppendixSpace<f64>,
    case: u8,
    case_minimum: f64,
    measured_minimum: f64,
    minimum_error: f64,
    eigen_deviation: f64,
    residual: f64,
    sharpness_sup: f64,
    sharpness_argmax: f64,
    sharpness_ratio: f64,
    pass: bool,
}

fn appendix(cfg: &RunConfig) -> Outcome {
    let n = cfg.big_n.ok_or_else(|| usage("--N is required"))?;
    let alpha = cfg.alpha.ok_or_else(|| usage("--alpha is required"))?;
    let k = cfg.k.unwrap_or(1.0);
    let app = appendix_space(n, alpha, k).map_err(usage)?;
    let sp = app.space();
    let (case, exact) = app.case_minimum();
    let measured = curvature_bound(&sp, 10.0 * app.mu).minimum;
    let minimum_error = (measured - exact).abs() / exact.abs();
    let eigen_deviation = acceptance::eigen_deviation(&sp, 100, 3.0 * app.mu, cfg.seed());
    let residual = appendix_residual(&app, 100.0, 20001);
    let sh = sharpness_quantity(&app);
    let pass = residual <= 1e-10 && eigen_deviation <= 1e-10 && minimum_error <= 1e-8;
    eprintln!("n = {}, Γ = {}, μ = {}, residual {residual:e}, sharpness ratio {}", app.n, app.gamma, app.mu, sh.ratio);
    plot_data(cfg, || {
        let mut csv = String::from("r,u,du,d2u,diagnostic\n");
        for i in 0..=1000 {
            let r = 10.0 * app.mu * i as f64 / 1000.0;
            let (u, du, d2u) = app.profile(r);
            let _ = writeln!(csv, "{r:.16e},{u:.16e},{du:.16e},{d2u:.16e},{:.16e}", app.diagnostic(r));
        }
        csv
    })?;
    emit(
        cfg,
        Command::Appendix,
        AppendixBundle {
            space: app,
            case,
            case_minimum: exact,
            measured_minimum: measured,
            minimum_error,
            eigen_deviation,
            residual,
            sharpness_sup: sh.sup,
            sharpness_argmax: sh.argmax,
            sharpness_ratio: sh.ratio,
            pass,
        },
    )?;
    Ok(pass)
}

fn implications(cfg: &RunConfig) -> Outcome {
    let spec = nonlinearity(cfg)?;
    let sp = space(cfg)?;
    let n = cfg.big_n.unwrap_or(sp.big_n());
    let big_r = cfg.radius();
    let k = cfg.k.unwrap_or_else(|| effective_k(&sp, big_r));
    let corpus = profiles(cfg, &sp, &spec, 10)?;
    let report = implication_suite(&corpus, n, &spec, k, big_r).map_err(|e| Failure::Check(e.to_string()))?;
    let pass = report.passed();
    eprintln!(
        "{} profiles: harnack arrow {}, overall {}",
        corpus.len(),
        report.arrow_lh,
        if pass { "pass" } else { "FAIL" }
    );
    plot_data(cfg, || report.csv())?;
    emit(cfg, Command::Implications, &report)?;
    Ok(pass)
}

fn suite(cfg: &RunConfig) -> Outcome {
    let outcomes = acceptance::run_all(cfg.seed());
    let mut pass = true;
    for o in &outcomes {
        let in_budget = acceptance::budget(o.id).is_none_or(|b| o.seconds < b);
        pass &= o.pass && in_budget;
        println!("{o}{}", if in_budget { "" } else { "  (over time budget)" });
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    if let Some(path) = &cfg.out {
        let text = to_json(&Envelope::new("suite", &("suite", cfg.provenance()), &outcomes)).map_err(usage)?;
        write_or_print(Some(path), &text)?;
    }
    Ok(pass)
}
