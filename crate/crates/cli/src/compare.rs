use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use pdcert_core::solvers::{resolve_eta, run_solver, Algorithm, EtaChoice, Metric, RunOptions, RunTrace, Solver, SolverOptions};
use pdcert_core::{SaddleProblem, StepSize};

use crate::{load_problem, CliError, CliResult, EtaArg, ProblemSource, EXIT_CHECK_FAILED, EXIT_PASS};

/// Pass threshold on the max per-coordinate discrepancy.
pub const COMPARE_TOL: f64 = 1e-8;

/// One side of a comparison: a closed-form method or PPM with a chosen `P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSpec {
    Method(Algorithm),
    Implicit(Metric),
}

impl MethodSpec {
    pub fn name(self) -> String {
        match self {
            MethodSpec::Method(a) => a.name().to_string(),
            MethodSpec::Implicit(Metric::Ppm) => "ppm".into(),
            MethodSpec::Implicit(Metric::Pdhg) => "ppm:pdhg".into(),
            MethodSpec::Implicit(Metric::Admm) => "ppm:admm".into(),
        }
    }

    /// Algorithm whose `auto` rule applies, if any.
    fn eta_rule_owner(self) -> Option<Algorithm> {
        match self {
            MethodSpec::Method(a) if a.eta_rule().is_some() => Some(a),
            MethodSpec::Implicit(Metric::Pdhg) => Some(Algorithm::Pdhg),
            _ => None,
        }
    }

    fn solver<'p>(self, prob: &'p SaddleProblem, step: StepSize) -> CliResult<Solver<'p>> {
        let opts = SolverOptions::default();
        Ok(match self {
            MethodSpec::Method(a) => Solver::new(a, prob, step, opts)?,
            MethodSpec::Implicit(m) => Solver::implicit(m, prob, step, opts)?,
        })
    }
}

/// `ppm`, `ppm:pdhg`, `ppm:admm`, or any algorithm name.
pub fn parse_method(s: &str) -> CliResult<MethodSpec> {
    match s.split_once(':') {
        Some(("ppm", metric)) => Ok(MethodSpec::Implicit(Metric::parse(metric)?)),
        Some(_) => Err(CliError::Config(format!("unknown method {s:?}"))),
        None if s == "ppm" => Ok(MethodSpec::Implicit(Metric::Ppm)),
        None => Ok(MethodSpec::Method(Algorithm::parse(s)?)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub a: MethodSpec,
    pub b: MethodSpec,
    pub problem: ProblemSource,
    /// Problem for side B; must load to the same instance as `problem`.
    pub problem_b: Option<ProblemSource>,
    pub eta: Option<EtaArg>,
    pub eta_safety: f64,
    pub iters: usize,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

impl CompareConfig {
    pub fn new(a: MethodSpec, b: MethodSpec, problem: ProblemSource) -> Self {
        Self {
            a,
            b,
            problem,
            problem_b: None,
            eta: None,
            eta_safety: 1.0,
            iters: 200,
            seed: 0,
            report: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareOutcome {
    pub method_a: String,
    pub method_b: String,
    pub eta: f64,
    pub iters: usize,
    pub max_discrepancy: f64,
    /// Step at which the max was reached (0 is the shared start).
    pub argmax_k: usize,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip)]
    pub exit_code: i32,
}

fn trace_of(spec: MethodSpec, prob: &SaddleProblem, step: StepSize, z0: &pdcert_core::PrimalDualPoint, iters: usize) -> CliResult<RunTrace> {
    let solver = spec.solver(prob, step)?;
    run_solver(&solver, z0, iters, &RunOptions::default(), None)
        .map_err(|f| CliError::Config(format!("{} failed: {f}", spec.name())))
}

pub fn cmd_compare(cfg: &CompareConfig, out: &mut dyn Write) -> CliResult<CompareOutcome> {
    if cfg.iters == 0 {
        return Err(CliError::Config("iters must be at least 1".into()));
    }
    let loaded = load_problem(&cfg.problem, cfg.seed)?;
    if let Some(src) = &cfg.problem_b {
        let other = load_problem(src, cfg.seed)?;
        if other.problem != loaded.problem || other.z0 != loaded.z0 {
            return Err(CliError::Config(format!(
                "compare needs one problem, got {} and {}",
                cfg.problem.describe(),
                src.describe()
            )));
        }
    }
    let prob = &loaded.problem;
    let owner = cfg.a.eta_rule_owner().or(cfg.b.eta_rule_owner());
    let choice = match (cfg.eta, loaded.file_eta) {
        (Some(EtaArg::Value(v)), _) | (None, Some(v)) => EtaChoice::Explicit(v),
        (Some(EtaArg::Auto), _) | (None, None) => match owner {
            Some(_) => EtaChoice::Auto { safety: cfg.eta_safety },
            None => return Err(CliError::Config("neither method has an eta auto rule; pass --eta".into())),
        },
    };
    let step = resolve_eta(owner.unwrap_or(Algorithm::Ppm), prob, choice)?;
    let ta = trace_of(cfg.a, prob, step, &loaded.z0, cfg.iters)?;
    let tb = trace_of(cfg.b, prob, step, &loaded.z0, cfg.iters)?;

    let (mut worst, mut argmax) = (0.0_f64, 0);
    for (k, (za, zb)) in ta.iterates.iter().zip(&tb.iterates).enumerate() {
        let d = za
            .as_slice()
            .iter()
            .zip(zb.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if d > worst || d.is_nan() {
            worst = d;
            argmax = k;
        }
    }
    let pass = worst <= COMPARE_TOL;
    let outcome = CompareOutcome {
        method_a: cfg.a.name(),
        method_b: cfg.b.name(),
        eta: step.eta(),
        iters: cfg.iters,
        max_discrepancy: worst,
        argmax_k: argmax,
        tol: COMPARE_TOL,
        pass,
        exit_code: if pass { EXIT_PASS } else { EXIT_CHECK_FAILED },
    };
    let _ = writeln!(out, "eta = {}{}", step.eta(), if step.is_auto() { " (auto)" } else { "" });
    let _ = writeln!(
        out,
        "{} vs {}: max discrepancy {:e} at k = {}  {}",
        outcome.method_a,
        outcome.method_b,
        worst,
        argmax,
        if pass { "PASS" } else { "FAIL" }
    );
    if let Some(path) = &cfg.report {
        let json = serde_json::to_string_pretty(&outcome).expect("outcome serializes");
        std::fs::write(path, json).map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    Ok(outcome)
}
