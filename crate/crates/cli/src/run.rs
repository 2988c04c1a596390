use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use pdcert_core::certify::{
    certify_run, check_assumption_gap, rate_slope, sample_references, saddle_oracle, AssumptionReport,
    CertificateReport, RateFit, RecordStatus, SaddleCertificate, REPORT_TOL,
};
use pdcert_core::linalg::{seminorm_sq, sub};
use pdcert_core::solvers::{run_solver, resolve_eta, ErrorSchedule, EtaChoice, RunOptions, RunTrace, Solver, SolverOptions};
use pdcert_core::SymmetricOperator;

use crate::{fmt_num, load_problem, Check, CliError, CliResult, EtaArg, RunConfig, EXIT_CHECK_FAILED, EXIT_PASS};

pub const CSV_HEADER: &str = "k,gap,bound,pnorm_dist_ref,inclusion_residual,eps_norm";

/// Number of perturbed references next to the saddle point.
const PERTURBED_REFS: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub pass: bool,
    pub first_violation_k: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
struct ReferenceInfo {
    method: pdcert_core::certify::OracleMethod,
    residual: f64,
    certified: bool,
    fstar: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct RunReport<'a> {
    algorithm: &'static str,
    problem: String,
    form: &'static str,
    eta: f64,
    eta_auto: bool,
    iters: usize,
    completed: usize,
    seed: u64,
    error: Option<String>,
    all_pass: bool,
    checks: &'a [CheckResult],
    reference: ReferenceInfo,
    rate: Option<RateFit>,
    assumption: Option<&'a AssumptionReport>,
    certificate: &'a CertificateReport,
}

/// What a `run` did.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub eta: f64,
    pub checks: Vec<CheckResult>,
    pub csv: String,
    pub report_json: String,
}

fn validate(cfg: &RunConfig) -> CliResult<()> {
    if cfg.iters == 0 {
        return Err(CliError::Config("iters must be at least 1".into()));
    }
    if !(cfg.eta_safety > 0.0 && cfg.eta_safety.is_finite()) {
        return Err(CliError::Config(format!("eta-safety must be positive, got {}", cfg.eta_safety)));
    }
    if cfg.checks.contains(&Check::Inexact) && cfg.error_schedule.is_none() {
        return Err(CliError::Config("the inexact check needs an error schedule".into()));
    }
    if cfg.error_schedule.is_some() && !cfg.algorithm.is_exact() {
        return Err(CliError::Config(format!("{} has no inexact variant", cfg.algorithm.name())));
    }
    if let Some(d) = cfg.diameter {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(CliError::Config(format!("diameter must be nonnegative, got {d}")));
        }
    }
    Ok(())
}

fn eta_choice(cfg: &RunConfig, file_eta: Option<f64>) -> CliResult<EtaChoice> {
    match (cfg.eta, file_eta) {
        (Some(EtaArg::Auto), _) => {
            if cfg.algorithm.eta_rule().is_none() {
                return Err(CliError::Config(format!(
                    "eta auto is only defined for pdhg and linearized_pdhg, not {}",
                    cfg.algorithm.name()
                )));
            }
            Ok(EtaChoice::Auto { safety: cfg.eta_safety })
        }
        (Some(EtaArg::Value(v)), _) | (None, Some(v)) => Ok(EtaChoice::Explicit(v)),
        (None, None) if cfg.algorithm.eta_rule().is_some() => Ok(EtaChoice::Auto { safety: cfg.eta_safety }),
        (None, None) => Err(CliError::Config(format!("{} needs an explicit --eta", cfg.algorithm.name()))),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn trace_csv(trace: &RunTrace, cert: &CertificateReport, p: &SymmetricOperator, zref: &[f64]) -> String {
    let mut s = String::with_capacity(96 * (trace.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for k in 1..=trace.len() {
        let rec = cert.records.get(k - 1);
        let gap = match rec {
            Some(r) if r.status == RecordStatus::Checked => fmt_num(r.gap_value),
            _ => String::new(),
        };
        let bound = rec.map(|r| fmt_num(r.bound_value)).unwrap_or_default();
        let dist = seminorm_sq(p, &sub(trace.iterates[k].as_slice(), zref))
            .map(|v| fmt_num(v.sqrt()))
            .unwrap_or_default();
        let res = trace.residuals.get(k - 1).map(|v| fmt_num(*v)).unwrap_or_default();
        let eps = trace.eps_norms.get(k - 1).map(|v| fmt_num(*v)).unwrap_or_default();
        let _ = writeln!(s, "{k},{gap},{bound},{dist},{res},{eps}");
    }
    s
}

fn reference_info(c: &SaddleCertificate) -> ReferenceInfo {
    ReferenceInfo {
        method: c.method,
        residual: c.residual,
        certified: c.certified,
        fstar: c.fstar,
    }
}

/// Runs, certifies and writes outputs. Human-readable lines go to `out`.
pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<RunOutcome> {
    validate(cfg)?;
    let loaded = load_problem(&cfg.problem, cfg.seed)?;
    let prob = &loaded.problem;
    let choice = eta_choice(cfg, loaded.file_eta)?;
    let step = resolve_eta(cfg.algorithm, prob, choice)?;
    let solver = Solver::new(cfg.algorithm, prob, step, SolverOptions::default())?;
    let schedule = match cfg.error_schedule {
        Some((scale, exponent)) => Some(ErrorSchedule::new(scale, exponent, cfg.seed)?),
        None => None,
    };
    let _ = writeln!(out, "eta = {}{}", step.eta(), if step.is_auto() { " (auto)" } else { "" });

    let opts = RunOptions::default();
    let (trace, run_error) = match run_solver(&solver, &loaded.z0, cfg.iters, &opts, schedule.as_ref().filter(|s| !s.is_zero())) {
        Ok(t) => (t, None),
        Err(f) => (f.trace, Some(f.error)),
    };
    if let Some(e) = &run_error {
        let _ = writeln!(out, "run stopped: {e}");
    }

    let oracle = saddle_oracle(prob)?;
    if !oracle.certified {
        let _ = writeln!(out, "warning: reference saddle residual {:e} above target", oracle.residual);
    }
    let zref = oracle.zstar.clone();
    let p = &trace.metric;
    let cert = if trace.is_empty() {
        None
    } else {
        let d = cfg.diameter.or_else(|| trace.is_inexact().then(|| 2.0 * trace.max_distance(&zref)));
        Some(certify_run(&trace, prob, p, &zref, d)?)
    };

    let mut checks = Vec::new();
    let mut assumption = None;
    for check in &cfg.checks {
        let result = match (check, &cert) {
            (_, None) => CheckResult {
                check: check.name(),
                pass: false,
                first_violation_k: Some(1),
                detail: "no completed steps".into(),
            },
            (Check::Inclusion, Some(_)) => {
                let first = trace.residuals.iter().position(|r| r.is_nan() || *r > REPORT_TOL).map(|i| i + 1);
                let worst = trace.residuals.iter().cloned().fold(0.0, f64::max);
                CheckResult {
                    check: check.name(),
                    pass: first.is_none(),
                    first_violation_k: first,
                    detail: format!("max residual {worst:e}"),
                }
            }
            (Check::PerIterate, Some(c)) => {
                let pi = c.summary.per_iterate.as_ref();
                CheckResult {
                    check: check.name(),
                    pass: pi.is_none_or(|s| s.all_pass),
                    first_violation_k: pi.and_then(|s| s.first_violation_k),
                    detail: pi.map_or("reference has infinite value; skipped".into(), |s| {
                        format!("worst margin {:e}", s.worst_margin)
                    }),
                }
            }
            (Check::Ergodic, Some(c)) | (Check::Inexact, Some(c)) => {
                // A zero-scale schedule is the exact run; its bound is the ergodic one.
                let zero_schedule = schedule.is_some_and(|s| s.is_zero());
                let inexact_ok = *check != Check::Inexact || c.summary.inexact || zero_schedule;
                CheckResult {
                    check: check.name(),
                    pass: c.summary.first_violation_k.is_none() && inexact_ok,
                    first_violation_k: c.summary.first_violation_k,
                    detail: format!(
                        "worst margin {:e}{}",
                        c.summary.worst_margin,
                        c.summary.diameter.map(|d| format!(", D = {d:e}")).unwrap_or_default()
                    ),
                }
            }
            (Check::Assumption, Some(_)) => {
                let e = trace
                    .error_matrix
                    .clone()
                    .unwrap_or_else(|| SymmetricOperator::zeros(p.dim()));
                let refs = sample_references(prob, &zref, PERTURBED_REFS, cfg.seed);
                let r = check_assumption_gap(&trace, prob, p, &e, &refs)?;
                let res = CheckResult {
                    check: check.name(),
                    pass: r.pass,
                    first_violation_k: r.first_violation_k,
                    detail: format!(
                        "worst violation {:e}, min eig(P - E) {:e}",
                        r.worst_violation, r.min_eigenvalue
                    ),
                };
                assumption = Some(r);
                res
            }
        };
        checks.push(result);
    }

    let all_pass = run_error.is_none() && checks.iter().all(|c| c.pass);
    for c in &checks {
        let _ = writeln!(out, "{:<12} {}  {}", c.check, if c.pass { "PASS" } else { "FAIL" }, c.detail);
    }
    let first_violation = checks.iter().filter_map(|c| c.first_violation_k).min();
    if !all_pass {
        match first_violation {
            Some(k) => {
                let _ = writeln!(out, "first_violation_k = {k}");
            }
            None => {
                let _ = writeln!(out, "first_violation_k = {}", trace.len() + 1);
            }
        }
    }

    let empty = CertificateReport {
        label: trace.label.clone(),
        report_tol: REPORT_TOL,
        summary: pdcert_core::certify::ReportSummary {
            all_pass: false,
            worst_margin: f64::NAN,
            first_violation_k: None,
            zero_bound: false,
            skipped: true,
            inexact: trace.is_inexact(),
            diameter: None,
            max_ref_distance: f64::NAN,
            per_iterate: None,
        },
        records: Vec::new(),
    };
    let cert_ref = cert.as_ref().unwrap_or(&empty);
    let rate = cert.as_ref().and_then(|c| rate_slope(c).ok());
    let report = RunReport {
        algorithm: cfg.algorithm.name(),
        problem: cfg.problem.describe(),
        form: prob.form_name(),
        eta: step.eta(),
        eta_auto: step.is_auto(),
        iters: cfg.iters,
        completed: trace.len(),
        seed: cfg.seed,
        error: run_error.map(|e| e.to_string()),
        all_pass,
        checks: &checks,
        reference: reference_info(&oracle),
        rate,
        assumption: assumption.as_ref(),
        certificate: cert_ref,
    };
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    let csv = trace_csv(&trace, cert_ref, p, zref.as_slice());
    if let Some(path) = &cfg.csv {
        write_file(path, &csv)?;
    }
    if let Some(path) = &cfg.report {
        write_file(path, &report_json)?;
    }
    Ok(RunOutcome {
        exit_code: if all_pass { EXIT_PASS } else { EXIT_CHECK_FAILED },
        eta: step.eta(),
        checks,
        csv,
        report_json,
    })
}
