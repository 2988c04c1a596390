//! Runtime certificates: ergodic gap bounds for exact and inexact runs,
//! the per-iterate descent inequality, the linearization assumption,
//! the ADMM primal bound and rate fits.

mod oracle;

pub use oracle::{grid_bruteforce, high_accuracy_run, kkt_solve, saddle_oracle, OracleMethod, SaddleCertificate, ORACLE_TOL};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, is_psd, norm2, seminorm_sq, sub, SymmetricOperator, PSD_TOL};
use crate::problems::{AdmmConstrained, Block, PrimalDualPoint, SaddleProblem};
use crate::solvers::RunTrace;

/// Absolute slack on every bound comparison.
pub const REPORT_TOL: f64 = 1e-9;

/// Floor applied to gaps before taking logarithms.
pub const GAP_FLOOR: f64 = 1e-14;

/// `‖z_ref − z0‖²_P / (2k)`
pub fn ergodic_bound(p: &SymmetricOperator, z_ref: &[f64], z0: &[f64], k: usize) -> Result<f64> {
    check_dim("reference point", p.dim(), z_ref.len())?;
    check_dim("starting point", p.dim(), z0.len())?;
    if k == 0 {
        return Err(Error::InvalidInput("ergodic bound needs k ≥ 1".into()));
    }
    Ok(seminorm_sq(p, &sub(z_ref, z0))? / (2.0 * k as f64))
}

/// [`ergodic_bound`] plus `D·Σ_{i≤k}‖εⁱ‖/k`.
pub fn inexact_bound(
    p: &SymmetricOperator,
    z_ref: &[f64],
    z0: &[f64],
    k: usize,
    d: f64,
    eps_norms: &[f64],
) -> Result<f64> {
    if eps_norms.len() < k {
        return Err(Error::InvalidInput(format!(
            "need {k} error norms, got {}",
            eps_norms.len()
        )));
    }
    let sum: f64 = eps_norms[..k].iter().sum();
    Ok(ergodic_bound(p, z_ref, z0, k)? + d * sum / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Checked,
    /// `L` is infinite at the reference, so the inequality is vacuous.
    SkippedInfiniteValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRecord {
    pub k: usize,
    pub gap_value: f64,
    pub bound_value: f64,
    pub margin: f64,
    pub pass: bool,
    pub status: RecordStatus,
}

/// Per-step descent inequality
/// `L(xᵏ⁺¹, λ) − L(x, λᵏ⁺¹) ≤ ½‖zᵏ − z‖²_P − ½‖zᵏ⁺¹ − z‖²_P (+ ⟨εᵏ⁺¹, zᵏ⁺¹ − z⟩)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerIterateSummary {
    pub all_pass: bool,
    /// Smallest `rhs − lhs` over all steps.
    pub worst_margin: f64,
    pub first_violation_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub all_pass: bool,
    pub worst_margin: f64,
    pub first_violation_k: Option<usize>,
    /// `z_ref = z0`, so every bound is 0.
    pub zero_bound: bool,
    pub skipped: bool,
    pub inexact: bool,
    /// The `D` used for the inexact term.
    pub diameter: Option<f64>,
    /// `max_k ‖zᵏ − z_ref‖₂`, to validate a user-supplied `D`.
    pub max_ref_distance: f64,
    pub per_iterate: Option<PerIterateSummary>,
}

/// Gap against bound for every `k` of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub label: String,
    pub report_tol: f64,
    pub summary: ReportSummary,
    pub records: Vec<KRecord>,
}

/// Names the first block at which `L(z)` is not a real number.
fn reference_status(prob: &SaddleProblem, z: &PrimalDualPoint) -> Result<bool> {
    match prob.lagrangian(z) {
        Ok(v) if v.is_finite() => Ok(true),
        Ok(_) => Ok(false),
        Err(Error::UndefinedLagrangian(_)) => {
            let blocks: Vec<&str> = z
                .layout()
                .blocks()
                .iter()
                .filter(|(b, _)| prob.block_value(z, *b).is_some_and(|v| v.is_infinite()))
                .map(|(b, _)| b.name())
                .collect();
            Err(Error::UndefinedLagrangian(format!(
                "reference has infinite oracle values in block(s) {}",
                blocks.join(", ")
            )))
        }
        Err(e) => Err(e),
    }
}

/// Certifies the ergodic bound (exact, or inexact when the trace carries
/// errors) and the per-iterate inequality against `z_ref`.
///
/// `d` is the diameter of the inexact term; when absent the maximum
/// observed distance to `z_ref` is used.
pub fn certify_run(
    trace: &RunTrace,
    prob: &SaddleProblem,
    p: &SymmetricOperator,
    z_ref: &PrimalDualPoint,
    d: Option<f64>,
) -> Result<CertificateReport> {
    certify_run_with_tol(trace, prob, p, z_ref, d, REPORT_TOL)
}

pub fn certify_run_with_tol(
    trace: &RunTrace,
    prob: &SaddleProblem,
    p: &SymmetricOperator,
    z_ref: &PrimalDualPoint,
    d: Option<f64>,
    tol: f64,
) -> Result<CertificateReport> {
    if trace.is_empty() {
        return Err(Error::InvalidInput("cannot certify an empty trace".into()));
    }
    check_dim("metric", z_ref.layout().dim(), p.dim())?;
    if *z_ref.layout() != prob.layout() {
        return Err(Error::InvalidInput("reference layout does not match the problem".into()));
    }
    let finite_ref = reference_status(prob, z_ref)?;
    let z0 = trace.z0().as_slice();
    let zr = z_ref.as_slice();
    let max_dist = trace.max_distance(z_ref);
    let diameter = trace.is_inexact().then(|| d.unwrap_or(max_dist));
    let zero_bound = seminorm_sq(p, &sub(zr, z0))? == 0.0;

    let mut records = Vec::with_capacity(trace.len());
    let (mut all_pass, mut worst, mut first) = (true, f64::INFINITY, None);
    for k in 1..=trace.len() {
        let bound = match diameter {
            Some(dv) => inexact_bound(p, zr, z0, k, dv, &trace.eps_norms)?,
            None => ergodic_bound(p, zr, z0, k)?,
        };
        let gap = if finite_ref { prob.gap(trace.average(k), z_ref).ok() } else { None };
        let rec = match gap {
            Some(g) if g.is_finite() => {
                let pass = g <= bound + tol;
                let margin = bound - g;
                worst = worst.min(margin);
                if !pass && first.is_none() {
                    first = Some(k);
                }
                all_pass &= pass;
                KRecord { k, gap_value: g, bound_value: bound, margin, pass, status: RecordStatus::Checked }
            }
            _ => KRecord {
                k,
                gap_value: f64::NAN,
                bound_value: bound,
                margin: f64::NAN,
                pass: true,
                status: RecordStatus::SkippedInfiniteValue,
            },
        };
        records.push(rec);
    }
    let per_iterate = if finite_ref { Some(per_iterate(trace, prob, p, z_ref, tol)?) } else { None };
    if let Some(pi) = &per_iterate {
        all_pass &= pi.all_pass;
    }
    Ok(CertificateReport {
        label: trace.label.clone(),
        report_tol: tol,
        summary: ReportSummary {
            all_pass,
            worst_margin: worst,
            first_violation_k: first,
            zero_bound,
            skipped: !finite_ref,
            inexact: trace.is_inexact(),
            diameter,
            max_ref_distance: max_dist,
            per_iterate,
        },
        records,
    })
}

fn per_iterate(
    trace: &RunTrace,
    prob: &SaddleProblem,
    p: &SymmetricOperator,
    z_ref: &PrimalDualPoint,
    tol: f64,
) -> Result<PerIterateSummary> {
    let zr = z_ref.as_slice();
    let (mut all_pass, mut worst, mut first) = (true, f64::INFINITY, None);
    let mut d_prev = seminorm_sq(p, &sub(trace.z0().as_slice(), zr))?;
    for k in 0..trace.len() {
        let zn = &trace.iterates[k + 1];
        let d_next = seminorm_sq(p, &sub(zn.as_slice(), zr))?;
        let mut rhs = 0.5 * d_prev - 0.5 * d_next;
        if let Some(errs) = &trace.injected_errors {
            rhs += dot(&errs[k], &sub(zn.as_slice(), zr));
        }
        let lhs = prob.gap(zn, z_ref)?;
        let margin = rhs - lhs;
        worst = worst.min(margin);
        if margin < -tol {
            all_pass = false;
            first.get_or_insert(k + 1);
        }
        d_prev = d_next;
    }
    Ok(PerIterateSummary {
        all_pass,
        worst_margin: worst,
        first_violation_k: first,
    })
}

/// Outcome of the two-part linearization check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// (i) at every step and reference.
    pub inequality_pass: bool,
    /// Largest `lhs − rhs` seen in (i).
    pub worst_violation: f64,
    pub first_violation_k: Option<usize>,
    /// (ii) `P − E ⪰ 0`.
    pub psd_pass: bool,
    pub min_eigenvalue: f64,
    pub pass: bool,
}

/// Checks `L(xᵏ⁺¹, λ) − L(x, λᵏ⁺¹) ≤ ⟨Fᵏ⁺¹, zᵏ⁺¹ − z⟩ + ½‖zᵏ − zᵏ⁺¹‖²_E`
/// for each step and reference, and `P ⪰ E`.
pub fn check_assumption_gap(
    trace: &RunTrace,
    prob: &SaddleProblem,
    p: &SymmetricOperator,
    e: &SymmetricOperator,
    sample_refs: &[PrimalDualPoint],
) -> Result<AssumptionReport> {
    check_dim("error matrix", p.dim(), e.dim())?;
    if trace.fields.len() != trace.len() {
        return Err(Error::InvalidInput("trace lacks recorded surrogate fields".into()));
    }
    let (mut worst, mut first) = (f64::NEG_INFINITY, None);
    for k in 0..trace.len() {
        let (zk, zn) = (&trace.iterates[k], &trace.iterates[k + 1]);
        let step_e = 0.5 * seminorm_sq(e, &sub(zk.as_slice(), zn.as_slice()))?;
        for z in sample_refs {
            let lhs = prob.gap(zn, z)?;
            let rhs = dot(&trace.fields[k], &sub(zn.as_slice(), z.as_slice())) + step_e;
            let v = lhs - rhs;
            worst = worst.max(v);
            if v > REPORT_TOL && first.is_none() {
                first = Some(k + 1);
            }
        }
    }
    let pe = p.sub(e);
    let min_eigenvalue = pe.min_eigenvalue();
    let psd_pass = is_psd(&pe, PSD_TOL);
    let inequality_pass = first.is_none();
    Ok(AssumptionReport {
        inequality_pass,
        worst_violation: worst,
        first_violation_k: first,
        psd_pass,
        min_eigenvalue,
        pass: inequality_pass && psd_pass,
    })
}

/// One ADMM primal-measure record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalRecord {
    pub k: usize,
    pub measure: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `f(x̄ᵏ) + g(ȳᵏ) − λᵀ(Ax̄ᵏ + Bȳᵏ − b) − F* ≤ ‖(y*, x*, λ) − z⁰‖²_P/(2k)`
/// for every `k` of an ADMM trace.
pub fn admm_primal_bound(
    trace: &RunTrace,
    prob: &AdmmConstrained,
    zstar: &PrimalDualPoint,
    fstar: f64,
    lambda: &[f64],
) -> Result<Vec<PrimalRecord>> {
    let mut zref = zstar.clone();
    check_dim("λ", zref.lambda().len(), lambda.len())?;
    zref.block_mut(Block::Lambda).copy_from_slice(lambda);
    let z0 = trace.z0().as_slice();
    (1..=trace.len())
        .map(|k| {
            let avg = trace.average(k);
            let measure = prob.primal_measure(avg.x(), avg.y(), lambda, fstar)?;
            let bound = ergodic_bound(&trace.metric, zref.as_slice(), z0, k)?;
            Ok(PrimalRecord { k, measure, bound, pass: measure <= bound + REPORT_TOL })
        })
        .collect()
}

/// Log-log slopes of a report's bound and gap series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Slope of `log bound` against `log k` (`None` when all bounds are 0).
    pub bound_slope: Option<f64>,
    /// Slope of the upper envelope `max_{j≥k} gap_j`, floored at
    /// [`GAP_FLOOR`]; `None` when converged.
    pub gap_slope: Option<f64>,
    /// Every gap is at or below the floor.
    pub converged: bool,
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn rate_slope(report: &CertificateReport) -> Result<RateFit> {
    let recs: Vec<&KRecord> = report
        .records
        .iter()
        .filter(|r| r.status == RecordStatus::Checked)
        .collect();
    if recs.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs at least 10 checked records, got {}",
            recs.len()
        )));
    }
    let bounds: Vec<(f64, f64)> = recs
        .iter()
        .filter(|r| r.bound_value > 0.0)
        .map(|r| ((r.k as f64).ln(), r.bound_value.ln()))
        .collect();
    let bound_slope = (bounds.len() >= 2).then(|| ls_slope(&bounds));

    let converged = recs.iter().all(|r| r.gap_value <= GAP_FLOOR);
    let gap_slope = (!converged).then(|| {
        let mut env = vec![0.0; recs.len()];
        let mut run = f64::NEG_INFINITY;
        for (i, r) in recs.iter().enumerate().rev() {
            run = run.max(r.gap_value);
            env[i] = run;
        }
        let pts: Vec<(f64, f64)> = recs
            .iter()
            .zip(&env)
            .map(|(r, e)| ((r.k as f64).ln(), e.max(GAP_FLOOR).ln()))
            .collect();
        ls_slope(&pts)
    });
    Ok(RateFit {
        bound_slope,
        gap_slope,
        converged,
    })
}

/// `zstar` followed by `count` seeded perturbations of norm at most 1,
/// each projected onto the problem's domain so that `L` stays finite.
pub fn sample_references(prob: &SaddleProblem, zstar: &PrimalDualPoint, count: usize, seed: u64) -> Vec<PrimalDualPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = zstar.layout().dim();
    let mut out = vec![zstar.clone()];
    for _ in 0..count {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = norm2(&v);
        let r: f64 = rng.random_range(0.0..=1.0);
        if n > 0.0 {
            for x in v.iter_mut() {
                *x *= r / n;
            }
        }
        let mut z = zstar.clone();
        crate::linalg::axpy(1.0, &v, z.as_mut_slice());
        out.push(prob.project_to_domain(&z));
    }
    out
}

#[cfg(test)]
mod tests;
