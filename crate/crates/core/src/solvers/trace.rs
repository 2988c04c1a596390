use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Algorithm, Solver, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{axpy, norm2, sub, SymmetricOperator};
use crate::pnorm::StepSize;
use crate::problems::{PrimalDualPoint, SaddleProblem};

/// Explicit step size or the algorithm's `auto` rule times `safety`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaChoice {
    Explicit(f64),
    Auto { safety: f64 },
}

impl EtaChoice {
    pub const AUTO: EtaChoice = EtaChoice::Auto { safety: 1.0 };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub solver: SolverOptions,
    /// Record the generic-inclusion residual of every step.
    pub record_residuals: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            record_residuals: true,
        }
    }
}

/// `‖εᵏ‖₂ = scale·k^(−exponent)` along a seeded Gaussian direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSchedule {
    pub scale: f64,
    pub exponent: f64,
    pub seed: u64,
}

impl ErrorSchedule {
    pub fn new(scale: f64, exponent: f64, seed: u64) -> Result<Self> {
        if !(scale >= 0.0 && scale.is_finite() && exponent.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "error schedule needs finite scale ≥ 0 and finite exponent, got ({scale}, {exponent})"
            )));
        }
        Ok(Self { scale, exponent, seed })
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    /// Requested norm of `εᵏ`, `k ≥ 1`.
    pub fn norm_at(&self, k: usize) -> f64 {
        self.scale * (k as f64).powf(-self.exponent)
    }

    fn sample(&self, rng: &mut ChaCha8Rng, k: usize, dim: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm2(&v);
        let target = self.norm_at(k);
        if n > 0.0 {
            for x in v.iter_mut() {
                *x *= target / n;
            }
        }
        v
    }
}

/// Everything a run produced.
///
/// `iterates[0]` is `z⁰`; `averages[k − 1]` is `z̄ᵏ = (1/k)Σ_{i=1..k} zⁱ`;
/// `residuals[k − 1]` and `fields[k − 1]` belong to the step producing `zᵏ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub label: String,
    pub algorithm: Option<Algorithm>,
    pub eta: StepSize,
    pub metric: SymmetricOperator,
    pub error_matrix: Option<SymmetricOperator>,
    pub iterates: Vec<PrimalDualPoint>,
    pub averages: Vec<PrimalDualPoint>,
    /// Empty when residuals were not requested.
    pub residuals: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
    /// Realized perturbations `εᵏ` of an inexact run.
    pub injected_errors: Option<Vec<Vec<f64>>>,
    pub eps_norms: Vec<f64>,
}

impl RunTrace {
    fn start(solver: &Solver<'_>, z0: &PrimalDualPoint, inexact: bool) -> Self {
        Self {
            label: solver.label().to_string(),
            algorithm: solver.algorithm(),
            eta: solver.eta(),
            metric: solver.metric().clone(),
            error_matrix: solver.error_matrix().cloned(),
            iterates: vec![z0.clone()],
            averages: Vec::new(),
            residuals: Vec::new(),
            fields: Vec::new(),
            injected_errors: inexact.then(Vec::new),
            eps_norms: Vec::new(),
        }
    }

    /// Number of steps taken.
    pub fn len(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn z0(&self) -> &PrimalDualPoint {
        &self.iterates[0]
    }

    pub fn last(&self) -> &PrimalDualPoint {
        self.iterates.last().expect("trace holds z⁰")
    }

    /// `z̄ᵏ`, `1 ≤ k ≤ len`.
    pub fn average(&self, k: usize) -> &PrimalDualPoint {
        &self.averages[k - 1]
    }

    pub fn is_inexact(&self) -> bool {
        self.injected_errors.is_some()
    }

    /// `Σ_{i=1..k} ‖εⁱ‖₂` for every `k`.
    pub fn eps_partial_sums(&self) -> Vec<f64> {
        self.eps_norms
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect()
    }

    /// `max_k ‖zᵏ − z‖₂` over all iterates including `z⁰`.
    pub fn max_distance(&self, z: &PrimalDualPoint) -> f64 {
        self.iterates
            .iter()
            .map(|zk| norm2(&sub(zk.as_slice(), z.as_slice())))
            .fold(0.0, f64::max)
    }

    fn push(&mut self, next: PrimalDualPoint) {
        let k = self.iterates.len() as f64;
        let avg = match self.averages.last() {
            None => next.clone(),
            Some(prev) => {
                let mut a = prev.clone();
                let d = sub(next.as_slice(), prev.as_slice());
                axpy(1.0 / k, &d, a.as_mut_slice());
                a
            }
        };
        self.averages.push(avg);
        self.iterates.push(next);
    }
}

/// A run that stopped on a step error; `trace` holds the steps before it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub error: Error,
    pub trace: RunTrace,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} completed steps)", self.error, self.trace.len())
    }
}

impl std::error::Error for RunFailure {}

/// Runs a prepared solver. `schedule = None` is the exact method.
pub fn run_solver(
    solver: &Solver<'_>,
    z0: &PrimalDualPoint,
    k_max: usize,
    opts: &RunOptions,
    schedule: Option<&ErrorSchedule>,
) -> std::result::Result<RunTrace, RunFailure> {
    let mut trace = RunTrace::start(solver, z0, schedule.is_some());
    if let Err(error) = check_start(solver, z0, schedule) {
        return Err(RunFailure { error, trace });
    }
    let mut rng = schedule.map(|s| ChaCha8Rng::seed_from_u64(s.seed));
    let dim = z0.layout().dim();
    for k in 1..=k_max {
        let z = trace.last().clone();
        let requested = match (schedule, rng.as_mut()) {
            (Some(s), Some(r)) => Some(s.sample(r, k, dim)),
            _ => None,
        };
        let out = match solver.step(&z, requested.as_deref()) {
            Ok(o) => o,
            Err(e) => {
                return Err(RunFailure {
                    error: Error::Step { k, source: Box::new(e) },
                    trace,
                })
            }
        };
        // Realized ε: what the step actually satisfies, not what was asked.
        let realized = requested.map(|_| sub(&out.field, &solver.metric_increment(z.as_slice(), &out.next)));
        if opts.record_residuals {
            match solver.inclusion_residual(z.as_slice(), &out, realized.as_deref()) {
                Ok(r) => trace.residuals.push(r),
                Err(e) => {
                    return Err(RunFailure {
                        error: Error::Step { k, source: Box::new(e) },
                        trace,
                    })
                }
            }
        }
        if let Some(eps) = realized {
            trace.eps_norms.push(norm2(&eps));
            trace.injected_errors.as_mut().expect("inexact trace").push(eps);
        }
        let next = z.with_data(out.next).expect("step keeps the layout");
        trace.fields.push(out.field);
        trace.push(next);
    }
    Ok(trace)
}

fn check_start(solver: &Solver<'_>, z0: &PrimalDualPoint, schedule: Option<&ErrorSchedule>) -> Result<()> {
    if *z0.layout() != solver.problem().layout() {
        return Err(Error::InvalidInput("z0 layout does not match the problem".into()));
    }
    if z0.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("z0 has non-finite entries".into()));
    }
    if schedule.is_some() && !solver.is_exact() {
        return Err(Error::Unsupported {
            algorithm: "inexact",
            reason: "perturbations apply to exact methods only".into(),
        });
    }
    Ok(())
}

fn prepare<'p>(
    algorithm: Algorithm,
    prob: &'p SaddleProblem,
    eta: EtaChoice,
    opts: &RunOptions,
) -> Result<Solver<'p>> {
    let step = super::resolve_eta(algorithm, prob, eta)?;
    Solver::new(algorithm, prob, step, opts.solver)
}

fn empty_failure(algorithm: Algorithm, error: Error, z0: &PrimalDualPoint) -> RunFailure {
    RunFailure {
        error,
        trace: RunTrace {
            label: algorithm.name().to_string(),
            algorithm: Some(algorithm),
            eta: StepSize::explicit(1.0).expect("positive"),
            metric: SymmetricOperator::zeros(0),
            error_matrix: None,
            iterates: vec![z0.clone()],
            averages: Vec::new(),
            residuals: Vec::new(),
            fields: Vec::new(),
            injected_errors: None,
            eps_norms: Vec::new(),
        },
    }
}

/// `k_max` exact steps of `algorithm` from `z0`.
pub fn run(
    algorithm: Algorithm,
    prob: &SaddleProblem,
    z0: &PrimalDualPoint,
    eta: EtaChoice,
    k_max: usize,
    opts: &RunOptions,
) -> std::result::Result<RunTrace, RunFailure> {
    let solver = prepare(algorithm, prob, eta, opts).map_err(|e| empty_failure(algorithm, e, z0))?;
    run_solver(&solver, z0, k_max, opts, None)
}

/// Like [`run`] with each step perturbed per `schedule`. A zero schedule
/// reproduces [`run`] exactly.
pub fn run_inexact(
    algorithm: Algorithm,
    prob: &SaddleProblem,
    z0: &PrimalDualPoint,
    eta: EtaChoice,
    k_max: usize,
    schedule: &ErrorSchedule,
    opts: &RunOptions,
) -> std::result::Result<RunTrace, RunFailure> {
    let solver = prepare(algorithm, prob, eta, opts).map_err(|e| empty_failure(algorithm, e, z0))?;
    let schedule = (!schedule.is_zero()).then_some(schedule);
    run_solver(&solver, z0, k_max, opts, schedule)
}
