//! PPM, PDHG, ADMM, linearized PDHG and gradient descent as prepared
//! one-step kernels, plus the run drivers that record traces.
//!
//! Every kernel reports, next to the new iterate, the element of the
//! subdifferential its step realized (the prox-derived subgradient for
//! exact methods, the surrogate `Fᵏ⁺¹` for linearized ones). Steps accept
//! an optional perturbation `ε` that shifts the linear term of every
//! subproblem, so that `P(zᵏ − zᵏ⁺¹) + ε ∈ F(zᵏ⁺¹)`.

mod trace;

pub use trace::{
    run, run_inexact, run_solver, ErrorSchedule, EtaChoice, RunFailure, RunOptions, RunTrace,
};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::functions::{ConvexFunction, ProxOperator};
use crate::linalg::{axpy, norm_inf, sub, DenseMatrix, LuFactor, SymmetricOperator};
use crate::pnorm::{admm_matrix, auto_eta_with_safety, pdhg_matrix, ppm_matrix, EtaRule, StepSize};
use crate::problems::{AdmmConstrained, AffineField, Block, PdhgComposite, PrimalDualPoint, SaddleProblem};

/// Inner iteration cap for the fixed-point PPM realization.
pub const MAX_INNER_ITERS: usize = 100_000;

/// Default inner tolerance for the fixed-point PPM realization.
pub const INNER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ppm,
    Pdhg,
    Admm,
    LinearizedPdhg,
    GradientDescent,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Ppm,
        Algorithm::Pdhg,
        Algorithm::Admm,
        Algorithm::LinearizedPdhg,
        Algorithm::GradientDescent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ppm => "ppm",
            Algorithm::Pdhg => "pdhg",
            Algorithm::Admm => "admm",
            Algorithm::LinearizedPdhg => "linearized_pdhg",
            Algorithm::GradientDescent => "gradient_descent",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Algorithm::Ppm => "proximal point, implicit joint step with P = (1/η)I",
            Algorithm::Pdhg => "primal-dual hybrid gradient with extrapolated dual step; P = [[I/η, Aᵀ],[A, I/η]]",
            Algorithm::Admm => "ADMM in the order y → λ → x; admm layout (y,x,λ); P = [[0,0,0],[0,ηAᵀA,−Aᵀ],[0,−A,I/η]]",
            Algorithm::LinearizedPdhg => "PDHG with gradient steps on smooth f and g*; E = L·I",
            Algorithm::GradientDescent => "gradient descent on a smooth minimization (empty dual block); P = (1/η)I",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm {s:?}")))
    }

    /// Exact methods satisfy the generic inclusion with `F(zᵏ⁺¹)`.
    pub fn is_exact(self) -> bool {
        matches!(self, Algorithm::Ppm | Algorithm::Pdhg | Algorithm::Admm)
    }

    /// Rule used by `eta = auto`, if the algorithm has one.
    pub fn eta_rule(self) -> Option<EtaRule> {
        match self {
            Algorithm::Pdhg => Some(EtaRule::Pdhg),
            Algorithm::LinearizedPdhg => Some(EtaRule::LinearizedPdhg),
            _ => None,
        }
    }
}

/// Which `P` an implicit (PPM-style) step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Ppm,
    Pdhg,
    Admm,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ppm" => Ok(Metric::Ppm),
            "pdhg" => Ok(Metric::Pdhg),
            "admm" => Ok(Metric::Admm),
            other => Err(Error::InvalidInput(format!("unknown metric {other:?}"))),
        }
    }
}

/// How PPM solves its implicit step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolve {
    /// Direct linear solve when `F` is affine, fixed-point otherwise.
    #[default]
    Auto,
    /// Damped fixed-point iteration on `P(z' − z) + F(z') = 0`.
    FixedPoint,
}

/// One step's output.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub next: Vec<f64>,
    /// Realized element of `F(zᵏ⁺¹)` (exact) or the surrogate `Fᵏ⁺¹`.
    pub field: Vec<f64>,
}

/// The PDHG view of a problem: composites as-is, bilinear quadratics
/// rewritten with `f = ½xᵀQₓx + cᵀx`, `g* = ½λᵀQ_λλ + bᵀλ` and `−A`.
fn pdhg_view(prob: &SaddleProblem) -> Result<PdhgComposite> {
    match prob {
        SaddleProblem::PdhgComposite(p) => Ok(p.clone()),
        SaddleProblem::BilinearQuadratic(p) => p.to_pdhg(),
        SaddleProblem::AdmmConstrained(_) => Err(Error::Unsupported {
            algorithm: "pdhg",
            reason: "the linearly constrained form has no composite view".into(),
        }),
    }
}

/// Gradient-based `F` for problems whose oracles are all smooth.
#[derive(Debug, Clone)]
struct SmoothField {
    view: PdhgComposite,
    lipschitz: f64,
}

impl SmoothField {
    fn new(prob: &SaddleProblem) -> Option<Self> {
        let view = pdhg_view(prob).ok()?;
        let lf = view.f.smoothness()?;
        let lg = view.gstar.smoothness()?;
        let na = if view.a.rows() == 0 || view.a.cols() == 0 {
            0.0
        } else {
            crate::linalg::spectral_norm(&view.a, crate::linalg::SPECTRAL_TOL).ok()?
        };
        Some(Self {
            lipschitz: lf.max(lg) + na,
            view,
        })
    }

    fn eval(&self, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.view.a.cols();
        let (x, lam) = z.split_at(n);
        let mut fx = self.view.f.gradient(x)?;
        axpy(-1.0, &self.view.a.matvec_t(lam), &mut fx);
        let mut fl = self.view.gstar.gradient(lam)?;
        axpy(1.0, &self.view.a.matvec(x), &mut fl);
        fx.extend(fl);
        Ok(fx)
    }
}

/// Solver for one ADMM subproblem
/// `argmin_u h(u) − ⟨s, u⟩ + (η/2)‖Ku − c‖²`.
#[derive(Debug, Clone)]
enum SubSolver {
    /// `h` quadratic-family: `(Q + ηKᵀK)u = s + ηKᵀc − q`.
    Linear { lu: LuFactor, q_lin: Vec<f64> },
    /// `KᵀK = βI`: `u = prox_{h/(ηβ)}((s + ηKᵀc)/(ηβ))`.
    Prox { beta: f64, prox: ProxOperator },
}

impl SubSolver {
    fn new(h: &ConvexFunction, k: &DenseMatrix, eta: f64, which: &str) -> Result<Self> {
        let ktk = k.gram();
        if let Some((q, q_lin)) = h.as_quadratic() {
            let sys = q.add(&ktk.scaled(eta));
            if let Ok(lu) = LuFactor::new(sys.as_dense()) {
                return Ok(SubSolver::Linear { lu, q_lin });
            }
        }
        let beta = if ktk.dim() > 0 { ktk.get(0, 0) } else { 0.0 };
        let scaled_identity = beta > 0.0
            && (0..ktk.dim()).all(|i| {
                (0..ktk.dim()).all(|j| {
                    let target = if i == j { beta } else { 0.0 };
                    (ktk.get(i, j) - target).abs() <= 1e-12 * beta
                })
            });
        if scaled_identity {
            return Ok(SubSolver::Prox {
                beta,
                prox: h.prox_operator(1.0 / (eta * beta))?,
            });
        }
        Err(Error::Unsupported {
            algorithm: "admm",
            reason: format!(
                "{which}-subproblem has no closed form: needs a quadratic-family oracle with \
                 nonsingular Q + ηKᵀK, or KᵀK = βI"
            ),
        })
    }

    /// Returns the minimizer and the realized subgradient of `h` there.
    fn solve(&self, h: &ConvexFunction, k: &DenseMatrix, eta: f64, s: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rhs = k.matvec_t(c);
        for v in rhs.iter_mut() {
            *v *= eta;
        }
        axpy(1.0, s, &mut rhs);
        match self {
            SubSolver::Linear { lu, q_lin } => {
                axpy(-1.0, q_lin, &mut rhs);
                let u = lu.solve(&rhs);
                let grad = h.gradient(&u).expect("quadratic-family gradient");
                (u, grad)
            }
            SubSolver::Prox { beta, prox } => {
                let v: Vec<f64> = rhs.iter().map(|r| r / (eta * beta)).collect();
                let u = prox.apply(&v);
                let sg = prox.realized_subgradient(&v, &u);
                (u, sg)
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    /// `(P + M)z⁺ = Pz − r + ε`
    Implicit { lu: LuFactor, field: AffineField },
    FixedPoint { field: SmoothField, tau: f64, inner_tol: f64 },
    Pdhg { view: PdhgComposite, prox_f: ProxOperator, prox_g: ProxOperator },
    Admm { y: SubSolver, x: SubSolver },
    Linearized { view: PdhgComposite },
    Gradient { f: ConvexFunction },
}

/// Options fixed at solver construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub inner: InnerSolve,
    pub inner_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            inner: InnerSolve::Auto,
            inner_tol: INNER_TOL,
        }
    }
}

/// A method prepared for one problem and step size.
#[derive(Debug, Clone)]
pub struct Solver<'p> {
    problem: &'p SaddleProblem,
    label: String,
    algorithm: Option<Algorithm>,
    eta: StepSize,
    metric: SymmetricOperator,
    error_matrix: Option<SymmetricOperator>,
    kernel: Kernel,
}

/// `η` from an explicit value or from the algorithm's `auto` rule.
pub fn resolve_eta(algorithm: Algorithm, prob: &SaddleProblem, choice: EtaChoice) -> Result<StepSize> {
    match choice {
        EtaChoice::Explicit(v) => StepSize::explicit(v),
        EtaChoice::Auto { safety } => {
            let rule = algorithm.eta_rule().ok_or_else(|| {
                Error::InvalidInput(format!("eta auto is only defined for pdhg and linearized_pdhg, not {}", algorithm.name()))
            })?;
            let view = pdhg_view(prob)?;
            let l = match rule {
                EtaRule::Pdhg => 0.0,
                EtaRule::LinearizedPdhg => linearized_smoothness(&view)?,
            };
            auto_eta_with_safety(rule, &view.a, l, safety)
        }
    }
}

fn linearized_smoothness(view: &PdhgComposite) -> Result<f64> {
    match (view.f.smoothness(), view.gstar.smoothness()) {
        (Some(a), Some(b)) => Ok(a.max(b)),
        _ => Err(Error::Unsupported {
            algorithm: "linearized_pdhg",
            reason: "f and g* need gradient oracles".into(),
        }),
    }
}

fn implicit_kernel(prob: &SaddleProblem, p: &SymmetricOperator, opts: SolverOptions, eta: f64) -> Result<Kernel> {
    let unsupported = |reason: &str| Error::Unsupported {
        algorithm: "ppm",
        reason: reason.into(),
    };
    if opts.inner == InnerSolve::Auto {
        if let Some(field) = prob.affine_field() {
            let sys = p.as_dense().clone();
            let mut sys_m = sys;
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    sys_m.set(i, j, sys_m.get(i, j) + field.m.get(i, j));
                }
            }
            let lu = LuFactor::new(&sys_m).map_err(|_| unsupported("implicit system P + M is singular"))?;
            return Ok(Kernel::Implicit { lu, field });
        }
    }
    let field = SmoothField::new(prob).ok_or_else(|| unsupported("needs affine F or smooth f and g*"))?;
    let eig = p.eigenvalues();
    let mu = eig.first().copied().unwrap_or(0.0);
    if mu <= 0.0 {
        return Err(unsupported("fixed-point inner solve needs a positive definite P"));
    }
    let big = eig.last().copied().unwrap_or(1.0 / eta) + field.lipschitz;
    Ok(Kernel::FixedPoint {
        field,
        tau: mu / (big * big),
        inner_tol: opts.inner_tol,
    })
}

impl<'p> Solver<'p> {
    pub fn new(algorithm: Algorithm, problem: &'p SaddleProblem, eta: StepSize, opts: SolverOptions) -> Result<Self> {
        let dim = problem.layout().dim();
        let e = eta.eta();
        let (metric, error_matrix, kernel) = match algorithm {
            Algorithm::Ppm => {
                if matches!(problem, SaddleProblem::AdmmConstrained(_)) {
                    return Err(Error::Unsupported {
                        algorithm: "ppm",
                        reason: "use the quadratic or pdhg form".into(),
                    });
                }
                let p = ppm_matrix(eta, dim);
                let k = implicit_kernel(problem, &p, opts, e)?;
                (p, None, k)
            }
            Algorithm::Pdhg => {
                let view = pdhg_view(problem)?;
                let p = pdhg_matrix(eta, &view.a);
                let prox_f = view.f.prox_operator(e)?;
                let prox_g = view.gstar.prox_operator(e)?;
                (p, None, Kernel::Pdhg { view, prox_f, prox_g })
            }
            Algorithm::Admm => {
                let SaddleProblem::AdmmConstrained(a) = problem else {
                    return Err(Error::Unsupported {
                        algorithm: "admm",
                        reason: "needs the linearly constrained form".into(),
                    });
                };
                let y = SubSolver::new(&a.g, &a.bmat, e, "y")?;
                let x = SubSolver::new(&a.f, &a.a, e, "x")?;
                (admm_matrix(eta, &a.a, a.bmat.cols()), None, Kernel::Admm { y, x })
            }
            Algorithm::LinearizedPdhg => {
                let view = pdhg_view(problem)?;
                let l = linearized_smoothness(&view)?;
                let p = pdhg_matrix(eta, &view.a);
                let em = SymmetricOperator::scaled_identity(dim, l);
                (p, Some(em), Kernel::Linearized { view })
            }
            Algorithm::GradientDescent => {
                let view = pdhg_view(problem)?;
                if view.a.rows() != 0 {
                    return Err(Error::Unsupported {
                        algorithm: "gradient_descent",
                        reason: "needs a pure minimization (empty dual block)".into(),
                    });
                }
                let l = view.f.smoothness().ok_or_else(|| Error::Unsupported {
                    algorithm: "gradient_descent",
                    reason: "f needs a gradient oracle".into(),
                })?;
                let p = ppm_matrix(eta, dim);
                let em = SymmetricOperator::scaled_identity(dim, l);
                (p, Some(em), Kernel::Gradient { f: view.f })
            }
        };
        Ok(Self {
            problem,
            label: algorithm.name().to_string(),
            algorithm: Some(algorithm),
            eta,
            metric,
            error_matrix,
            kernel,
        })
    }

    /// PPM-style implicit step `P(z − z⁺) ∈ F(z⁺)` with the named metric.
    pub fn implicit(metric: Metric, problem: &'p SaddleProblem, eta: StepSize, opts: SolverOptions) -> Result<Self> {
        let p = match metric {
            Metric::Ppm => ppm_matrix(eta, problem.layout().dim()),
            Metric::Pdhg => pdhg_matrix(eta, &pdhg_view(problem)?.a),
            Metric::Admm => match problem {
                SaddleProblem::AdmmConstrained(a) => admm_matrix(eta, &a.a, a.bmat.cols()),
                _ => {
                    return Err(Error::Unsupported {
                        algorithm: "ppm",
                        reason: "admm metric needs the linearly constrained form".into(),
                    })
                }
            },
        };
        Self::with_metric(p, problem, eta, opts)
    }

    /// Implicit step with an arbitrary symmetric `P`.
    pub fn with_metric(p: SymmetricOperator, problem: &'p SaddleProblem, eta: StepSize, opts: SolverOptions) -> Result<Self> {
        check_dim("metric dimension", problem.layout().dim(), p.dim())?;
        let kernel = implicit_kernel(problem, &p, opts, eta.eta())?;
        Ok(Self {
            problem,
            label: "ppm_with_metric".into(),
            algorithm: None,
            eta,
            metric: p,
            error_matrix: None,
            kernel,
        })
    }

    pub fn problem(&self) -> &'p SaddleProblem {
        self.problem
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn algorithm(&self) -> Option<Algorithm> {
        self.algorithm
    }

    pub fn eta(&self) -> StepSize {
        self.eta
    }

    /// The `P` of the generic update.
    pub fn metric(&self) -> &SymmetricOperator {
        &self.metric
    }

    /// `E` of the linearized analysis (`None` for exact methods).
    pub fn error_matrix(&self) -> Option<&SymmetricOperator> {
        self.error_matrix.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.error_matrix.is_none()
    }

    /// One step from `z`, optionally perturbed by `eps`.
    pub fn step(&self, z: &PrimalDualPoint, eps: Option<&[f64]>) -> Result<StepOutput> {
        let layout = self.problem.layout();
        if *z.layout() != layout {
            return Err(Error::InvalidInput("iterate layout does not match the problem".into()));
        }
        if let Some(e) = eps {
            check_dim("perturbation", layout.dim(), e.len())?;
            if !self.is_exact() {
                return Err(Error::Unsupported {
                    algorithm: "inexact",
                    reason: "perturbations apply to exact methods only".into(),
                });
            }
        }
        let eta = self.eta.eta();
        let zs = z.as_slice();
        match &self.kernel {
            Kernel::Implicit { lu, field } => {
                let mut rhs = self.metric.apply(zs);
                axpy(-1.0, &field.r, &mut rhs);
                if let Some(e) = eps {
                    axpy(1.0, e, &mut rhs);
                }
                let next = lu.solve(&rhs);
                let w = field.eval(&next);
                Ok(StepOutput { next, field: w })
            }
            Kernel::FixedPoint { field, tau, inner_tol } => {
                let mut zp = zs.to_vec();
                let mut best = (f64::INFINITY, zp.clone());
                for _ in 0..MAX_INNER_ITERS {
                    let fz = field.eval(&zp)?;
                    let mut g = self.metric.apply(&sub(&zp, zs));
                    axpy(1.0, &fz, &mut g);
                    if let Some(e) = eps {
                        axpy(-1.0, e, &mut g);
                    }
                    let res = norm_inf(&g);
                    if res < best.0 {
                        best = (res, zp.clone());
                    }
                    if res <= *inner_tol {
                        return Ok(StepOutput { next: zp, field: fz });
                    }
                    axpy(-tau, &g, &mut zp);
                }
                Err(Error::InnerSolve {
                    iterations: MAX_INNER_ITERS,
                    residual: best.0,
                    best: best.1,
                })
            }
            Kernel::Pdhg { view, prox_f, prox_g } => {
                let n = view.a.cols();
                let (x, lam) = zs.split_at(n);
                let (ex, el) = match eps {
                    Some(e) => {
                        let (a, b) = e.split_at(n);
                        (Some(a), Some(b))
                    }
                    None => (None, None),
                };
                // x⁺ = prox_{ηf}(x + ηAᵀλ (+ ηε_x))
                let mut vx = x.to_vec();
                axpy(eta, &view.a.matvec_t(lam), &mut vx);
                if let Some(e) = ex {
                    axpy(eta, e, &mut vx);
                }
                let xn = prox_f.apply(&vx);
                let sf = prox_f.realized_subgradient(&vx, &xn);
                // λ⁺ = prox_{ηg*}(λ − ηA(2x⁺ − x) (+ ηε_λ))
                let extrap: Vec<f64> = xn.iter().zip(x).map(|(a, b)| 2.0 * a - b).collect();
                let mut vl = lam.to_vec();
                axpy(-eta, &view.a.matvec(&extrap), &mut vl);
                if let Some(e) = el {
                    axpy(eta, e, &mut vl);
                }
                let ln = prox_g.apply(&vl);
                let sg = prox_g.realized_subgradient(&vl, &ln);
                // realized F(z⁺) = (s_f − Aᵀλ⁺, s_g + Ax⁺)
                let mut wx = sf;
                axpy(-1.0, &view.a.matvec_t(&ln), &mut wx);
                let mut wl = sg;
                axpy(1.0, &view.a.matvec(&xn), &mut wl);
                let mut next = xn;
                next.extend(ln);
                wx.extend(wl);
                Ok(StepOutput { next, field: wx })
            }
            Kernel::Admm { y: ysolve, x: xsolve } => {
                let SaddleProblem::AdmmConstrained(p) = self.problem else {
                    unreachable!("admm kernel on a non-admm problem")
                };
                self.admm_step(p, ysolve, xsolve, z, eps)
            }
            Kernel::Linearized { view } => {
                let n = view.a.cols();
                let (x, lam) = zs.split_at(n);
                let gf = view.f.gradient(x)?;
                let gg = view.gstar.gradient(lam)?;
                // x⁺ = x − η(∇f(x) − Aᵀλ)
                let mut dx = gf.clone();
                axpy(-1.0, &view.a.matvec_t(lam), &mut dx);
                let mut xn = x.to_vec();
                axpy(-eta, &dx, &mut xn);
                // λ⁺ = λ − η(∇g*(λ) + A(2x⁺ − x))
                let extrap: Vec<f64> = xn.iter().zip(x).map(|(a, b)| 2.0 * a - b).collect();
                let mut dl = gg.clone();
                axpy(1.0, &view.a.matvec(&extrap), &mut dl);
                let mut ln = lam.to_vec();
                axpy(-eta, &dl, &mut ln);
                // Fᵏ⁺¹ = (∇f(xᵏ) − Aᵀλᵏ⁺¹, ∇g*(λᵏ) + Axᵏ⁺¹)
                let mut fx = gf;
                axpy(-1.0, &view.a.matvec_t(&ln), &mut fx);
                let mut fl = gg;
                axpy(1.0, &view.a.matvec(&xn), &mut fl);
                let mut next = xn;
                next.extend(ln);
                fx.extend(fl);
                Ok(StepOutput { next, field: fx })
            }
            Kernel::Gradient { f } => {
                let g = f.gradient(zs)?;
                let mut next = zs.to_vec();
                axpy(-eta, &g, &mut next);
                Ok(StepOutput { next, field: g })
            }
        }
    }

    fn admm_step(
        &self,
        p: &AdmmConstrained,
        ysolve: &SubSolver,
        xsolve: &SubSolver,
        z: &PrimalDualPoint,
        eps: Option<&[f64]>,
    ) -> Result<StepOutput> {
        let eta = self.eta.eta();
        let (x, lam) = (z.x(), z.lambda());
        let epz = eps.map(|e| z.with_data(e.to_vec())).transpose()?;
        // y⁺ = argmin g(y) − ⟨Bᵀλ (+ ε_y), y⟩ + (η/2)‖Ax + By − b‖²
        let mut sy = p.bmat.matvec_t(lam);
        if let Some(e) = &epz {
            axpy(1.0, e.y(), &mut sy);
        }
        let cy = sub(&p.b, &p.a.matvec(x));
        let (yn, sg) = ysolve.solve(&p.g, &p.bmat, eta, &sy, &cy);
        // λ⁺ = λ − η(Ax + By⁺ − b) (+ ηε_λ)
        let r = p.constraint_residual(x, &yn);
        let mut ln = lam.to_vec();
        axpy(-eta, &r, &mut ln);
        if let Some(e) = &epz {
            axpy(eta, e.lambda(), &mut ln);
        }
        // x⁺ = argmin f(x) − ⟨Aᵀλ⁺ (+ ε_x), x⟩ + (η/2)‖Ax + By⁺ − b‖²
        let mut sx = p.a.matvec_t(&ln);
        if let Some(e) = &epz {
            axpy(1.0, e.x(), &mut sx);
        }
        let cx = sub(&p.b, &p.bmat.matvec(&yn));
        let (xn, sf) = xsolve.solve(&p.f, &p.a, eta, &sx, &cx);

        let mut next = PrimalDualPoint::zeros(z.layout().clone());
        next.block_mut(Block::Y).copy_from_slice(&yn);
        next.block_mut(Block::X).copy_from_slice(&xn);
        next.block_mut(Block::Lambda).copy_from_slice(&ln);
        // realized F(z⁺) = (s_g − Bᵀλ⁺, s_f − Aᵀλ⁺, Ax⁺ + By⁺ − b)
        let mut w = PrimalDualPoint::zeros(z.layout().clone());
        let mut wy = sg;
        axpy(-1.0, &p.bmat.matvec_t(&ln), &mut wy);
        let mut wx = sf;
        axpy(-1.0, &p.a.matvec_t(&ln), &mut wx);
        w.block_mut(Block::Y).copy_from_slice(&wy);
        w.block_mut(Block::X).copy_from_slice(&wx);
        w.block_mut(Block::Lambda)
            .copy_from_slice(&p.constraint_residual(&xn, &yn));
        Ok(StepOutput {
            next: next.into_vec(),
            field: w.into_vec(),
        })
    }

    /// `P(z − z⁺)`
    pub fn metric_increment(&self, z: &[f64], next: &[f64]) -> Vec<f64> {
        self.metric.apply(&sub(z, next))
    }

    /// Generic-inclusion residual of a step: ∞-norm distance from
    /// `P(z − z⁺) + ε` to `F(z⁺)` for exact methods, and from `P(z − z⁺)` to
    /// the surrogate `Fᵏ⁺¹` for linearized ones.
    pub fn inclusion_residual(&self, z: &[f64], out: &StepOutput, eps: Option<&[f64]>) -> Result<f64> {
        let mut w = self.metric_increment(z, &out.next);
        if self.is_exact() {
            if let Some(e) = eps {
                axpy(1.0, e, &mut w);
            }
            let zn = PrimalDualPoint::new(self.problem.layout(), out.next.clone())?;
            self.problem.inclusion_residual(&zn, &w)
        } else {
            Ok(norm_inf(&sub(&w, &out.field)))
        }
    }
}

fn one_step(algorithm: Algorithm, prob: &SaddleProblem, z: &PrimalDualPoint, eta: f64, opts: SolverOptions) -> Result<PrimalDualPoint> {
    let solver = Solver::new(algorithm, prob, StepSize::explicit(eta)?, opts)?;
    let out = solver.step(z, None)?;
    z.with_data(out.next)
}

/// Proximal point step with `P = (1/η)I`.
pub fn ppm_step(prob: &SaddleProblem, z: &PrimalDualPoint, eta: f64, inner_tol: f64) -> Result<PrimalDualPoint> {
    let opts = SolverOptions {
        inner_tol,
        ..SolverOptions::default()
    };
    one_step(Algorithm::Ppm, prob, z, eta, opts)
}

pub fn pdhg_step(prob: &SaddleProblem, z: &PrimalDualPoint, eta: f64) -> Result<PrimalDualPoint> {
    one_step(Algorithm::Pdhg, prob, z, eta, SolverOptions::default())
}

pub fn admm_step(prob: &SaddleProblem, z: &PrimalDualPoint, eta: f64) -> Result<PrimalDualPoint> {
    one_step(Algorithm::Admm, prob, z, eta, SolverOptions::default())
}

pub fn linearized_pdhg_step(prob: &SaddleProblem, z: &PrimalDualPoint, eta: f64) -> Result<PrimalDualPoint> {
    one_step(Algorithm::LinearizedPdhg, prob, z, eta, SolverOptions::default())
}

/// `x − η∇f(x)`. `η = 0` is allowed here and returns `x`.
pub fn gradient_descent_step(f: &ConvexFunction, x: &[f64], eta: f64) -> Result<Vec<f64>> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidInput(format!("step size must be nonnegative, got {eta}")));
    }
    let g = f.gradient(x)?;
    let mut next = x.to_vec();
    axpy(-eta, &g, &mut next);
    Ok(next)
}
