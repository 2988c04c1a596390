//! Ground-truth saddle points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{ConvexFunction, FunctionKind};
use crate::linalg::{norm_inf, sub, LuFactor};
use crate::pnorm::StepSize;
use crate::problems::{Block, PrimalDualPoint, SaddleProblem};
use crate::solvers::{resolve_eta, Algorithm, EtaChoice, Solver, SolverOptions};

/// Residual a certificate must reach.
pub const ORACLE_TOL: f64 = 1e-8;

/// Largest dimension [`high_accuracy_run`] accepts.
pub const MAX_ORACLE_DIM: usize = 200;

/// Largest dimension [`grid_bruteforce`] accepts.
pub const MAX_GRID_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    KktSolve,
    HighAccuracyRun,
    GridBruteforce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleCertificate {
    pub zstar: PrimalDualPoint,
    /// Optimal primal value, when the primal objective is available.
    pub fstar: Option<f64>,
    pub method: OracleMethod,
    /// ∞-norm defect of `0 ∈ F(z*)` (or the duality gap for the grid).
    pub residual: f64,
    pub iterations: usize,
    pub certified: bool,
}

/// Primal objective at `z`: `f(x) + g(y)` for ADMM, `f(x) + g(−Ax)` for
/// composites, `sup_λ L(x, λ)` for bilinear quadratics.
pub fn primal_value(prob: &SaddleProblem, z: &PrimalDualPoint) -> Option<f64> {
    match prob {
        SaddleProblem::AdmmConstrained(p) => p.objective(z.x(), z.y()).ok(),
        SaddleProblem::PdhgComposite(p) => {
            let g = p.gstar.conjugate().ok()?;
            let ax: Vec<f64> = p.a.matvec(z.x()).iter().map(|v| -v).collect();
            Some(p.f.value(z.x()).ok()? + g.value(&ax).ok()?)
        }
        SaddleProblem::BilinearQuadratic(p) => {
            let x = z.x();
            let base = 0.5 * p.qx.quadratic_form(x) + crate::linalg::dot(&p.c, x);
            if p.a.rows() == 0 {
                return Some(base);
            }
            let h = ConvexFunction::quadratic(p.qlambda.clone(), vec![0.0; p.a.rows()]).ok()?;
            let u = sub(&p.a.matvec(x), &p.b);
            Some(base + h.conjugate().ok()?.value(&u).ok()?)
        }
    }
}

fn certificate(prob: &SaddleProblem, zstar: PrimalDualPoint, method: OracleMethod, iterations: usize) -> Result<SaddleCertificate> {
    let residual = prob.inclusion_residual(&zstar, &vec![0.0; zstar.layout().dim()])?;
    Ok(SaddleCertificate {
        fstar: primal_value(prob, &zstar),
        certified: residual <= ORACLE_TOL,
        zstar,
        method,
        residual,
        iterations,
    })
}

/// Solves `Mz = −r` for problems whose `F(z) = Mz + r` is affine.
pub fn kkt_solve(prob: &SaddleProblem) -> Result<SaddleCertificate> {
    let field = prob.affine_field().ok_or_else(|| Error::Unsupported {
        algorithm: "kkt_solve",
        reason: "the optimality system is not affine".into(),
    })?;
    let lu = LuFactor::new(&field.m)?;
    let rhs: Vec<f64> = field.r.iter().map(|v| -v).collect();
    let z = PrimalDualPoint::new(prob.layout(), lu.solve(&rhs))?;
    certificate(prob, z, OracleMethod::KktSolve, 0)
}

/// Runs the problem's exact method from the origin until successive
/// iterates differ by at most `tol` (∞-norm) or `max_iters` is reached.
pub fn high_accuracy_run(prob: &SaddleProblem, max_iters: usize, tol: f64) -> Result<SaddleCertificate> {
    let layout = prob.layout();
    if layout.dim() > MAX_ORACLE_DIM {
        return Err(Error::InvalidInput(format!(
            "high-accuracy oracle limited to dimension {MAX_ORACLE_DIM}, got {}",
            layout.dim()
        )));
    }
    let (alg, eta) = match prob {
        SaddleProblem::BilinearQuadratic(_) => (Algorithm::Ppm, StepSize::explicit(1.0)?),
        SaddleProblem::PdhgComposite(_) => {
            let eta = match resolve_eta(Algorithm::Pdhg, prob, EtaChoice::Auto { safety: 0.95 }) {
                Err(Error::UnboundedStepSize) => StepSize::explicit(1.0)?,
                other => other?,
            };
            (Algorithm::Pdhg, eta)
        }
        SaddleProblem::AdmmConstrained(_) => (Algorithm::Admm, StepSize::explicit(1.0)?),
    };
    let solver = Solver::new(alg, prob, eta, SolverOptions::default())?;
    let mut z = prob.project_to_domain(&PrimalDualPoint::zeros(layout));
    let mut iters = 0;
    while iters < max_iters {
        let next = z.with_data(solver.step(&z, None)?.next)?;
        iters += 1;
        let delta = norm_inf(&sub(next.as_slice(), z.as_slice()));
        z = next;
        if delta <= tol {
            break;
        }
    }
    certificate(prob, z, OracleMethod::HighAccuracyRun, iters)
}

/// Saddle point of `prob`: the KKT solve when `F` is affine and
/// nonsingular, the high-accuracy run otherwise.
pub fn saddle_oracle(prob: &SaddleProblem) -> Result<SaddleCertificate> {
    match kkt_solve(prob) {
        Ok(c) if c.certified => Ok(c),
        _ => high_accuracy_run(prob, 1_000_000, 1e-12),
    }
}

const GRID_POINTS: usize = 21;
const GRID_MIN_HALF_WIDTH: f64 = 1e-13;
const MAX_ZOOM_LEVELS: usize = 5_000;

/// Per-coordinate search interval: the oracle's box (if any) within `[−r, r]`.
fn coordinate_bounds(prob: &SaddleProblem, radius: f64) -> Vec<(f64, f64)> {
    let layout = prob.layout();
    let mut out = vec![(-radius, radius); layout.dim()];
    let oracle = |b: Block| -> Option<&ConvexFunction> {
        match (prob, b) {
            (SaddleProblem::PdhgComposite(p), Block::X) => Some(&p.f),
            (SaddleProblem::PdhgComposite(p), Block::Lambda) => Some(&p.gstar),
            (SaddleProblem::AdmmConstrained(p), Block::X) => Some(&p.f),
            (SaddleProblem::AdmmConstrained(p), Block::Y) => Some(&p.g),
            _ => None,
        }
    };
    for (block, _) in layout.blocks() {
        let Some(FunctionKind::IndicatorBox { lo, hi }) = oracle(*block).map(|f| f.kind()) else {
            continue;
        };
        let range = layout.range(*block).expect("block in layout");
        for (i, idx) in range.enumerate() {
            out[idx] = (lo[i].max(-radius), hi[i].min(radius));
        }
    }
    out
}

/// Zooming grid search for the minimum of `eval` over a box.
///
/// The window shrinks 5× only when the best point is interior on every
/// axis; a best point on an unclipped edge re-centers the window at the
/// same size, so narrow valleys are followed instead of cut off.
fn zoom_min(bounds: &[(f64, f64)], mut eval: impl FnMut(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let dim = bounds.len();
    let mut center: Vec<f64> = bounds.iter().map(|(l, h)| 0.5 * (l + h)).collect();
    let mut half: Vec<f64> = bounds.iter().map(|(l, h)| 0.5 * (h - l)).collect();
    let mut best = (center.clone(), eval(&center));
    let mut pt = vec![0.0; dim];
    let mut best_idx = vec![0; dim];
    for _ in 0..MAX_ZOOM_LEVELS {
        let axes: Vec<(f64, f64, f64)> = (0..dim)
            .map(|i| {
                let lo = (center[i] - half[i]).max(bounds[i].0);
                let hi = (center[i] + half[i]).min(bounds[i].1);
                (lo, hi, (hi - lo) / (GRID_POINTS - 1) as f64)
            })
            .collect();
        let total = GRID_POINTS.pow(dim as u32);
        let mut level_best: Option<usize> = None;
        for idx in 0..total {
            let mut rem = idx;
            for (i, (lo, _, step)) in axes.iter().enumerate() {
                pt[i] = lo + step * (rem % GRID_POINTS) as f64;
                rem /= GRID_POINTS;
            }
            let v = eval(&pt);
            if v < best.1 {
                best = (pt.clone(), v);
                level_best = Some(idx);
            }
        }
        let mut on_edge = false;
        if let Some(idx) = level_best {
            let mut rem = idx;
            for (i, bi) in best_idx.iter_mut().enumerate() {
                *bi = rem % GRID_POINTS;
                rem /= GRID_POINTS;
                let (lo, hi, _) = axes[i];
                let clipped = (*bi == 0 && lo <= bounds[i].0) || (*bi == GRID_POINTS - 1 && hi >= bounds[i].1);
                on_edge |= (*bi == 0 || *bi == GRID_POINTS - 1) && !clipped;
            }
        }
        center.clone_from(&best.0);
        if !on_edge {
            for (h, (_, _, step)) in half.iter_mut().zip(&axes) {
                *h = 2.0 * step;
            }
        }
        if half.iter().all(|h| *h <= GRID_MIN_HALF_WIDTH) {
            break;
        }
    }
    best
}

/// Independent saddle search for problems of total dimension ≤ 3.
///
/// Minimizes `ψ(p) = max_λ L(p, λ)` and maximizes `χ(λ) = min_p L(p, λ)`
/// by nested zooming grids over `[−radius, radius]` (intersected with
/// box domains). `residual` is the duality gap `ψ(p*) − χ(λ*)`.
pub fn grid_bruteforce(prob: &SaddleProblem, radius: f64) -> Result<SaddleCertificate> {
    let layout = prob.layout();
    let dim = layout.dim();
    if dim > MAX_GRID_DIM {
        return Err(Error::InvalidInput(format!(
            "grid oracle limited to dimension {MAX_GRID_DIM}, got {dim}"
        )));
    }
    let bounds = coordinate_bounds(prob, radius);
    let dual: Vec<usize> = layout.range(Block::Lambda).map(|r| r.collect()).unwrap_or_default();
    let primal: Vec<usize> = (0..dim).filter(|i| !dual.contains(i)).collect();
    let pb: Vec<(f64, f64)> = primal.iter().map(|&i| bounds[i]).collect();
    let db: Vec<(f64, f64)> = dual.iter().map(|&i| bounds[i]).collect();

    let lag = |p: &[f64], d: &[f64]| -> f64 {
        let mut z = PrimalDualPoint::zeros(layout.clone());
        let s = z.as_mut_slice();
        for (v, &i) in p.iter().zip(&primal) {
            s[i] = *v;
        }
        for (v, &i) in d.iter().zip(&dual) {
            s[i] = *v;
        }
        prob.lagrangian(&z).unwrap_or(f64::NAN)
    };
    let psi = |p: &[f64]| -> f64 { -zoom_min(&db, |d| nan_high(-lag(p, d))).1 };
    let chi = |d: &[f64]| -> f64 { zoom_min(&pb, |p| nan_high(lag(p, d))).1 };

    let (pstar, psi_val) = zoom_min(&pb, |p| nan_high(psi(p)));
    let (dstar, neg_chi) = zoom_min(&db, |d| nan_high(-chi(d)));
    let mut z = PrimalDualPoint::zeros(layout);
    {
        let s = z.as_mut_slice();
        for (v, &i) in pstar.iter().zip(&primal) {
            s[i] = *v;
        }
        for (v, &i) in dstar.iter().zip(&dual) {
            s[i] = *v;
        }
    }
    let residual = (psi_val + neg_chi).max(0.0);
    Ok(SaddleCertificate {
        fstar: primal_value(prob, &z),
        certified: residual <= ORACLE_TOL,
        zstar: z,
        method: OracleMethod::GridBruteforce,
        residual,
        iterations: 0,
    })
}

/// Orders NaN (undefined `L`) after every number.
fn nan_high(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}
