//! Closed-form convex functions: values, proximal maps, gradients,
//! subdifferential membership and conjugates.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, is_psd, norm_inf, DenseMatrix, LuFactor, SymmetricOperator, PSD_TOL};

/// Default absolute slack for subgradient membership.
pub const SUBGRAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    Zero { dim: usize },
    /// `½xᵀQx + cᵀx + offset`
    Quadratic {
        q: SymmetricOperator,
        c: Vec<f64>,
        offset: f64,
    },
    /// `weight·‖x‖₁`
    L1 { weight: f64, dim: usize },
    /// `0` on `[lo, hi]`, `+∞` elsewhere
    IndicatorBox { lo: Vec<f64>, hi: Vec<f64> },
    /// `cᵀx`
    Affine { c: Vec<f64> },
}

/// A proper closed convex function from the closed-form library.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexFunction {
    kind: FunctionKind,
    smoothness: Option<f64>,
}

impl ConvexFunction {
    pub fn zero(dim: usize) -> Self {
        Self {
            kind: FunctionKind::Zero { dim },
            smoothness: Some(0.0),
        }
    }

    pub fn quadratic(q: SymmetricOperator, c: Vec<f64>) -> Result<Self> {
        Self::quadratic_with_offset(q, c, 0.0)
    }

    pub fn quadratic_with_offset(q: SymmetricOperator, c: Vec<f64>, offset: f64) -> Result<Self> {
        check_dim("quadratic linear term", q.dim(), c.len())?;
        if !is_psd(&q, PSD_TOL) {
            return Err(Error::InvalidInput("quadratic term must be PSD".into()));
        }
        let lmax = q.max_eigenvalue().max(0.0);
        Ok(Self {
            kind: FunctionKind::Quadratic { q, c, offset },
            smoothness: Some(lmax),
        })
    }

    pub fn l1(weight: f64, dim: usize) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "l1 weight must be positive, got {weight}"
            )));
        }
        Ok(Self {
            kind: FunctionKind::L1 { weight, dim },
            smoothness: None,
        })
    }

    pub fn indicator_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim("box bounds", lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| l.is_nan() || h.is_nan() || l > h) {
            return Err(Error::InvalidInput("box needs lo <= hi componentwise".into()));
        }
        Ok(Self {
            kind: FunctionKind::IndicatorBox { lo, hi },
            smoothness: None,
        })
    }

    /// Indicator of the single point `p`.
    pub fn indicator_point(p: Vec<f64>) -> Self {
        Self {
            kind: FunctionKind::IndicatorBox { lo: p.clone(), hi: p },
            smoothness: None,
        }
    }

    pub fn affine(c: Vec<f64>) -> Self {
        Self {
            kind: FunctionKind::Affine { c },
            smoothness: Some(0.0),
        }
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FunctionKind::Zero { .. } => "zero",
            FunctionKind::Quadratic { .. } => "quadratic",
            FunctionKind::L1 { .. } => "l1",
            FunctionKind::IndicatorBox { .. } => "box",
            FunctionKind::Affine { .. } => "affine",
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            FunctionKind::Zero { dim } | FunctionKind::L1 { dim, .. } => *dim,
            FunctionKind::Quadratic { c, .. } | FunctionKind::Affine { c } => c.len(),
            FunctionKind::IndicatorBox { lo, .. } => lo.len(),
        }
    }

    /// Gradient Lipschitz constant; `None` when there is no gradient oracle.
    pub fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }

    pub fn is_smooth(&self) -> bool {
        self.smoothness.is_some()
    }

    /// `(Q, c)` such that the function is `½xᵀQx + cᵀx + const`, for the
    /// zero, affine and quadratic kinds.
    pub fn as_quadratic(&self) -> Option<(SymmetricOperator, Vec<f64>)> {
        match &self.kind {
            FunctionKind::Zero { dim } => Some((SymmetricOperator::zeros(*dim), vec![0.0; *dim])),
            FunctionKind::Affine { c } => Some((SymmetricOperator::zeros(c.len()), c.clone())),
            FunctionKind::Quadratic { q, c, .. } => Some((q.clone(), c.clone())),
            _ => None,
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim("function argument", self.dim(), x.len())?;
        Ok(match &self.kind {
            FunctionKind::Zero { .. } => 0.0,
            FunctionKind::Quadratic { q, c, offset } => {
                0.5 * q.quadratic_form(x) + dot(c, x) + offset
            }
            FunctionKind::L1 { weight, .. } => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            FunctionKind::IndicatorBox { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(v, (l, h))| *l <= *v && *v <= *h);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            FunctionKind::Affine { c } => dot(c, x),
        })
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("function argument", self.dim(), x.len())?;
        match &self.kind {
            FunctionKind::Zero { dim } => Ok(vec![0.0; *dim]),
            FunctionKind::Quadratic { q, c, .. } => {
                let mut g = q.apply(x);
                crate::linalg::axpy(1.0, c, &mut g);
                Ok(g)
            }
            FunctionKind::Affine { c } => Ok(c.clone()),
            _ => Err(Error::InvalidInput(format!(
                "{} has no gradient oracle",
                self.name()
            ))),
        }
    }

    /// Proximal map `argmin_u f(u) + ‖u − v‖²/(2η)`.
    pub fn prox(&self, eta: f64, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("prox argument", self.dim(), v.len())?;
        Ok(self.prox_operator(eta)?.apply(v))
    }

    /// Prepares the proximal map for a fixed step, factoring the linear
    /// system once for quadratics.
    pub fn prox_operator(&self, eta: f64) -> Result<ProxOperator> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidInput(format!("prox step must be positive, got {eta}")));
        }
        let lu = match &self.kind {
            FunctionKind::Quadratic { q, .. } => {
                let mut m = q.as_dense().scaled(eta);
                for i in 0..q.dim() {
                    m.set(i, i, m.get(i, i) + 1.0);
                }
                Some(LuFactor::new(&m)?)
            }
            _ => None,
        };
        Ok(ProxOperator {
            f: self.clone(),
            eta,
            lu,
        })
    }

    /// ∞-norm distance from `w` to the subdifferential at `x`
    /// (`+∞` when `x` lies outside the domain).
    pub fn subgrad_distance(&self, x: &[f64], w: &[f64]) -> Result<f64> {
        check_dim("subgradient point", self.dim(), x.len())?;
        check_dim("subgradient", self.dim(), w.len())?;
        Ok(match &self.kind {
            FunctionKind::Zero { .. } => norm_inf(w),
            FunctionKind::Affine { c } => w.iter().zip(c).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
            FunctionKind::Quadratic { .. } => {
                let g = self.gradient(x)?;
                w.iter().zip(&g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            }
            FunctionKind::L1 { weight, .. } => x.iter().zip(w).fold(0.0f64, |m, (xi, wi)| {
                let d = if *xi == 0.0 {
                    (wi.abs() - weight).max(0.0)
                } else {
                    (wi - weight * xi.signum()).abs()
                };
                m.max(d)
            }),
            FunctionKind::IndicatorBox { lo, hi } => {
                let mut worst = 0.0f64;
                for i in 0..x.len() {
                    let (l, h, xi, wi) = (lo[i], hi[i], x[i], w[i]);
                    let snap_l = 4.0 * f64::EPSILON * (1.0 + l.abs());
                    let snap_h = 4.0 * f64::EPSILON * (1.0 + h.abs());
                    let at_lo = xi <= l + snap_l;
                    let at_hi = xi >= h - snap_h;
                    let d = if xi < l - snap_l || xi > h + snap_h {
                        f64::INFINITY
                    } else if at_lo && at_hi {
                        0.0
                    } else if at_lo {
                        wi.max(0.0)
                    } else if at_hi {
                        (-wi).max(0.0)
                    } else {
                        wi.abs()
                    };
                    worst = worst.max(d);
                }
                worst
            }
        })
    }

    /// True iff `w` is within `tol` (∞-norm) of `∂f(x)`.
    pub fn subgrad_contains(&self, x: &[f64], w: &[f64], tol: f64) -> bool {
        matches!(self.subgrad_distance(x, w), Ok(d) if d <= tol)
    }

    /// Closest point of the domain (identity for full-domain kinds).
    pub fn project_to_domain(&self, v: &[f64]) -> Vec<f64> {
        match &self.kind {
            FunctionKind::IndicatorBox { lo, hi } => v
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (l, h))| x.clamp(*l, *h))
                .collect(),
            _ => v.to_vec(),
        }
    }

    /// Fenchel conjugate `f*(λ) = sup_x λᵀx − f(x)` for the pairs the
    /// library closes over.
    pub fn conjugate(&self) -> Result<Self> {
        match &self.kind {
            FunctionKind::Zero { dim } => Ok(Self::indicator_point(vec![0.0; *dim])),
            FunctionKind::Affine { c } => Ok(Self::indicator_point(c.clone())),
            FunctionKind::L1 { weight, dim } => {
                Self::indicator_box(vec![-weight; *dim], vec![*weight; *dim])
            }
            FunctionKind::IndicatorBox { lo, hi } => {
                if lo == hi {
                    return Ok(Self::affine(lo.clone()));
                }
                let w = hi.first().copied().unwrap_or(0.0);
                let symmetric = w > 0.0 && lo.iter().zip(hi).all(|(l, h)| *h == w && *l == -w);
                if symmetric {
                    Self::l1(w, hi.len())
                } else {
                    Err(Error::UnsupportedConjugate("non-symmetric box indicator"))
                }
            }
            FunctionKind::Quadratic { q, c, offset } => {
                let n = q.dim();
                let qn = q.frobenius_norm();
                if q.min_eigenvalue() <= 1e-12 * (1.0 + qn) {
                    return Err(Error::UnsupportedConjugate("quadratic with singular Q"));
                }
                let lu = LuFactor::new(q.as_dense())?;
                let mut inv = DenseMatrix::zeros(n, n);
                for j in 0..n {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    let col = lu.solve(&e);
                    for (i, v) in col.iter().enumerate() {
                        inv.set(i, j, *v);
                    }
                }
                let qinv = SymmetricOperator::from_dense(inv)?;
                let qinv_c = lu.solve(c);
                let lin: Vec<f64> = qinv_c.iter().map(|v| -v).collect();
                let off = 0.5 * dot(c, &qinv_c) - offset;
                Self::quadratic_with_offset(qinv, lin, off)
            }
        }
    }
}

/// A proximal map with its step fixed.
#[derive(Debug, Clone)]
pub struct ProxOperator {
    f: ConvexFunction,
    eta: f64,
    lu: Option<LuFactor>,
}

impl ProxOperator {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let eta = self.eta;
        match &self.f.kind {
            FunctionKind::Zero { .. } => v.to_vec(),
            FunctionKind::Affine { c } => v.iter().zip(c).map(|(a, b)| a - eta * b).collect(),
            FunctionKind::L1 { weight, .. } => {
                let t = eta * weight;
                v.iter()
                    .map(|x| {
                        if x.abs() <= t {
                            0.0
                        } else {
                            x - t * x.signum()
                        }
                    })
                    .collect()
            }
            FunctionKind::IndicatorBox { lo, hi } => v
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (l, h))| x.clamp(*l, *h))
                .collect(),
            FunctionKind::Quadratic { c, .. } => {
                let rhs: Vec<f64> = v.iter().zip(c).map(|(a, b)| a - eta * b).collect();
                self.lu.as_ref().expect("quadratic prox is factored").solve(&rhs)
            }
        }
    }

    /// The subgradient realized by the prox step: `(v − prox(v))/η ∈ ∂f(prox(v))`.
    pub fn realized_subgradient(&self, v: &[f64], out: &[f64]) -> Vec<f64> {
        v.iter().zip(out).map(|(a, b)| (a - b) / self.eta).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm2, sub};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn library(rng: &mut ChaCha8Rng) -> Vec<ConvexFunction> {
        let g = DenseMatrix::new(3, 3, (0..9).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        vec![
            ConvexFunction::zero(3),
            ConvexFunction::quadratic(g.gram(), vec![0.3, -0.2, 1.0]).unwrap(),
            ConvexFunction::l1(0.7, 3).unwrap(),
            ConvexFunction::indicator_box(vec![-1.0, 0.0, -2.0], vec![1.0, 0.5, -2.0]).unwrap(),
            ConvexFunction::affine(vec![1.0, 2.0, -3.0]),
        ]
    }

    #[test]
    fn value_examples() {
        assert_eq!(ConvexFunction::zero(2).value(&[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ConvexFunction::l1(1.0, 2).unwrap().value(&[1.0, -2.0]).unwrap(), 3.0);
        let b = ConvexFunction::indicator_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(b.value(&[2.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(b.value(&[2.0]).is_err());
    }

    #[test]
    fn prox_examples() {
        assert_eq!(ConvexFunction::zero(2).prox(3.0, &[1.0, -4.0]).unwrap(), vec![1.0, -4.0]);
        assert_eq!(ConvexFunction::l1(1.0, 1).unwrap().prox(1.0, &[2.0]).unwrap(), vec![1.0]);
        let q = ConvexFunction::quadratic(SymmetricOperator::scaled_identity(1, 1.0), vec![0.0]).unwrap();
        assert_eq!(q.prox(1.0, &[2.0]).unwrap(), vec![1.0]);
        // closed-interval tie at the threshold maps to zero
        assert_eq!(ConvexFunction::l1(1.0, 1).unwrap().prox(1.0, &[-1.0]).unwrap(), vec![0.0]);
        assert!(ConvexFunction::zero(1).prox(0.0, &[1.0]).is_err());
    }

    #[test]
    fn subgrad_examples() {
        let f = ConvexFunction::l1(1.0, 1).unwrap();
        assert!(f.subgrad_contains(&[0.0], &[0.5], SUBGRAD_TOL));
        assert!(f.subgrad_contains(&[1.0], &[1.0], SUBGRAD_TOL));
        assert!(!f.subgrad_contains(&[1.0], &[0.5], SUBGRAD_TOL));
        let b = ConvexFunction::indicator_box(vec![0.0], vec![1.0]).unwrap();
        assert!(b.subgrad_contains(&[0.0], &[-3.0], SUBGRAD_TOL));
        assert!(!b.subgrad_contains(&[0.0], &[3.0], SUBGRAD_TOL));
        assert!(b.subgrad_contains(&[1.0], &[3.0], SUBGRAD_TOL));
        assert!(!b.subgrad_contains(&[0.5], &[1e-3], SUBGRAD_TOL));
        assert!(!b.subgrad_contains(&[2.0], &[0.0], SUBGRAD_TOL));
    }

    #[test]
    fn construction_invariants() {
        let indefinite = SymmetricOperator::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(ConvexFunction::quadratic(indefinite, vec![0.0, 0.0]).is_err());
        assert!(ConvexFunction::indicator_box(vec![1.0], vec![0.0]).is_err());
        assert!(ConvexFunction::l1(0.0, 1).is_err());
        let q = ConvexFunction::quadratic(SymmetricOperator::scaled_identity(2, 3.0), vec![0.0; 2]).unwrap();
        assert!((q.smoothness().unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(ConvexFunction::affine(vec![1.0]).smoothness(), Some(0.0));
        assert_eq!(ConvexFunction::l1(1.0, 1).unwrap().smoothness(), None);
    }

    #[test]
    fn conjugate_examples() {
        let l1 = ConvexFunction::l1(1.0, 2).unwrap();
        assert_eq!(
            l1.conjugate().unwrap(),
            ConvexFunction::indicator_box(vec![-1.0; 2], vec![1.0; 2]).unwrap()
        );
        assert_eq!(l1.conjugate().unwrap().conjugate().unwrap(), l1);
        assert_eq!(
            ConvexFunction::zero(2).conjugate().unwrap(),
            ConvexFunction::indicator_point(vec![0.0; 2])
        );
        let q = ConvexFunction::quadratic(SymmetricOperator::scaled_identity(2, 2.0), vec![0.0; 2]).unwrap();
        let qs = q.conjugate().unwrap();
        match qs.kind() {
            FunctionKind::Quadratic { q, c, offset } => {
                assert!((q.get(0, 0) - 0.5).abs() < 1e-15 && q.get(0, 1) == 0.0);
                assert_eq!(c, &vec![0.0, 0.0]);
                assert_eq!(*offset, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        let asym = ConvexFunction::indicator_box(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(asym.conjugate(), Err(Error::UnsupportedConjugate(_))));
        let singular = ConvexFunction::quadratic(SymmetricOperator::zeros(1), vec![0.0]).unwrap();
        assert!(singular.conjugate().is_err());
    }

    #[test]
    fn conjugates_match_grid_supremum() {
        // sup_y λy − f(y) over a fine grid, scalar case
        let grid: Vec<f64> = (-4000..=4000).map(|i| i as f64 * 1e-3).collect();
        let cases = vec![
            ConvexFunction::l1(1.0, 1).unwrap(),
            ConvexFunction::quadratic(SymmetricOperator::scaled_identity(1, 2.0), vec![0.5]).unwrap(),
            ConvexFunction::affine(vec![0.25]),
        ];
        for f in cases {
            let fs = f.conjugate().unwrap();
            for lam in [-0.8, -0.25, 0.0, 0.25, 0.6] {
                let brute = grid
                    .iter()
                    .map(|y| lam * y - f.value(&[*y]).unwrap())
                    .fold(f64::NEG_INFINITY, f64::max);
                let closed = fs.value(&[lam]).unwrap();
                if closed.is_finite() {
                    assert!((brute - closed).abs() < 1e-5, "{} at {lam}: {brute} vs {closed}", f.name());
                } else {
                    // unbounded supremum shows up as growth with the grid edge
                    assert!(brute > 0.5, "{} at {lam}", f.name());
                }
            }
        }
    }

    #[test]
    fn prox_optimality_and_nonexpansiveness() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in library(&mut rng) {
            for _ in 0..1000 {
                let eta = rng.random_range(0.01..5.0);
                let v: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
                let u: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
                let op = f.prox_operator(eta).unwrap();
                let pv = op.apply(&v);
                let w = op.realized_subgradient(&v, &pv);
                assert!(
                    f.subgrad_contains(&pv, &w, 1e-9 * (1.0 + norm_inf(&w))),
                    "{}: dist {}",
                    f.name(),
                    f.subgrad_distance(&pv, &w).unwrap()
                );
                let pu = op.apply(&u);
                assert!(norm2(&sub(&pu, &pv)) <= norm2(&sub(&u, &v)) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn fenchel_young() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = DenseMatrix::new(3, 3, (0..9).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let mut q = g.gram();
        q = q.add(&SymmetricOperator::scaled_identity(3, 0.5));
        let fs = vec![
            ConvexFunction::quadratic(q, vec![0.1, 0.2, 0.3]).unwrap(),
            ConvexFunction::l1(0.5, 3).unwrap(),
            ConvexFunction::affine(vec![1.0, 0.0, -1.0]),
            ConvexFunction::zero(3),
        ];
        for f in fs {
            let fs = f.conjugate().unwrap();
            for _ in 0..200 {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
                // λ in the conjugate's domain
                let lam = fs.project_to_domain(&(0..3).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
                let lhs = f.value(&x).unwrap() + fs.value(&lam).unwrap();
                assert!(lhs >= dot(&lam, &x) - 1e-10);
                // equality at a subgradient pair, built from the prox
                let op = f.prox_operator(1.0).unwrap();
                let px = op.apply(&x);
                let s = op.realized_subgradient(&x, &px);
                let s = fs.project_to_domain(&s);
                let eq = f.value(&px).unwrap() + fs.value(&s).unwrap() - dot(&s, &px);
                assert!(eq.abs() <= 1e-8, "{}: {eq}", f.name());
            }
        }
    }
}
