//! Saddle problems in three Lagrangian forms, the stacked primal-dual
//! point, and evaluation of `L` and of the subdifferential map `F`.
//!
//! `F(z) = (∂ₓL(x, λ), −∂_λL(x, λ))`; its zeros are the saddle points.
//!
//! ADMM points are stacked as `(y, x, λ)`, not the more common
//! `(x, y, λ)`, so that the block matrix of the generic update applies
//! verbatim.

pub mod instances;
pub mod io;

pub use instances::{make_instance, InstanceSpec, GENERATORS};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::functions::ConvexFunction;
use crate::linalg::{dot, norm_inf, sub, DenseMatrix, SymmetricOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Y,
    X,
    Lambda,
}

impl Block {
    pub fn name(self) -> &'static str {
        match self {
            Block::Y => "y",
            Block::X => "x",
            Block::Lambda => "lambda",
        }
    }

    pub fn is_dual(self) -> bool {
        self == Block::Lambda
    }
}

/// Ordered block names and sizes of a stacked point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    blocks: Vec<(Block, usize)>,
}

impl Layout {
    pub fn new(blocks: Vec<(Block, usize)>) -> Self {
        Self { blocks }
    }

    pub fn primal_dual(n: usize, m: usize) -> Self {
        Self::new(vec![(Block::X, n), (Block::Lambda, m)])
    }

    pub fn admm(p: usize, n: usize, m: usize) -> Self {
        Self::new(vec![(Block::Y, p), (Block::X, n), (Block::Lambda, m)])
    }

    pub fn blocks(&self) -> &[(Block, usize)] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|(_, d)| d).sum()
    }

    pub fn range(&self, block: Block) -> Option<std::ops::Range<usize>> {
        let mut start = 0;
        for (b, d) in &self.blocks {
            if *b == block {
                return Some(start..start + d);
            }
            start += d;
        }
        None
    }

    pub fn block_dim(&self, block: Block) -> usize {
        self.range(block).map_or(0, |r| r.len())
    }
}

/// Stacked iterate `z`, e.g. `(x, λ)` or `(y, x, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualPoint {
    layout: Layout,
    data: Vec<f64>,
}

impl PrimalDualPoint {
    pub fn new(layout: Layout, data: Vec<f64>) -> Result<Self> {
        check_dim("stacked point", layout.dim(), data.len())?;
        Ok(Self { layout, data })
    }

    pub fn zeros(layout: Layout) -> Self {
        let data = vec![0.0; layout.dim()];
        Self { layout, data }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn block(&self, block: Block) -> &[f64] {
        match self.layout.range(block) {
            Some(r) => &self.data[r],
            None => &[],
        }
    }

    pub fn block_mut(&mut self, block: Block) -> &mut [f64] {
        match self.layout.range(block) {
            Some(r) => &mut self.data[r],
            None => &mut [],
        }
    }

    pub fn x(&self) -> &[f64] {
        self.block(Block::X)
    }

    pub fn y(&self) -> &[f64] {
        self.block(Block::Y)
    }

    pub fn lambda(&self) -> &[f64] {
        self.block(Block::Lambda)
    }

    /// Same layout with new values.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.layout.clone(), data)
    }

    /// Primal blocks from `self`, dual block from `dual`.
    pub fn mix(&self, dual: &Self) -> Result<Self> {
        if self.layout != dual.layout {
            return Err(Error::InvalidInput("mixing points with different layouts".into()));
        }
        let mut out = self.clone();
        out.block_mut(Block::Lambda).copy_from_slice(dual.lambda());
        Ok(out)
    }
}

/// `L(x, λ) = ½xᵀQₓx + cᵀx + λᵀ(Ax − b) − ½λᵀQ_λλ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearQuadratic {
    pub qx: SymmetricOperator,
    pub qlambda: SymmetricOperator,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// `L(x, λ) = f(x) − λᵀAx − g*(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdhgComposite {
    pub f: ConvexFunction,
    pub gstar: ConvexFunction,
    pub a: DenseMatrix,
}

/// `L(x, y, λ) = f(x) + g(y) − λᵀ(Ax + By − b)`, points stacked `(y, x, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConstrained {
    pub f: ConvexFunction,
    pub g: ConvexFunction,
    pub a: DenseMatrix,
    pub bmat: DenseMatrix,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SaddleProblem {
    BilinearQuadratic(BilinearQuadratic),
    PdhgComposite(PdhgComposite),
    AdmmConstrained(AdmmConstrained),
}

impl BilinearQuadratic {
    pub fn new(
        qx: SymmetricOperator,
        qlambda: SymmetricOperator,
        a: DenseMatrix,
        b: Vec<f64>,
        c: Vec<f64>,
    ) -> Result<Self> {
        check_dim("A columns vs Qx", qx.dim(), a.cols())?;
        check_dim("A rows vs Qλ", qlambda.dim(), a.rows())?;
        check_dim("b", a.rows(), b.len())?;
        check_dim("c", a.cols(), c.len())?;
        for (name, q) in [("Qx", &qx), ("Qλ", &qlambda)] {
            if !crate::linalg::is_psd(q, crate::linalg::PSD_TOL) {
                return Err(Error::InvalidInput(format!("{name} must be PSD")));
            }
        }
        Ok(Self {
            qx,
            qlambda,
            a,
            b,
            c,
        })
    }

    /// The same Lagrangian written as `f(x) − λᵀ(−A)x − g*(λ)` with
    /// `f = ½xᵀQₓx + cᵀx` and `g* = ½λᵀQ_λλ + bᵀλ`.
    pub fn to_pdhg(&self) -> Result<PdhgComposite> {
        PdhgComposite::new(
            ConvexFunction::quadratic(self.qx.clone(), self.c.clone())?,
            ConvexFunction::quadratic(self.qlambda.clone(), self.b.clone())?,
            self.a.scaled(-1.0),
        )
    }
}

impl PdhgComposite {
    pub fn new(f: ConvexFunction, gstar: ConvexFunction, a: DenseMatrix) -> Result<Self> {
        check_dim("f dimension vs A columns", a.cols(), f.dim())?;
        check_dim("g* dimension vs A rows", a.rows(), gstar.dim())?;
        Ok(Self { f, gstar, a })
    }

    /// Builds the composite from `g` rather than its conjugate.
    pub fn from_primal(f: ConvexFunction, g: &ConvexFunction, a: DenseMatrix) -> Result<Self> {
        Self::new(f, g.conjugate()?, a)
    }
}

impl AdmmConstrained {
    pub fn new(
        f: ConvexFunction,
        g: ConvexFunction,
        a: DenseMatrix,
        bmat: DenseMatrix,
        b: Vec<f64>,
    ) -> Result<Self> {
        check_dim("f dimension vs A columns", a.cols(), f.dim())?;
        check_dim("g dimension vs B columns", bmat.cols(), g.dim())?;
        check_dim("B rows vs A rows", a.rows(), bmat.rows())?;
        check_dim("b", a.rows(), b.len())?;
        Ok(Self { f, g, a, bmat, b })
    }

    /// `Ax + By − b`
    pub fn constraint_residual(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut r = self.a.matvec(x);
        crate::linalg::axpy(1.0, &self.bmat.matvec(y), &mut r);
        crate::linalg::axpy(-1.0, &self.b, &mut r);
        r
    }

    pub fn objective(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.f.value(x)? + self.g.value(y)?)
    }

    /// `f(x̄) + g(ȳ) − λᵀ(Ax̄ + Bȳ − b) − F*`: objective suboptimality plus a
    /// feasibility penalty tested against the multiplier `λ`.
    pub fn primal_measure(&self, xbar: &[f64], ybar: &[f64], lambda: &[f64], fstar: f64) -> Result<f64> {
        check_dim("x̄", self.a.cols(), xbar.len())?;
        check_dim("ȳ", self.bmat.cols(), ybar.len())?;
        check_dim("λ", self.a.rows(), lambda.len())?;
        let r = self.constraint_residual(xbar, ybar);
        Ok(self.objective(xbar, ybar)? - dot(lambda, &r) - fstar)
    }
}

/// Free-function form of [`AdmmConstrained::primal_measure`].
pub fn admm_primal_measure(
    prob: &AdmmConstrained,
    xbar: &[f64],
    ybar: &[f64],
    lambda: &[f64],
    fstar: f64,
) -> Result<f64> {
    prob.primal_measure(xbar, ybar, lambda, fstar)
}

/// Affine subdifferential `F(z) = Mz + r`.
#[derive(Debug, Clone)]
pub struct AffineField {
    pub m: DenseMatrix,
    pub r: Vec<f64>,
}

impl AffineField {
    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.m.matvec(z);
        crate::linalg::axpy(1.0, &self.r, &mut out);
        out
    }
}

fn place(dst: &mut DenseMatrix, row0: usize, col0: usize, src: &DenseMatrix, s: f64) {
    for i in 0..src.rows() {
        for j in 0..src.cols() {
            dst.set(row0 + i, col0 + j, s * src.get(i, j));
        }
    }
}

impl SaddleProblem {
    pub fn form_name(&self) -> &'static str {
        match self {
            SaddleProblem::BilinearQuadratic(_) => "quadratic",
            SaddleProblem::PdhgComposite(_) => "pdhg",
            SaddleProblem::AdmmConstrained(_) => "admm",
        }
    }

    pub fn layout(&self) -> Layout {
        match self {
            SaddleProblem::BilinearQuadratic(p) => Layout::primal_dual(p.a.cols(), p.a.rows()),
            SaddleProblem::PdhgComposite(p) => Layout::primal_dual(p.a.cols(), p.a.rows()),
            SaddleProblem::AdmmConstrained(p) => {
                Layout::admm(p.bmat.cols(), p.a.cols(), p.a.rows())
            }
        }
    }

    /// Coupling matrix whose norm governs step sizes (`A` in every form).
    pub fn coupling(&self) -> &DenseMatrix {
        match self {
            SaddleProblem::BilinearQuadratic(p) => &p.a,
            SaddleProblem::PdhgComposite(p) => &p.a,
            SaddleProblem::AdmmConstrained(p) => &p.a,
        }
    }

    fn check_layout(&self, z: &PrimalDualPoint) -> Result<()> {
        if *z.layout() != self.layout() {
            return Err(Error::InvalidInput(format!(
                "point layout {:?} does not match problem layout {:?}",
                z.layout(),
                self.layout()
            )));
        }
        Ok(())
    }

    /// `L(z)` as an extended real. `+∞ − ∞` is an error.
    pub fn lagrangian(&self, z: &PrimalDualPoint) -> Result<f64> {
        self.check_layout(z)?;
        let (x, lam) = (z.x(), z.lambda());
        match self {
            SaddleProblem::BilinearQuadratic(p) => {
                let ax = p.a.matvec(x);
                Ok(0.5 * p.qx.quadratic_form(x) + dot(&p.c, x) + dot(lam, &sub(&ax, &p.b))
                    - 0.5 * p.qlambda.quadratic_form(lam))
            }
            SaddleProblem::PdhgComposite(p) => {
                let fx = p.f.value(x)?;
                let gl = p.gstar.value(lam)?;
                if fx == f64::INFINITY && gl == f64::INFINITY {
                    return Err(Error::UndefinedLagrangian(
                        "f(x) = +inf and g*(lambda) = +inf".into(),
                    ));
                }
                Ok(fx - dot(lam, &p.a.matvec(x)) - gl)
            }
            SaddleProblem::AdmmConstrained(p) => {
                let r = p.constraint_residual(x, z.y());
                Ok(p.f.value(x)? + p.g.value(z.y())? - dot(lam, &r))
            }
        }
    }

    /// `L(x̄, λ_ref) − L(x_ref, λ̄)` (primal blocks include `y` for ADMM).
    pub fn gap(&self, zbar: &PrimalDualPoint, zref: &PrimalDualPoint) -> Result<f64> {
        let upper = self.lagrangian(&zbar.mix(zref)?)?;
        let lower = self.lagrangian(&zref.mix(zbar)?)?;
        if upper == lower && upper.is_infinite() {
            return Err(Error::UndefinedLagrangian(format!(
                "gap is {upper} - {lower}"
            )));
        }
        Ok(upper - lower)
    }

    /// `F(z) = Mz + r` when every block is affine (quadratic-family oracles).
    pub fn affine_field(&self) -> Option<AffineField> {
        let layout = self.layout();
        let dim = layout.dim();
        let mut m = DenseMatrix::zeros(dim, dim);
        let mut r = vec![0.0; dim];
        match self {
            SaddleProblem::BilinearQuadratic(p) => {
                let n = p.a.cols();
                place(&mut m, 0, 0, p.qx.as_dense(), 1.0);
                place(&mut m, 0, n, &p.a.transpose(), 1.0);
                place(&mut m, n, 0, &p.a, -1.0);
                place(&mut m, n, n, p.qlambda.as_dense(), 1.0);
                r[..n].copy_from_slice(&p.c);
                r[n..].copy_from_slice(&p.b);
            }
            SaddleProblem::PdhgComposite(p) => {
                let (qf, cf) = p.f.as_quadratic()?;
                let (qg, cg) = p.gstar.as_quadratic()?;
                let n = p.a.cols();
                place(&mut m, 0, 0, qf.as_dense(), 1.0);
                place(&mut m, 0, n, &p.a.transpose(), -1.0);
                place(&mut m, n, 0, &p.a, 1.0);
                place(&mut m, n, n, qg.as_dense(), 1.0);
                r[..n].copy_from_slice(&cf);
                r[n..].copy_from_slice(&cg);
            }
            SaddleProblem::AdmmConstrained(p) => {
                let (qf, cf) = p.f.as_quadratic()?;
                let (qg, cg) = p.g.as_quadratic()?;
                let (py, n) = (p.bmat.cols(), p.a.cols());
                let l0 = py + n;
                place(&mut m, 0, 0, qg.as_dense(), 1.0);
                place(&mut m, 0, l0, &p.bmat.transpose(), -1.0);
                place(&mut m, py, py, qf.as_dense(), 1.0);
                place(&mut m, py, l0, &p.a.transpose(), -1.0);
                place(&mut m, l0, 0, &p.bmat, 1.0);
                place(&mut m, l0, py, &p.a, 1.0);
                r[..py].copy_from_slice(&cg);
                r[py..l0].copy_from_slice(&cf);
                for (ri, bi) in r[l0..].iter_mut().zip(&p.b) {
                    *ri = -bi;
                }
            }
        }
        Some(AffineField { m, r })
    }

    /// ∞-norm distance from `w` to `F(z)`, block by block.
    pub fn inclusion_residual(&self, z: &PrimalDualPoint, w: &[f64]) -> Result<f64> {
        self.check_layout(z)?;
        check_dim("inclusion vector", z.as_slice().len(), w.len())?;
        let wz = z.with_data(w.to_vec())?;
        let (x, lam) = (z.x(), z.lambda());
        match self {
            SaddleProblem::BilinearQuadratic(_) => {
                let f = self.affine_field().expect("bilinear field is affine");
                Ok(norm_inf(&sub(w, &f.eval(z.as_slice()))))
            }
            SaddleProblem::PdhgComposite(p) => {
                // w_x ∈ ∂f(x) − Aᵀλ,  w_λ ∈ ∂g*(λ) + Ax
                let mut sx = wz.x().to_vec();
                crate::linalg::axpy(1.0, &p.a.matvec_t(lam), &mut sx);
                let sl = sub(wz.lambda(), &p.a.matvec(x));
                Ok(p.f.subgrad_distance(x, &sx)?.max(p.gstar.subgrad_distance(lam, &sl)?))
            }
            SaddleProblem::AdmmConstrained(p) => {
                // w_y ∈ ∂g(y) − Bᵀλ,  w_x ∈ ∂f(x) − Aᵀλ,  w_λ = Ax + By − b
                let mut sy = wz.y().to_vec();
                crate::linalg::axpy(1.0, &p.bmat.matvec_t(lam), &mut sy);
                let mut sx = wz.x().to_vec();
                crate::linalg::axpy(1.0, &p.a.matvec_t(lam), &mut sx);
                let r = p.constraint_residual(x, z.y());
                let dl = norm_inf(&sub(wz.lambda(), &r));
                Ok(p.g
                    .subgrad_distance(z.y(), &sy)?
                    .max(p.f.subgrad_distance(x, &sx)?)
                    .max(dl))
            }
        }
    }

    /// Whether `L` is finite at `z`, i.e. `z` lies in the domain of every
    /// oracle.
    pub fn is_finite_at(&self, z: &PrimalDualPoint) -> bool {
        matches!(self.lagrangian(z), Ok(v) if v.is_finite())
    }

    /// Value of the oracle attached to `block` at `z`, if the block has one.
    pub fn block_value(&self, z: &PrimalDualPoint, block: Block) -> Option<f64> {
        match (self, block) {
            (SaddleProblem::PdhgComposite(p), Block::X) => p.f.value(z.x()).ok(),
            (SaddleProblem::PdhgComposite(p), Block::Lambda) => p.gstar.value(z.lambda()).ok(),
            (SaddleProblem::AdmmConstrained(p), Block::X) => p.f.value(z.x()).ok(),
            (SaddleProblem::AdmmConstrained(p), Block::Y) => p.g.value(z.y()).ok(),
            _ => None,
        }
    }

    /// Projects each block onto the domain of its oracle.
    pub fn project_to_domain(&self, z: &PrimalDualPoint) -> PrimalDualPoint {
        let mut out = z.clone();
        match self {
            SaddleProblem::BilinearQuadratic(_) => {}
            SaddleProblem::PdhgComposite(p) => {
                let x = p.f.project_to_domain(z.x());
                let l = p.gstar.project_to_domain(z.lambda());
                out.block_mut(Block::X).copy_from_slice(&x);
                out.block_mut(Block::Lambda).copy_from_slice(&l);
            }
            SaddleProblem::AdmmConstrained(p) => {
                let x = p.f.project_to_domain(z.x());
                let y = p.g.project_to_domain(z.y());
                out.block_mut(Block::X).copy_from_slice(&x);
                out.block_mut(Block::Y).copy_from_slice(&y);
            }
        }
        out
    }
}

/// Free-function forms matching the operation names.
pub fn lagrangian(prob: &SaddleProblem, z: &PrimalDualPoint) -> Result<f64> {
    prob.lagrangian(z)
}

pub fn gap(prob: &SaddleProblem, zbar: &PrimalDualPoint, zref: &PrimalDualPoint) -> Result<f64> {
    prob.gap(zbar, zref)
}
