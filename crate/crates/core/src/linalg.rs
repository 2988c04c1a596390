//! Dense vectors and matrices, semi-norms, PSD tests and spectral norms.
//!
//! Everything here is desk scale (dimensions up to a few hundred) and
//! stored densely in row-major order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Relative tolerance used to clamp tiny negative quadratic forms and to
/// decide positive semi-definiteness.
pub const PSD_TOL: f64 = 1e-10;

/// Iteration cap for power iteration.
pub const MAX_POWER_ITERS: usize = 10_000;

/// Default relative accuracy for [`spectral_norm`].
pub const SPECTRAL_TOL: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("matrix entries", rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Builds a matrix from rows; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim("matrix row length", c, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`
    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            if *yi != 0.0 {
                axpy(*yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                axpy(a, other.row(k), dst);
            }
        }
        out
    }

    /// `AᵀA`, always symmetric.
    pub fn gram(&self) -> SymmetricOperator {
        SymmetricOperator::from_dense_unchecked(self.transpose().matmul(self))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: scale(&self.data, s),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for DenseMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<DenseMatrix> for Vec<Vec<f64>> {
    fn from(m: DenseMatrix) -> Self {
        m.to_rows()
    }
}

/// Dense symmetric matrix. Symmetry holds exactly: the upper triangle is
/// mirrored into the lower one on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymmetricOperator {
    inner: DenseMatrix,
}

impl SymmetricOperator {
    /// Mirrors the upper triangle of a square matrix.
    pub fn from_dense(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput(format!(
                "symmetric operator needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self::from_dense_unchecked(m))
    }

    fn from_dense_unchecked(mut m: DenseMatrix) -> Self {
        let n = m.rows();
        for i in 0..n {
            for j in 0..i {
                let v = m.get(j, i);
                m.set(i, j, v);
            }
        }
        Self { inner: m }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_dense(DenseMatrix::from_rows(rows)?)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DenseMatrix::zeros(dim, dim),
        }
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        Self {
            inner: DenseMatrix::diag(&vec![s; dim]),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn as_dense(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.inner.matvec(v)
    }

    /// Raw `vᵀPv` without clamping.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.apply(v))
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        let data = add(self.inner.as_slice(), other.inner.as_slice());
        Self {
            inner: DenseMatrix {
                rows: self.dim(),
                cols: self.dim(),
                data,
            },
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            inner: self.inner.scaled(s),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    /// Eigenvalues in ascending order (cyclic Jacobi).
    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(&self.inner)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymmetricOperator {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymmetricOperator> for Vec<Vec<f64>> {
    fn from(m: SymmetricOperator) -> Self {
        m.inner.to_rows()
    }
}

/// `vᵀPv`, clamping negatives of magnitude at most `PSD_TOL·‖v‖²` to zero.
pub fn seminorm_sq(p: &SymmetricOperator, v: &[f64]) -> Result<f64> {
    seminorm_sq_with_tol(p, v, PSD_TOL)
}

pub fn seminorm_sq_with_tol(p: &SymmetricOperator, v: &[f64], psd_tol: f64) -> Result<f64> {
    check_dim("seminorm vector", p.dim(), v.len())?;
    let q = p.quadratic_form(v);
    if q >= 0.0 {
        return Ok(q);
    }
    // Scale the slack by ‖P‖ as well so that large operators are not
    // rejected for rounding noise.
    let threshold = psd_tol * dot(v, v) * (1.0 + p.frobenius_norm());
    if -q <= threshold {
        Ok(0.0)
    } else {
        Err(Error::NotPsd { value: q, threshold })
    }
}

/// Largest singular value of `a` via power iteration on `AᵀA`.
///
/// The seed is the normalized all-ones vector. If it lies orthogonal to
/// the dominant singular space (the estimate collapses to zero while `a`
/// is nonzero) the iteration restarts from a seeded random perturbation.
pub fn spectral_norm(a: &DenseMatrix, tol: f64) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("spectral norm of an empty matrix".into()));
    }
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        return Ok(0.0);
    }
    let n = a.cols();
    let mut seed = vec![1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best = 0.0f64;
    for _restart in 0..4 {
        match power_iterate(a, &seed, tol) {
            PowerOutcome::Converged(s) => return Ok(s),
            PowerOutcome::Stagnated => {
                seed = seed
                    .iter()
                    .map(|v| v + rng.random_range(-0.5..0.5))
                    .collect();
            }
            PowerOutcome::MaxIters(s) => {
                best = best.max(s);
                break;
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_POWER_ITERS,
        estimate: best,
    })
}

enum PowerOutcome {
    Converged(f64),
    Stagnated,
    MaxIters(f64),
}

fn power_iterate(a: &DenseMatrix, seed: &[f64], tol: f64) -> PowerOutcome {
    let scale_floor = f64::EPSILON * a.frobenius_norm().powi(2);
    let mut v = scale(seed, 1.0 / norm2(seed));
    let mut mu = 0.0;
    for _ in 0..MAX_POWER_ITERS {
        let w = a.matvec_t(&a.matvec(&v));
        mu = dot(&v, &w);
        let wn = norm2(&w);
        if wn <= scale_floor {
            return PowerOutcome::Stagnated;
        }
        // residual of the eigenpair (mu, v) of AᵀA
        let mut r = w.clone();
        axpy(-mu, &v, &mut r);
        if norm2(&r) <= tol * mu {
            return PowerOutcome::Converged(mu.max(0.0).sqrt());
        }
        v = scale(&w, 1.0 / wn);
    }
    PowerOutcome::MaxIters(mu.max(0.0).sqrt())
}

/// True iff the smallest eigenvalue of `p` is at least `-tol·(1+‖P‖_F)`.
///
/// Decided by attempting a Cholesky factorization of `P + tol·(1+‖P‖_F)·I`.
pub fn is_psd(p: &SymmetricOperator, tol: f64) -> bool {
    let n = p.dim();
    let shift = tol * (1.0 + p.frobenius_norm());
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = p.get(j, j) + shift;
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d.is_nan() || d < 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = p.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = if d > 0.0 {
                s / d
            } else if s.abs() <= shift {
                0.0
            } else {
                return false;
            };
        }
    }
    true
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * fro {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput("LU needs a square matrix".into()));
        }
        let n = m.rows();
        let mut lu = m.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let max_abs = lu.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let pivot_floor = (n as f64) * f64::EPSILON * max_abs;
        for k in 0..n {
            let (piv, pval) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty pivot column");
            if pval <= pivot_floor || pval == 0.0 {
                return Err(Error::Singular);
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

/// Solves `m x = b`.
pub fn solve(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_dim("right-hand side", m.rows(), b.len())?;
    Ok(LuFactor::new(m)?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn sym(rows: &[&[f64]]) -> SymmetricOperator {
        SymmetricOperator::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn seminorm_examples() {
        let i2 = SymmetricOperator::scaled_identity(2, 1.0);
        assert_eq!(seminorm_sq(&i2, &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(seminorm_sq(&SymmetricOperator::zeros(3), &[1.0, -2.0, 5.0]).unwrap(), 0.0);
        let p = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert_eq!(seminorm_sq(&p, &[1.0, 1.0]).unwrap(), 6.0);
    }

    #[test]
    fn seminorm_errors() {
        let p = sym(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(matches!(
            seminorm_sq(&p, &[0.0, 1.0]),
            Err(Error::NotPsd { .. })
        ));
        assert!(matches!(
            seminorm_sq(&p, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        // rounding-level negativity is clamped
        let tiny = sym(&[&[-1e-14]]);
        assert_eq!(seminorm_sq(&tiny, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_mirrors_upper_triangle() {
        let p = sym(&[&[1.0, 2.0], &[7.0, 3.0]]);
        assert_eq!(p.get(1, 0), 2.0);
    }

    #[test]
    fn spectral_norm_examples() {
        let tol = 1e-12;
        let i3 = DenseMatrix::identity(3);
        assert!((spectral_norm(&i3, tol).unwrap() - 1.0).abs() < 1e-12);
        let d = DenseMatrix::diag(&[3.0, 1.0]);
        assert!((spectral_norm(&d, tol).unwrap() - 3.0).abs() < 1e-10);
        // AᵀA = [[10,14],[14,20]]; σ² = 15 + √221
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let oracle = (15.0 + 221f64.sqrt()).sqrt();
        let s = spectral_norm(&a, tol).unwrap();
        assert!((s - oracle).abs() < 1e-10);
        assert!((s - 5.4650).abs() < 1e-4);
    }

    #[test]
    fn spectral_norm_restarts_on_orthogonal_seed() {
        // all-ones is in the null space of this matrix
        let a = DenseMatrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let s = spectral_norm(&a, 1e-12).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn spectral_norm_zero_and_empty() {
        assert_eq!(spectral_norm(&DenseMatrix::zeros(2, 3), 1e-12).unwrap(), 0.0);
        assert!(spectral_norm(&DenseMatrix::zeros(0, 3), 1e-12).is_err());
    }

    #[test]
    fn is_psd_examples() {
        assert!(is_psd(&SymmetricOperator::zeros(3), PSD_TOL));
        assert!(is_psd(&sym(&[&[1.0, 1.0], &[1.0, 1.0]]), PSD_TOL));
        let p = sym(&[&[0.5, 1.0], &[1.0, 0.5]]);
        assert!(!is_psd(&p, PSD_TOL));
        let eig = p.eigenvalues();
        assert!((eig[0] + 0.5).abs() < 1e-12 && (eig[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn lu_solves_and_detects_singular() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let x = solve(&m, &[4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let s = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(solve(&s, &[1.0, 1.0]), Err(Error::Singular));
    }

    #[test]
    fn dense_matrix_rejects_bad_input() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    fn psd_from(g: &[f64], n: usize) -> SymmetricOperator {
        let g = DenseMatrix::new(n, n, g.to_vec()).unwrap();
        g.gram()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::new(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn seminorm_nonnegative_for_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_matrix(&mut rng, 3, 5);
        let p = g.gram(); // rank 3, singular 5x5
        for _ in 0..1000 {
            let v: Vec<f64> = (0..5).map(|_| rng.random_range(-10.0..10.0)).collect();
            assert!(seminorm_sq(&p, &v).unwrap() >= 0.0);
        }
    }

    #[test]
    fn spectral_norm_beats_random_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for size in 1..=8 {
            let a = random_matrix(&mut rng, size, 9 - size);
            let s = spectral_norm(&a, 1e-12).unwrap();
            // independent route: Jacobi eigenvalues of AᵀA
            let jac = a.gram().max_eigenvalue().sqrt();
            assert!((s - jac).abs() <= 1e-9 * jac.max(1.0));
            let mut brute = 0.0f64;
            for _ in 0..10_000 {
                let v: Vec<f64> = (0..a.cols()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let nv = norm2(&v);
                brute = brute.max(norm2(&a.matvec(&v)) / nv);
            }
            assert!(brute <= s * (1.0 + 1e-12));
            assert!(brute >= 0.9 * s, "size {size}: brute {brute} vs {s}");
        }
    }

    proptest! {
        #[test]
        fn seminorm_homogeneous(g in prop::collection::vec(-2.0f64..2.0, 9),
                                v in prop::collection::vec(-5.0f64..5.0, 3),
                                c in -10.0f64..10.0) {
            let p = psd_from(&g, 3);
            let base = seminorm_sq(&p, &v).unwrap();
            let scaled = seminorm_sq(&p, &scale(&v, c)).unwrap();
            prop_assert!((scaled - c * c * base).abs() <= 1e-12 * (1.0 + c * c * base));
        }

        #[test]
        fn seminorm_triangle(g in prop::collection::vec(-2.0f64..2.0, 16),
                             u in prop::collection::vec(-5.0f64..5.0, 4),
                             v in prop::collection::vec(-5.0f64..5.0, 4)) {
            let p = psd_from(&g, 4);
            let lhs = seminorm_sq(&p, &add(&u, &v)).unwrap().sqrt();
            let rhs = seminorm_sq(&p, &u).unwrap().sqrt() + seminorm_sq(&p, &v).unwrap().sqrt();
            prop_assert!(lhs <= rhs + 1e-10);
        }

        #[test]
        fn gram_matrices_are_psd(g in prop::collection::vec(-3.0f64..3.0, 12)) {
            let m = DenseMatrix::new(3, 4, g).unwrap();
            prop_assert!(is_psd(&m.gram(), PSD_TOL));
        }
    }
}
