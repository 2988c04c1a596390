//! Seeded builtin instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{AdmmConstrained, BilinearQuadratic, PdhgComposite, PrimalDualPoint, SaddleProblem};
use crate::error::{Error, Result};
use crate::functions::ConvexFunction;
use crate::linalg::{norm_inf, DenseMatrix, SymmetricOperator};

/// Builtin generator names with a one-line description each.
pub const GENERATORS: [(&str, &str); 4] = [
    ("toy_bilinear", "L(x,λ) = λx, z0 = (1, 0); unique saddle at the origin"),
    ("quadratic_saddle", "seeded ½xᵀQₓx + cᵀx + λᵀ(Ax−b) − ½λᵀQ_λλ with n primal, m dual (m = 0 gives a pure minimization)"),
    ("lasso", "seeded ½‖Mx−d‖² + w‖x‖₁ with M m×n, in composite form with g* a box indicator"),
    ("admm_consensus", "seeded ½‖x−p‖² + w‖y‖₁ s.t. Ax − y = b, A m×n; layout (y,x,λ)"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSpec {
    ToyBilinear,
    QuadraticSaddle { n: usize, m: usize, seed: u64 },
    Lasso { m: usize, n: usize, seed: u64 },
    AdmmConsensus { m: usize, n: usize, seed: u64 },
}

impl InstanceSpec {
    /// Resolves a generator name with its size parameters.
    pub fn from_name(name: &str, m: usize, n: usize, seed: u64) -> Result<Self> {
        match name {
            "toy_bilinear" => Ok(Self::ToyBilinear),
            "quadratic_saddle" => Ok(Self::QuadraticSaddle { n, m, seed }),
            "lasso" => Ok(Self::Lasso { m, n, seed }),
            "admm_consensus" => Ok(Self::AdmmConsensus { m, n, seed }),
            other => Err(Error::UnknownGenerator(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ToyBilinear => "toy_bilinear",
            Self::QuadraticSaddle { .. } => "quadratic_saddle",
            Self::Lasso { .. } => "lasso",
            Self::AdmmConsensus { .. } => "admm_consensus",
        }
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::new(rows, cols, data).expect("finite gaussian entries")
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Random PSD matrix `GᵀG/n + ridge·I`.
fn random_psd(rng: &mut ChaCha8Rng, n: usize, ridge: f64) -> SymmetricOperator {
    if n == 0 {
        return SymmetricOperator::zeros(0);
    }
    let g = gaussian_matrix(rng, n, n, 1.0 / (n as f64).sqrt());
    g.gram().add(&SymmetricOperator::scaled_identity(n, ridge))
}

fn check_sizes(name: &str, dims: &[(&str, usize, usize)]) -> Result<()> {
    for (what, v, lo) in dims {
        if *v < *lo || *v > 500 {
            return Err(Error::InvalidInput(format!(
                "{name}: {what} = {v} outside [{lo}, 500]"
            )));
        }
    }
    Ok(())
}

/// Deterministic instance plus its starting point.
pub fn make_instance(spec: &InstanceSpec) -> Result<(SaddleProblem, PrimalDualPoint)> {
    match *spec {
        InstanceSpec::ToyBilinear => {
            let prob = BilinearQuadratic::new(
                SymmetricOperator::zeros(1),
                SymmetricOperator::zeros(1),
                DenseMatrix::identity(1),
                vec![0.0],
                vec![0.0],
            )?;
            let prob = SaddleProblem::BilinearQuadratic(prob);
            let z0 = PrimalDualPoint::new(prob.layout(), vec![1.0, 0.0])?;
            Ok((prob, z0))
        }
        InstanceSpec::QuadraticSaddle { n, m, seed } => {
            check_sizes("quadratic_saddle", &[("n", n, 1), ("m", m, 0)])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let qx = random_psd(&mut rng, n, 0.1);
            let ql = random_psd(&mut rng, m, 0.1);
            let a = gaussian_matrix(&mut rng, m, n, 1.0 / (n as f64).sqrt());
            let b = gaussian_vec(&mut rng, m);
            let c = gaussian_vec(&mut rng, n);
            let prob = SaddleProblem::BilinearQuadratic(BilinearQuadratic::new(qx, ql, a, b, c)?);
            let z0 = PrimalDualPoint::new(prob.layout(), gaussian_vec(&mut rng, n + m))?;
            Ok((prob, z0))
        }
        InstanceSpec::Lasso { m, n, seed } => {
            check_sizes("lasso", &[("m", m, 1), ("n", n, 1)])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let design = gaussian_matrix(&mut rng, m, n, 1.0 / (m as f64).sqrt());
            let support = (n / 5).max(1);
            let mut x_true = vec![0.0; n];
            for xi in x_true.iter_mut().take(support) {
                *xi = rng.random_range(1.0..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            }
            let mut d = design.matvec(&x_true);
            for di in d.iter_mut() {
                *di += 0.01 * rng.sample::<f64, _>(StandardNormal);
            }
            // f(x) = ½‖Mx − d‖² = ½xᵀMᵀMx − (Mᵀd)ᵀx + ½‖d‖²
            let mtd = design.matvec_t(&d);
            let weight = 0.1 * norm_inf(&mtd);
            let f = ConvexFunction::quadratic_with_offset(
                design.gram(),
                mtd.iter().map(|v| -v).collect(),
                0.5 * crate::linalg::dot(&d, &d),
            )?;
            let g = ConvexFunction::l1(weight, n)?;
            let prob = SaddleProblem::PdhgComposite(PdhgComposite::from_primal(
                f,
                &g,
                DenseMatrix::identity(n),
            )?);
            let z0 = PrimalDualPoint::zeros(prob.layout());
            Ok((prob, z0))
        }
        InstanceSpec::AdmmConsensus { m, n, seed } => {
            check_sizes("admm_consensus", &[("m", m, 1), ("n", n, 1)])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = gaussian_matrix(&mut rng, m, n, 1.0 / (m as f64).sqrt());
            let p = gaussian_vec(&mut rng, n);
            let b = gaussian_vec(&mut rng, m);
            let f = ConvexFunction::quadratic_with_offset(
                SymmetricOperator::scaled_identity(n, 1.0),
                p.iter().map(|v| -v).collect(),
                0.5 * crate::linalg::dot(&p, &p),
            )?;
            let g = ConvexFunction::l1(0.5, m)?;
            let bmat = DenseMatrix::identity(m).scaled(-1.0);
            let prob = SaddleProblem::AdmmConstrained(AdmmConstrained::new(f, g, a, bmat, b)?);
            let z0 = PrimalDualPoint::zeros(prob.layout());
            Ok((prob, z0))
        }
    }
}
