//! The metric matrices `P` that turn PPM, PDHG and ADMM into the same
//! update `P(zᵏ − zᵏ⁺¹) ∈ F(zᵏ⁺¹)`, and the step sizes keeping them PSD.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, DenseMatrix, SymmetricOperator, SPECTRAL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    /// `η = s/‖A‖₂`
    Pdhg,
    /// `η = s/(L + ‖A‖₂)`
    LinearizedPdhg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSize {
    eta: f64,
    /// Set when `eta` was derived from a rule.
    rule: Option<EtaRule>,
}

impl StepSize {
    pub fn explicit(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidInput(format!("step size must be positive, got {eta}")));
        }
        Ok(Self { eta, rule: None })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn rule(&self) -> Option<EtaRule> {
        self.rule
    }

    pub fn is_auto(&self) -> bool {
        self.rule.is_some()
    }
}

/// `(1/η)·I`
pub fn ppm_matrix(eta: StepSize, dim: usize) -> SymmetricOperator {
    SymmetricOperator::scaled_identity(dim, 1.0 / eta.eta)
}

/// `[[ (1/η)Iₙ, Aᵀ ], [ A, (1/η)Iₘ ]]` for `A` of size `m×n`.
pub fn pdhg_matrix(eta: StepSize, a: &DenseMatrix) -> SymmetricOperator {
    let (m, n) = (a.rows(), a.cols());
    let mut p = DenseMatrix::zeros(n + m, n + m);
    let inv = 1.0 / eta.eta;
    for i in 0..n + m {
        p.set(i, i, inv);
    }
    for i in 0..m {
        for j in 0..n {
            p.set(n + i, j, a.get(i, j));
            p.set(j, n + i, a.get(i, j));
        }
    }
    SymmetricOperator::from_dense(p).expect("square by construction")
}

/// `[[0, 0, 0], [0, ηAᵀA, −Aᵀ], [0, −A, (1/η)I]]` on `(y, x, λ)`.
///
/// Equals `GᵀG` with `G = [0, √η·A, −I/√η]`, hence PSD for every `η > 0`.
pub fn admm_matrix(eta: StepSize, a: &DenseMatrix, y_dim: usize) -> SymmetricOperator {
    let (m, n) = (a.rows(), a.cols());
    let dim = y_dim + n + m;
    let l0 = y_dim + n;
    let mut p = DenseMatrix::zeros(dim, dim);
    let ata = a.gram();
    for i in 0..n {
        for j in 0..n {
            p.set(y_dim + i, y_dim + j, eta.eta * ata.get(i, j));
        }
    }
    for i in 0..m {
        for j in 0..n {
            p.set(l0 + i, y_dim + j, -a.get(i, j));
            p.set(y_dim + j, l0 + i, -a.get(i, j));
        }
        p.set(l0 + i, l0 + i, 1.0 / eta.eta);
    }
    SymmetricOperator::from_dense(p).expect("square by construction")
}

/// Largest admissible step for the given rule, scaled by `safety`.
pub fn auto_eta_with_safety(
    rule: EtaRule,
    a: &DenseMatrix,
    l_smooth: f64,
    safety: f64,
) -> Result<StepSize> {
    if !(safety > 0.0 && safety.is_finite()) {
        return Err(Error::InvalidInput(format!("eta safety must be positive, got {safety}")));
    }
    let norm = if a.rows() == 0 || a.cols() == 0 {
        0.0
    } else {
        spectral_norm(a, SPECTRAL_TOL)?
    };
    let denom = match rule {
        EtaRule::Pdhg => norm,
        EtaRule::LinearizedPdhg => {
            if l_smooth.is_nan() || l_smooth < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "smoothness must be nonnegative, got {l_smooth}"
                )));
            }
            l_smooth + norm
        }
    };
    if denom == 0.0 {
        return Err(Error::UnboundedStepSize);
    }
    Ok(StepSize {
        eta: safety / denom,
        rule: Some(rule),
    })
}

/// [`auto_eta_with_safety`] at the inclusive bound (`safety = 1`).
pub fn auto_eta(rule: EtaRule, a: &DenseMatrix, l_smooth: f64) -> Result<StepSize> {
    auto_eta_with_safety(rule, a, l_smooth, 1.0)
}
