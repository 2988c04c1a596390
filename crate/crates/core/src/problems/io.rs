//! Problem JSON reader.
//!
//! ```json
//! { "form": "pdhg|admm|quadratic", "A": [[...]], "B": [[...]], "b": [...],
//!   "f": {"kind": "...", ...}, "g": {...}, "eta": 0.5 | "auto",
//!   "z0": {"x": [...], "lambda": [...], "y": [...]} }
//! ```
//!
//! Function kinds: `zero {dim?}`, `quadratic {Q, c?, offset?}`,
//! `l1 {weight, dim?}`, `box {lo, hi}`, `affine {c}`. Missing dimensions
//! are inferred from `A`/`B`.
//!
//! For `pdhg`, `g` is conjugated on load; pass `gstar` instead to give
//! the conjugate directly. For `quadratic`, `f` supplies `Qₓ, c` and `g`
//! supplies the dual penalty `Q_λ` (its linear term is folded into `b`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AdmmConstrained, BilinearQuadratic, Block, PdhgComposite, PrimalDualPoint, SaddleProblem};
use crate::error::{check_dim, Error, Result};
use crate::functions::ConvexFunction;
use crate::linalg::{DenseMatrix, SymmetricOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Pdhg,
    Admm,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Zero {
        #[serde(default)]
        dim: Option<usize>,
    },
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
        #[serde(default)]
        c: Option<Vec<f64>>,
        #[serde(default)]
        offset: f64,
    },
    L1 {
        weight: f64,
        #[serde(default)]
        dim: Option<usize>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Affine {
        c: Vec<f64>,
    },
}

impl FunctionSpec {
    pub fn build(&self, dim: usize) -> Result<ConvexFunction> {
        let f = match self {
            FunctionSpec::Zero { dim: d } => ConvexFunction::zero(d.unwrap_or(dim)),
            FunctionSpec::Quadratic { q, c, offset } => {
                let q = SymmetricOperator::from_rows(q)?;
                let c = c.clone().unwrap_or_else(|| vec![0.0; q.dim()]);
                ConvexFunction::quadratic_with_offset(q, c, *offset)?
            }
            FunctionSpec::L1 { weight, dim: d } => ConvexFunction::l1(*weight, d.unwrap_or(dim))?,
            FunctionSpec::Box { lo, hi } => ConvexFunction::indicator_box(lo.clone(), hi.clone())?,
            FunctionSpec::Affine { c } => ConvexFunction::affine(c.clone()),
        };
        check_dim("function dimension", dim, f.dim())?;
        Ok(f)
    }
}

/// `"eta": 0.25` or `"eta": "auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Value(f64),
    Named(String),
}

impl EtaSpec {
    /// `None` for `auto`.
    pub fn explicit(&self) -> Result<Option<f64>> {
        match self {
            EtaSpec::Value(v) if *v > 0.0 && v.is_finite() => Ok(Some(*v)),
            EtaSpec::Value(v) => Err(Error::InvalidInput(format!("eta must be positive, got {v}"))),
            EtaSpec::Named(s) if s == "auto" => Ok(None),
            EtaSpec::Named(s) => Err(Error::InvalidInput(format!("eta must be a number or \"auto\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub form: Form,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B", default)]
    pub bmat: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub f: Option<FunctionSpec>,
    #[serde(default)]
    pub g: Option<FunctionSpec>,
    #[serde(default)]
    pub gstar: Option<FunctionSpec>,
    #[serde(default)]
    pub eta: Option<EtaSpec>,
    #[serde(default)]
    pub z0: Option<BTreeMap<String, Vec<f64>>>,
}

/// A loaded problem file.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub problem: SaddleProblem,
    pub z0: PrimalDualPoint,
    /// `None` means `auto` or absent.
    pub eta: Option<f64>,
}

fn matrix(rows: &[Vec<f64>], cols_hint: usize) -> Result<DenseMatrix> {
    if rows.is_empty() {
        return Ok(DenseMatrix::zeros(0, cols_hint));
    }
    DenseMatrix::from_rows(rows)
}

fn func(spec: &Option<FunctionSpec>, dim: usize) -> Result<ConvexFunction> {
    match spec {
        Some(s) => s.build(dim),
        None => Ok(ConvexFunction::zero(dim)),
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("problem JSON: {e}")))
    }

    pub fn load(&self) -> Result<LoadedProblem> {
        let a = matrix(&self.a, 0)?;
        let (m, n) = (a.rows(), a.cols());
        let b = self.b.clone().unwrap_or_else(|| vec![0.0; m]);
        let problem = match self.form {
            Form::Quadratic => {
                let (qx, c) = func(&self.f, n)?
                    .as_quadratic()
                    .ok_or_else(|| Error::InvalidInput("quadratic form needs a quadratic-family f".into()))?;
                let (ql, cl) = func(&self.g, m)?
                    .as_quadratic()
                    .ok_or_else(|| Error::InvalidInput("quadratic form needs a quadratic-family g".into()))?;
                check_dim("b", m, b.len())?;
                let b = b.iter().zip(&cl).map(|(x, y)| x + y).collect();
                SaddleProblem::BilinearQuadratic(BilinearQuadratic::new(qx, ql, a, b, c)?)
            }
            Form::Pdhg => {
                let f = func(&self.f, n)?;
                let gstar = match (&self.g, &self.gstar) {
                    (Some(_), Some(_)) => {
                        return Err(Error::InvalidInput("give either g or gstar, not both".into()))
                    }
                    (_, Some(gs)) => gs.build(m)?,
                    (g, None) => func(g, m)?.conjugate()?,
                };
                SaddleProblem::PdhgComposite(PdhgComposite::new(f, gstar, a)?)
            }
            Form::Admm => {
                let bm = self
                    .bmat
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("admm form needs B".into()))?;
                let bm = matrix(bm, 0)?;
                let f = func(&self.f, n)?;
                let g = func(&self.g, bm.cols())?;
                SaddleProblem::AdmmConstrained(AdmmConstrained::new(f, g, a, bm, b)?)
            }
        };
        let mut z0 = PrimalDualPoint::zeros(problem.layout());
        if let Some(blocks) = &self.z0 {
            for (key, vals) in blocks {
                let block = match key.as_str() {
                    "x" => Block::X,
                    "y" => Block::Y,
                    "lambda" | "λ" => Block::Lambda,
                    other => {
                        return Err(Error::InvalidInput(format!("unknown z0 block {other:?}")))
                    }
                };
                let dst = z0.block_mut(block);
                check_dim("z0 block", dst.len(), vals.len())?;
                dst.copy_from_slice(vals);
            }
        }
        let eta = match &self.eta {
            Some(e) => e.explicit()?,
            None => None,
        };
        Ok(LoadedProblem { problem, z0, eta })
    }
}
