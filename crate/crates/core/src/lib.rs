//! Primal-dual first-order methods written as one update rule
//! `P(zᵏ − zᵏ⁺¹) ∈ F(zᵏ⁺¹)`, with runtime certificates for the
//! inequalities that govern them.
//!
//! ```
//! use pdcert_core::prelude::*;
//!
//! let (prob, z0) = make_instance(&InstanceSpec::ToyBilinear).unwrap();
//! let trace = run(Algorithm::Ppm, &prob, &z0, EtaChoice::Explicit(1.0), 100, &RunOptions::default()).unwrap();
//! let zstar = saddle_oracle(&prob).unwrap().zstar;
//! let report = certify_run(&trace, &prob, &trace.metric, &zstar, None).unwrap();
//! assert!(report.summary.all_pass);
//! ```

pub mod certify;
pub mod error;
pub mod functions;
pub mod linalg;
pub mod pnorm;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use functions::{ConvexFunction, FunctionKind, ProxOperator};
pub use linalg::{DenseMatrix, SymmetricOperator};
pub use pnorm::{EtaRule, StepSize};
pub use problems::{Block, Layout, PrimalDualPoint, SaddleProblem};

/// The types and entry points most callers need.
pub mod prelude {
    pub use crate::certify::{
        certify_run, check_assumption_gap, ergodic_bound, inexact_bound, rate_slope, sample_references,
        saddle_oracle, CertificateReport, SaddleCertificate,
    };
    pub use crate::problems::instances::{make_instance, InstanceSpec};
    pub use crate::solvers::{run, run_inexact, Algorithm, ErrorSchedule, EtaChoice, RunOptions, RunTrace, Solver};
    pub use crate::{Block, ConvexFunction, DenseMatrix, Error, PrimalDualPoint, SaddleProblem, StepSize, SymmetricOperator};
}
