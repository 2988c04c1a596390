//! The `pdcert` command line: run a method on a problem file or builtin
//! instance, certify the run, and write a CSV trace plus a JSON report.

mod compare;
mod list;
mod run;

use std::path::PathBuf;

use pdcert_core::problems::io::ProblemFile;
use pdcert_core::problems::{make_instance, InstanceSpec};
use pdcert_core::{PrimalDualPoint, SaddleProblem};

pub use compare::{cmd_compare, parse_method, CompareConfig, CompareOutcome, MethodSpec};
pub use list::{cmd_list, CHECKS};
pub use run::{cmd_run, RunOutcome, CSV_HEADER};

/// Process exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

impl From<pdcert_core::Error> for CliError {
    fn from(e: pdcert_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    Inclusion,
    PerIterate,
    Ergodic,
    Assumption,
    Inexact,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::Inclusion, Check::PerIterate, Check::Ergodic, Check::Assumption, Check::Inexact];

    pub fn name(self) -> &'static str {
        match self {
            Check::Inclusion => "inclusion",
            Check::PerIterate => "per_iterate",
            Check::Ergodic => "ergodic",
            Check::Assumption => "assumption",
            Check::Inexact => "inexact",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown check {s:?}")))
    }

    /// Comma-separated list, duplicates removed.
    pub fn parse_list(s: &str) -> CliResult<Vec<Self>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let c = Self::parse(part)?;
            if !out.contains(&c) {
                out.push(c);
            }
        }
        Ok(out)
    }
}

/// `eta` as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaArg {
    Value(f64),
    Auto,
}

impl std::str::FromStr for EtaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(EtaArg::Auto);
        }
        s.parse::<f64>()
            .map(EtaArg::Value)
            .map_err(|_| format!("eta must be a number or \"auto\", got {s:?}"))
    }
}

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    File(PathBuf),
    Builtin { name: String, m: usize, n: usize },
}

impl ProblemSource {
    /// `builtin:NAME` or a path to a problem JSON file.
    pub fn parse(s: &str, m: usize, n: usize) -> Self {
        match s.strip_prefix("builtin:") {
            Some(name) => ProblemSource::Builtin { name: name.to_string(), m, n },
            None => ProblemSource::File(PathBuf::from(s)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ProblemSource::File(p) => p.display().to_string(),
            ProblemSource::Builtin { name, m, n } => format!("builtin:{name}(m={m}, n={n})"),
        }
    }
}

/// A loaded problem with its start point and any step size from the file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub problem: SaddleProblem,
    pub z0: PrimalDualPoint,
    pub file_eta: Option<f64>,
}

pub fn load_problem(source: &ProblemSource, seed: u64) -> CliResult<Loaded> {
    match source {
        ProblemSource::Builtin { name, m, n } => {
            let spec = InstanceSpec::from_name(name, *m, *n, seed)?;
            let (problem, z0) = make_instance(&spec)?;
            Ok(Loaded { problem, z0, file_eta: None })
        }
        ProblemSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let loaded = ProblemFile::from_json(&text)?.load()?;
            Ok(Loaded {
                problem: loaded.problem,
                z0: loaded.z0,
                file_eta: loaded.eta,
            })
        }
    }
}

/// Everything `run` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: pdcert_core::solvers::Algorithm,
    pub problem: ProblemSource,
    /// `None`: take the problem file's value.
    pub eta: Option<EtaArg>,
    pub eta_safety: f64,
    pub iters: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// `(scale, exponent)` of `‖εᵏ‖ = scale·k^(−exponent)`.
    pub error_schedule: Option<(f64, f64)>,
    /// Diameter for the inexact bound; default twice the largest observed
    /// distance to the reference.
    pub diameter: Option<f64>,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(algorithm: pdcert_core::solvers::Algorithm, problem: ProblemSource) -> Self {
        Self {
            algorithm,
            problem,
            eta: None,
            eta_safety: 1.0,
            iters: 1000,
            seed: 0,
            checks: vec![Check::Inclusion, Check::PerIterate, Check::Ergodic],
            error_schedule: None,
            diameter: None,
            csv: None,
            report: None,
        }
    }
}

/// `PD_SEED` wins over the configured seed when set.
pub fn seed_override(configured: u64, env: Option<&str>) -> CliResult<u64> {
    match env {
        None => Ok(configured),
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("PD_SEED must be an unsigned integer, got {v:?}"))),
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_env_wins() {
        assert_eq!(seed_override(4, None).unwrap(), 4);
        assert_eq!(seed_override(4, Some(" 9 ")).unwrap(), 9);
        assert!(matches!(seed_override(4, Some("x")), Err(CliError::Config(_))));
    }

    #[test]
    fn check_lists() {
        assert_eq!(
            Check::parse_list("ergodic, inclusion,ergodic").unwrap(),
            vec![Check::Ergodic, Check::Inclusion]
        );
        assert!(Check::parse_list("ergodic,nope").is_err());
        assert!(Check::parse_list("").unwrap().is_empty());
    }

    #[test]
    fn eta_and_source_parsing() {
        assert_eq!("auto".parse::<EtaArg>().unwrap(), EtaArg::Auto);
        assert_eq!("0.25".parse::<EtaArg>().unwrap(), EtaArg::Value(0.25));
        assert!("fast".parse::<EtaArg>().is_err());
        assert_eq!(
            ProblemSource::parse("builtin:lasso", 3, 4),
            ProblemSource::Builtin { name: "lasso".into(), m: 3, n: 4 }
        );
        assert_eq!(ProblemSource::parse("p.json", 3, 4), ProblemSource::File("p.json".into()));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
    }
}
