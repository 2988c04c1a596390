use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdcert_cli::{
    cmd_compare, cmd_list, cmd_run, parse_method, seed_override, Check, CliError, CliResult, CompareConfig, EtaArg,
    ProblemSource, RunConfig, EXIT_CONFIG,
};
use pdcert_core::solvers::Algorithm;

#[derive(Parser)]
#[command(name = "pdcert", version, about = "Run and certify primal-dual methods on saddle problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method, certify the trace, write CSV and JSON.
    Run(RunArgs),
    /// Run two methods from the same start and report the iterate discrepancy.
    Compare(CompareArgs),
    /// List algorithms, builtin generators and checks.
    List,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem JSON file or `builtin:NAME`.
    #[arg(long)]
    problem: String,
    /// Rows / dual size for builtin generators.
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Columns / primal size for builtin generators.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Overridden by `PD_SEED`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step size, or `auto` for pdhg and linearized_pdhg.
    #[arg(long)]
    eta: Option<EtaArg>,
    #[arg(long, default_value_t = 1.0)]
    eta_safety: f64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    algorithm: String,
    #[command(flatten)]
    common: ProblemArgs,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Comma-separated subset of inclusion,per_iterate,ergodic,assumption,inexact.
    #[arg(long, default_value = "inclusion,per_iterate,ergodic")]
    checks: String,
    /// Enables an inexact run with ‖εᵏ‖ = scale·k^(−exponent).
    #[arg(long)]
    error_scale: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    error_exponent: f64,
    /// D in the inexact bound; default twice the largest distance to the reference.
    #[arg(long)]
    diameter: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// `ppm`, `ppm:pdhg`, `ppm:admm` or an algorithm name.
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[command(flatten)]
    common: ProblemArgs,
    /// Problem for side B; must match `--problem`.
    #[arg(long)]
    problem_b: Option<String>,
    #[arg(long, default_value_t = 200)]
    iters: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn seed(configured: u64) -> CliResult<u64> {
    seed_override(configured, std::env::var("PD_SEED").ok().as_deref())
}

fn run(args: RunArgs, out: &mut dyn Write) -> CliResult<i32> {
    let c = &args.common;
    let mut cfg = RunConfig::new(
        Algorithm::parse(&args.algorithm)?,
        ProblemSource::parse(&c.problem, c.m, c.n),
    );
    cfg.eta = c.eta;
    cfg.eta_safety = c.eta_safety;
    cfg.iters = args.iters;
    cfg.seed = seed(c.seed)?;
    cfg.checks = Check::parse_list(&args.checks)?;
    cfg.error_schedule = args.error_scale.map(|s| (s, args.error_exponent));
    cfg.diameter = args.diameter;
    cfg.csv = args.csv;
    cfg.report = args.report;
    Ok(cmd_run(&cfg, out)?.exit_code)
}

fn compare(args: CompareArgs, out: &mut dyn Write) -> CliResult<i32> {
    let c = &args.common;
    let mut cfg = CompareConfig::new(
        parse_method(&args.a)?,
        parse_method(&args.b)?,
        ProblemSource::parse(&c.problem, c.m, c.n),
    );
    cfg.problem_b = args.problem_b.map(|p| ProblemSource::parse(&p, c.m, c.n));
    cfg.eta = c.eta;
    cfg.eta_safety = c.eta_safety;
    cfg.iters = args.iters;
    cfg.seed = seed(c.seed)?;
    cfg.report = args.report;
    Ok(cmd_compare(&cfg, out)?.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Run(a) => run(a, &mut stdout),
        Command::Compare(a) => compare(a, &mut stdout),
        Command::List => {
            let _ = write!(stdout, "{}", cmd_list());
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e @ CliError::Config(_)) | Err(e @ CliError::Io { .. }) => {
            eprintln!("pdcert: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
