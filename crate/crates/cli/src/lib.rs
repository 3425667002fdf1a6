//! Command-line front end. [`run`] parses arguments, dispatches and returns
//! the exit code together with what should be printed.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use polygame_core::SolverParams;
use serde_json::{json, Value};

mod commands;
mod io;
mod reproduce;

pub use io::{load_vector_from_json, render};

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "POLYGAME_SEED";

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "polygame", version, about = "Polymatroid congestion games: solvers, probes and certificates")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for every random choice; POLYGAME_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Round-robin sweeps of the best-response dynamics.
    #[arg(long, global = true)]
    pub max_sweeps: Option<usize>,
    /// Iterations per best response (set-system players).
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find equilibria from seeded random starts.
    Solve {
        game: PathBuf,
        #[arg(long, default_value_t = 1)]
        starts: usize,
        #[arg(long)]
        damping: Option<f64>,
        /// Tolerance of the final equilibrium check.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check a profile against the marginal-cost conditions.
    Verify {
        game: PathBuf,
        profile: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Multi-start multiplicity probe.
    Probe {
        game: PathBuf,
        #[arg(long, default_value_t = 10)]
        starts: usize,
        #[arg(long)]
        damping: Option<f64>,
    },
    /// Matroid utilities.
    #[command(subcommand)]
    Matroid(MatroidCommand),
    /// Exchange graphs and flows between base-polytope points.
    Exchange {
        oracle: PathBuf,
        x: PathBuf,
        y: Option<PathBuf>,
        /// Write the exchange graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Rebuild a reference instance and check its expected results.
    Reproduce {
        /// triangle, k4, cycle:<k> or queueing
        target: String,
        /// Also write the instance and expected results into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural property checks.
    #[command(subcommand)]
    Property(PropertyCommand),
}

#[derive(Debug, Subcommand)]
pub enum MatroidCommand {
    /// Rank axioms, polymatroid certificate and base orderability.
    Check { matroid: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum PropertyCommand {
    /// Search for conflicting pairs of base-polytope points.
    Bidir {
        oracle: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Whether every game on the graph has unique equilibrium loads.
    Graph { graph: PathBuf },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Input { kind: &'static str, message: String },
    /// A profile that violates its strategy constraints, with per-player residuals.
    Infeasible { message: String, diagnostics: Value },
    NoConvergence(String),
}

impl Failure {
    pub fn input(kind: &'static str, message: impl ToString) -> Self {
        Failure::Input { kind, message: message.to_string() }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Input { .. } | Failure::Infeasible { .. } => EXIT_INPUT,
            Failure::NoConvergence(_) => EXIT_NO_CONVERGENCE,
        }
    }

    fn to_json(&self) -> Value {
        let error = match self {
            Failure::Input { kind, message } => json!({"kind": kind, "message": message}),
            Failure::Infeasible { message, diagnostics } => {
                json!({"kind": "infeasible_profile", "message": message, "diagnostics": diagnostics})
            }
            Failure::NoConvergence(m) => json!({"kind": "no_convergence", "message": m}),
        };
        json!({"schema_version": polygame_core::SCHEMA_VERSION, "error": error})
    }
}

impl From<polygame_core::Error> for Failure {
    fn from(e: polygame_core::Error) -> Self {
        use polygame_core::Error as E;
        let kind = match &e {
            E::NoConvergence { .. } => return Failure::NoConvergence(e.to_string()),
            E::InfeasibleProfile(_) => "infeasible_profile",
            E::NotInPolytope { .. } => "not_in_polytope",
            E::QueueOverload { .. } | E::Unstable(_) => "unstable",
            E::GroundTooLarge { .. } | E::GraphTooLarge { .. } | E::TooManyBases { .. } => "too_large",
            E::Json(_) => "json",
            _ => "invalid_input",
        };
        Failure::input(kind, e)
    }
}

/// A command's JSON document and its verdict code.
pub struct Report {
    pub doc: Value,
    pub code: u8,
}

impl Report {
    fn ok(doc: Value) -> Self {
        Report { doc, code: EXIT_OK }
    }

    fn verdict(doc: Value, positive: bool) -> Self {
        Report { doc, code: if positive { EXIT_OK } else { EXIT_NEGATIVE } }
    }
}

/// Effective configuration after flags and environment are merged.
#[derive(Debug, Clone)]
pub struct Config {
    pub seed: u64,
    pub params: SolverParams,
}

fn resolve_seed(flag: u64, env: Option<OsString>) -> Result<u64, Failure> {
    match env {
        None => Ok(flag),
        Some(v) => v
            .to_str()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Failure::input("invalid_seed", format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
    }
}

/// Runs the CLI on `argv` (program name first). `env_seed` is the value of
/// [`SEED_ENV`], if set.
pub fn run_with_env<I, T>(argv: I, env_seed: Option<OsString>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let f = Failure::input("usage", text.trim_end());
                Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: render(&f.to_json()) }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    let result = resolve_seed(cli.global.seed, env_seed).and_then(|seed| {
        let mut params = SolverParams::default();
        if let Some(s) = cli.global.max_sweeps {
            params.max_sweeps = s;
        }
        if let Some(s) = cli.global.max_iters {
            params.max_iters = s;
        }
        let config = Config { seed, params };
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(j) = cli.global.jobs {
            if j == 0 {
                return Err(Failure::input("invalid_flag", "--jobs must be positive"));
            }
            pool = pool.num_threads(j);
        }
        let pool = pool.build().map_err(|e| Failure::input("thread_pool", e))?;
        pool.install(|| commands::dispatch(&cli.command, &config))
    });
    match result {
        Ok(r) => Outcome { code: r.code, stdout: render(&r.doc), stderr: String::new() },
        Err(f) => Outcome { code: f.code(), stdout: String::new(), stderr: render(&f.to_json()) },
    }
}

/// [`run_with_env`] reading [`SEED_ENV`] from the process environment.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_env(argv, std::env::var_os(SEED_ENV))
}
