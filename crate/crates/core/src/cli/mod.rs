//! Command-line front end: `solve`, `families`, `verify`, `eval` and `pipeline`.

mod commands;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::verify::DEFAULT_SEED;

pub use commands::{
    cmd_eval, cmd_families, cmd_solve, cmd_verify, parse_complex, BasisArtifact, EvalArtifact,
    FamiliesArtifact, ProblemRecord, VerifyArtifact, CAUCHY_TOL, CR_TOL, TOOL,
};

/// Environment variable that takes precedence over `--seed`.
pub const SEED_ENV: &str = "NILSOLVE_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nilsolve", version, about = "Exact solution families for linear constant-coefficient PDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the characteristic equation and write the basis.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a solution family from a basis file.
    Families {
        #[arg(long)]
        basis: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a families file against its equation.
    Verify {
        #[arg(long)]
        families: PathBuf,
        #[command(flatten)]
        check: VerifyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every member of a families file at the points of a JSON file.
    Eval {
        #[arg(long)]
        families: PathBuf,
        /// JSON array of real coordinate vectors.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// solve, families and verify in one go, writing all artifacts to a directory.
    Pipeline {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        check: VerifyArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Order-by-order lifting of the characteristic equation.
    Generic,
    /// Closed-form recurrences of the preset.
    Oracle,
}

#[derive(Clone, Debug, Args)]
pub struct ProblemArgs {
    /// Built-in equation: laplace3d, wave3d, beam, beam_hyp, biharmonic, helmholtz, hydro.
    #[arg(long, required_unless_present = "pde", conflicts_with = "pde")]
    pub preset: Option<String>,
    /// Equation as JSON `{"d": …, "terms": [{"alpha": […], "re": …, "im": …}]}`.
    #[arg(long)]
    pub pde: Option<PathBuf>,
    /// Dimension of the ρ-chain algebra.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Override free coefficients: `k0=0.5`, `m=1,0:1` (prefix), `e2.3=1:-1`.
    #[arg(long = "free", value_name = "NAME=VALUES")]
    pub free: Vec<String>,
    /// JSON object mapping free names to arrays of `[re, im]`.
    #[arg(long)]
    pub free_file: Option<PathBuf>,
    /// `plus`, `minus` or `outer,inner` for presets; `index:i`, `pos-imag`, `nearest:re,im`, … otherwise.
    #[arg(long)]
    pub branch: Option<String>,
    /// Variable (1-based) whose vector is solved for; defaults to the last one.
    #[arg(long)]
    pub lift: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Generic)]
    pub method: Method,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub lambda: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Exp,
    Analytic,
}

#[derive(Clone, Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Exp)]
    pub kind: KindArg,
    /// Largest member index; defaults to `n − 1`.
    #[arg(long)]
    pub max: Option<usize>,
    /// Analytic function(s): `exp`, `sin`, `cos`, `poly:c0,c1,…`, `reciprocal:c`, `reciprocal:safe`.
    #[arg(long = "F", value_name = "FUNCTION")]
    pub functions: Vec<String>,
    /// Also write the members as LaTeX.
    #[arg(long)]
    pub latex: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    Residual,
    Cauchy,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = CheckArg::Residual)]
    pub check: CheckArg,
    /// Sample points for the residual check.
    #[arg(long, visible_alias = "samples", default_value_t = 100)]
    pub points: usize,
    /// Sample seed; defaults to the seed recorded in the families file.
    #[arg(long = "sample-seed")]
    pub sample_seed: Option<u64>,
    /// Half-width of the sampling cube.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Points per member also checked by finite differences.
    #[arg(long, default_value_t = 5)]
    pub fd_points: usize,
    #[arg(long, default_value_t = 3)]
    pub n_index: usize,
    /// Trapezoidal nodes on the loop for the Cauchy check.
    #[arg(long, default_value_t = 1024)]
    pub quad_points: usize,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Math(Error),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Math(e) if e.is_degenerate() => EXIT_DEGENERATE,
            CliError::Math(_) => EXIT_USAGE,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Verification(s) => f.write_str(s),
            CliError::Math(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Math(e)
    }
}

/// `NILSOLVE_SEED` if set, else the flag.
pub fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
