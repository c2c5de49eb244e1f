//! Batch front-end over problem-spec files.
//!
//! Exit codes: 0 success, 1 numeric or validation failure, 2 spec, parse
//! or usage failure.

mod commands;
mod spec_file;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{grid_points, read_grid_csv};
pub use spec_file::{OutputSpec, ProblemSpec, SolverSpec, SpecDoc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SPEC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "charpar", version, about = "Characteristic-parallelogram checks and solvers for hyperbolic PDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check hyperbolicity, characteristic residuals and boundary data.
    Validate(Common),
    /// Evaluate the parallelogram identity for a known solution.
    CheckIdentity(IdentityArgs),
    /// Run the solver block and write `x1,x2,u` CSV.
    Solve(SolveArgs),
    /// Trace characteristics numerically and write `x1,x2,gamma1,gamma2` CSV.
    Trace(Common),
    /// List the built-in problems usable with `--example`.
    ListExamples,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Problem-spec file.
    pub spec: Option<PathBuf>,
    /// Use a built-in problem instead of a file.
    #[arg(long, conflicts_with = "spec")]
    pub example: Option<String>,
    /// Pass/fail threshold: characteristic residual (validate), identity
    /// residual (check-identity), fixed-point tolerance (solve) or inverse
    /// tolerance (trace).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Gauss points per axis and panel.
    #[arg(long)]
    pub quad_points: Option<usize>,
    /// Panels per axis.
    #[arg(long)]
    pub panels: Option<usize>,
    /// Output grid as `N` or `N1,N2`; sample count for validate.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    pub json_report: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct IdentityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Characteristic rectangle `l1,l2,r1,r2`.
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<String>,
    /// Solution expression over x1, x2.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "solution_grid")]
    pub solution: Option<String>,
    /// Solution as an `x1,x2,u` CSV on a tensor grid (as written by `solve`).
    #[arg(long)]
    pub solution_grid: Option<PathBuf>,
    /// Also run the shrinking-rectangle probe at the rectangle's lower corner.
    #[arg(long)]
    pub probe: bool,
}

#[derive(Debug, Args, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Evaluation points `x1,x2;x1,x2;...` instead of a grid.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SPEC } else { EXIT_OK };
        }
    };
    commands::dispatch(cli.command)
}
