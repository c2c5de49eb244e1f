//! Boundary-value problems solved through the parallelogram identity.

mod darboux;
mod goursat_wave;
mod mixed_wave;
mod picard;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse, Env, Expr, Var};
use crate::quadrature::QuadratureRule;

pub use darboux::{darboux_cascade, darboux_value, solve_darboux, solve_darboux_grid, CascadeCell, DarbouxData, DarbouxGrid, DarbouxReport};
pub use goursat_wave::{solve_goursat_wave, GoursatWaveData};
pub use mixed_wave::{solve_mixed_wave, MatchingResiduals, MixedWaveData};
pub use picard::{grid_csv, solve_goursat_linear_picard, LinearGoursatData, PicardSolution};

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Sup-norm stopping threshold for fixed-point iterations.
    pub picard_tol: f64,
    pub max_picard: usize,
    /// The Darboux series stops after the first term below this.
    pub series_eps: f64,
    /// The Darboux cascade stops once `‖P_n‖∞` falls below this.
    pub cascade_eps: f64,
    pub rule: QuadratureRule,
    /// Iteration lattice `[x1 nodes, slope nodes]` for nonlinear Darboux.
    pub darboux_grid: [usize; 2],
    /// Rule used inside each nonlinear Darboux sweep.
    pub darboux_rule: QuadratureRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            picard_tol: 1e-10,
            max_picard: 200,
            series_eps: 1e-12,
            cascade_eps: 1e-14,
            rule: QuadratureRule::default(),
            darboux_grid: [65, 33],
            darboux_rule: QuadratureRule::gauss(6, 1).expect("static rule"),
        }
    }
}

/// History of a fixed-point iteration.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    /// `‖u^{k+1} - u^k‖∞` per iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

impl ConvergenceReport {
    fn into_error(self) -> Error {
        Error::NonConvergence {
            iterations: self.iterations,
            last: self.history.last().copied().unwrap_or(f64::NAN),
            history: self.history,
        }
    }
}

/// Parses one-variable boundary data over `t`.
pub fn parse_profile(src: &str) -> Result<Expr> {
    Ok(parse(src, &[Var::T])?)
}

fn eval_t(e: &Expr, t: f64) -> Result<f64> {
    Ok(e.eval(&Env::t(t))?)
}

fn eval_xy(e: &Expr, x1: f64, x2: f64) -> Result<f64> {
    Ok(e.eval(&Env::xy(x1, x2))?)
}

fn is_zero(e: &Expr) -> bool {
    e.as_num() == Some(0.0)
}

fn check_only(e: &Expr, allowed: &[Var], what: &str) -> Result<()> {
    if let Some(v) = e.variables().into_iter().find(|v| !allowed.contains(v)) {
        return Err(Error::invalid(format!("{what} may not depend on `{v}`")));
    }
    Ok(())
}
