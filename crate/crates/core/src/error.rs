use thiserror::Error;

use crate::expr::ExprError;
use crate::geom::{CharPoint, Point};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("equation is not strictly hyperbolic at {point}: b^2 - ac = {discriminant:e}")]
    NotHyperbolic { point: Point, discriminant: f64 },

    #[error("characteristic residual {residual:e} exceeds tolerance at {point}")]
    CharacteristicResidual { point: Point, residual: f64 },

    #[error("characteristic Jacobian |det| = {det:e} is below threshold at {point}")]
    SingularJacobian { point: Point, det: f64 },

    #[error("beta = {beta:e} degenerates at {point} (characteristic tangency)")]
    DegenerateBeta { point: Point, beta: f64 },

    #[error("Newton inversion did not converge for {target}: last iterate {last}, residual {residual:e}")]
    NewtonDiverged {
        target: CharPoint,
        last: Point,
        residual: f64,
    },

    #[error("point {point} lies outside the {region}")]
    OutsideDomain { point: Point, region: &'static str },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last difference {last:e})")]
    NonConvergence { iterations: usize, last: f64, history: Vec<f64> },

    #[error("evaluation failed at node ({z1}, {z2}): {source}")]
    AtNode {
        z1: f64,
        z2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("spec file error (line {line}): {msg}")]
    SpecFile { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
