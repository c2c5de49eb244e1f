//! Goursat problem for `(∂²_x1 - a² ∂²_x2) u = f` in the sector
//! `|x2| ≤ a x1`, with `u = φ1(x1)` on `x2 = a x1` and `u = φ2(x1)` on
//! `x2 = -a x1`.

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::geom::Point;
use crate::problem::{EquationSpec, XY};
use crate::quadrature::{integrate2d, QuadratureRule};

use super::{check_only, eval_t, eval_xy, is_zero, parse_profile};

#[derive(Clone, Debug)]
pub struct GoursatWaveData {
    pub speed: f64,
    /// Data on `x2 = a x1`, over `t = x1`.
    pub phi1: Expr,
    /// Data on `x2 = -a x1`, over `t = x1`.
    pub phi2: Expr,
    /// Right-hand side over `(x1, x2)`.
    pub f: Expr,
}

impl GoursatWaveData {
    pub fn new(speed: f64, phi1: Expr, phi2: Expr, f: Expr) -> Result<Self> {
        if !(speed > 0.0) {
            return Err(Error::invalid(format!("wave speed must be positive, got {speed}")));
        }
        check_only(&phi1, &[Var::T], "phi1")?;
        check_only(&phi2, &[Var::T], "phi2")?;
        check_only(&f, &XY, "f")?;
        let (a, b) = (eval_t(&phi1, 0.0)?, eval_t(&phi2, 0.0)?);
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
            return Err(Error::invalid(format!(
                "compatibility phi1(0) = phi2(0) fails: {a} vs {b}"
            )));
        }
        Ok(GoursatWaveData { speed, phi1, phi2, f })
    }

    pub fn parse(speed: f64, phi1: &str, phi2: &str, f: &str) -> Result<Self> {
        Self::new(
            speed,
            parse_profile(phi1)?,
            parse_profile(phi2)?,
            crate::expr::parse(f, &XY)?,
        )
    }

    pub fn equation(&self) -> Result<EquationSpec> {
        EquationSpec::wave(self.speed, self.f.clone())
    }

    /// Closed sector `x1 ≥ 0`, `|x2| ≤ a x1`.
    pub fn contains(&self, x: Point) -> bool {
        let s = 1e-12 * (1.0 + x.x1.abs());
        x.x1 >= -s && x.x2.abs() <= self.speed * x.x1 + s
    }
}

/// ```text
/// u = φ1((a x1 + x2)/(2a)) + φ2((a x1 - x2)/(2a)) - φ1(0)
///     - 1/(4a²) ∫_0^{x2 - a x1} dy1 ∫_0^{x2 + a x1} f((y2 - y1)/(2a), (y1 + y2)/2) dy2
/// ```
/// The outer bound is nonpositive in the sector; integration is oriented.
pub fn solve_goursat_wave(data: &GoursatWaveData, x: Point, rule: &QuadratureRule) -> Result<f64> {
    if !data.contains(x) {
        return Err(Error::OutsideDomain {
            point: x,
            region: "Goursat sector |x2| <= a x1",
        });
    }
    let a = data.speed;
    let mut u = eval_t(&data.phi1, (a * x.x1 + x.x2) / (2.0 * a))? + eval_t(&data.phi2, (a * x.x1 - x.x2) / (2.0 * a))?
        - eval_t(&data.phi1, 0.0)?;
    if !is_zero(&data.f) {
        let integral = integrate2d(
            |y1, y2| eval_xy(&data.f, (y2 - y1) / (2.0 * a), (y1 + y2) / 2.0),
            (0.0, x.x2 - a * x.x1),
            (0.0, x.x2 + a * x.x1),
            rule,
        )?;
        u -= integral / (4.0 * a * a);
    }
    Ok(u)
}
