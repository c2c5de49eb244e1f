//! First mixed problem for `(∂²_x1 - a² ∂²_x2) u = f` on the quadrant:
//! `u(0, x2) = φ(x2)`, `∂x1 u(0, x2) = ψ(x2)`, `u(x1, 0) = μ(x1)`.
//!
//! Above the characteristic `x2 = a x1` the solution is d'Alembert's
//! formula; below it the parallelogram identity reflects off `x2 = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::geom::Point;
use crate::problem::{EquationSpec, XY};
use crate::quadrature::{integrate2d, QuadratureRule};

use super::{check_only, eval_t, eval_xy, is_zero, parse_profile};

#[derive(Clone, Debug)]
pub struct MixedWaveData {
    pub speed: f64,
    /// `u(0, t)`
    pub phi: Expr,
    /// `∂x1 u(0, t)`
    pub psi: Expr,
    /// `u(t, 0)`
    pub mu: Expr,
    /// Right-hand side over `(x1, x2)`.
    pub f: Expr,
}

/// Residuals of the three corner conditions needed for a classical solution.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MatchingResiduals {
    /// `μ(0) - φ(0)`
    pub value: f64,
    /// `μ'(0) - ψ(0)`
    pub slope: f64,
    /// `μ''(0) - a² φ''(0) - f(0, 0)`
    pub curvature: f64,
}

impl MatchingResiduals {
    pub fn max_abs(&self) -> f64 {
        self.value.abs().max(self.slope.abs()).max(self.curvature.abs())
    }
}

impl MixedWaveData {
    pub fn new(speed: f64, phi: Expr, psi: Expr, mu: Expr, f: Expr) -> Result<Self> {
        if !(speed > 0.0) {
            return Err(Error::invalid(format!("wave speed must be positive, got {speed}")));
        }
        for (e, name) in [(&phi, "phi"), (&psi, "psi"), (&mu, "mu")] {
            check_only(e, &[Var::T], name)?;
        }
        check_only(&f, &XY, "f")?;
        Ok(MixedWaveData { speed, phi, psi, mu, f })
    }

    pub fn parse(speed: f64, phi: &str, psi: &str, mu: &str, f: &str) -> Result<Self> {
        Self::new(
            speed,
            parse_profile(phi)?,
            parse_profile(psi)?,
            parse_profile(mu)?,
            crate::expr::parse(f, &XY)?,
        )
    }

    pub fn equation(&self) -> Result<EquationSpec> {
        EquationSpec::wave(self.speed, self.f.clone())
    }

    pub fn matching_residuals(&self) -> Result<MatchingResiduals> {
        let d = |e: &Expr| e.diff(Var::T);
        let a2 = self.speed * self.speed;
        Ok(MatchingResiduals {
            value: eval_t(&self.mu, 0.0)? - eval_t(&self.phi, 0.0)?,
            slope: eval_t(&d(&self.mu), 0.0)? - eval_t(&self.psi, 0.0)?,
            curvature: eval_t(&d(&d(&self.mu)), 0.0)? - a2 * eval_t(&d(&d(&self.phi)), 0.0)? - eval_xy(&self.f, 0.0, 0.0)?,
        })
    }

    fn check_quadrant(&self, x: Point) -> Result<()> {
        let s = 1e-12;
        if x.x1 >= -s && x.x2 >= -s {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: x,
                region: "quadrant x1 >= 0, x2 >= 0",
            })
        }
    }

    fn psi_integral(&self, lo: f64, hi: f64, rule: &QuadratureRule) -> Result<f64> {
        if is_zero(&self.psi) {
            return Ok(0.0);
        }
        rule.integrate1d(|t| eval_t(&self.psi, t), lo, hi)
    }

    /// `∫_0^{τ_max} dτ ∫_{c - w(τ)}^{c + w(τ)} f(τ, ξ) dξ` with the inner
    /// interval mapped to `[-1, 1]`.
    fn triangle_integral(
        &self,
        tau_max: f64,
        center: f64,
        half_width: impl Fn(f64) -> f64,
        rule: &QuadratureRule,
    ) -> Result<f64> {
        if is_zero(&self.f) || tau_max == 0.0 {
            return Ok(0.0);
        }
        integrate2d(
            |tau, s| {
                let w = half_width(tau);
                Ok(w * eval_xy(&self.f, tau, center + s * w)?)
            },
            (0.0, tau_max),
            (-1.0, 1.0),
            rule,
        )
    }

    /// d'Alembert's formula; valid for `x2 ≥ a x1`.
    pub fn dalembert_branch(&self, x: Point, rule: &QuadratureRule) -> Result<f64> {
        self.check_quadrant(x)?;
        let a = self.speed;
        let (x1, x2) = (x.x1, x.x2);
        let mean = 0.5 * (eval_t(&self.phi, x2 - a * x1)? + eval_t(&self.phi, x2 + a * x1)?);
        let psi = self.psi_integral(x2 - a * x1, x2 + a * x1, rule)?;
        let src = self.triangle_integral(x1, x2, |tau| a * (x1 - tau), rule)?;
        Ok(mean + (psi + src) / (2.0 * a))
    }

    /// Reflection off `x2 = 0`; valid for `x2 ≤ a x1`.
    pub fn reflected_branch(&self, x: Point, rule: &QuadratureRule) -> Result<f64> {
        self.check_quadrant(x)?;
        let a = self.speed;
        let (x1, x2) = (x.x1, x.x2);
        let mut u = eval_t(&self.mu, x1 - x2 / a)?
            + 0.5 * (eval_t(&self.phi, a * x1 + x2)? - eval_t(&self.phi, a * x1 - x2)?);
        let psi = self.psi_integral(a * x1 - x2, a * x1 + x2, rule)?;
        let src = self.triangle_integral(x2 / a, a * x1, |tau| x2 - a * tau, rule)?;
        u += (psi + src) / (2.0 * a);
        if !is_zero(&self.f) {
            let lo = a * x1 - x2;
            let strip = integrate2d(
                |y1, y2| eval_xy(&self.f, (y2 - y1) / (2.0 * a), (y2 + y1) / 2.0),
                (lo, -lo),
                (lo, a * x1 + x2),
                rule,
            )?;
            u -= strip / (4.0 * a * a);
        }
        Ok(u)
    }
}

/// Selects the branch by the sign of `x2 - a x1`; points on the
/// characteristic use d'Alembert's formula.
pub fn solve_mixed_wave(data: &MixedWaveData, x: Point, rule: &QuadratureRule) -> Result<f64> {
    if x.x2 - data.speed * x.x1 >= 0.0 {
        data.dalembert_branch(x, rule)
    } else {
        data.reflected_branch(x, rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manufactured(a: f64) -> MixedWaveData {
        MixedWaveData::parse(a, "t^2", "0", "t^2", &format!("2 - 2*{a:?}^2")).unwrap()
    }

    #[test]
    fn matching_conditions_hold_for_manufactured_data() {
        let r = manufactured(1.7).matching_residuals().unwrap();
        assert!(r.max_abs() < 1e-14, "{r:?}");
    }

    #[test]
    fn reproduces_quadratic_on_both_sides() {
        let rule = QuadratureRule::default();
        for a in [0.5, 1.0, 2.5] {
            let d = manufactured(a);
            for &(x1, x2) in &[(0.3, 2.0), (1.0, 0.2), (0.7, 0.7 * a), (2.0, 0.1)] {
                let u = solve_mixed_wave(&d, Point::new(x1, x2), &rule).unwrap();
                assert!((u - (x1 * x1 + x2 * x2)).abs() < 1e-12, "a={a} ({x1},{x2}): {u}");
            }
        }
    }

    #[test]
    fn homogeneous_sine_data() {
        let d = MixedWaveData::parse(1.0, "sin(t)", "0", "0", "0").unwrap();
        let u = solve_mixed_wave(&d, Point::new(0.3, 2.0), &QuadratureRule::default()).unwrap();
        assert!((u - 2f64.sin() * 0.3f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn branches_agree_on_characteristic() {
        let d = manufactured(1.3);
        let rule = QuadratureRule::default();
        let x = Point::new(0.9, 1.3 * 0.9);
        let up = d.dalembert_branch(x, &rule).unwrap();
        let down = d.reflected_branch(x, &rule).unwrap();
        assert!((up - down).abs() < 1e-12);
    }

    #[test]
    fn value_mismatch_becomes_a_jump() {
        let d = MixedWaveData::parse(1.0, "t^2", "0", "t^2 + 0.1", "0").unwrap();
        let rule = QuadratureRule::default();
        let x = Point::new(0.5, 0.5);
        let jump = d.reflected_branch(x, &rule).unwrap() - d.dalembert_branch(x, &rule).unwrap();
        assert!((jump - 0.1).abs() < 1e-12);
        assert!((d.matching_residuals().unwrap().value - 0.1).abs() < 1e-15);
    }
}
