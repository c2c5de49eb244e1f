//! The integrand of the parallelogram identity.
//!
//! In characteristic coordinates the principal part becomes `β ∂y1∂y2`,
//! and the first-order terms pick up `Aγ1`, `Aγ2` (the operator applied to
//! each first integral). With `p = ∂u/∂x1`, `q = ∂u/∂x2`:
//!
//! ```text
//! β  = 2(a γ1,1 γ2,1 + b(γ2,2 γ1,1 + γ1,2 γ2,1) + c γ1,2 γ2,2)
//! K  = f(x, u, p, q) - Aγ1 (p ∂x1/∂y1 + q ∂x2/∂y1) - Aγ2 (p ∂x1/∂y2 + q ∂x2/∂y2)
//! K̃ = K / β
//! ```

use crate::characteristics::CharacteristicPair;
use crate::error::{Error, Result};
use crate::geom::{CharPoint, Mat2, Point};
use crate::problem::EquationSpec;

/// Quantities at one point that do not depend on the solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPoint {
    pub z: CharPoint,
    pub x: Point,
    pub beta: f64,
    pub a_gamma: [f64; 2],
    /// `inv_jac[i][j] = ∂x_i/∂y_j`
    pub inv_jac: Mat2,
}

impl KernelPoint {
    /// `(∂v/∂y1, ∂v/∂y2)` from the physical gradient `(p, q)`.
    pub fn char_gradient(&self, p: f64, q: f64) -> [f64; 2] {
        let m = &self.inv_jac;
        [p * m[0][0] + q * m[1][0], p * m[0][1] + q * m[1][1]]
    }

    /// Whether `K` needs the gradient of the solution here.
    pub fn needs_gradient(&self) -> bool {
        self.a_gamma != [0.0, 0.0]
    }
}

#[derive(Clone, Debug)]
pub struct KernelContext<'a> {
    pub eq: &'a EquationSpec,
    pub pair: &'a CharacteristicPair,
    beta_floor: f64,
}

impl<'a> KernelContext<'a> {
    /// Uses the absolute floor `beta_relative` until a reference is set.
    pub fn new(eq: &'a EquationSpec, pair: &'a CharacteristicPair) -> Self {
        KernelContext {
            eq,
            pair,
            beta_floor: pair.tolerances().beta_relative,
        }
    }

    /// Scales the degeneracy floor by `max(1, |β|)` at `z`.
    pub fn with_reference(mut self, z: CharPoint) -> Result<Self> {
        let x = self.pair.invert(z)?;
        let b = self.beta_unchecked(x)?;
        self.beta_floor = self.pair.tolerances().beta_relative * b.abs().max(1.0);
        Ok(self)
    }

    pub fn beta_floor(&self) -> f64 {
        self.beta_floor
    }

    fn beta_unchecked(&self, x: Point) -> Result<f64> {
        let (a, b, c) = self.eq.coefficients(x)?;
        let [[g11, g12], [g21, g22]] = self.pair.jacobian(x)?;
        Ok(2.0 * (a * g11 * g21 + b * (g22 * g11 + g12 * g21) + c * g12 * g22))
    }

    pub fn beta_at(&self, x: Point) -> Result<f64> {
        let beta = self.beta_unchecked(x)?;
        if !(beta.abs() >= self.beta_floor) {
            return Err(Error::DegenerateBeta { point: x, beta });
        }
        Ok(beta)
    }

    /// `a γ_11 + 2b γ_12 + c γ_22` for family `which ∈ {1, 2}`.
    pub fn a_gamma_at(&self, which: usize, x: Point) -> Result<f64> {
        assert!(which == 1 || which == 2, "family index is 1 or 2");
        let (a, b, c) = self.eq.coefficients(x)?;
        let j = self.pair.gamma[which - 1].jet(x)?;
        Ok(a * j.fxx + 2.0 * b * j.fxy + c * j.fyy)
    }

    pub fn point(&self, z: CharPoint) -> Result<KernelPoint> {
        let x = self.pair.invert(z)?;
        Ok(KernelPoint {
            z,
            x,
            beta: self.beta_at(x)?,
            a_gamma: [self.a_gamma_at(1, x)?, self.a_gamma_at(2, x)?],
            inv_jac: self.pair.inverse_jacobian(z, Some(x))?,
        })
    }

    pub fn k_at(&self, kp: &KernelPoint, u: f64, p: f64, q: f64) -> Result<f64> {
        let f = self.eq.rhs(kp.x, u, p, q)?;
        if !kp.needs_gradient() {
            return Ok(f);
        }
        let [v1, v2] = kp.char_gradient(p, q);
        Ok(f - kp.a_gamma[0] * v1 - kp.a_gamma[1] * v2)
    }

    pub fn k_tilde(&self, kp: &KernelPoint, u: f64, p: f64, q: f64) -> Result<f64> {
        Ok(self.k_at(kp, u, p, q)? / kp.beta)
    }

    pub fn k_tilde_at(&self, z: CharPoint, u: f64, p: f64, q: f64) -> Result<f64> {
        let kp = self.point(z)?;
        self.k_tilde(&kp, u, p, q)
    }
}
