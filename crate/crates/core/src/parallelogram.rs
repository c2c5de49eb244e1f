//! Curvilinear characteristic parallelograms and the identity
//!
//! ```text
//! u(A) - u(B) + u(C) - u(D) = ∫_{l1}^{l2} ∫_{r1}^{r2} K̃(z, u, ∂x1 u, ∂x2 u) dz2 dz1
//! ```
//!
//! with `A ↔ (l1, r1)`, `B ↔ (l1, r2)`, `C ↔ (l2, r2)`, `D ↔ (l2, r1)` in
//! characteristic coordinates.

use std::fmt;

use serde::Serialize;

use crate::characteristics::CharacteristicPair;
use crate::error::{Error, Result};
use crate::expr::{parse, Env, Expr, Var};
use crate::geom::{CharPoint, Point};
use crate::interp::{BicubicField, UniformGrid};
use crate::kernel::KernelContext;
use crate::problem::{EquationSpec, XY};
use crate::quadrature::{integrate2d, QuadratureRule};

/// `[l1, l2] × [r1, r2]` in characteristic coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharRectangle {
    pub l1: f64,
    pub l2: f64,
    pub r1: f64,
    pub r2: f64,
}

impl CharRectangle {
    pub fn new(l1: f64, l2: f64, r1: f64, r2: f64) -> Result<Self> {
        if !(l1 < l2 && r1 < r2) {
            return Err(Error::invalid(format!(
                "characteristic rectangle needs l1 < l2 and r1 < r2, got [{l1}, {l2}] x [{r1}, {r2}]"
            )));
        }
        Ok(CharRectangle { l1, l2, r1, r2 })
    }

    /// Corner `(l1, r1)` with side lengths `l`, `r`.
    pub fn from_corner(corner: CharPoint, l: f64, r: f64) -> Result<Self> {
        Self::new(corner.y1, corner.y1 + l, corner.y2, corner.y2 + r)
    }

    pub fn center(&self) -> CharPoint {
        CharPoint::new(0.5 * (self.l1 + self.l2), 0.5 * (self.r1 + self.r2))
    }

    pub fn area(&self) -> f64 {
        (self.l2 - self.l1) * (self.r2 - self.r1)
    }

    /// Corners in vertex order A, B, C, D.
    pub fn corners(&self) -> [CharPoint; 4] {
        [
            CharPoint::new(self.l1, self.r1),
            CharPoint::new(self.l1, self.r2),
            CharPoint::new(self.l2, self.r2),
            CharPoint::new(self.l2, self.r1),
        ]
    }
}

impl fmt::Display for CharRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.l1, self.l2, self.r1, self.r2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Vertices {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub d: Point,
}

impl Vertices {
    pub fn as_array(&self) -> [Point; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

pub fn vertices(rect: &CharRectangle, pair: &CharacteristicPair) -> Result<Vertices> {
    let [a, b, c, d] = rect.corners();
    Ok(Vertices {
        a: pair.invert(a)?,
        b: pair.invert(b)?,
        c: pair.invert(c)?,
        d: pair.invert(d)?,
    })
}

/// A candidate solution with its physical gradient.
pub trait SolutionField {
    fn value(&self, x: Point) -> Result<f64>;

    /// `[∂u/∂x1, ∂u/∂x2]`.
    fn gradient(&self, x: Point) -> Result<[f64; 2]>;

    /// Smallest side the converse probe may shrink to; zero when the
    /// field is exact.
    fn min_probe_size(&self) -> f64 {
        0.0
    }
}

/// Closed-form `u` with derivatives (generated by `diff` unless given).
#[derive(Clone, Debug)]
pub struct AnalyticSolution {
    pub u: Expr,
    pub du: [Expr; 2],
}

impl AnalyticSolution {
    pub fn new(u: Expr) -> Result<Self> {
        if let Some(v) = u.variables().into_iter().find(|v| !XY.contains(v)) {
            return Err(Error::invalid(format!("solution may not depend on `{v}`")));
        }
        let du = [u.diff(Var::X1), u.diff(Var::X2)];
        Ok(AnalyticSolution { u, du })
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::new(parse(src, &XY)?)
    }

    pub fn with_derivatives(u: Expr, du1: Expr, du2: Expr) -> Self {
        AnalyticSolution { u, du: [du1, du2] }
    }
}

impl SolutionField for AnalyticSolution {
    fn value(&self, x: Point) -> Result<f64> {
        Ok(self.u.eval(&Env::xy(x.x1, x.x2))?)
    }

    fn gradient(&self, x: Point) -> Result<[f64; 2]> {
        let env = Env::xy(x.x1, x.x2);
        Ok([self.du[0].eval(&env)?, self.du[1].eval(&env)?])
    }
}

/// Bicubic samples on a physical or characteristic lattice.
#[derive(Clone, Debug)]
pub enum GridSolution {
    /// Lattice over `(x1, x2)`.
    Physical(BicubicField),
    /// Lattice over `(y1, y2)`; gradients go through `∂γ/∂x`.
    Characteristic { field: BicubicField, pair: CharacteristicPair },
}

impl GridSolution {
    pub fn physical(grid: UniformGrid, values: Vec<f64>) -> Self {
        GridSolution::Physical(BicubicField::new(grid, values))
    }

    pub fn grid(&self) -> &UniformGrid {
        match self {
            GridSolution::Physical(f) => f.grid(),
            GridSolution::Characteristic { field, .. } => field.grid(),
        }
    }
}

impl SolutionField for GridSolution {
    fn value(&self, x: Point) -> Result<f64> {
        match self {
            GridSolution::Physical(f) => Ok(f.value(x.x1, x.x2)),
            GridSolution::Characteristic { field, pair } => {
                let y = pair.forward(x)?;
                Ok(field.value(y.y1, y.y2))
            }
        }
    }

    fn gradient(&self, x: Point) -> Result<[f64; 2]> {
        match self {
            GridSolution::Physical(f) => {
                let j = f.jet(x.x1, x.x2);
                Ok([j.fx, j.fy])
            }
            GridSolution::Characteristic { field, pair } => {
                let y = pair.forward(x)?;
                let j = field.jet(y.y1, y.y2);
                let g = pair.jacobian(x)?;
                Ok([j.fx * g[0][0] + j.fy * g[1][0], j.fx * g[0][1] + j.fy * g[1][1]])
            }
        }
    }

    /// Four lattice cells along the coarser axis.
    fn min_probe_size(&self) -> f64 {
        let g = self.grid();
        4.0 * g.step(0).max(g.step(1))
    }
}

/// Wraps a pointwise evaluator; the gradient uses central differences.
pub struct FnSolution<F> {
    f: F,
    step: f64,
}

impl<F: Fn(Point) -> Result<f64>> FnSolution<F> {
    pub fn new(f: F) -> Self {
        FnSolution { f, step: 1e-5 }
    }

    pub fn with_step(f: F, step: f64) -> Self {
        FnSolution { f, step }
    }
}

impl<F: Fn(Point) -> Result<f64>> SolutionField for FnSolution<F> {
    fn value(&self, x: Point) -> Result<f64> {
        (self.f)(x)
    }

    fn gradient(&self, x: Point) -> Result<[f64; 2]> {
        let h1 = self.step * x.x1.abs().max(1.0);
        let h2 = self.step * x.x2.abs().max(1.0);
        let d1 = ((self.f)(Point::new(x.x1 + h1, x.x2))? - (self.f)(Point::new(x.x1 - h1, x.x2))?) / (2.0 * h1);
        let d2 = ((self.f)(Point::new(x.x1, x.x2 + h2))? - (self.f)(Point::new(x.x1, x.x2 - h2))?) / (2.0 * h2);
        Ok([d1, d2])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub rect: CharRectangle,
    /// `u(A) - u(B) + u(C) - u(D)`
    pub lhs: f64,
    /// `∬ K̃`
    pub rhs: f64,
    pub residual: f64,
    pub vertices: Vertices,
}

/// `u(A) - u(B) + u(C) - u(D)`.
pub fn alternating_sum(field: &dyn SolutionField, v: &Vertices) -> Result<f64> {
    Ok(field.value(v.a)? - field.value(v.b)? + field.value(v.c)? - field.value(v.d)?)
}

/// `K̃` at `z`, pulling `u` and its gradient from `field` only when the
/// kernel needs them.
fn kernel_with_field(ctx: &KernelContext, field: &dyn SolutionField, z: CharPoint) -> Result<f64> {
    let kp = ctx.point(z)?;
    let (uses_u, uses_grad) = ctx.eq.rhs_uses_solution();
    let u = if uses_u { field.value(kp.x)? } else { 0.0 };
    let [p, q] = if uses_grad || kp.needs_gradient() {
        field.gradient(kp.x)?
    } else {
        [0.0, 0.0]
    };
    ctx.k_tilde(&kp, u, p, q)
}

/// Evaluates both sides of the identity on `rect`.
pub fn identity_residual(
    eq: &EquationSpec,
    pair: &CharacteristicPair,
    field: &dyn SolutionField,
    rect: &CharRectangle,
    rule: &QuadratureRule,
) -> Result<IdentityReport> {
    let ctx = KernelContext::new(eq, pair).with_reference(rect.center())?;
    let v = vertices(rect, pair)?;
    let lhs = alternating_sum(field, &v)?;
    let rhs = integrate2d(
        |z1, z2| kernel_with_field(&ctx, field, CharPoint::new(z1, z2)),
        (rect.l1, rect.l2),
        (rect.r1, rect.r2),
        rule,
    )?;
    Ok(IdentityReport {
        rect: *rect,
        lhs,
        rhs,
        residual: lhs - rhs,
        vertices: v,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeEntry {
    pub l: f64,
    pub r: f64,
    /// `(lhs - rhs) / (l r)`
    pub scaled_residual: f64,
    /// `lhs / (l r) - K̃(corner)`
    pub quotient: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub corner: CharPoint,
    pub entries: Vec<ProbeEntry>,
    /// Extrapolated limit of `quotient`: the pointwise defect `(Au - f) / β`.
    pub defect: f64,
    /// Extrapolated limit of `scaled_residual`.
    pub residual_limit: f64,
}

impl ProbeReport {
    /// Least-squares slope of `log|quotient - defect|` against `log(l + r)`;
    /// `None` when the quotient sequence is already exact.
    pub fn observed_order(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .entries
            .iter()
            .map(|e| (e.l + e.r, (e.quotient - self.defect).abs()))
            .filter(|&(_, d)| d > 0.0)
            .map(|(s, d)| (s.ln(), d.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// Extrapolates `S(s) ≈ S0 + C s` to `s = 0` from the last two entries.
fn richardson_linear(values: &[f64], s: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return values[n - 1];
    }
    let (a, b) = (values[n - 2], values[n - 1]);
    let (sa, sb) = (s[n - 2], s[n - 1]);
    if sa == sb {
        return b;
    }
    b + (b - a) * sb / (sa - sb)
}

/// Square sizes `h0 · 2^{-k}`, `k = 0..count`.
pub fn halving_sizes(h0: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count).map(|k| {
        let h = h0 / 2f64.powi(k as i32);
        (h, h)
    }).collect()
}

/// Shrinks `[c1, c1 + l] × [c2, c2 + r]` through `sizes` and estimates the
/// PDE defect at the corner.
pub fn converse_probe(
    eq: &EquationSpec,
    pair: &CharacteristicPair,
    field: &dyn SolutionField,
    corner: CharPoint,
    sizes: &[(f64, f64)],
    rule: &QuadratureRule,
) -> Result<ProbeReport> {
    if sizes.is_empty() {
        return Err(Error::invalid("converse probe needs at least one size"));
    }
    let floor = field.min_probe_size();
    for w in sizes.windows(2) {
        if !(w[1].0 <= w[0].0 && w[1].1 <= w[0].1) {
            return Err(Error::invalid("probe sizes must be non-increasing"));
        }
    }
    if let Some(&(l, r)) = sizes.iter().find(|&&(l, r)| !(l > 0.0 && r > 0.0) || l.min(r) < floor) {
        return Err(Error::invalid(format!(
            "probe size ({l}, {r}) is not positive or is below the field's resolution floor {floor}"
        )));
    }
    let ctx = KernelContext::new(eq, pair).with_reference(corner)?;
    let k_corner = kernel_with_field(&ctx, field, corner)?;
    let mut entries = Vec::with_capacity(sizes.len());
    for &(l, r) in sizes {
        let rect = CharRectangle::from_corner(corner, l, r)?;
        let rep = identity_residual(eq, pair, field, &rect, rule)?;
        let lr = l * r;
        entries.push(ProbeEntry {
            l,
            r,
            scaled_residual: rep.residual / lr,
            quotient: rep.lhs / lr - k_corner,
        });
    }
    let s: Vec<f64> = entries.iter().map(|e| e.l + e.r).collect();
    let q: Vec<f64> = entries.iter().map(|e| e.quotient).collect();
    let res: Vec<f64> = entries.iter().map(|e| e.scaled_residual).collect();
    Ok(ProbeReport {
        corner,
        defect: richardson_linear(&q, &s),
        residual_limit: richardson_linear(&res, &s),
        entries,
    })
}
