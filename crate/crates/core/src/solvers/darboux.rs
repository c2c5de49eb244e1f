//! Second Darboux problem `∂x1∂x2 u + λ g(x, u) = f` in the sector
//! `α x1 ≤ x2 ≤ β x1` with `u = 0` on both rays.
//!
//! From `P_0 = x` the identity is applied on nested rectangles
//! `P_{i+1} M_i P_i N_i` with `N_i` on the lower ray and `M_i` on the upper
//! one, giving `u(x) = Σ (-1)^i ∬_{rect_i} [f - λ g(z, u(z))] dz`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var};
use crate::geom::Point;
use crate::interp::{BicubicField, UniformGrid};
use crate::parallelogram::SolutionField;
use crate::problem::{EquationSpec, XY};
use crate::quadrature::{integrate2d, QuadratureRule};

use super::{check_only, eval_xy, is_zero, ConvergenceReport, SolverConfig};

const XYU: [Var; 3] = [Var::X1, Var::X2, Var::U];

#[derive(Clone, Debug)]
pub struct DarbouxData {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    /// Nonlinearity over `(x1, x2, u)`.
    pub g: Expr,
    /// Right-hand side over `(x1, x2)`.
    pub f: Expr,
    /// Declared growth bound `|g| ≤ l1 + l2 |u|`.
    pub growth: (f64, f64),
}

impl DarbouxData {
    pub fn new(alpha: f64, beta: f64, lambda: f64, g: Expr, f: Expr, growth: (f64, f64)) -> Result<Self> {
        if !(0.0 < alpha && alpha < 1.0 && 1.0 < beta && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "Darboux slopes need 0 < alpha < 1 < beta, got alpha={alpha}, beta={beta}"
            )));
        }
        if growth.0 < 0.0 || growth.1 < 0.0 {
            return Err(Error::invalid("growth constants must be nonnegative"));
        }
        check_only(&g, &XYU, "g")?;
        check_only(&f, &XY, "f")?;
        Ok(DarbouxData {
            alpha,
            beta,
            lambda,
            g,
            f,
            growth,
        })
    }

    pub fn linear(alpha: f64, beta: f64, f: Expr) -> Result<Self> {
        Self::new(alpha, beta, 0.0, Expr::num(0.0), f, (0.0, 0.0))
    }

    /// `∂x1∂x2 u = f - λ g(x, u)` as an equation over `(x, u)`.
    pub fn equation(&self) -> Result<EquationSpec> {
        let rhs = if self.lambda == 0.0 {
            self.f.clone()
        } else {
            self.f.clone() - Expr::num(self.lambda) * self.g.clone()
        };
        EquationSpec::mixed_derivative(rhs.simplify())
    }

    pub fn contains(&self, x: Point) -> bool {
        let s = 1e-12 * (1.0 + x.x1.abs());
        x.x1 >= -s && x.x2 >= self.alpha * x.x1 - s && x.x2 <= self.beta * x.x1 + s
    }

    /// Spot-checks the declared growth bound on a deterministic sample of
    /// the sector up to `x1_max` and `|u| ≤ 10`; returns one message per
    /// violation found.
    pub fn growth_warnings(&self, x1_max: f64) -> Result<Vec<String>> {
        let mut out = Vec::new();
        if is_zero(&self.g) {
            return Ok(out);
        }
        let n = 7;
        for i in 1..=n {
            let x1 = x1_max * i as f64 / n as f64;
            for j in 0..n {
                let m = self.alpha + (self.beta - self.alpha) * j as f64 / (n - 1) as f64;
                for k in 0..n {
                    let z = -10.0 + 20.0 * k as f64 / (n - 1) as f64;
                    let env = Env::xy(x1, m * x1).with(Var::U, z);
                    let gv = self.g.eval(&env)?;
                    let bound = self.growth.0 + self.growth.1 * z.abs();
                    if gv.abs() > bound * (1.0 + 1e-12) {
                        out.push(format!(
                            "|g({x1}, {}, {z})| = {} exceeds declared bound {bound}",
                            m * x1,
                            gv.abs()
                        ));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One step of the cascade: `rect_i = [x1(P_{i+1}), x1(P_i)] × [x2(N_i), x2(M_i)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CascadeCell {
    pub p_next: Point,
    pub m: Point,
    pub p: Point,
    pub n: Point,
}

impl CascadeCell {
    pub fn x1_range(&self) -> (f64, f64) {
        (self.p_next.x1, self.p.x1)
    }

    pub fn x2_range(&self) -> (f64, f64) {
        (self.n.x2, self.m.x2)
    }

    pub fn area(&self) -> f64 {
        (self.p.x1 - self.p_next.x1) * (self.m.x2 - self.n.x2)
    }
}

/// Nested rectangles from `p0` until `‖P_n‖∞ < cascade_eps`. A start on a
/// sector edge yields one zero-area cell.
pub fn darboux_cascade(data: &DarbouxData, p0: Point, cascade_eps: f64) -> Result<Vec<CascadeCell>> {
    if !data.contains(p0) {
        return Err(Error::OutsideDomain {
            point: p0,
            region: "Darboux sector alpha x1 <= x2 <= beta x1",
        });
    }
    let mut cells = Vec::new();
    let mut p = p0;
    while p.x1.abs().max(p.x2.abs()) >= cascade_eps {
        let n = Point::new(p.x1, data.alpha * p.x1);
        let m = Point::new(p.x2 / data.beta, p.x2);
        let p_next = Point::new(p.x2 / data.beta, data.alpha * p.x1);
        let cell = CascadeCell { p_next, m, p, n };
        cells.push(cell);
        if !(cell.area() > 0.0) {
            break;
        }
        p = p_next;
    }
    Ok(cells)
}

#[derive(Clone, Debug, Serialize)]
pub struct DarbouxReport {
    pub value: f64,
    /// Signed series terms `(-1)^i ∬_{rect_i}`.
    pub terms: Vec<f64>,
    /// Largest `|term_{i+1} / term_i|`, skipping terms that nearly cancel.
    pub max_term_ratio: f64,
    pub cells: usize,
    /// Outer fixed-point history (nonlinear case only).
    pub iteration: Option<ConvergenceReport>,
}

/// Sums the alternating series for `integrand` over the cascade from `x`.
fn series<F>(data: &DarbouxData, x: Point, cfg: &SolverConfig, rule: &QuadratureRule, integrand: F) -> Result<(f64, Vec<f64>)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let cells = darboux_cascade(data, x, cfg.cascade_eps)?;
    let mut total = 0.0;
    let mut terms = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        if !(cell.area() > 0.0) {
            break;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let t = sign * integrate2d(&integrand, cell.x1_range(), cell.x2_range(), rule)?;
        terms.push(t);
        total += t;
        // a term can vanish by cancellation inside the cell, so also require ∬|f| to be negligible
        if t.abs() < cfg.series_eps {
            let mass = integrate2d(|z1, z2| Ok(integrand(z1, z2)?.abs()), cell.x1_range(), cell.x2_range(), rule)?;
            if mass < cfg.series_eps {
                break;
            }
        }
    }
    Ok((total, terms))
}

fn max_ratio(terms: &[f64]) -> f64 {
    // terms that nearly cancel inside their cell say nothing about decay
    let floor = 1e-6 * terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    terms
        .windows(2)
        .filter(|w| w[0].abs() > floor)
        .map(|w| (w[1] / w[0]).abs())
        .fold(0.0, f64::max)
}

/// Iterate of the nonlinear problem on a lattice in `(x1, m = x2 / x1)`.
#[derive(Clone, Debug)]
pub struct DarbouxGrid {
    pub field: BicubicField,
}

impl DarbouxGrid {
    fn zero(x1_max: f64, data: &DarbouxData, n: [usize; 2]) -> Self {
        let grid = UniformGrid::new([0.0, data.alpha], [x1_max, data.beta], n);
        let len = grid.len();
        DarbouxGrid {
            field: BicubicField::new(grid, vec![0.0; len]),
        }
    }

    fn at(&self, x1: f64, x2: f64) -> f64 {
        if x1 <= 0.0 {
            return 0.0;
        }
        self.field.value(x1, x2 / x1)
    }
}

impl SolutionField for DarbouxGrid {
    fn value(&self, x: Point) -> Result<f64> {
        Ok(self.at(x.x1, x.x2))
    }

    fn gradient(&self, x: Point) -> Result<[f64; 2]> {
        if x.x1 <= 0.0 {
            return Err(Error::invalid("Darboux lattice gradient is undefined at the apex"));
        }
        let m = x.x2 / x.x1;
        let j = self.field.jet(x.x1, m);
        Ok([j.fx - j.fy * m / x.x1, j.fy / x.x1])
    }

    fn min_probe_size(&self) -> f64 {
        let g = self.field.grid();
        4.0 * g.step(0)
    }
}

/// Value at `x`. For `λ = 0` this is the series; otherwise the fixed point
/// is iterated on a lattice covering the sector up to `x1`, starting from
/// zero, and the final value is one series pass with the converged iterate.
pub fn solve_darboux(data: &DarbouxData, x: Point, cfg: &SolverConfig) -> Result<(DarbouxReport, Option<DarbouxGrid>)> {
    if !data.contains(x) {
        return Err(Error::OutsideDomain {
            point: x,
            region: "Darboux sector alpha x1 <= x2 <= beta x1",
        });
    }
    if data.lambda == 0.0 || is_zero(&data.g) {
        let (value, terms) = series(data, x, cfg, &cfg.rule, |z1, z2| eval_xy(&data.f, z1, z2))?;
        let cells = terms.len();
        return Ok((
            DarbouxReport {
                value,
                max_term_ratio: max_ratio(&terms),
                terms,
                cells,
                iteration: None,
            },
            None,
        ));
    }
    let (it, grid) = solve_darboux_grid(data, x.x1, cfg)?;
    let mut report = darboux_value(data, x, Some(&grid), cfg)?;
    report.iteration = Some(it);
    Ok((report, Some(grid)))
}

/// One series pass at `x` with the nonlinearity frozen at `iterate`
/// (treated as zero when absent). Lets several points share one converged
/// lattice from [`solve_darboux_grid`].
pub fn darboux_value(data: &DarbouxData, x: Point, iterate: Option<&DarbouxGrid>, cfg: &SolverConfig) -> Result<DarbouxReport> {
    if !data.contains(x) {
        return Err(Error::OutsideDomain {
            point: x,
            region: "Darboux sector alpha x1 <= x2 <= beta x1",
        });
    }
    let rhs = |z1: f64, z2: f64| -> Result<f64> {
        let f = eval_xy(&data.f, z1, z2)?;
        if data.lambda == 0.0 {
            return Ok(f);
        }
        let u = iterate.map_or(0.0, |g| g.at(z1, z2));
        let gv = data.g.eval(&Env::xy(z1, z2).with(Var::U, u))?;
        Ok(f - data.lambda * gv)
    };
    let (value, terms) = series(data, x, cfg, &cfg.rule, rhs)?;
    Ok(DarbouxReport {
        value,
        max_term_ratio: max_ratio(&terms),
        cells: terms.len(),
        terms,
        iteration: None,
    })
}

/// Fixed-point iteration of the series map on the `(x1, m)` lattice over
/// `0 ≤ x1 ≤ x1_max`.
pub fn solve_darboux_grid(data: &DarbouxData, x1_max: f64, cfg: &SolverConfig) -> Result<(ConvergenceReport, DarbouxGrid)> {
    if !(x1_max > 0.0) {
        return Err(Error::invalid("Darboux lattice needs x1_max > 0"));
    }
    let [n1, nm] = cfg.darboux_grid;
    if n1 < 5 || nm < 5 {
        return Err(Error::invalid("Darboux lattice needs at least 4 cells per axis"));
    }
    let mut current = DarbouxGrid::zero(x1_max, data, cfg.darboux_grid);
    let grid = current.field.grid().clone();
    let mut report = ConvergenceReport::default();
    loop {
        let mut next = vec![0.0; grid.len()];
        for (i, j, x1, m) in grid.nodes() {
            if i == 0 {
                continue;
            }
            let (v, _) = series(data, Point::new(x1, m * x1), cfg, &cfg.darboux_rule, |z1, z2| {
                let u = current.at(z1, z2);
                let gv = data.g.eval(&Env::xy(z1, z2).with(Var::U, u))?;
                Ok(eval_xy(&data.f, z1, z2)? - data.lambda * gv)
            })?;
            next[grid.index(i, j)] = v;
        }
        let diff = next
            .iter()
            .zip(current.field.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.iterations += 1;
        report.history.push(diff);
        current = DarbouxGrid {
            field: BicubicField::new(grid.clone(), next),
        };
        if diff <= cfg.picard_tol {
            report.converged = true;
            return Ok((report, current));
        }
        if report.iterations >= cfg.max_picard || !diff.is_finite() {
            return Err(report.into_error());
        }
    }
}
