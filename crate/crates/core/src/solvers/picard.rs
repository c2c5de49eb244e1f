//! Goursat problem for `∂x1∂x2 u + a ∂x1 u + b ∂x2 u + c u = f` with data
//! on `x1 = x1⁰` and `x2 = x2⁰`, solved by iterating
//!
//! ```text
//! u = φ(x2) + ψ(x1) - φ(x2⁰) + ∫_{x1⁰}^{x1} ∫_{x2⁰}^{x2} [f - a ∂x1 u - b ∂x2 u - c u]
//! ```
//!
//! on a uniform lattice. Lattice derivatives are second-order finite
//! differences; the double integral is a cumulative midpoint sum with
//! coefficients at cell centers and the iterate averaged over cell corners.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::geom::Point;
use crate::interp::{slopes, UniformGrid};
use crate::parallelogram::GridSolution;
use crate::problem::{EquationSpec, XY};

use super::{check_only, eval_t, eval_xy, is_zero, parse_profile, ConvergenceReport, SolverConfig};

#[derive(Clone, Debug)]
pub struct LinearGoursatData {
    pub corner: Point,
    pub a_lo: Expr,
    pub b_lo: Expr,
    pub c_lo: Expr,
    pub f: Expr,
    /// `u(x1⁰, t)`
    pub phi: Expr,
    /// `u(t, x2⁰)`
    pub psi: Expr,
}

impl LinearGoursatData {
    pub fn new(corner: Point, a_lo: Expr, b_lo: Expr, c_lo: Expr, f: Expr, phi: Expr, psi: Expr) -> Result<Self> {
        for (e, name) in [(&a_lo, "a_lo"), (&b_lo, "b_lo"), (&c_lo, "c_lo"), (&f, "f")] {
            check_only(e, &XY, name)?;
        }
        check_only(&phi, &[Var::T], "phi")?;
        check_only(&psi, &[Var::T], "psi")?;
        let (p0, s0) = (eval_t(&phi, corner.x2)?, eval_t(&psi, corner.x1)?);
        if (p0 - s0).abs() > 1e-12 * p0.abs().max(s0.abs()).max(1.0) {
            return Err(Error::invalid(format!(
                "compatibility phi(x2_0) = psi(x1_0) fails: {p0} vs {s0}"
            )));
        }
        Ok(LinearGoursatData {
            corner,
            a_lo,
            b_lo,
            c_lo,
            f,
            phi,
            psi,
        })
    }

    pub fn parse(corner: Point, a_lo: &str, b_lo: &str, c_lo: &str, f: &str, phi: &str, psi: &str) -> Result<Self> {
        let xy = |s: &str| crate::expr::parse(s, &XY);
        Self::new(
            corner,
            xy(a_lo)?,
            xy(b_lo)?,
            xy(c_lo)?,
            xy(f)?,
            parse_profile(phi)?,
            parse_profile(psi)?,
        )
    }

    /// `∂x1∂x2 u = f - a p - b q - c u` over `(x, u, p, q)`.
    pub fn equation(&self) -> Result<EquationSpec> {
        let rhs = self.f.clone()
            - self.a_lo.clone() * Expr::var(Var::P)
            - self.b_lo.clone() * Expr::var(Var::Q)
            - self.c_lo.clone() * Expr::var(Var::U);
        EquationSpec::mixed_derivative(rhs.simplify())
    }
}

#[derive(Clone, Debug)]
pub struct PicardSolution {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub report: ConvergenceReport,
}

impl PicardSolution {
    pub fn field(&self) -> GridSolution {
        GridSolution::physical(self.grid.clone(), self.values.clone())
    }

    pub fn to_csv(&self) -> String {
        grid_csv(&self.grid, &self.values)
    }
}

/// CSV with header `x1,x2,u`, 17 significant digits, LF endings.
pub fn grid_csv(grid: &UniformGrid, values: &[f64]) -> String {
    let mut out = String::from("x1,x2,u\n");
    for (i, j, x1, x2) in grid.nodes() {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", x1, x2, values[grid.index(i, j)]).expect("write to string");
    }
    out
}

/// Node derivatives along both axes.
fn lattice_gradient(grid: &UniformGrid, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let [n0, n1] = grid.n;
    let mut d1 = vec![0.0; u.len()];
    let mut d2 = vec![0.0; u.len()];
    for j in 0..n1 {
        let col: Vec<f64> = (0..n0).map(|i| u[grid.index(i, j)]).collect();
        for (i, d) in slopes(&col, grid.step(0)).into_iter().enumerate() {
            d1[grid.index(i, j)] = d;
        }
    }
    for i in 0..n0 {
        let row = &u[grid.index(i, 0)..grid.index(i, 0) + n1];
        for (j, d) in slopes(row, grid.step(1)).into_iter().enumerate() {
            d2[grid.index(i, j)] = d;
        }
    }
    (d1, d2)
}

/// Per-cell coefficient samples at cell centers, row-major over cells.
struct CellCoefficients {
    f: Vec<f64>,
    a: Option<Vec<f64>>,
    b: Option<Vec<f64>>,
    c: Option<Vec<f64>>,
}

fn sample_cells(grid: &UniformGrid, e: &Expr) -> Result<Vec<f64>> {
    let [n0, n1] = grid.n;
    let (h0, h1) = (grid.step(0), grid.step(1));
    let mut out = Vec::with_capacity((n0 - 1) * (n1 - 1));
    for i in 0..n0 - 1 {
        for j in 0..n1 - 1 {
            out.push(eval_xy(e, grid.coord(0, i) + 0.5 * h0, grid.coord(1, j) + 0.5 * h1)?);
        }
    }
    Ok(out)
}

/// Solves on `[x1⁰, upper.x1] × [x2⁰, upper.x2]` with `n` nodes per axis.
pub fn solve_goursat_linear_picard(data: &LinearGoursatData, upper: Point, n: usize, cfg: &SolverConfig) -> Result<PicardSolution> {
    let lo = data.corner;
    if !(upper.x1 > lo.x1 && upper.x2 > lo.x2) {
        return Err(Error::invalid("Picard lattice must extend beyond the corner in both axes"));
    }
    if n < 5 {
        return Err(Error::invalid(format!(
            "Picard lattice needs at least 4 cells per axis, got {} nodes",
            n
        )));
    }
    let grid = UniformGrid::new([lo.x1, lo.x2], [upper.x1, upper.x2], [n, n]);
    let opt = |e: &Expr| -> Result<Option<Vec<f64>>> {
        if is_zero(e) {
            Ok(None)
        } else {
            sample_cells(&grid, e).map(Some)
        }
    };
    let coef = CellCoefficients {
        f: sample_cells(&grid, &data.f)?,
        a: opt(&data.a_lo)?,
        b: opt(&data.b_lo)?,
        c: opt(&data.c_lo)?,
    };

    // boundary part φ(x2) + ψ(x1) - φ(x2⁰)
    let phi0 = eval_t(&data.phi, lo.x2)?;
    let mut base = vec![0.0; grid.len()];
    for (i, j, x1, x2) in grid.nodes() {
        base[grid.index(i, j)] = eval_t(&data.phi, x2)? + eval_t(&data.psi, x1)? - phi0;
    }

    let cell_area = grid.step(0) * grid.step(1);
    let apply = |u: Option<&[f64]>| -> Vec<f64> {
        let cells = n - 1;
        let grads = u.filter(|_| coef.a.is_some() || coef.b.is_some()).map(|u| lattice_gradient(&grid, u));
        let mut g = coef.f.clone();
        if let Some(u) = u {
            for ci in 0..cells {
                for cj in 0..cells {
                    let k = ci * cells + cj;
                    let corners = [
                        grid.index(ci, cj),
                        grid.index(ci + 1, cj),
                        grid.index(ci, cj + 1),
                        grid.index(ci + 1, cj + 1),
                    ];
                    let avg = |v: &[f64]| 0.25 * corners.iter().map(|&m| v[m]).sum::<f64>();
                    if let Some(c) = &coef.c {
                        g[k] -= c[k] * avg(u);
                    }
                    if let Some((d1, d2)) = &grads {
                        if let Some(a) = &coef.a {
                            g[k] -= a[k] * avg(d1);
                        }
                        if let Some(b) = &coef.b {
                            g[k] -= b[k] * avg(d2);
                        }
                    }
                }
            }
        }
        // cumulative sum: I(i, j) = Σ_{ci < i, cj < j} g
        let mut out = base.clone();
        let mut col_acc = vec![0.0; n];
        for i in 1..n {
            let mut row = 0.0;
            for j in 1..n {
                row += g[(i - 1) * cells + (j - 1)] * cell_area;
                col_acc[j] += row;
                out[grid.index(i, j)] += col_acc[j];
            }
        }
        out
    };

    let mut report = ConvergenceReport::default();
    // start from the solution with all lower-order terms dropped
    let mut u = apply(None);
    let trivial = coef.a.is_none() && coef.b.is_none() && coef.c.is_none();
    loop {
        let next = if trivial { u.clone() } else { apply(Some(&u)) };
        let diff = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        report.iterations += 1;
        report.history.push(diff);
        u = next;
        if diff <= cfg.picard_tol {
            report.converged = true;
            break;
        }
        if report.iterations >= cfg.max_picard || !diff.is_finite() {
            return Err(report.into_error());
        }
    }
    Ok(PicardSolution {
        grid,
        values: u,
        report,
    })
}
