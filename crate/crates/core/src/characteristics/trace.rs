//! Numerical first integrals by RK4 integration of the characteristic
//! slope fields.
//!
//! Each lattice node is followed along both families back to a seed line;
//! the coordinate where the curve meets the seed line becomes the node's
//! γ-value. Curves are therefore labelled by their seed coordinate.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CharacteristicPair, GammaField, InverseMap};
use crate::error::{Error, Result};
use crate::geom::{CharPoint, Point};
use crate::interp::{BicubicField, UniformGrid};
use crate::problem::{factor_characteristic_ode, Direction, DomainSpec, EquationSpec, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedAxis {
    /// Seed line `x1 = at`; curves are integrated in `x1`.
    X1,
    /// Seed line `x2 = at`; curves are integrated in `x2`.
    X2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedLine {
    pub axis: SeedAxis,
    pub at: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub seed: SeedLine,
    /// RK4 step; each curve uses `ceil(|Δ| / step)` equal substeps.
    pub step: f64,
    /// Lattice nodes per axis.
    pub grid: [usize; 2],
}

#[derive(Clone, Debug)]
pub struct TracedCharacteristics {
    pub grid: UniformGrid,
    /// Node values of γ1 and γ2, row-major (x1 outer).
    pub values: [Vec<f64>; 2],
    pub pair: CharacteristicPair,
    /// Curves that left the box spanned by the domain and the seed line.
    pub exits: usize,
}

impl TracedCharacteristics {
    /// CSV with header `x1,x2,gamma1,gamma2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,gamma1,gamma2\n");
        for (i, j, x1, x2) in self.grid.nodes() {
            let k = self.grid.index(i, j);
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                x1, x2, self.values[0][k], self.values[1][k]
            )
            .expect("write to string");
        }
        out
    }
}

fn slope(eq: &EquationSpec, family: usize, x: Point, tol: &Tolerances) -> Result<f64> {
    let d = factor_characteristic_ode(eq, x, tol)?;
    match if family == 0 { d.family1 } else { d.family2 } {
        Direction::Dx2Dx1(s) => Ok(s),
        Direction::Dx1Dx2(_) => Err(Error::invalid(format!(
            "tracing needs a(x) != 0; a vanishes at {x}"
        ))),
    }
}

/// Integrates one family from `start` to the seed line; returns the label
/// and whether the path left `bbox`.
fn trace_one(
    eq: &EquationSpec,
    family: usize,
    start: Point,
    cfg: &TraceConfig,
    bbox: ((f64, f64), (f64, f64)),
    tol: &Tolerances,
) -> Result<(f64, bool)> {
    // state: (independent, dependent)
    let (mut s, mut v) = match cfg.seed.axis {
        SeedAxis::X1 => (start.x1, start.x2),
        SeedAxis::X2 => (start.x2, start.x1),
    };
    let rhs = |s: f64, v: f64| -> Result<f64> {
        match cfg.seed.axis {
            SeedAxis::X1 => slope(eq, family, Point::new(s, v), tol),
            SeedAxis::X2 => {
                let m = slope(eq, family, Point::new(v, s), tol)?;
                if m == 0.0 {
                    return Err(Error::invalid("characteristic is parallel to the x2 seed line"));
                }
                Ok(1.0 / m)
            }
        }
    };
    let delta = cfg.seed.at - s;
    let steps = ((delta.abs() / cfg.step).ceil() as usize).max(if delta == 0.0 { 0 } else { 1 });
    let h = if steps == 0 { 0.0 } else { delta / steps as f64 };
    let inside = |s: f64, v: f64| {
        let (x1, x2) = match cfg.seed.axis {
            SeedAxis::X1 => (s, v),
            SeedAxis::X2 => (v, s),
        };
        let slack = 1e-9;
        x1 >= bbox.0 .0 - slack && x1 <= bbox.0 .1 + slack && x2 >= bbox.1 .0 - slack && x2 <= bbox.1 .1 + slack
    };
    let mut exited = false;
    for k in 0..steps {
        let k1 = rhs(s, v)?;
        let k2 = rhs(s + 0.5 * h, v + 0.5 * h * k1)?;
        let k3 = rhs(s + 0.5 * h, v + 0.5 * h * k2)?;
        let k4 = rhs(s + h, v + h * k3)?;
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s = if k + 1 == steps { cfg.seed.at } else { s + h };
        exited |= !inside(s, v);
    }
    Ok((v, exited))
}

/// Builds grid-backed characteristics for `eq` over the bounding box of
/// `dom`. Requires `a ≠ 0` on the whole box.
pub fn trace_characteristics(
    eq: &EquationSpec,
    dom: &DomainSpec,
    cfg: &TraceConfig,
    tol: &Tolerances,
) -> Result<TracedCharacteristics> {
    dom.validate()?;
    if !(cfg.step > 0.0) {
        return Err(Error::invalid("trace step must be positive"));
    }
    if cfg.grid[0] < 4 || cfg.grid[1] < 4 {
        return Err(Error::invalid("trace lattice needs at least 4 nodes per axis"));
    }
    let (bx1, bx2) = dom
        .bounding_box()
        .ok_or_else(|| Error::invalid("tracing needs a physical-space domain"))?;
    let grid = UniformGrid::new([bx1.0, bx2.0], [bx1.1, bx2.1], cfg.grid);
    let mut ext = (bx1, bx2);
    match cfg.seed.axis {
        SeedAxis::X1 => ext.0 = (ext.0 .0.min(cfg.seed.at), ext.0 .1.max(cfg.seed.at)),
        SeedAxis::X2 => ext.1 = (ext.1 .0.min(cfg.seed.at), ext.1 .1.max(cfg.seed.at)),
    }
    let mut values = [vec![0.0; grid.len()], vec![0.0; grid.len()]];
    let mut exits = 0;
    let mut table = Vec::with_capacity(grid.len());
    for (i, j, x1, x2) in grid.nodes() {
        let k = grid.index(i, j);
        let x = Point::new(x1, x2);
        for (family, vals) in values.iter_mut().enumerate() {
            let (label, exited) = trace_one(eq, family, x, cfg, ext, tol)?;
            vals[k] = label;
            exits += exited as usize;
        }
        table.push((x, CharPoint::new(values[0][k], values[1][k])));
    }
    let g1 = GammaField::Grid(Arc::new(BicubicField::new(grid.clone(), values[0].clone())));
    let g2 = GammaField::Grid(Arc::new(BicubicField::new(grid.clone(), values[1].clone())));
    let pair = CharacteristicPair::new(g1, g2, InverseMap::Newton { table: Arc::new(table) }).with_tolerances(*tol);
    Ok(TracedCharacteristics {
        grid,
        values,
        pair,
        exits,
    })
}
