//! Characteristic coordinates `y = (γ1(x), γ2(x))` and their inverse.

mod trace;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse, Env, Expr, Var};
use crate::geom::{det2, inv2, CharPoint, Mat2, Point};
use crate::interp::{BicubicField, Jet2};
use crate::problem::{DomainSpec, EquationSpec, Tolerances, XY};

pub use trace::{trace_characteristics, SeedAxis, SeedLine, TraceConfig, TracedCharacteristics};

const Y12: [Var; 2] = [Var::Y1, Var::Y2];

/// A first integral given in closed form, with the derivatives needed by
/// the kernel precomputed symbolically.
#[derive(Clone, Debug)]
pub struct AnalyticGamma {
    pub expr: Expr,
    /// `[∂/∂x1, ∂/∂x2]`
    pub first: [Expr; 2],
    /// `[∂²/∂x1², ∂²/∂x1∂x2, ∂²/∂x2²]`
    pub second: [Expr; 3],
}

impl AnalyticGamma {
    pub fn new(expr: Expr) -> Result<Self> {
        if let Some(v) = expr.variables().into_iter().find(|v| !XY.contains(v)) {
            return Err(Error::invalid(format!("characteristic may not depend on `{v}`")));
        }
        let d1 = expr.diff(Var::X1);
        let d2 = expr.diff(Var::X2);
        let second = [d1.diff(Var::X1), d1.diff(Var::X2), d2.diff(Var::X2)];
        Ok(AnalyticGamma {
            expr,
            first: [d1, d2],
            second,
        })
    }
}

#[derive(Clone, Debug)]
pub enum GammaField {
    Analytic(AnalyticGamma),
    /// Grid-sampled over physical space with bicubic interpolation.
    Grid(Arc<BicubicField>),
}

impl GammaField {
    pub fn analytic(expr: Expr) -> Result<Self> {
        Ok(GammaField::Analytic(AnalyticGamma::new(expr)?))
    }

    pub fn parse(src: &str) -> Result<Self> {
        Self::analytic(parse(src, &XY)?)
    }

    pub fn value(&self, x: Point) -> Result<f64> {
        match self {
            GammaField::Analytic(g) => Ok(g.expr.eval(&Env::xy(x.x1, x.x2))?),
            GammaField::Grid(f) => Ok(f.value(x.x1, x.x2)),
        }
    }

    pub fn jet(&self, x: Point) -> Result<Jet2> {
        match self {
            GammaField::Analytic(g) => {
                let env = Env::xy(x.x1, x.x2);
                Ok(Jet2 {
                    f: g.expr.eval(&env)?,
                    fx: g.first[0].eval(&env)?,
                    fy: g.first[1].eval(&env)?,
                    fxx: g.second[0].eval(&env)?,
                    fxy: g.second[1].eval(&env)?,
                    fyy: g.second[2].eval(&env)?,
                })
            }
            GammaField::Grid(f) => Ok(f.jet(x.x1, x.x2)),
        }
    }

    pub fn gradient(&self, x: Point) -> Result<[f64; 2]> {
        match self {
            GammaField::Analytic(g) => {
                let env = Env::xy(x.x1, x.x2);
                Ok([g.first[0].eval(&env)?, g.first[1].eval(&env)?])
            }
            GammaField::Grid(f) => {
                let j = f.jet(x.x1, x.x2);
                Ok([j.fx, j.fy])
            }
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, GammaField::Grid(_))
    }
}

/// Closed-form inverse with its Jacobian, or Newton iteration seeded from
/// a table of known `(x, γ(x))` pairs.
#[derive(Clone, Debug)]
pub enum InverseMap {
    Analytic {
        x1: Expr,
        x2: Expr,
        /// `jac[i][j] = ∂x_i/∂y_j`
        jac: [[Expr; 2]; 2],
    },
    Newton { table: Arc<Vec<(Point, CharPoint)>> },
}

impl InverseMap {
    pub fn analytic(x1: Expr, x2: Expr) -> Result<Self> {
        for (e, name) in [(&x1, "inverse x1"), (&x2, "inverse x2")] {
            if let Some(v) = e.variables().into_iter().find(|v| !Y12.contains(v)) {
                return Err(Error::invalid(format!("{name} may not depend on `{v}`")));
            }
        }
        let jac = [
            [x1.diff(Var::Y1), x1.diff(Var::Y2)],
            [x2.diff(Var::Y1), x2.diff(Var::Y2)],
        ];
        Ok(InverseMap::Analytic { x1, x2, jac })
    }
}

#[derive(Clone, Debug)]
pub struct CharacteristicPair {
    pub gamma: [GammaField; 2],
    pub inverse: InverseMap,
    tol: Tolerances,
}

impl CharacteristicPair {
    pub fn new(gamma1: GammaField, gamma2: GammaField, inverse: InverseMap) -> Self {
        CharacteristicPair {
            gamma: [gamma1, gamma2],
            inverse,
            tol: Tolerances::default(),
        }
    }

    /// Closed-form characteristics with a closed-form inverse over `(y1, y2)`.
    pub fn parse(gamma1: &str, gamma2: &str, inv_x1: &str, inv_x2: &str) -> Result<Self> {
        Ok(Self::new(
            GammaField::parse(gamma1)?,
            GammaField::parse(gamma2)?,
            InverseMap::analytic(parse(inv_x1, &Y12)?, parse(inv_x2, &Y12)?)?,
        ))
    }

    /// Closed-form characteristics inverted by Newton iteration, seeded
    /// from `seeds` (typically a sample of the working domain).
    pub fn newton(gamma1: GammaField, gamma2: GammaField, seeds: &[Point]) -> Result<Self> {
        let mut table = Vec::with_capacity(seeds.len());
        for &x in seeds {
            let y = CharPoint::new(gamma1.value(x)?, gamma2.value(x)?);
            table.push((x, y));
        }
        if table.is_empty() {
            return Err(Error::invalid("Newton inverse needs at least one seed point"));
        }
        Ok(Self::new(gamma1, gamma2, InverseMap::Newton { table: Arc::new(table) }))
    }

    /// `γ1 = x2 - a x1`, `γ2 = x2 + a x1` for `∂²_x1 - a² ∂²_x2`.
    pub fn wave(speed: f64) -> Result<Self> {
        let a = format!("{speed:?}");
        Self::parse(
            &format!("x2 - {a}*x1"),
            &format!("x2 + {a}*x1"),
            &format!("(y2 - y1)/(2*{a})"),
            "(y1 + y2)/2",
        )
    }

    /// `γ1 = x1`, `γ2 = x2` for `∂_x1 ∂_x2`.
    pub fn identity() -> Self {
        Self::parse("x1", "x2", "y1", "y2").expect("static expressions")
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn forward(&self, x: Point) -> Result<CharPoint> {
        Ok(CharPoint::new(self.gamma[0].value(x)?, self.gamma[1].value(x)?))
    }

    /// `∂γ_i/∂x_j`.
    pub fn jacobian(&self, x: Point) -> Result<Mat2> {
        Ok([self.gamma[0].gradient(x)?, self.gamma[1].gradient(x)?])
    }

    pub fn invert(&self, y: CharPoint) -> Result<Point> {
        match &self.inverse {
            InverseMap::Analytic { x1, x2, .. } => {
                let env = Env::y(y.y1, y.y2);
                Ok(Point::new(x1.eval(&env)?, x2.eval(&env)?))
            }
            InverseMap::Newton { table } => self.newton_invert(y, table),
        }
    }

    /// `∂x_i/∂y_j` at `y`; `x` may be supplied when already known.
    pub fn inverse_jacobian(&self, y: CharPoint, x: Option<Point>) -> Result<Mat2> {
        match &self.inverse {
            InverseMap::Analytic { jac, .. } => {
                let env = Env::y(y.y1, y.y2);
                Ok([
                    [jac[0][0].eval(&env)?, jac[0][1].eval(&env)?],
                    [jac[1][0].eval(&env)?, jac[1][1].eval(&env)?],
                ])
            }
            InverseMap::Newton { .. } => {
                let x = match x {
                    Some(x) => x,
                    None => self.invert(y)?,
                };
                let j = self.jacobian(x)?;
                inv2(&j).ok_or(Error::SingularJacobian { point: x, det: 0.0 })
            }
        }
    }

    fn newton_invert(&self, y: CharPoint, table: &[(Point, CharPoint)]) -> Result<Point> {
        let tol = &self.tol;
        let start = table
            .iter()
            .min_by(|a, b| {
                let da = (a.1.y1 - y.y1).powi(2) + (a.1.y2 - y.y2).powi(2);
                let db = (b.1.y1 - y.y1).powi(2) + (b.1.y2 - y.y2).powi(2);
                da.total_cmp(&db)
            })
            .map(|e| e.0)
            .expect("nonempty table");
        let residual = |x: Point| -> Result<(f64, [f64; 2])> {
            let g = self.forward(x)?;
            let r = [g.y1 - y.y1, g.y2 - y.y2];
            Ok((r[0].abs().max(r[1].abs()), r))
        };
        let step = |x: Point, r: [f64; 2]| -> Result<[f64; 2]> {
            let j = self.jacobian(x)?;
            let inv = inv2(&j).ok_or(Error::SingularJacobian { point: x, det: det2(&j) })?;
            Ok([
                inv[0][0] * r[0] + inv[0][1] * r[1],
                inv[1][0] * r[0] + inv[1][1] * r[1],
            ])
        };
        let mut x = start;
        let (mut norm, mut r) = residual(x)?;
        let mut iter = 0;
        while norm > tol.inverse {
            if iter >= tol.newton_max_iter {
                return Err(Error::NewtonDiverged {
                    target: y,
                    last: x,
                    residual: norm,
                });
            }
            iter += 1;
            let d = step(x, r)?;
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..=tol.newton_halvings {
                let trial = Point::new(x.x1 - scale * d[0], x.x2 - scale * d[1]);
                if let Ok((n, rt)) = residual(trial) {
                    if n < norm {
                        x = trial;
                        norm = n;
                        r = rt;
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonDiverged {
                    target: y,
                    last: x,
                    residual: norm,
                });
            }
        }
        // one polishing step; keep it only if it helps
        if norm > 0.0 {
            if let Ok(d) = step(x, r) {
                let trial = Point::new(x.x1 - d[0], x.x2 - d[1]);
                if let Ok((n, _)) = residual(trial) {
                    if n < norm {
                        x = trial;
                    }
                }
            }
        }
        Ok(x)
    }

    pub fn is_grid(&self) -> bool {
        self.gamma.iter().any(GammaField::is_grid)
    }
}

/// Residual of `a γ_x1² + 2b γ_x1 γ_x2 + c γ_x2²` for one family.
pub fn characteristic_residual(eq: &EquationSpec, g: &GammaField, x: Point) -> Result<f64> {
    let (a, b, c) = eq.coefficients(x)?;
    let [g1, g2] = g.gradient(x)?;
    Ok(a * g1 * g1 + 2.0 * b * g1 * g2 + c * g2 * g2)
}

#[derive(Clone, Debug, Serialize)]
pub struct CharValidationReport {
    /// Largest `|residual|` per family.
    pub max_char_residual: [f64; 2],
    pub residual_witness: [Point; 2],
    pub min_abs_jacobian: f64,
    pub jacobian_witness: Point,
    pub residual_threshold: f64,
    pub jacobian_threshold: f64,
    pub passed: bool,
}

impl CharValidationReport {
    pub fn ensure(&self) -> Result<()> {
        for k in 0..2 {
            if self.max_char_residual[k] > self.residual_threshold {
                return Err(Error::CharacteristicResidual {
                    point: self.residual_witness[k],
                    residual: self.max_char_residual[k],
                });
            }
        }
        if self.min_abs_jacobian < self.jacobian_threshold {
            return Err(Error::SingularJacobian {
                point: self.jacobian_witness,
                det: self.min_abs_jacobian,
            });
        }
        Ok(())
    }
}

pub fn validate_characteristics_at(
    eq: &EquationSpec,
    pair: &CharacteristicPair,
    points: &[Point],
    tol: &Tolerances,
) -> Result<CharValidationReport> {
    let first = *points.first().ok_or_else(|| Error::invalid("no sample points"))?;
    let mut res = [0.0f64; 2];
    let mut res_at = [first; 2];
    let mut jac_min = f64::INFINITY;
    let mut jac_at = first;
    for &x in points {
        for k in 0..2 {
            let r = characteristic_residual(eq, &pair.gamma[k], x)?.abs();
            if r > res[k] {
                res[k] = r;
                res_at[k] = x;
            }
        }
        let d = det2(&pair.jacobian(x)?).abs();
        if d < jac_min {
            jac_min = d;
            jac_at = x;
        }
    }
    Ok(CharValidationReport {
        max_char_residual: res,
        residual_witness: res_at,
        min_abs_jacobian: jac_min,
        jacobian_witness: jac_at,
        residual_threshold: tol.characteristic,
        jacobian_threshold: tol.jacobian,
        passed: res[0] <= tol.characteristic && res[1] <= tol.characteristic && jac_min >= tol.jacobian,
    })
}

/// Checks the characteristic equation and the Jacobian on an `n × n`
/// sample of the domain.
pub fn validate_characteristics(
    eq: &EquationSpec,
    pair: &CharacteristicPair,
    dom: &DomainSpec,
    n_samples: usize,
    tol: &Tolerances,
) -> Result<CharValidationReport> {
    dom.validate()?;
    let pts = dom.sample(n_samples, Some(pair))?;
    validate_characteristics_at(eq, pair, &pts, tol)
}

/// Largest `‖γ(γ⁻¹(y)) - y‖∞` over an `n × n` sample of a characteristic rectangle.
pub fn inverse_roundtrip_error(pair: &CharacteristicPair, y1: (f64, f64), y2: (f64, f64), n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &a in &crate::geom::linspace(y1.0, y1.1, n) {
        for &b in &crate::geom::linspace(y2.0, y2.1, n) {
            let y = CharPoint::new(a, b);
            let back = pair.forward(pair.invert(y)?)?;
            worst = worst.max((back.y1 - a).abs()).max((back.y2 - b).abs());
        }
    }
    Ok(worst)
}
