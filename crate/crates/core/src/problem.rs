//! The semilinear equation `a u_x1x1 + 2b u_x1x2 + c u_x2x2 = f(x, u, p, q)`,
//! its domain, and hyperbolicity checks.

use serde::Serialize;

use crate::characteristics::CharacteristicPair;
use crate::error::{Error, Result};
use crate::expr::{parse, Env, Expr, Var};
use crate::geom::{linspace, CharPoint, Point};

pub const XY: [Var; 2] = [Var::X1, Var::X2];
pub const XYUPQ: [Var; 5] = [Var::X1, Var::X2, Var::U, Var::P, Var::Q];

/// Numerical thresholds shared across modules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Minimum admissible discriminant `b^2 - ac`.
    pub hyperbolicity: f64,
    /// Maximum residual of the characteristic equation.
    pub characteristic: f64,
    /// Minimum `|det ∂γ/∂x|`.
    pub jacobian: f64,
    /// Newton inversion residual `‖γ(x) - y‖∞`.
    pub inverse: f64,
    /// Relative `|β|` floor, scaled by `max(1, |β|)` at a reference point.
    pub beta_relative: f64,
    pub newton_max_iter: usize,
    pub newton_halvings: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hyperbolicity: 1e-10,
            characteristic: 1e-8,
            jacobian: 1e-8,
            inverse: 1e-10,
            beta_relative: 1e-12,
            newton_max_iter: 50,
            newton_halvings: 20,
        }
    }
}

/// Coefficients `a, b, c` over `(x1, x2)` and right-hand side `f` over
/// `(x1, x2, u, p, q)` with `p = ∂u/∂x1`, `q = ∂u/∂x2`.
#[derive(Clone, Debug)]
pub struct EquationSpec {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub f: Expr,
}

fn check_vars(e: &Expr, allowed: &[Var], what: &str) -> Result<()> {
    if let Some(v) = e.variables().into_iter().find(|v| !allowed.contains(v)) {
        return Err(Error::invalid(format!("{what} may not depend on `{v}`")));
    }
    Ok(())
}

impl EquationSpec {
    pub fn new(a: Expr, b: Expr, c: Expr, f: Expr) -> Result<Self> {
        check_vars(&a, &XY, "coefficient a")?;
        check_vars(&b, &XY, "coefficient b")?;
        check_vars(&c, &XY, "coefficient c")?;
        check_vars(&f, &XYUPQ, "right-hand side f")?;
        Ok(EquationSpec { a, b, c, f })
    }

    pub fn parse(a: &str, b: &str, c: &str, f: &str) -> Result<Self> {
        Self::new(parse(a, &XY)?, parse(b, &XY)?, parse(c, &XY)?, parse(f, &XYUPQ)?)
    }

    /// `∂²_x1 - speed² ∂²_x2` with right-hand side `f`.
    pub fn wave(speed: f64, f: Expr) -> Result<Self> {
        Self::new(Expr::num(1.0), Expr::num(0.0), Expr::num(-speed * speed), f)
    }

    /// `∂_x1 ∂_x2` (that is `b = 1/2`) with right-hand side `f`.
    pub fn mixed_derivative(f: Expr) -> Result<Self> {
        Self::new(Expr::num(0.0), Expr::num(0.5), Expr::num(0.0), f)
    }

    pub fn coefficients(&self, x: Point) -> Result<(f64, f64, f64)> {
        let env = Env::xy(x.x1, x.x2);
        Ok((self.a.eval(&env)?, self.b.eval(&env)?, self.c.eval(&env)?))
    }

    pub fn discriminant(&self, x: Point) -> Result<f64> {
        let (a, b, c) = self.coefficients(x)?;
        Ok(b * b - a * c)
    }

    pub fn rhs(&self, x: Point, u: f64, p: f64, q: f64) -> Result<f64> {
        let env = Env::xy(x.x1, x.x2).with(Var::U, u).with(Var::P, p).with(Var::Q, q);
        Ok(self.f.eval(&env)?)
    }

    /// Whether `f` depends on the solution or its gradient.
    pub fn rhs_uses_solution(&self) -> (bool, bool) {
        (self.f.uses(Var::U), self.f.uses(Var::P) || self.f.uses(Var::Q))
    }
}

/// Supported domain shapes. All are treated as closed sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    /// `x1 ∈ [x1.0, x1.1]`, `x2 ∈ [x2.0, x2.1]`.
    Rectangle { x1: (f64, f64), x2: (f64, f64) },
    /// `γ1 ∈ [y1.0, y1.1]`, `γ2 ∈ [y2.0, y2.1]`.
    CharRectangle { y1: (f64, f64), y2: (f64, f64) },
    /// `0 ≤ x1 ≤ x1_max`, `lower·x1 ≤ x2 ≤ upper·x1`.
    Sector { lower: f64, upper: f64, x1_max: f64 },
    /// `[0, x1_max] × [0, x2_max]`.
    Quadrant { x1_max: f64, x2_max: f64 },
}

const MEMBERSHIP_SLACK: f64 = 1e-12;

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let ordered = |(lo, hi): (f64, f64), name: &str| {
            if lo < hi {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} bounds must satisfy lower < upper, got [{lo}, {hi}]")))
            }
        };
        match *self {
            DomainSpec::Rectangle { x1, x2 } => {
                ordered(x1, "x1")?;
                ordered(x2, "x2")
            }
            DomainSpec::CharRectangle { y1, y2 } => {
                ordered(y1, "y1")?;
                ordered(y2, "y2")
            }
            DomainSpec::Sector { lower, upper, x1_max } => {
                ordered((lower, upper), "sector slope")?;
                ordered((0.0, x1_max), "x1")
            }
            DomainSpec::Quadrant { x1_max, x2_max } => {
                ordered((0.0, x1_max), "x1")?;
                ordered((0.0, x2_max), "x2")
            }
        }
    }

    /// Closed membership test. Characteristic rectangles need the pair.
    pub fn contains(&self, x: Point, pair: Option<&CharacteristicPair>) -> Result<bool> {
        let s = MEMBERSHIP_SLACK;
        let within = |v: f64, (lo, hi): (f64, f64)| v >= lo - s * (1.0 + lo.abs()) && v <= hi + s * (1.0 + hi.abs());
        Ok(match *self {
            DomainSpec::Rectangle { x1, x2 } => within(x.x1, x1) && within(x.x2, x2),
            DomainSpec::CharRectangle { y1, y2 } => {
                let pair = pair.ok_or_else(|| Error::invalid("characteristic-rectangle domain needs a characteristic pair"))?;
                let y = pair.forward(x)?;
                within(y.y1, y1) && within(y.y2, y2)
            }
            DomainSpec::Sector { lower, upper, x1_max } => {
                within(x.x1, (0.0, x1_max)) && within(x.x2, (lower * x.x1, upper * x.x1))
            }
            DomainSpec::Quadrant { x1_max, x2_max } => within(x.x1, (0.0, x1_max)) && within(x.x2, (0.0, x2_max)),
        })
    }

    /// An `n × n` tensor sample of the domain plus its corners.
    pub fn sample(&self, n: usize, pair: Option<&CharacteristicPair>) -> Result<Vec<Point>> {
        if n == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        let mut pts = Vec::with_capacity(n * n + 4);
        let grid = |lo: f64, hi: f64| if n == 1 { vec![0.5 * (lo + hi)] } else { linspace(lo, hi, n) };
        match *self {
            DomainSpec::Rectangle { x1, x2 } => {
                for &a in &grid(x1.0, x1.1) {
                    for &b in &grid(x2.0, x2.1) {
                        pts.push(Point::new(a, b));
                    }
                }
                for a in [x1.0, x1.1] {
                    for b in [x2.0, x2.1] {
                        pts.push(Point::new(a, b));
                    }
                }
            }
            DomainSpec::Quadrant { x1_max, x2_max } => {
                return DomainSpec::Rectangle {
                    x1: (0.0, x1_max),
                    x2: (0.0, x2_max),
                }
                .sample(n, pair);
            }
            DomainSpec::Sector { lower, upper, x1_max } => {
                for &a in &grid(0.0, x1_max) {
                    for &m in &grid(lower, upper) {
                        pts.push(Point::new(a, m * a));
                    }
                }
                pts.push(Point::new(0.0, 0.0));
                pts.push(Point::new(x1_max, lower * x1_max));
                pts.push(Point::new(x1_max, upper * x1_max));
            }
            DomainSpec::CharRectangle { y1, y2 } => {
                let pair = pair.ok_or_else(|| Error::invalid("characteristic-rectangle domain needs a characteristic pair"))?;
                let mut ys = Vec::new();
                for &a in &grid(y1.0, y1.1) {
                    for &b in &grid(y2.0, y2.1) {
                        ys.push(CharPoint::new(a, b));
                    }
                }
                for a in [y1.0, y1.1] {
                    for b in [y2.0, y2.1] {
                        ys.push(CharPoint::new(a, b));
                    }
                }
                for y in ys {
                    pts.push(pair.invert(y)?);
                }
            }
        }
        Ok(pts)
    }

    /// Axis-aligned bounding box `((x1_lo, x1_hi), (x2_lo, x2_hi))` of a
    /// physical-space domain.
    pub fn bounding_box(&self) -> Option<((f64, f64), (f64, f64))> {
        match *self {
            DomainSpec::Rectangle { x1, x2 } => Some((x1, x2)),
            DomainSpec::Quadrant { x1_max, x2_max } => Some(((0.0, x1_max), (0.0, x2_max))),
            DomainSpec::Sector { lower, upper, x1_max } => {
                Some(((0.0, x1_max), ((lower * x1_max).min(0.0), (upper * x1_max).max(0.0))))
            }
            DomainSpec::CharRectangle { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HyperbolicityReport {
    pub min_discriminant: f64,
    pub witness: Point,
    pub threshold: f64,
    pub passed: bool,
}

impl HyperbolicityReport {
    pub fn ensure(&self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::NotHyperbolic {
                point: self.witness,
                discriminant: self.min_discriminant,
            })
        }
    }
}

/// Minimum of `b^2 - ac` over a set of points.
pub fn check_hyperbolicity_at(eq: &EquationSpec, points: &[Point], threshold: f64) -> Result<HyperbolicityReport> {
    let mut best: Option<(f64, Point)> = None;
    for &x in points {
        let d = eq.discriminant(x)?;
        if best.is_none_or(|(m, _)| d < m) {
            best = Some((d, x));
        }
    }
    let (min_discriminant, witness) = best.ok_or_else(|| Error::invalid("no sample points"))?;
    Ok(HyperbolicityReport {
        min_discriminant,
        witness,
        threshold,
        passed: min_discriminant >= threshold,
    })
}

/// Samples an `n × n` grid plus corners and reports the smallest
/// discriminant; `passed` iff it is at least `tol.hyperbolicity`.
pub fn check_hyperbolicity(
    eq: &EquationSpec,
    dom: &DomainSpec,
    n_samples: usize,
    pair: Option<&CharacteristicPair>,
    tol: &Tolerances,
) -> Result<HyperbolicityReport> {
    dom.validate()?;
    let pts = dom.sample(n_samples, pair)?;
    check_hyperbolicity_at(eq, &pts, tol.hyperbolicity)
}

/// Local direction of a characteristic family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `dx2/dx1 = slope`.
    Dx2Dx1(f64),
    /// `dx1/dx2 = slope`.
    Dx1Dx2(f64),
}

impl Direction {
    /// Unit-free tangent vector `(dx1, dx2)`.
    pub fn tangent(&self) -> (f64, f64) {
        match *self {
            Direction::Dx2Dx1(s) => (1.0, s),
            Direction::Dx1Dx2(s) => (s, 1.0),
        }
    }
}

/// The two families of the factorized characteristic ODE at a point.
/// Family 1 always takes the `+√(b²-ac)` root.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharDirections {
    pub family1: Direction,
    pub family2: Direction,
}

pub fn factor_characteristic_ode(eq: &EquationSpec, x: Point, tol: &Tolerances) -> Result<CharDirections> {
    let (a, b, c) = eq.coefficients(x)?;
    let disc = b * b - a * c;
    if disc < tol.hyperbolicity {
        return Err(Error::NotHyperbolic {
            point: x,
            discriminant: disc,
        });
    }
    let root = disc.sqrt();
    Ok(if a != 0.0 {
        CharDirections {
            family1: Direction::Dx2Dx1((b + root) / a),
            family2: Direction::Dx2Dx1((b - root) / a),
        }
    } else if c != 0.0 {
        CharDirections {
            family1: Direction::Dx1Dx2((b + root) / c),
            family2: Direction::Dx1Dx2((b - root) / c),
        }
    } else {
        CharDirections {
            family1: Direction::Dx1Dx2(0.0),
            family2: Direction::Dx2Dx1(0.0),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn rect(x1: (f64, f64), x2: (f64, f64)) -> DomainSpec {
        DomainSpec::Rectangle { x1, x2 }
    }

    #[test]
    fn constant_wave_is_hyperbolic() {
        let eq = EquationSpec::parse("1", "0", "-4", "0").unwrap();
        let r = check_hyperbolicity(&eq, &rect((-1.0, 3.0), (0.0, 2.0)), 5, None, &tol()).unwrap();
        assert_eq!(r.min_discriminant, 4.0);
        assert!(r.passed);
    }

    #[test]
    fn variable_speed_minimum_on_left_edge() {
        let eq = EquationSpec::parse("1", "0", "-x1^2", "0").unwrap();
        let r = check_hyperbolicity(&eq, &rect((1.0, 2.0), (0.0, 1.0)), 11, None, &tol()).unwrap();
        assert_eq!(r.min_discriminant, 1.0);
        assert_eq!(r.witness.x1, 1.0);
        assert!(r.passed);
    }

    #[test]
    fn parabolic_fails() {
        let eq = EquationSpec::parse("1", "0", "0", "0").unwrap();
        let r = check_hyperbolicity(&eq, &rect((0.0, 1.0), (0.0, 1.0)), 4, None, &tol()).unwrap();
        assert_eq!(r.min_discriminant, 0.0);
        assert!(!r.passed);
        assert!(matches!(r.ensure(), Err(Error::NotHyperbolic { .. })));
    }

    #[test]
    fn rhs_variables_are_checked() {
        assert!(EquationSpec::new(Expr::var(Var::U), Expr::num(0.0), Expr::num(0.0), Expr::num(0.0)).is_err());
        assert!(EquationSpec::parse("1", "0", "-1", "sin(u) + p*q - x1").is_ok());
    }

    #[test]
    fn wave_slopes() {
        let eq = EquationSpec::wave(3.0, Expr::num(0.0)).unwrap();
        let d = factor_characteristic_ode(&eq, Point::new(0.3, -2.0), &tol()).unwrap();
        assert_eq!(d.family1, Direction::Dx2Dx1(3.0));
        assert_eq!(d.family2, Direction::Dx2Dx1(-3.0));
    }

    #[test]
    fn mixed_derivative_families() {
        let eq = EquationSpec::mixed_derivative(Expr::num(0.0)).unwrap();
        let d = factor_characteristic_ode(&eq, Point::new(1.0, 1.0), &tol()).unwrap();
        assert_eq!(d.family1, Direction::Dx1Dx2(0.0));
        assert_eq!(d.family2, Direction::Dx2Dx1(0.0));
    }

    #[test]
    fn c_branch_when_a_vanishes() {
        let eq = EquationSpec::parse("0", "1", "2", "0").unwrap();
        let d = factor_characteristic_ode(&eq, Point::new(0.0, 0.0), &tol()).unwrap();
        assert_eq!(d.family1, Direction::Dx1Dx2(1.0));
        assert_eq!(d.family2, Direction::Dx1Dx2(0.0));
    }

    #[test]
    fn variable_speed_slopes_at_three() {
        let eq = EquationSpec::parse("1", "0", "-x1^2", "0").unwrap();
        let d = factor_characteristic_ode(&eq, Point::new(3.0, 0.7), &tol()).unwrap();
        assert_eq!(d.family1, Direction::Dx2Dx1(3.0));
        assert_eq!(d.family2, Direction::Dx2Dx1(-3.0));
    }

    #[test]
    fn degenerate_point_rejected() {
        let eq = EquationSpec::parse("1", "0", "-x1^2", "0").unwrap();
        assert!(factor_characteristic_ode(&eq, Point::new(0.0, 0.0), &tol()).is_err());
    }

    #[test]
    fn domain_validation_and_membership() {
        assert!(rect((1.0, 0.0), (0.0, 1.0)).validate().is_err());
        let s = DomainSpec::Sector {
            lower: 0.5,
            upper: 2.0,
            x1_max: 1.0,
        };
        assert!(s.validate().is_ok());
        assert!(s.contains(Point::new(1.0, 1.0), None).unwrap());
        assert!(s.contains(Point::new(1.0, 0.5), None).unwrap());
        assert!(!s.contains(Point::new(1.0, 0.4), None).unwrap());
        let q = DomainSpec::Quadrant { x1_max: 2.0, x2_max: 2.0 };
        assert!(q.contains(Point::new(0.0, 0.0), None).unwrap());
        assert!(!q.contains(Point::new(-0.1, 0.0), None).unwrap());
    }
}
