//! Problem-spec files: `[section]` headers followed by `key = value`
//! lines. `#` starts a comment; blank lines are ignored. Lists are comma
//! separated, point lists separate points with `;`.
//!
//! ```text
//! [equation]
//! a = 1
//! b = 0
//! c = -1
//! f = 0
//!
//! [characteristics]
//! gamma1 = x2 - x1
//! gamma2 = x2 + x1
//! inverse.x1 = (y2 - y1)/2
//! inverse.x2 = (y1 + y2)/2
//!
//! [domain]
//! kind = rectangle
//! x1 = 0, 1
//! x2 = 0, 1
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::characteristics::{CharacteristicPair, GammaField, SeedAxis, SeedLine, TraceConfig};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Var};
use crate::geom::Point;
use crate::parallelogram::{AnalyticSolution, CharRectangle};
use crate::problem::{DomainSpec, EquationSpec, Tolerances, XY, XYUPQ};
use crate::quadrature::QuadratureRule;
use crate::solvers::{parse_profile, DarbouxData, GoursatWaveData, LinearGoursatData, MixedWaveData, SolverConfig};

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

#[derive(Clone, Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

/// Raw sectioned key-value document.
#[derive(Clone, Debug, Default)]
pub struct SpecDoc {
    sections: BTreeMap<String, Section>,
}

const SECTIONS: [&str; 9] = [
    "problem",
    "equation",
    "characteristics",
    "trace",
    "domain",
    "solution",
    "solver",
    "tolerances",
    "output",
];

impl SpecDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = SpecDoc::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| spec_err(line, "section header must end with `]`"))?
                    .trim()
                    .to_string();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(spec_err(line, format!("unknown section `[{name}]`; expected one of {}", SECTIONS.join(", "))));
                }
                if doc.sections.contains_key(&name) {
                    return Err(spec_err(line, format!("duplicate section `[{name}]`")));
                }
                doc.sections.insert(name.clone(), Section { line, entries: BTreeMap::new() });
                current = Some(name);
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| spec_err(line, "expected `key = value`"))?;
            let key = key.trim().to_string();
            let section = current
                .as_ref()
                .ok_or_else(|| spec_err(line, "key outside of any section"))?;
            let sec = doc.sections.get_mut(section).expect("section exists");
            if sec.entries.contains_key(&key) {
                return Err(spec_err(line, format!("duplicate key `{key}` in [{section}]")));
            }
            sec.entries.insert(
                key,
                Entry {
                    value: value.trim().to_string(),
                    line,
                    used: false,
                },
            );
        }
        Ok(doc)
    }

    pub fn has(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn get(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let e = self.sections.get_mut(section)?.entries.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn missing(&self, section: &str, key: &str) -> Error {
        let line = self.sections.get(section).map(|s| s.line).unwrap_or(0);
        spec_err(line, format!("[{section}] is missing `{key}`"))
    }

    fn require(&mut self, section: &str, key: &str) -> Result<(String, usize)> {
        match self.get(section, key) {
            Some(v) => Ok(v),
            None => Err(self.missing(section, key)),
        }
    }

    fn check_all_used(&self) -> Result<()> {
        for (name, sec) in &self.sections {
            if let Some((key, e)) = sec.entries.iter().find(|(_, e)| !e.used) {
                return Err(spec_err(e.line, format!("unknown key `{key}` in [{name}]")));
            }
        }
        Ok(())
    }
}

fn spec_err(line: usize, msg: impl Into<String>) -> Error {
    Error::SpecFile { line, msg: msg.into() }
}

/// Attaches a line number to errors raised while interpreting a value.
fn at_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::SpecFile { .. } => e,
        other => spec_err(line, other.to_string()),
    })
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    // constant expressions such as `1/3` or `pi` are allowed
    let e = at_line(line, parse(s, &[]).map_err(Error::from))?;
    at_line(line, e.eval(&Default::default()).map_err(Error::from))
}

fn parse_list(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',').map(|p| parse_f64(p.trim(), line)).collect()
}

fn parse_pair(s: &str, line: usize) -> Result<(f64, f64)> {
    match parse_list(s, line)?.as_slice() {
        &[a, b] => Ok((a, b)),
        other => Err(spec_err(line, format!("expected two numbers, got {}", other.len()))),
    }
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| spec_err(line, format!("expected a nonnegative integer, got `{s}`")))
}

/// Everything a command may need, built from a spec document.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: Option<String>,
    pub description: Option<String>,
    pub equation: Option<EquationSpec>,
    pub pair: Option<CharacteristicPair>,
    pub trace: Option<TraceConfig>,
    pub domain: Option<DomainSpec>,
    pub solution: Option<AnalyticSolution>,
    pub rect: Option<CharRectangle>,
    pub solver: Option<SolverSpec>,
    pub exact: Option<Expr>,
    pub tolerances: Tolerances,
    pub solver_cfg: SolverConfig,
    pub identity_threshold: f64,
    pub samples: usize,
    pub output: OutputSpec,
}

#[derive(Clone, Debug, Default)]
pub struct OutputSpec {
    pub grid: Option<[usize; 2]>,
    pub points: Vec<Point>,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub enum SolverSpec {
    GoursatWave(GoursatWaveData),
    MixedWave(MixedWaveData),
    Darboux(DarbouxData),
    GoursatLinear { data: LinearGoursatData, upper: Point },
}

impl SolverSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SolverSpec::GoursatWave(_) => "goursat-wave",
            SolverSpec::MixedWave(_) => "mixed-wave",
            SolverSpec::Darboux(_) => "darboux",
            SolverSpec::GoursatLinear { .. } => "goursat-linear",
        }
    }

    pub fn equation(&self) -> Result<EquationSpec> {
        match self {
            SolverSpec::GoursatWave(d) => d.equation(),
            SolverSpec::MixedWave(d) => d.equation(),
            SolverSpec::Darboux(d) => d.equation(),
            SolverSpec::GoursatLinear { data, .. } => data.equation(),
        }
    }

    pub fn default_pair(&self) -> Result<CharacteristicPair> {
        match self {
            SolverSpec::GoursatWave(d) => CharacteristicPair::wave(d.speed),
            SolverSpec::MixedWave(d) => CharacteristicPair::wave(d.speed),
            _ => Ok(CharacteristicPair::identity()),
        }
    }
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = SpecDoc::parse(text)?;
        let spec = Self::from_doc(&mut doc)?;
        doc.check_all_used()?;
        Ok(spec)
    }

    fn from_doc(doc: &mut SpecDoc) -> Result<Self> {
        let name = doc.get("problem", "name").map(|v| v.0);
        let description = doc.get("problem", "description").map(|v| v.0);

        let mut tolerances = Tolerances::default();
        let mut solver_cfg = SolverConfig::default();
        let mut identity_threshold = 1e-8;
        let mut samples = 21;
        if doc.has("tolerances") {
            for (key, slot) in [
                ("hyperbolicity", &mut tolerances.hyperbolicity),
                ("characteristic", &mut tolerances.characteristic),
                ("jacobian", &mut tolerances.jacobian),
                ("inverse", &mut tolerances.inverse),
                ("beta_relative", &mut tolerances.beta_relative),
                ("picard_tol", &mut solver_cfg.picard_tol),
                ("series_eps", &mut solver_cfg.series_eps),
                ("cascade_eps", &mut solver_cfg.cascade_eps),
                ("identity", &mut identity_threshold),
            ] {
                if let Some((v, line)) = doc.get("tolerances", key) {
                    *slot = parse_f64(&v, line)?;
                }
            }
            for (key, slot) in [
                ("newton_max_iter", &mut tolerances.newton_max_iter),
                ("newton_halvings", &mut tolerances.newton_halvings),
                ("max_picard", &mut solver_cfg.max_picard),
                ("samples", &mut samples),
            ] {
                if let Some((v, line)) = doc.get("tolerances", key) {
                    *slot = parse_usize(&v, line)?;
                }
            }
            if let Some((v, line)) = doc.get("tolerances", "quad_points") {
                let p = parse_usize(&v, line)?;
                solver_cfg.rule = at_line(line, QuadratureRule::gauss(p, solver_cfg.rule.panels_per_axis()))?;
            }
        }

        let solver = if doc.has("solver") { Self::solver(doc)? } else { None };
        let exact = match doc.get("solver", "exact") {
            Some((v, line)) => Some(at_line(line, parse(&v, &XY).map_err(Error::from))?),
            None => None,
        };

        let equation = if doc.has("equation") {
            let mut field = |k: &str, vars: &[Var]| -> Result<Expr> {
                let (v, line) = doc.require("equation", k)?;
                at_line(line, parse(&v, vars).map_err(Error::from))
            };
            let (a, b, c) = (field("a", &XY)?, field("b", &XY)?, field("c", &XY)?);
            let f = field("f", &XYUPQ)?;
            Some(EquationSpec::new(a, b, c, f)?)
        } else {
            solver.as_ref().map(SolverSpec::equation).transpose()?
        };

        let domain = if doc.has("domain") { Some(Self::domain(doc)?) } else { None };

        let pair = if doc.has("characteristics") {
            let (g1, l1) = doc.require("characteristics", "gamma1")?;
            let (g2, l2) = doc.require("characteristics", "gamma2")?;
            let g1 = at_line(l1, GammaField::parse(&g1))?;
            let g2 = at_line(l2, GammaField::parse(&g2))?;
            let pair = match doc.get("characteristics", "inverse") {
                Some((mode, line)) if mode == "newton" => {
                    let dom = domain
                        .as_ref()
                        .and_then(DomainSpec::bounding_box)
                        .ok_or_else(|| spec_err(line, "Newton inverse needs a physical-space [domain] to seed from"))?;
                    let seeds = DomainSpec::Rectangle { x1: dom.0, x2: dom.1 }.sample(samples, None)?;
                    at_line(line, CharacteristicPair::newton(g1, g2, &seeds))?
                }
                Some((mode, line)) => return Err(spec_err(line, format!("unknown inverse mode `{mode}`"))),
                None => {
                    let (x1, lx) = doc.require("characteristics", "inverse.x1")?;
                    let (x2, ly) = doc.require("characteristics", "inverse.x2")?;
                    let y = [Var::Y1, Var::Y2];
                    let e1 = at_line(lx, parse(&x1, &y).map_err(Error::from))?;
                    let e2 = at_line(ly, parse(&x2, &y).map_err(Error::from))?;
                    CharacteristicPair::new(g1, g2, crate::characteristics::InverseMap::analytic(e1, e2)?)
                }
            };
            Some(pair.with_tolerances(tolerances))
        } else {
            solver
                .as_ref()
                .map(|s| s.default_pair().map(|p| p.with_tolerances(tolerances)))
                .transpose()?
        };

        let trace = if doc.has("trace") {
            let (axis, line) = doc.require("trace", "axis")?;
            let axis = match axis.as_str() {
                "x1" => SeedAxis::X1,
                "x2" => SeedAxis::X2,
                other => return Err(spec_err(line, format!("trace axis must be x1 or x2, got `{other}`"))),
            };
            let (at, la) = doc.require("trace", "at")?;
            let (step, ls) = doc.require("trace", "step")?;
            let (grid, lg) = doc.require("trace", "grid")?;
            let n = parse_usize(&grid, lg)?;
            Some(TraceConfig {
                seed: SeedLine {
                    axis,
                    at: parse_f64(&at, la)?,
                },
                step: parse_f64(&step, ls)?,
                grid: [n, n],
            })
        } else {
            None
        };

        let solution = match doc.get("solution", "u") {
            Some((v, line)) => Some(at_line(line, AnalyticSolution::parse(&v))?),
            None => None,
        };
        let rect = match doc.get("solution", "rect") {
            Some((v, line)) => match parse_list(&v, line)?.as_slice() {
                &[l1, l2, r1, r2] => Some(at_line(line, CharRectangle::new(l1, l2, r1, r2))?),
                _ => return Err(spec_err(line, "rect needs four numbers l1, l2, r1, r2")),
            },
            None => None,
        };

        let mut output = OutputSpec::default();
        if let Some((v, line)) = doc.get("output", "grid") {
            output.grid = Some(match *parse_list(&v, line)?.as_slice() {
                [n] => [n as usize, n as usize],
                [n, m] => [n as usize, m as usize],
                _ => return Err(spec_err(line, "grid takes one or two node counts")),
            });
        }
        if let Some((v, line)) = doc.get("output", "points") {
            for chunk in v.split(';').filter(|c| !c.trim().is_empty()) {
                let (a, b) = parse_pair(chunk, line)?;
                output.points.push(Point::new(a, b));
            }
        }
        output.csv = doc.get("output", "csv").map(|v| PathBuf::from(v.0));
        output.report = doc.get("output", "report").map(|v| PathBuf::from(v.0));

        Ok(ProblemSpec {
            name,
            description,
            equation,
            pair,
            trace,
            domain,
            solution,
            rect,
            solver,
            exact,
            tolerances,
            solver_cfg,
            identity_threshold,
            samples,
            output,
        })
    }

    fn domain(doc: &mut SpecDoc) -> Result<DomainSpec> {
        let (kind, line) = doc.require("domain", "kind")?;
        let mut pair_of = |k: &str| -> Result<(f64, f64)> {
            let (v, l) = doc.require("domain", k)?;
            parse_pair(&v, l)
        };
        let dom = match kind.as_str() {
            "rectangle" => DomainSpec::Rectangle {
                x1: pair_of("x1")?,
                x2: pair_of("x2")?,
            },
            "char-rectangle" => DomainSpec::CharRectangle {
                y1: pair_of("y1")?,
                y2: pair_of("y2")?,
            },
            "sector" => {
                let (lower, upper) = pair_of("slopes")?;
                let (v, l) = doc.require("domain", "x1_max")?;
                DomainSpec::Sector {
                    lower,
                    upper,
                    x1_max: parse_f64(&v, l)?,
                }
            }
            "quadrant" => {
                let (x1_max, x2_max) = pair_of("extent")?;
                DomainSpec::Quadrant { x1_max, x2_max }
            }
            other => {
                return Err(spec_err(
                    line,
                    format!("unknown domain kind `{other}`; expected rectangle, char-rectangle, sector or quadrant"),
                ))
            }
        };
        at_line(line, dom.validate())?;
        Ok(dom)
    }

    fn solver(doc: &mut SpecDoc) -> Result<Option<SolverSpec>> {
        fn num(doc: &mut SpecDoc, k: &str) -> Result<f64> {
            let (v, l) = doc.require("solver", k)?;
            parse_f64(&v, l)
        }
        fn profile(doc: &mut SpecDoc, k: &str) -> Result<Expr> {
            let (v, l) = doc.require("solver", k)?;
            at_line(l, parse_profile(&v))
        }
        fn field(doc: &mut SpecDoc, k: &str, vars: &[Var], default: Option<f64>) -> Result<Expr> {
            match (doc.get("solver", k), default) {
                (Some((v, l)), _) => at_line(l, parse(&v, vars).map_err(Error::from)),
                (None, Some(d)) => Ok(Expr::num(d)),
                (None, None) => Err(doc.missing("solver", k)),
            }
        }
        fn pair(doc: &mut SpecDoc, k: &str) -> Result<(f64, f64)> {
            let (v, l) = doc.require("solver", k)?;
            parse_pair(&v, l)
        }

        let (kind, kline) = doc.require("solver", "kind")?;
        let spec = match kind.as_str() {
            "none" => return Ok(None),
            "goursat-wave" => {
                let speed = num(doc, "speed")?;
                let phi1 = profile(doc, "phi1")?;
                let phi2 = profile(doc, "phi2")?;
                let f = field(doc, "f", &XY, Some(0.0))?;
                SolverSpec::GoursatWave(at_line(kline, GoursatWaveData::new(speed, phi1, phi2, f))?)
            }
            "mixed-wave" => {
                let speed = num(doc, "speed")?;
                let phi = profile(doc, "phi")?;
                let psi = profile(doc, "psi")?;
                let mu = profile(doc, "mu")?;
                let f = field(doc, "f", &XY, Some(0.0))?;
                SolverSpec::MixedWave(at_line(kline, MixedWaveData::new(speed, phi, psi, mu, f))?)
            }
            "darboux" => {
                let alpha = num(doc, "alpha")?;
                let beta = num(doc, "beta")?;
                let lambda = match doc.get("solver", "lambda") {
                    Some((v, l)) => parse_f64(&v, l)?,
                    None => 0.0,
                };
                let g = field(doc, "g", &[Var::X1, Var::X2, Var::U], Some(0.0))?;
                let growth = match doc.get("solver", "growth") {
                    Some((v, l)) => parse_pair(&v, l)?,
                    None => (0.0, 0.0),
                };
                let f = field(doc, "f", &XY, None)?;
                SolverSpec::Darboux(at_line(kline, DarbouxData::new(alpha, beta, lambda, g, f, growth))?)
            }
            "goursat-linear" => {
                let corner = pair(doc, "corner")?;
                let upper = pair(doc, "upper")?;
                let a = field(doc, "a", &XY, Some(0.0))?;
                let b = field(doc, "b", &XY, Some(0.0))?;
                let c = field(doc, "c", &XY, Some(0.0))?;
                let f = field(doc, "f", &XY, Some(0.0))?;
                let phi = profile(doc, "phi")?;
                let psi = profile(doc, "psi")?;
                let data = at_line(
                    kline,
                    LinearGoursatData::new(Point::new(corner.0, corner.1), a, b, c, f, phi, psi),
                )?;
                SolverSpec::GoursatLinear {
                    data,
                    upper: Point::new(upper.0, upper.1),
                }
            }
            other => {
                return Err(spec_err(
                    kline,
                    format!("unknown solver `{other}`; expected goursat-wave, mixed-wave, darboux, goursat-linear or none"),
                ))
            }
        };
        Ok(Some(spec))
    }

    /// Every expression in the spec, labelled, for audits such as checking
    /// symbolic derivatives.
    pub fn expressions(&self) -> Vec<(String, Expr)> {
        let mut out = Vec::new();
        if let Some(eq) = &self.equation {
            for (n, e) in [("a", &eq.a), ("b", &eq.b), ("c", &eq.c), ("f", &eq.f)] {
                out.push((format!("equation.{n}"), e.clone()));
            }
        }
        if let Some(pair) = &self.pair {
            for (k, g) in pair.gamma.iter().enumerate() {
                if let GammaField::Analytic(a) = g {
                    out.push((format!("gamma{}", k + 1), a.expr.clone()));
                }
            }
            if let crate::characteristics::InverseMap::Analytic { x1, x2, .. } = &pair.inverse {
                out.push(("inverse.x1".into(), x1.clone()));
                out.push(("inverse.x2".into(), x2.clone()));
            }
        }
        if let Some(u) = &self.solution {
            out.push(("solution.u".into(), u.u.clone()));
        }
        if let Some(e) = &self.exact {
            out.push(("solver.exact".into(), e.clone()));
        }
        match &self.solver {
            Some(SolverSpec::GoursatWave(d)) => {
                out.extend([("phi1".into(), d.phi1.clone()), ("phi2".into(), d.phi2.clone())]);
            }
            Some(SolverSpec::MixedWave(d)) => {
                out.extend([
                    ("phi".into(), d.phi.clone()),
                    ("psi".into(), d.psi.clone()),
                    ("mu".into(), d.mu.clone()),
                ]);
            }
            Some(SolverSpec::Darboux(d)) => out.push(("g".into(), d.g.clone())),
            Some(SolverSpec::GoursatLinear { data, .. }) => {
                out.extend([("phi".into(), data.phi.clone()), ("psi".into(), data.psi.clone())]);
            }
            None => {}
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_wave() {
        let spec = ProblemSpec::parse(
            "[equation]\na = 1\nb = 0\nc = -1 # speed one\nf = 0\n\n[domain]\nkind = rectangle\nx1 = 0, 1\nx2 = 0, 1/2\n",
        )
        .unwrap();
        assert!(spec.equation.is_some());
        assert_eq!(
            spec.domain,
            Some(DomainSpec::Rectangle {
                x1: (0.0, 1.0),
                x2: (0.0, 0.5)
            })
        );
    }

    #[test]
    fn reports_line_numbers() {
        match ProblemSpec::parse("[equation]\na = 1\nb = 0 +\nc = 0\nf = 0\n") {
            Err(Error::SpecFile { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match ProblemSpec::parse("[equation]\na = 1\nb = 0\nc = 0\nf = 0\nbogus = 1\n") {
            Err(Error::SpecFile { line, msg }) => {
                assert_eq!(line, 6);
                assert!(msg.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(ProblemSpec::parse("[nope]\n"), Err(Error::SpecFile { line: 1, .. })));
    }

    #[test]
    fn solver_supplies_equation_and_pair() {
        let spec = ProblemSpec::parse("[solver]\nkind = goursat-wave\nspeed = 2\nphi1 = t\nphi2 = t\nf = 0\n").unwrap();
        assert!(spec.equation.is_some());
        let pair = spec.pair.unwrap();
        let x = pair.invert(crate::geom::CharPoint::new(0.0, 4.0)).unwrap();
        assert_eq!(x, Point::new(1.0, 2.0));
    }
}
