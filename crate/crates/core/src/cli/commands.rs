use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::spec_file::{ProblemSpec, SolverSpec};
use super::{Command, Common, IdentityArgs, SolveArgs, EXIT_FAILURE, EXIT_OK, EXIT_SPEC};
use crate::catalog;
use crate::characteristics::{inverse_roundtrip_error, trace_characteristics, validate_characteristics, CharacteristicPair};
use crate::error::{Error, Result};
use crate::expr::Env;
use crate::geom::{linspace, CharPoint, Point};
use crate::interp::UniformGrid;
use crate::parallelogram::{
    converse_probe, halving_sizes, identity_residual, AnalyticSolution, CharRectangle, GridSolution, SolutionField,
};
use crate::problem::{check_hyperbolicity, DomainSpec};
use crate::quadrature::QuadratureRule;
use crate::solvers::{
    darboux_value, solve_darboux_grid, solve_goursat_linear_picard, solve_goursat_wave, solve_mixed_wave,
    ConvergenceReport,
};

/// Failure class, which decides the exit code.
enum Failure {
    Spec(Error),
    Run(Error),
}

type CmdResult<T = i32> = std::result::Result<T, Failure>;

trait Classify<T> {
    fn spec(self) -> CmdResult<T>;
    fn run(self) -> CmdResult<T>;
}

impl<T> Classify<T> for Result<T> {
    fn spec(self) -> CmdResult<T> {
        self.map_err(Failure::Spec)
    }
    fn run(self) -> CmdResult<T> {
        self.map_err(Failure::Run)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Spec(Error::invalid(msg))
}

pub(super) fn dispatch(cmd: Command) -> i32 {
    let result = match cmd {
        Command::Validate(c) => validate(&c),
        Command::CheckIdentity(a) => check_identity(&a),
        Command::Solve(a) => solve(&a),
        Command::Trace(c) => trace(&c),
        Command::ListExamples => list_examples(),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Spec(e)) => {
            eprintln!("error: {e}");
            EXIT_SPEC
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn load(c: &Common) -> CmdResult<ProblemSpec> {
    let mut spec = match (&c.spec, &c.example) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            ProblemSpec::parse(&text).spec()?
        }
        (None, Some(name)) => catalog::load(name).spec()?,
        _ => return Err(usage("give a spec file or --example NAME")),
    };
    if c.quad_points.is_some() || c.panels.is_some() {
        let r = &spec.solver_cfg.rule;
        spec.solver_cfg.rule = QuadratureRule::new(
            r.kind(),
            c.quad_points.unwrap_or(r.points_per_axis()),
            c.panels.unwrap_or(r.panels_per_axis()),
        )
        .spec()?;
    }
    if let Some(g) = &c.grid {
        spec.output.grid = Some(match *g.as_slice() {
            [n] => [n, n],
            [n, m] => [n, m],
            _ => return Err(usage("--grid takes N or N1,N2")),
        });
    }
    if let Some(p) = &c.out {
        spec.output.csv = Some(p.clone());
    }
    if let Some(p) = &c.json_report {
        spec.output.report = Some(p.clone());
    }
    Ok(spec)
}

fn write_file(path: &Path, text: &str) -> CmdResult<()> {
    fs::write(path, text).map_err(|e| Failure::Run(Error::Io(e)))
}

/// Writes the JSON report to the configured path, else to stdout or stderr.
fn emit_report(spec: &ProblemSpec, report: &Value, to_stderr: bool) -> CmdResult<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match &spec.output.report {
        Some(p) => write_file(p, &text),
        None if to_stderr => {
            eprint!("{text}");
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_csv(spec: &ProblemSpec, csv: &str) -> CmdResult<()> {
    match &spec.output.csv {
        Some(p) => write_file(p, csv),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv.as_bytes()).map_err(|e| Failure::Run(Error::Io(e)))
        }
    }
}

fn header(spec: &ProblemSpec, command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("problem".into(), json!(spec.name));
    m
}

fn list_examples() -> CmdResult {
    for e in catalog::entries() {
        let desc = e.load().ok().and_then(|s| s.description).unwrap_or_default();
        println!("{:<22} {desc}", e.name);
    }
    Ok(EXIT_OK)
}

fn validate(c: &Common) -> CmdResult {
    let mut spec = load(c)?;
    if let Some(t) = c.tol {
        spec.tolerances.characteristic = t;
    }
    let tol = spec.tolerances;
    let pair = spec.pair.clone().map(|p| p.with_tolerances(tol));
    let eq = spec
        .equation
        .clone()
        .ok_or_else(|| usage("nothing to validate: the spec has neither [equation] nor [solver]"))?;
    let n = spec.output.grid.map_or(spec.samples, |g| g[0]);

    let mut checks = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut push = |name: &str, r: Result<(bool, Value)>| {
        let (passed, detail) = r.unwrap_or_else(|e| (false, json!({ "error": e.to_string() })));
        checks.push(json!({ "name": name, "passed": passed, "detail": detail }));
    };

    match &spec.domain {
        Some(dom) => {
            push(
                "hyperbolicity",
                check_hyperbolicity(&eq, dom, n, pair.as_ref(), &tol).map(|r| (r.passed, json!(r))),
            );
            if let Some(pair) = &pair {
                push(
                    "characteristics",
                    validate_characteristics(&eq, pair, dom, n, &tol).map(|r| (r.passed, json!(r))),
                );
                if let DomainSpec::CharRectangle { y1, y2 } = dom {
                    push(
                        "inverse",
                        inverse_roundtrip_error(pair, *y1, *y2, n)
                            .map(|e| (e <= tol.inverse, json!({ "max_error": e, "threshold": tol.inverse }))),
                    );
                }
            }
        }
        None => warnings.push("no [domain]: hyperbolicity and characteristics were not sampled".into()),
    }

    let mut out = header(&spec, "validate");
    match &spec.solver {
        Some(SolverSpec::MixedWave(d)) => {
            let m = d.matching_residuals().run()?;
            if m.max_abs() > 1e-12 {
                warnings.push(format!(
                    "corner conditions fail (max residual {:.3e}); the solution is discontinuous or kinked across x2 = {} x1",
                    m.max_abs(),
                    d.speed
                ));
            }
            out.insert("matching".into(), json!(m));
        }
        Some(SolverSpec::Darboux(d)) => {
            let x1_max = spec.domain.as_ref().and_then(DomainSpec::bounding_box).map_or(1.0, |b| b.0 .1);
            warnings.extend(d.growth_warnings(x1_max).run()?);
        }
        _ => {}
    }

    let passed = checks.iter().all(|c| c["passed"] == json!(true));
    out.insert("passed".into(), json!(passed));
    out.insert("checks".into(), Value::Array(checks));
    out.insert("warnings".into(), json!(warnings));
    emit_report(&spec, &Value::Object(out), false)?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}

fn parse_numbers(s: &str, what: &str) -> CmdResult<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("{what}: `{}` is not a number", p.trim())))
        })
        .collect()
}

fn check_identity(a: &IdentityArgs) -> CmdResult {
    let spec = load(&a.common)?;
    let threshold = a.common.tol.unwrap_or(spec.identity_threshold);
    let eq = spec.equation.clone().ok_or_else(|| usage("check-identity needs an [equation] or [solver] block"))?;
    let pair = spec
        .pair
        .clone()
        .ok_or_else(|| usage("check-identity needs a [characteristics] block"))?;
    let rect = match &a.rect {
        Some(s) => match parse_numbers(s, "--rect")?.as_slice() {
            &[l1, l2, r1, r2] => CharRectangle::new(l1, l2, r1, r2).spec()?,
            _ => return Err(usage("--rect takes l1,l2,r1,r2")),
        },
        None => spec.rect.ok_or_else(|| usage("no rectangle: pass --rect or set [solution] rect"))?,
    };
    let field: Box<dyn SolutionField> = if let Some(src) = &a.solution {
        Box::new(AnalyticSolution::parse(src).spec()?)
    } else if let Some(path) = &a.solution_grid {
        Box::new(read_grid_csv(path).spec()?)
    } else {
        Box::new(
            spec.solution
                .clone()
                .ok_or_else(|| usage("no solution: pass --solution, --solution-grid or set [solution] u"))?,
        )
    };
    let rule = &spec.solver_cfg.rule;
    let report = identity_residual(&eq, &pair, field.as_ref(), &rect, rule).run()?;
    let passed = report.residual.abs() <= threshold;

    let mut out = header(&spec, "check-identity");
    if let Value::Object(m) = json!(report) {
        out.extend(m);
    }
    out.insert("threshold".into(), json!(threshold));
    out.insert("passed".into(), json!(passed));
    if a.probe {
        let h0 = (rect.l2 - rect.l1).min(rect.r2 - rect.r1);
        let sizes = halving_sizes(h0, 6);
        let corner = CharPoint::new(rect.l1, rect.r1);
        let probe = converse_probe(&eq, &pair, field.as_ref(), corner, &sizes, rule).run()?;
        out.insert("probe_order".into(), json!(probe.observed_order()));
        out.insert("probe".into(), json!(probe));
    }
    emit_report(&spec, &Value::Object(out), false)?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}

/// Output points for a physical or characteristic domain: an `n1 × n2`
/// tensor grid, x1 (or y1, or x1 for a sector) outer. Sector rows run over
/// slopes `lower..upper` at each `x1`.
pub fn grid_points(dom: &DomainSpec, n: [usize; 2], pair: Option<&CharacteristicPair>) -> Result<Vec<Point>> {
    if n[0] < 2 || n[1] < 2 {
        return Err(Error::invalid("output grid needs at least 2 nodes per axis"));
    }
    dom.validate()?;
    let mut pts = Vec::with_capacity(n[0] * n[1]);
    let tensor = |a: (f64, f64), b: (f64, f64), pts: &mut Vec<Point>| {
        for &s in &linspace(a.0, a.1, n[0]) {
            for &t in &linspace(b.0, b.1, n[1]) {
                pts.push(Point::new(s, t));
            }
        }
    };
    match *dom {
        DomainSpec::Rectangle { x1, x2 } => tensor(x1, x2, &mut pts),
        DomainSpec::Quadrant { x1_max, x2_max } => tensor((0.0, x1_max), (0.0, x2_max), &mut pts),
        DomainSpec::Sector { lower, upper, x1_max } => {
            for &s in &linspace(0.0, x1_max, n[0]) {
                for &m in &linspace(lower, upper, n[1]) {
                    pts.push(Point::new(s, m * s));
                }
            }
        }
        DomainSpec::CharRectangle { y1, y2 } => {
            let pair = pair.ok_or_else(|| Error::invalid("characteristic-rectangle domain needs a characteristic pair"))?;
            let mut ys = Vec::new();
            tensor(y1, y2, &mut ys);
            for y in ys {
                pts.push(pair.invert(CharPoint::new(y.x1, y.x2))?);
            }
        }
    }
    Ok(pts)
}

fn points_csv(points: &[Point], values: &[f64]) -> String {
    let mut out = String::from("x1,x2,u\n");
    for (x, u) in points.iter().zip(values) {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", x.x1, x.x2, u).expect("write to string");
    }
    out
}

/// Reads an `x1,x2,u` CSV laid out on a tensor grid with x1 outer.
pub fn read_grid_csv(path: &Path) -> Result<GridSolution> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let nums: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match nums.ok().as_deref() {
            Some(&[a, b, c]) => rows.push((a, b, c)),
            _ => {
                return Err(Error::SpecFile {
                    line: i + 1,
                    msg: "expected three numbers x1,x2,u".into(),
                })
            }
        }
    }
    let first = rows.first().ok_or_else(|| Error::invalid("solution grid is empty"))?.0;
    let n2 = rows.iter().take_while(|r| r.0 == first).count();
    if n2 < 2 || rows.len() % n2 != 0 || rows.len() / n2 < 2 {
        return Err(Error::invalid("solution grid is not a tensor grid with at least 2 nodes per axis"));
    }
    let n1 = rows.len() / n2;
    let lo = [rows[0].0, rows[0].1];
    let hi = [rows[rows.len() - 1].0, rows[rows.len() - 1].1];
    let grid = UniformGrid::new(lo, hi, [n1, n2]);
    for (i, j, x1, x2) in grid.nodes() {
        let r = rows[grid.index(i, j)];
        let scale = 1e-9 * (1.0 + x1.abs().max(x2.abs()));
        if (r.0 - x1).abs() > scale || (r.1 - x2).abs() > scale {
            return Err(Error::invalid(format!(
                "solution grid is not uniform near ({}, {})",
                r.0, r.1
            )));
        }
    }
    let values = rows.into_iter().map(|r| r.2).collect();
    Ok(GridSolution::physical(grid, values))
}

fn solve(a: &SolveArgs) -> CmdResult {
    let mut spec = load(&a.common)?;
    if let Some(t) = a.common.tol {
        spec.solver_cfg.picard_tol = t;
    }
    let solver = spec.solver.clone().ok_or_else(|| usage("solve needs a [solver] block"))?;
    let mut points = match &a.points {
        Some(s) => {
            let mut pts = Vec::new();
            for chunk in s.split(';').filter(|c| !c.trim().is_empty()) {
                match parse_numbers(chunk, "--points")?.as_slice() {
                    &[x1, x2] => pts.push(Point::new(x1, x2)),
                    _ => return Err(usage("--points takes x1,x2;x1,x2;...")),
                }
            }
            pts
        }
        None if a.common.grid.is_none() => spec.output.points.clone(),
        None => Vec::new(),
    };
    let cfg = spec.solver_cfg.clone();
    let mut out = header(&spec, "solve");
    out.insert("solver".into(), json!(solver.kind()));

    // Non-convergence still writes the report before exiting with 1.
    let nonconvergence = |out: &mut Map<String, Value>, e: Error| -> CmdResult {
        if let Error::NonConvergence { iterations, history, .. } = e {
            let r = ConvergenceReport {
                iterations,
                history,
                converged: false,
            };
            out.insert("iteration".into(), json!(r));
            out.insert("converged".into(), json!(false));
            emit_report(&spec, &Value::Object(out.clone()), true)?;
            eprintln!("error: fixed-point iteration did not converge after {iterations} iterations");
            Ok(EXIT_FAILURE)
        } else {
            Err(Failure::Run(e))
        }
    };

    let (csv, values) = match &solver {
        SolverSpec::GoursatLinear { data, upper } => {
            let n = spec.output.grid.map_or(33, |g| g[0]);
            let sol = match solve_goursat_linear_picard(data, *upper, n, &cfg) {
                Ok(s) => s,
                Err(e) => return nonconvergence(&mut out, e),
            };
            out.insert("iteration".into(), json!(sol.report));
            out.insert("converged".into(), json!(true));
            if points.is_empty() {
                points = sol.grid.nodes().map(|(_, _, x1, x2)| Point::new(x1, x2)).collect();
                (sol.to_csv(), sol.values.clone())
            } else {
                let field = sol.field();
                let vals = points.iter().map(|&x| field.value(x)).collect::<Result<Vec<_>>>().run()?;
                (points_csv(&points, &vals), vals)
            }
        }
        other => {
            if points.is_empty() {
                let dom = spec.domain.as_ref().ok_or_else(|| usage("solve needs a [domain], [output] points or --points"))?;
                let n = spec.output.grid.unwrap_or([51, 51]);
                points = grid_points(dom, n, spec.pair.as_ref()).spec()?;
            }
            let vals: Vec<f64> = match other {
                SolverSpec::GoursatWave(d) => points
                    .iter()
                    .map(|&x| solve_goursat_wave(d, x, &cfg.rule))
                    .collect::<Result<_>>()
                    .run()?,
                SolverSpec::MixedWave(d) => {
                    out.insert("matching".into(), json!(d.matching_residuals().run()?));
                    points
                        .iter()
                        .map(|&x| solve_mixed_wave(d, x, &cfg.rule))
                        .collect::<Result<_>>()
                        .run()?
                }
                SolverSpec::Darboux(d) => {
                    let nonlinear = d.lambda != 0.0 && d.g.as_num() != Some(0.0);
                    let iterate = if nonlinear {
                        let x1_max = points.iter().map(|p| p.x1).fold(0.0, f64::max);
                        match solve_darboux_grid(d, x1_max, &cfg) {
                            Ok((it, grid)) => {
                                out.insert("iteration".into(), json!(it));
                                out.insert("converged".into(), json!(true));
                                Some(grid)
                            }
                            Err(e) => return nonconvergence(&mut out, e),
                        }
                    } else {
                        None
                    };
                    let mut vals = Vec::with_capacity(points.len());
                    let (mut ratio, mut cells) = (0.0f64, 0usize);
                    for &x in &points {
                        let r = darboux_value(d, x, iterate.as_ref(), &cfg).run()?;
                        ratio = ratio.max(r.max_term_ratio);
                        cells = cells.max(r.cells);
                        vals.push(r.value);
                    }
                    out.insert("max_term_ratio".into(), json!(ratio));
                    out.insert("max_cells".into(), json!(cells));
                    vals
                }
                SolverSpec::GoursatLinear { .. } => unreachable!("handled above"),
            };
            (points_csv(&points, &vals), vals)
        }
    };

    out.insert("points".into(), json!(points.len()));
    if let (Some(exact), false) = (&spec.exact, points.is_empty()) {
        let mut worst = (-1.0f64, points.first().copied().unwrap_or(Point::new(0.0, 0.0)));
        for (x, u) in points.iter().zip(&values) {
            let e = (u - exact.eval(&Env::xy(x.x1, x.x2)).map_err(Error::from).run()?).abs();
            if e > worst.0 || e.is_nan() {
                worst = (e, *x);
            }
        }
        out.insert("max_error".into(), json!(worst.0));
        out.insert("error_witness".into(), json!(worst.1));
    }
    if let [x] = points.as_slice() {
        out.insert("value".into(), json!(values[0]));
        out.insert("at".into(), json!(x));
    }
    emit_csv(&spec, &csv)?;
    emit_report(&spec, &Value::Object(out), true)?;
    Ok(EXIT_OK)
}

fn trace(c: &Common) -> CmdResult {
    let spec = load(c)?;
    let eq = spec.equation.clone().ok_or_else(|| usage("trace needs an [equation] block"))?;
    let dom = spec.domain.ok_or_else(|| usage("trace needs a [domain] block"))?;
    let mut cfg = spec.trace.ok_or_else(|| usage("trace needs a [trace] block"))?;
    if let Some(g) = spec.output.grid {
        cfg.grid = g;
    }
    let mut tol = spec.tolerances;
    if let Some(t) = c.tol {
        tol.inverse = t;
    }
    let traced = trace_characteristics(&eq, &dom, &cfg, &tol).run()?;

    let mut out = header(&spec, "trace");
    out.insert("grid".into(), json!(cfg.grid));
    out.insert("step".into(), json!(cfg.step));
    out.insert("exits".into(), json!(traced.exits));
    if let Some(pair) = spec.pair.as_ref().filter(|p| !p.is_grid()) {
        let mut dev = [0.0f64; 2];
        for (i, j, x1, x2) in traced.grid.nodes() {
            let k = traced.grid.index(i, j);
            for (f, d) in dev.iter_mut().enumerate() {
                let exact = pair.gamma[f].value(Point::new(x1, x2)).run()?;
                *d = d.max((traced.values[f][k] - exact).abs());
            }
        }
        out.insert("max_deviation".into(), json!(dev));
    }
    emit_csv(&spec, &traced.to_csv())?;
    emit_report(&spec, &Value::Object(out), true)?;
    Ok(EXIT_OK)
}
