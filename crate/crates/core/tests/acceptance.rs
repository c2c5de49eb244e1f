//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

mod common;

use std::process::Command;
use std::time::Instant;

use charpar::catalog;
use charpar::characteristics::{trace_characteristics, CharacteristicPair, SeedAxis, SeedLine, TraceConfig};
use charpar::cli::{ProblemSpec, SolverSpec};
use charpar::expr::{Env, Expr, Var};
use charpar::geom::{CharPoint, Point};
use charpar::parallelogram::{
    alternating_sum, converse_probe, halving_sizes, identity_residual, vertices, AnalyticSolution, FnSolution,
    SolutionField,
};
use charpar::problem::{DomainSpec, EquationSpec, Tolerances};
use charpar::quadrature::{gauss_legendre, QuadratureRule};
use charpar::solvers::{
    darboux_cascade, solve_darboux, solve_darboux_grid, solve_goursat_linear_picard, solve_goursat_wave,
    solve_mixed_wave, DarbouxData, GoursatWaveData, MixedWaveData, SolverConfig,
};
use common::{darboux_oracle, random_rect, rng};
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn spec(name: &str) -> Result<ProblemSpec, String> {
    ok(catalog::load(name))
}

fn parts(s: &ProblemSpec) -> Result<(EquationSpec, CharacteristicPair), String> {
    Ok((
        s.equation.clone().ok_or("missing equation")?,
        s.pair.clone().ok_or("missing characteristics")?,
    ))
}

fn gauss16() -> QuadratureRule {
    QuadratureRule::gauss(16, 1).unwrap()
}

fn identity_forward() -> Outcome {
    let rule = gauss16();
    let boxes = [
        ("wave", (-1.0, 1.0), (-1.0, 1.0)),
        ("mixed-derivative", (0.0, 1.0), (0.0, 1.0)),
        ("variable-speed", (-1.0, -0.5), (1.5, 2.0)),
    ];
    let mut worst = Vec::new();
    let mut closed_form = 0.0f64;
    for (k, (name, l, r)) in boxes.into_iter().enumerate() {
        let s = spec(name)?;
        let (eq, pair) = parts(&s)?;
        let u = s.solution.clone().ok_or("missing solution")?;
        let mut rng = rng(100 + k as u64);
        let mut max_res = 0.0f64;
        for _ in 0..50 {
            let rect = random_rect(&mut rng, l, r);
            let rep = ok(identity_residual(&eq, &pair, &u, &rect, &rule))?;
            max_res = max_res.max(rep.residual.abs());
            if name == "mixed-derivative" {
                let cf = (rect.l2.exp() - rect.l1.exp()) * (rect.r2.exp() - rect.r1.exp());
                closed_form = closed_form.max((rep.lhs - cf).abs()).max((rep.rhs - cf).abs());
            }
        }
        ensure!(max_res <= 1e-10, "{name}: max |lhs - rhs| = {max_res:e} > 1e-10");
        worst.push(format!("{name} {max_res:.1e}"));
    }
    ensure!(closed_form <= 1e-12, "exp closed form off by {closed_form:e} > 1e-12");
    Ok(format!(
        "50 rects each, max residual: {}; exp closed form {closed_form:.1e}",
        worst.join(", ")
    ))
}

fn identity_converse() -> Outcome {
    let rule = gauss16();
    let sizes = halving_sizes(0.4, 8);
    let wave = ok(EquationSpec::parse("1", "0", "-1", "0"))?;
    let wave_pair = ok(CharacteristicPair::wave(1.0))?;
    let mixed = ok(EquationSpec::parse("0", "1/2", "0", "0"))?;
    let id = CharacteristicPair::identity();
    let corner = CharPoint::new(0.2, 0.4);

    let cases = [
        (&wave, &wave_pair, "x1^2", -0.5),
        (&mixed, &id, "x1*x2", 1.0),
    ];
    let mut notes = Vec::new();
    for (eq, pair, u, expected) in cases {
        let field = ok(AnalyticSolution::parse(u))?;
        let rep = ok(converse_probe(eq, pair, &field, corner, &sizes, &rule))?;
        ensure!(
            (rep.defect - expected).abs() <= 1e-4,
            "u = {u}: defect {} vs {expected}",
            rep.defect
        );
        notes.push(format!("{u} -> {:.6}", rep.defect));
    }

    let s = spec("mixed-derivative")?;
    let (eq, pair) = parts(&s)?;
    let u = s.solution.clone().unwrap();
    let rep = ok(converse_probe(&eq, &pair, &u, corner, &halving_sizes(0.5, 7), &rule))?;
    let order = rep.observed_order().ok_or("no observed order")?;
    ensure!(order >= 0.9, "observed order {order} < 0.9 for exp(x1 + x2)");
    Ok(format!(
        "defects {}; true solution order {order:.3}, extrapolated defect {:.1e}",
        notes.join(", "),
        rep.defect
    ))
}

fn wave_alternating_sum() -> Outcome {
    // `S` is replaced by the characteristic argument
    let pool = [
        "sin(3*S)",
        "S^3 - 2*S",
        "cos(S) + S^2",
        "exp(S/2)",
        "S^4/5 - S",
        "sin(S)*cos(2*S)",
        "1/(2 + S^2)",
    ];
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let a: f64 = rng.gen_range(0.5..3.0);
        let fi = pool[rng.gen_range(0..pool.len())];
        let gi = pool[rng.gen_range(0..pool.len())];
        let f = fi.replace('S', &format!("(x2 - {a:?}*x1)"));
        let g = gi.replace('S', &format!("(x2 + {a:?}*x1)"));
        let u = ok(AnalyticSolution::parse(&format!("{f} + {g}")))?;
        let pair = ok(CharacteristicPair::wave(a))?;
        for _ in 0..100 {
            let rect = random_rect(&mut rng, (-2.0, 2.0), (-2.0, 2.0));
            let v = ok(vertices(&rect, &pair))?;
            worst = worst.max(ok(alternating_sum(&u, &v))?.abs());
        }
    }
    ensure!(worst <= 1e-12, "alternating sum {worst:e} > 1e-12");
    Ok(format!("500 parallelograms, max |sum| {worst:.1e}"))
}

fn random_sector_points(rng: &mut impl Rng, a: f64, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let x1: f64 = rng.gen_range(0.01..1.5);
            let m: f64 = rng.gen_range(-1.0..=1.0);
            Point::new(x1, m * a * x1)
        })
        .collect()
}

fn goursat_wave() -> Outcome {
    let rule = QuadratureRule::default();
    let mut rng = rng(4);
    let mut errs = [0.0f64; 2];
    for (k, a) in [0.7, 1.0, 2.3].into_iter().enumerate() {
        let plain = ok(GoursatWaveData::parse(a, &format!("{a:?}*t^2"), &format!("-{a:?}*t^2"), "0"))?;
        let forced = ok(GoursatWaveData::parse(a, &format!("{a:?}*t^3"), &format!("-{a:?}*t^3"), "2*x2"))?;
        for x in random_sector_points(&mut rng, a, if k == 0 { 20 } else { 10 }) {
            errs[0] = errs[0].max((ok(solve_goursat_wave(&plain, x, &rule))? - x.x1 * x.x2).abs());
            errs[1] = errs[1].max((ok(solve_goursat_wave(&forced, x, &rule))? - x.x1 * x.x1 * x.x2).abs());
        }
    }
    ensure!(errs[0] <= 1e-12, "u = x1 x2 error {:e} > 1e-12", errs[0]);
    ensure!(errs[1] <= 1e-10, "u = x1^2 x2 error {:e} > 1e-10", errs[1]);
    Ok(format!("x1x2 err {:.1e}, forced x1^2x2 err {:.1e}", errs[0], errs[1]))
}

fn mixed_problem() -> Outcome {
    let rule = QuadratureRule::default();
    let mut rng = rng(5);
    let (mut err, mut cont, mut jump_err) = (0.0f64, 0.0f64, 0.0f64);
    let (mut above, mut below) = (0, 0);
    for a in [0.6, 1.5, 2.5] {
        let f = format!("2 - 2*{a:?}^2");
        let d = ok(MixedWaveData::parse(a, "t^2", "0", "t^2", &f))?;
        let shifted = ok(MixedWaveData::parse(a, "t^2", "0", "t^2 + 0.1", &f))?;
        for _ in 0..30 {
            let x = Point::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            if x.x2 >= a * x.x1 {
                above += 1;
            } else {
                below += 1;
            }
            err = err.max((ok(solve_mixed_wave(&d, x, &rule))? - (x.x1 * x.x1 + x.x2 * x.x2)).abs());
        }
        for k in 1..=10 {
            let x1 = 0.15 * k as f64;
            let on = Point::new(x1, a * x1);
            let up = ok(d.dalembert_branch(on, &rule))?;
            let down = ok(d.reflected_branch(on, &rule))?;
            cont = cont.max((up - down).abs());
            let jump = ok(shifted.reflected_branch(on, &rule))? - ok(shifted.dalembert_branch(on, &rule))?;
            jump_err = jump_err.max((jump - 0.1).abs());
        }
    }
    ensure!(above > 0 && below > 0, "sample missed a side of the characteristic");
    ensure!(err <= 1e-10, "manufactured error {err:e} > 1e-10");
    ensure!(cont <= 1e-9, "continuity gap {cont:e} > 1e-9");
    ensure!(jump_err <= 1e-9, "jump differs from 0.1 by {jump_err:e}");
    Ok(format!(
        "err {err:.1e} ({above} above, {below} below), continuity {cont:.1e}, jump 0.1 +- {jump_err:.1e}"
    ))
}

fn cascade_geometry() -> Outcome {
    let d = ok(DarbouxData::linear(0.5, 2.0, Expr::num(1.0)))?;
    let cells = ok(darboux_cascade(&d, Point::new(1.0, 1.0), 1e-14))?;
    ensure!(cells.len() > 40, "only {} cells", cells.len());
    for (n, c) in cells.iter().enumerate().take(41) {
        let want = 2f64.powi(-(n as i32));
        ensure!(c.p == Point::new(want, want), "P_{n} = {} != 2^-{n}", c.p);
    }
    let mut worst = 0.0f64;
    for n in 0..cells.len() - 2 {
        let r1 = cells[n + 2].p.x1 / cells[n].p.x1;
        let r2 = cells[n + 2].p.x2 / cells[n].p.x2;
        worst = worst.max((r1 - 0.25).abs()).max((r2 - 0.25).abs());
    }
    ensure!(worst <= 1e-14, "two-step ratio off alpha/beta by {worst:e}");
    Ok(format!("P_n = 2^-n exactly for n <= 40; ratio error {worst:.1e}"))
}

fn darboux_series() -> Outcome {
    let cfg = SolverConfig::default();
    let (alpha, beta) = (0.5, 2.0);
    let cases: [(&str, Box<dyn Fn(f64, f64) -> f64>); 2] = [
        ("1", Box::new(|x1, x2| x1 * x2)),
        ("x1 + x2", Box::new(|x1, x2| 0.5 * x1 * x2 * (x1 + x2))),
    ];
    let pts = [Point::new(1.0, 1.0), Point::new(1.0, 0.75), Point::new(0.8, 1.2), Point::new(0.5, 0.3)];
    let (mut err, mut ratio) = (0.0f64, 0.0f64);
    for (f, w) in &cases {
        let d = ok(DarbouxData::linear(alpha, beta, ok(charpar::expr::parse(f, &[Var::X1, Var::X2]))?))?;
        for &x in &pts {
            let (rep, _) = ok(solve_darboux(&d, x, &cfg))?;
            err = err.max((rep.value - darboux_oracle(alpha, beta, w.as_ref(), x)).abs());
            ratio = ratio.max(rep.max_term_ratio);
        }
    }
    ensure!(err <= 1e-8, "series vs oracle {err:e} > 1e-8");
    ensure!(ratio < 1.0, "term ratio {ratio} not below 1");
    Ok(format!("max deviation from oracle {err:.1e}; max term ratio {ratio:.4}"))
}

fn picard_error(n: usize) -> Result<(f64, usize), String> {
    let s = spec("goursat-linear")?;
    let Some(SolverSpec::GoursatLinear { data, upper }) = &s.solver else {
        return Err("goursat-linear spec has no linear Goursat block".into());
    };
    let sol = ok(solve_goursat_linear_picard(data, *upper, n, &s.solver_cfg))?;
    let err = sol
        .grid
        .nodes()
        .map(|(i, j, x1, x2)| (sol.values[sol.grid.index(i, j)] - (x1 + x2).exp()).abs())
        .fold(0.0, f64::max);
    Ok((err, sol.report.iterations))
}

fn picard() -> Outcome {
    let (e65, _) = picard_error(65)?;
    let (e129, it) = picard_error(129)?;
    let ratio = e65 / e129;
    ensure!(e129 <= 5e-4, "129^2 error {e129:e} > 5e-4");
    ensure!(ratio >= 3.5, "error ratio {ratio} < 3.5");
    let s = spec("goursat-linear-free")?;
    let Some(SolverSpec::GoursatLinear { data, upper }) = &s.solver else {
        return Err("free spec has no linear Goursat block".into());
    };
    let free = ok(solve_goursat_linear_picard(data, *upper, 33, &s.solver_cfg))?;
    ensure!(free.report.iterations == 1, "free case took {} iterations", free.report.iterations);
    Ok(format!(
        "129^2 error {e129:.2e} ({it} iterations), ratio {ratio:.2}, free case 1 iteration"
    ))
}

fn cross_audit() -> Outcome {
    let rule = QuadratureRule::default();
    let cfg = SolverConfig::default();
    let mut notes = Vec::new();
    let mut rng = rng(9);

    // closed-form solvers
    let s = spec("goursat-wave")?;
    let Some(SolverSpec::GoursatWave(gw)) = s.solver.clone() else {
        return Err("goursat-wave spec".into());
    };
    let (eq, pair) = parts(&s)?;
    let field = FnSolution::new(|x: Point| solve_goursat_wave(&gw, x, &rule));
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let rect = random_rect(&mut rng, (-1.5, -0.2), (0.3, 1.7));
        worst = worst.max(ok(identity_residual(&eq, &pair, &field, &rect, &rule))?.residual.abs());
    }
    ensure!(worst <= 1e-10, "goursat-wave residual {worst:e}");
    notes.push(format!("goursat-wave {worst:.1e}"));

    let s = spec("mixed-wave")?;
    let Some(SolverSpec::MixedWave(mw)) = s.solver.clone() else {
        return Err("mixed-wave spec".into());
    };
    let (eq, pair) = parts(&s)?;
    let field = FnSolution::new(|x: Point| solve_mixed_wave(&mw, x, &rule));
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let rect = random_rect(&mut rng, (-0.4, 0.3), (0.5, 1.4));
        worst = worst.max(ok(identity_residual(&eq, &pair, &field, &rect, &rule))?.residual.abs());
    }
    ensure!(worst <= 1e-10, "mixed-wave residual {worst:e}");
    notes.push(format!("mixed-wave {worst:.1e}"));

    let s = spec("darboux")?;
    let Some(SolverSpec::Darboux(dl)) = s.solver.clone() else {
        return Err("darboux spec".into());
    };
    let (eq, pair) = parts(&s)?;
    let field = FnSolution::new(|x: Point| Ok(solve_darboux(&dl, x, &cfg)?.0.value));
    let rect = ok(charpar::parallelogram::CharRectangle::new(0.6, 0.9, 0.5, 1.1))?;
    let res = ok(identity_residual(&eq, &pair, &field, &rect, &rule))?.residual.abs();
    ensure!(res <= 1e-10, "darboux residual {res:e}");
    notes.push(format!("darboux {res:.1e}"));

    // grid solvers: tolerance is ten times the grid error
    let s = spec("darboux-nonlinear")?;
    let Some(SolverSpec::Darboux(dn)) = s.solver.clone() else {
        return Err("darboux-nonlinear spec".into());
    };
    let (eq, pair) = parts(&s)?;
    let (_, coarse) = ok(solve_darboux_grid(&dn, 1.0, &cfg))?;
    let mut fine_cfg = cfg.clone();
    fine_cfg.darboux_grid = [2 * cfg.darboux_grid[0] - 1, 2 * cfg.darboux_grid[1] - 1];
    let (_, fine) = ok(solve_darboux_grid(&dn, 1.0, &fine_cfg))?;
    let mut grid_err = 0.0f64;
    for k in 0..=10 {
        let x1 = 0.1 * k as f64;
        for m in [0.5, 0.8, 1.0, 1.5, 2.0] {
            let x = Point::new(x1, m * x1);
            grid_err = grid_err.max((ok(coarse.value(x))? - ok(fine.value(x))?).abs());
        }
    }
    let res = ok(identity_residual(&eq, &pair, &coarse, &rect, &rule))?.residual.abs();
    ensure!(res <= 10.0 * grid_err, "darboux lattice residual {res:e} > 10 x {grid_err:e}");
    notes.push(format!("darboux lattice {res:.1e} (grid err {grid_err:.1e})"));

    let s = spec("goursat-linear")?;
    let Some(SolverSpec::GoursatLinear { data, upper }) = s.solver.clone() else {
        return Err("goursat-linear spec".into());
    };
    let eq = ok(data.equation())?;
    let sol = ok(solve_goursat_linear_picard(&data, upper, 129, &cfg))?;
    let (grid_err, _) = picard_error(129)?;
    let field = sol.field();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let rect = random_rect(&mut rng, (0.05, 0.95), (0.05, 0.95));
        worst = worst.max(
            ok(identity_residual(&eq, &CharacteristicPair::identity(), &field, &rect, &rule))?
                .residual
                .abs(),
        );
    }
    ensure!(worst <= 10.0 * grid_err, "picard residual {worst:e} > 10 x {grid_err:e}");
    notes.push(format!("picard {worst:.1e} (grid err {grid_err:.1e})"));
    Ok(notes.join(", "))
}

fn catalog_diff_vs_fd() -> Result<f64, String> {
    let mut rng = rng(10);
    let mut worst = 0.0f64;
    for entry in catalog::entries() {
        let s = ok(entry.load())?;
        for (label, e) in s.expressions() {
            for _ in 0..5 {
                let env = Env::new()
                    .with(Var::X1, rng.gen_range(1.0..1.5))
                    .with(Var::X2, rng.gen_range(0.1..0.5))
                    .with(Var::U, rng.gen_range(0.2..0.5))
                    .with(Var::P, rng.gen_range(-0.5..0.5))
                    .with(Var::Q, rng.gen_range(-0.5..0.5))
                    .with(Var::Y1, rng.gen_range(-1.0..-0.5))
                    .with(Var::Y2, rng.gen_range(1.5..2.0))
                    .with(Var::T, rng.gen_range(0.2..0.8));
                for v in e.variables() {
                    let x = env.get(v).unwrap();
                    let h = 1e-5 * x.abs().max(1.0);
                    let at = |s: f64| e.eval(&env.with(v, s));
                    let fd = (ok(at(x + h))? - ok(at(x - h))?) / (2.0 * h);
                    let d = ok(e.diff(v).eval(&env))?;
                    let rel = (d - fd).abs() / d.abs().max(1.0);
                    ensure!(rel <= 1e-6, "{}: d/d{v} of {label} = {d} vs FD {fd}", entry.name);
                    worst = worst.max(rel);
                }
            }
        }
    }
    Ok(worst)
}

fn quadrature_exactness() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for n in 1..=32 {
        let rule = ok(QuadratureRule::gauss(n, 1))?;
        for deg in 0..=(2 * n - 1) as i32 {
            let (lo, hi) = (-0.3, 1.7);
            let got = ok(rule.integrate1d(|t| Ok(t.powi(deg)), lo, hi))?;
            let want = (hi.powi(deg + 1) - lo.powi(deg + 1)) / (deg + 1) as f64;
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
        let (_, w) = gauss_legendre(n);
        worst = worst.max((w.iter().sum::<f64>() - 2.0).abs());
    }
    ensure!(worst <= 1e-13, "Gauss exactness error {worst:e}");
    Ok(worst)
}

/// RK4 convergence against the closed-form labels of `u11 - e^{2x1} u22`.
fn trace_order() -> Result<f64, String> {
    let eq = ok(EquationSpec::parse("1", "0", "-exp(2*x1)", "0"))?;
    let dom = DomainSpec::Rectangle {
        x1: (0.0, 1.0),
        x2: (0.0, 1.0),
    };
    let seed = SeedLine {
        axis: SeedAxis::X1,
        at: 0.0,
    };
    let mut errs = Vec::new();
    for step in [0.2, 0.1, 0.05] {
        let cfg = TraceConfig {
            seed,
            step,
            grid: [11, 11],
        };
        let tr = ok(trace_characteristics(&eq, &dom, &cfg, &Tolerances::default()))?;
        let mut e = 0.0f64;
        for (i, j, x1, x2) in tr.grid.nodes() {
            let k = tr.grid.index(i, j);
            e = e.max((tr.values[0][k] - (x2 - x1.exp() + 1.0)).abs());
            e = e.max((tr.values[1][k] - (x2 + x1.exp() - 1.0)).abs());
        }
        errs.push(e);
    }
    let order = (errs[1] / errs[2]).log2();
    ensure!(order >= 3.5, "RK4 observed order {order:.3} < 3.5 (errors {errs:?})");
    Ok(order)
}

fn cli_determinism() -> Result<(), String> {
    let dir = ok(tempfile::tempdir())?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(name);
        let status = ok(Command::new(env!("CARGO_BIN_EXE_charpar"))
            .args(["solve", "--example", "mixed-wave", "--json-report"])
            .arg(dir.path().join(format!("{name}.json")))
            .arg("--out")
            .arg(&path)
            .status())?;
        ensure!(status.success(), "charpar solve exited with {status}");
        ok(std::fs::read(&path))
    };
    let (a, b) = (run("a.csv")?, run("b.csv")?);
    ensure!(a == b, "CSV output differs between runs");
    ensure!(!a.contains(&b'\r'), "CSV contains CR");
    Ok(())
}

fn infrastructure() -> Outcome {
    let fd = catalog_diff_vs_fd()?;
    let quad = quadrature_exactness()?;
    let order = trace_order()?;
    cli_determinism()?;
    Ok(format!(
        "diff vs FD {fd:.1e}, Gauss exactness {quad:.1e}, RK4 order {order:.2}, CLI CSV byte-identical"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("identity forward", identity_forward),
        ("identity converse probe", identity_converse),
        ("wave parallelogram sum", wave_alternating_sum),
        ("goursat wave solver", goursat_wave),
        ("mixed problem", mixed_problem),
        ("darboux cascade geometry", cascade_geometry),
        ("darboux linear series", darboux_series),
        ("picard goursat", picard),
        ("cross-audit", cross_audit),
        ("infrastructure", infrastructure),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
