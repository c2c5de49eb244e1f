//! Linear Goursat problem u12 + a u1 + b u2 + c u = f solved by Picard
//! iteration on a lattice, with a grid-refinement study.

use charpar::expr::{parse, Var};
use charpar::geom::Point;
use charpar::solvers::{solve_goursat_linear_picard, LinearGoursatData, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let xy = [Var::X1, Var::X2];
    let t = [Var::T];
    // u* = exp(x1 + x2): u12 + u = 2 exp(x1 + x2)
    let data = LinearGoursatData::new(
        Point::new(0.0, 0.0),
        parse("0", &xy)?,
        parse("0", &xy)?,
        parse("1", &xy)?,
        parse("2*exp(x1 + x2)", &xy)?,
        parse("exp(t)", &t)?,
        parse("exp(t)", &t)?,
    )?;
    let cfg = SolverConfig::default();

    println!("{:>5} {:>12} {:>7} {:>10}", "n", "sup error", "ratio", "sweeps");
    let mut prev: Option<f64> = None;
    for n in [17, 33, 65, 129] {
        let sol = solve_goursat_linear_picard(&data, Point::new(1.0, 1.0), n, &cfg)?;
        let err = sol
            .grid
            .nodes()
            .map(|(i, j, x1, x2)| (sol.values[sol.grid.index(i, j)] - (x1 + x2).exp()).abs())
            .fold(0.0, f64::max);
        let ratio = prev.map_or(String::new(), |p| format!("{:.2}", p / err));
        println!("{n:>5} {err:>12.3e} {ratio:>7} {:>10}", sol.report.iterations);
        prev = Some(err);
    }
    Ok(())
}
