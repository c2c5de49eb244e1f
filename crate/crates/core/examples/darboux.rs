//! Darboux problem u12 = f with zero data on x2 = αx1 and x2 = βx1: the
//! rectangle cascade, the alternating series and a semilinear variant.

use charpar::expr::{parse, Expr, Var};
use charpar::geom::Point;
use charpar::solvers::{darboux_cascade, solve_darboux, DarbouxData, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SolverConfig::default();
    let linear = DarbouxData::linear(0.5, 2.0, Expr::num(1.0))?;

    let cells = darboux_cascade(&linear, Point::new(1.0, 1.0), cfg.cascade_eps)?;
    println!("cascade from (1, 1): {} cells", cells.len());
    for (i, c) in cells.iter().take(4).enumerate() {
        println!(
            "  {i}: x1 in [{:.4}, {:.4}], x2 in [{:.4}, {:.4}]",
            c.x1_range().0,
            c.x1_range().1,
            c.x2_range().0,
            c.x2_range().1
        );
    }

    let (rep, _) = solve_darboux(&linear, Point::new(1.0, 1.0), &cfg)?;
    println!(
        "f = 1: u(1, 1) = {:.15} (exact 0.2), {} terms, max term ratio {:.4}",
        rep.value,
        rep.terms.len(),
        rep.max_term_ratio
    );

    let g = parse("u", &[Var::U])?;
    let semi = DarbouxData::new(0.5, 2.0, 0.1, g, Expr::num(1.0), (0.0, 1.0))?;
    for w in semi.growth_warnings(1.0)? {
        println!("warning: {w}");
    }
    let (rep, _) = solve_darboux(&semi, Point::new(1.0, 1.0), &cfg)?;
    let it = rep.iteration.expect("semilinear case iterates");
    println!("f = 1 - 0.1 u: u(1, 1) = {:.12} after {} sweeps", rep.value, it.iterations);
    for (k, d) in it.history.iter().enumerate() {
        println!("  sweep {}: change {d:.3e}", k + 1);
    }
    Ok(())
}
