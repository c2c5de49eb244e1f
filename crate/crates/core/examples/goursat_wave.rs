//! Goursat problem for the wave equation: data on both characteristics
//! through the origin, solution in the sector between them.

use charpar::geom::Point;
use charpar::quadrature::QuadratureRule;
use charpar::solvers::{solve_goursat_wave, GoursatWaveData};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = 2.0;
    // u* = x1^2 x2 solves u11 - 4 u22 = 2 x2
    let data = GoursatWaveData::parse(a, "2*t^3", "-2*t^3", "2*x2")?;
    let rule = QuadratureRule::default();

    println!("{:>6} {:>8} {:>20} {:>10}", "x1", "x2", "u", "error");
    for x1 in [0.25, 0.5, 1.0] {
        for m in [-1.0, -0.3, 0.0, 0.6, 1.0] {
            let x = Point::new(x1, m * a * x1);
            let u = solve_goursat_wave(&data, x, &rule)?;
            let exact = x.x1 * x.x1 * x.x2;
            println!("{:>6.2} {:>8.3} {:>20.15} {:>10.1e}", x.x1, x.x2, u, (u - exact).abs());
        }
    }

    match solve_goursat_wave(&data, Point::new(0.5, 1.5), &rule) {
        Ok(_) => unreachable!(),
        Err(e) => println!("outside the sector: {e}"),
    }
    Ok(())
}
