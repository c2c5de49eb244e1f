//! First mixed problem for the wave equation on the quadrant, including
//! what happens when the corner matching conditions fail.

use charpar::geom::Point;
use charpar::quadrature::QuadratureRule;
use charpar::solvers::{solve_mixed_wave, MixedWaveData};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = 1.5;
    let rule = QuadratureRule::default();
    let f = format!("2 - 2*{a}^2");
    // u* = x1^2 + x2^2
    let data = MixedWaveData::parse(a, "t^2", "0", "t^2", &f)?;
    println!("matching residuals: {:?}", data.matching_residuals()?);

    println!("{:>5} {:>5} {:>10} {:>18} {:>9}", "x1", "x2", "branch", "u", "error");
    for (x1, x2) in [(0.2, 1.0), (0.5, 0.75), (0.8, 0.3), (1.0, 0.05)] {
        let x = Point::new(x1, x2);
        let u = solve_mixed_wave(&data, x, &rule)?;
        let branch = if x2 >= a * x1 { "direct" } else { "reflected" };
        println!("{x1:>5} {x2:>5} {branch:>10} {u:>18.14} {:>9.1e}", (u - x1 * x1 - x2 * x2).abs());
    }

    // shifting mu by 0.1 breaks u(0,0) continuity; the jump travels along x2 = a x1
    let shifted = MixedWaveData::parse(a, "t^2", "0", "t^2 + 0.1", &f)?;
    println!("shifted matching residuals: {:?}", shifted.matching_residuals()?);
    for x1 in [0.2, 0.6, 1.0] {
        let on = Point::new(x1, a * x1);
        let jump = shifted.reflected_branch(on, &rule)? - shifted.dalembert_branch(on, &rule)?;
        println!("  jump across the characteristic at x1 = {x1}: {jump:.12}");
    }
    Ok(())
}
