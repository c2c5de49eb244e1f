//! Evaluate both sides of the curvilinear parallelogram identity for known
//! solutions of three equations from the built-in catalog.

use charpar::catalog;
use charpar::parallelogram::{identity_residual, CharRectangle};
use charpar::quadrature::QuadratureRule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rule = QuadratureRule::gauss(16, 1)?;
    for name in ["wave", "mixed-derivative", "variable-speed"] {
        let spec = catalog::load(name)?;
        let eq = spec.equation.as_ref().expect("catalog entry has an equation");
        let pair = spec.pair.as_ref().expect("catalog entry has characteristics");
        let u = spec.solution.as_ref().expect("catalog entry has a solution");
        let rect = spec.rect.expect("catalog entry has a rectangle");

        let rep = identity_residual(eq, pair, u, &rect, &rule)?;
        println!("{name}: u = {}", u.u);
        println!("  rectangle {rect}");
        println!("  vertices A={} B={} C={} D={}", rep.vertices.a, rep.vertices.b, rep.vertices.c, rep.vertices.d);
        println!("  lhs = {:.15}  rhs = {:.15}  residual = {:.2e}", rep.lhs, rep.rhs, rep.residual);
    }

    // u = exp(x1 + x2) for u12 = u: both sides equal (e^l2 - e^l1)(e^r2 - e^r1)
    let spec = catalog::load("mixed-derivative")?;
    let rect = CharRectangle::new(0.1, 0.6, 0.2, 0.9)?;
    let rep = identity_residual(
        spec.equation.as_ref().unwrap(),
        spec.pair.as_ref().unwrap(),
        spec.solution.as_ref().unwrap(),
        &rect,
        &rule,
    )?;
    let closed = (0.6f64.exp() - 0.1f64.exp()) * (0.9f64.exp() - 0.2f64.exp());
    println!("closed form {closed:.15} vs lhs {:.15} rhs {:.15}", rep.lhs, rep.rhs);
    Ok(())
}
