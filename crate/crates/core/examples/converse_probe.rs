//! Shrink a characteristic rectangle onto a corner and read off the PDE
//! defect `(Au - f)/β` of a candidate function.

use charpar::characteristics::CharacteristicPair;
use charpar::geom::CharPoint;
use charpar::parallelogram::{converse_probe, halving_sizes, AnalyticSolution};
use charpar::problem::EquationSpec;
use charpar::quadrature::QuadratureRule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rule = QuadratureRule::default();
    let corner = CharPoint::new(0.2, 0.4);
    let sizes = halving_sizes(0.4, 8);

    let wave = EquationSpec::parse("1", "0", "-1", "0")?;
    let wave_pair = CharacteristicPair::wave(1.0)?;
    let mixed = EquationSpec::parse("0", "1/2", "0", "u")?;
    let id = CharacteristicPair::identity();

    let cases = [
        ("u11 - u22 = 0", &wave, &wave_pair, "x1^2", "Au - f = 2, beta = -4"),
        ("u12 = u", &mixed, &id, "x1*x2", "Au - f = 1 - x1 x2, beta = 1"),
        ("u12 = u", &mixed, &id, "exp(x1 + x2)", "a true solution"),
    ];
    for (label, eq, pair, u, note) in cases {
        let field = AnalyticSolution::parse(u)?;
        let rep = converse_probe(eq, pair, &field, corner, &sizes, &rule)?;
        println!("{label}, u = {u} ({note})");
        println!("  {:>10} {:>10} {:>16} {:>16}", "l", "r", "scaled residual", "quotient");
        for e in &rep.entries {
            println!("  {:>10.3e} {:>10.3e} {:>16.9} {:>16.9}", e.l, e.r, e.scaled_residual, e.quotient);
        }
        let order = rep.observed_order().map_or("n/a".to_string(), |o| format!("{o:.3}"));
        println!("  extrapolated defect {:.8}, residual limit {:.8}, order {order}", rep.defect, rep.residual_limit);
    }
    Ok(())
}
