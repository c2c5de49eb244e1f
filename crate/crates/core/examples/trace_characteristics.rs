//! Characteristic curves traced numerically when no closed form is at
//! hand, then used as a coordinate system.

use charpar::characteristics::{trace_characteristics, SeedAxis, SeedLine, TraceConfig};
use charpar::geom::{CharPoint, Point};
use charpar::problem::{DomainSpec, EquationSpec, Tolerances};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // u11 - e^{2 x1} u22 = 0 has characteristics x2 -/+ e^{x1} = const
    let eq = EquationSpec::parse("1", "0", "-exp(2*x1)", "0")?;
    let dom = DomainSpec::Rectangle {
        x1: (0.0, 1.0),
        x2: (0.0, 1.0),
    };
    let seed = SeedLine {
        axis: SeedAxis::X1,
        at: 0.0,
    };

    println!("{:>6} {:>12} {:>7}", "step", "max error", "order");
    let mut prev: Option<f64> = None;
    for step in [0.2, 0.1, 0.05, 0.025] {
        let cfg = TraceConfig {
            seed,
            step,
            grid: [11, 11],
        };
        let tr = trace_characteristics(&eq, &dom, &cfg, &Tolerances::default())?;
        let err = tr
            .grid
            .nodes()
            .map(|(i, j, x1, x2)| (tr.values[0][tr.grid.index(i, j)] - (x2 - x1.exp() + 1.0)).abs())
            .fold(0.0, f64::max);
        let order = prev.map_or(String::new(), |p| format!("{:.2}", (p / err).log2()));
        println!("{step:>6} {err:>12.3e} {order:>7}");
        prev = Some(err);
    }

    let cfg = TraceConfig {
        seed,
        step: 0.01,
        grid: [21, 21],
    };
    let tr = trace_characteristics(&eq, &dom, &cfg, &Tolerances::default())?;
    let x = Point::new(0.6, 0.4);
    let y = tr.pair.forward(x)?;
    let back = tr.pair.invert(CharPoint::new(y.y1, y.y2))?;
    let traced = 2 * tr.grid.len();
    println!("forward {x} -> {y}, inverse -> {back}");
    println!("{} of {traced} traced curves left the box before reaching the seed line", tr.exits);
    Ok(())
}
