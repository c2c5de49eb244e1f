//! Load problem specs and run the hyperbolicity and characteristic checks
//! programmatically, the same checks `charpar validate` reports.

use charpar::characteristics::validate_characteristics;
use charpar::cli::ProblemSpec;
use charpar::problem::check_hyperbolicity;

const SPEC: &str = "
[equation]
a = 1
b = 0
c = -x1^2
f = 0

[characteristics]
gamma1 = x2 - x1^2/2
gamma2 = x2 + x1^2/2
inverse.x1 = sqrt(y2 - y1)
inverse.x2 = (y1 + y2)/2

[domain]
kind = rectangle
x1 = 0.5, 2
x2 = -1, 1
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ProblemSpec::parse(SPEC)?;
    let eq = spec.equation.as_ref().unwrap();
    let dom = spec.domain.as_ref().unwrap();
    let pair = spec.pair.as_ref().unwrap();

    let hyp = check_hyperbolicity(eq, dom, 21, Some(pair), &spec.tolerances)?;
    println!("hyperbolic: {} (min discriminant {:.4} at {})", hyp.passed, hyp.min_discriminant, hyp.witness);
    let chars = validate_characteristics(eq, pair, dom, 21, &spec.tolerances)?;
    println!(
        "characteristic: {} (residuals {:.1e}, {:.1e}; min |det J| {:.3})",
        chars.passed, chars.max_char_residual[0], chars.max_char_residual[1], chars.min_abs_jacobian
    );

    // swapping in the wrong labels is caught with a witness point
    let wrong = ProblemSpec::parse(&SPEC.replace("x1^2/2", "x1"))?;
    let rep = validate_characteristics(eq, wrong.pair.as_ref().unwrap(), dom, 21, &spec.tolerances)?;
    println!(
        "wrong labels: passed = {}, worst residual {:.3} at {}",
        rep.passed, rep.max_char_residual[0], rep.residual_witness[0]
    );

    match ProblemSpec::parse("[equation]\na = 1\nb = 0\nc = -1\nf = 0\nspeed = 2\n") {
        Ok(_) => unreachable!(),
        Err(e) => println!("spec error: {e}"),
    }
    Ok(())
}
