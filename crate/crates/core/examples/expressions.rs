//! Parse, differentiate and evaluate coefficient expressions.

use charpar::expr::{parse, Env, Var};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vars = [Var::X1, Var::X2, Var::U, Var::P, Var::Q];
    let f = parse("x1^2*sin(x2) + u*p - exp(-q/2)", &vars)?;
    println!("f        = {f}");
    for v in vars {
        println!("df/d{:<4} = {}", v.name(), f.diff(v).simplify());
    }

    let env = Env::xy(1.0, 0.5).with(Var::U, 2.0).with(Var::P, -1.0).with(Var::Q, 0.3);
    println!("f(1, 0.5; u=2, p=-1, q=0.3) = {:.12}", f.eval(&env)?);

    // undeclared names are rejected with a position
    match parse("x1 + y1", &[Var::X1, Var::X2]) {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
