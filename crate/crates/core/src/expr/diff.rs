//! Symbolic partial derivatives and conservative simplification.
//!
//! Simplification only folds constants and drops neutral elements
//! (`+0`, `*1`, `*0`, `/1`, `^1`, `^0`); it never reorders or rewrites
//! functions, so the evaluation domain of the result is not widened
//! except where a factor of zero removes a subtree.

use super::{apply_bin, BinOp, Expr, Func, Var};

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn is(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(crate) fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        if let Ok(v) = apply_bin(op, *x, *y) {
            if v.is_finite() {
                return num(v);
            }
        }
    }
    match op {
        BinOp::Add if is(&a, 0.0) => b,
        BinOp::Add if is(&b, 0.0) => a,
        BinOp::Sub if is(&b, 0.0) => a,
        BinOp::Sub if is(&a, 0.0) => neg(b),
        BinOp::Mul if is(&a, 0.0) || is(&b, 0.0) => num(0.0),
        BinOp::Mul if is(&a, 1.0) => b,
        BinOp::Mul if is(&b, 1.0) => a,
        BinOp::Mul if is(&a, -1.0) => neg(b),
        BinOp::Mul if is(&b, -1.0) => neg(a),
        BinOp::Div if is(&b, 1.0) => a,
        BinOp::Div if is(&a, 0.0) && !is(&b, 0.0) && b.is_const() => num(0.0),
        BinOp::Pow if is(&b, 1.0) => a,
        BinOp::Pow if is(&b, 0.0) => num(1.0),
        _ => Expr::Bin(op, Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    if let Expr::Num(x) = a {
        if let Ok(v) = f.apply(x) {
            if v.is_finite() {
                return num(v);
            }
        }
    }
    Expr::Call(f, Box::new(a))
}

fn add(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Add, a, b)
}
fn sub(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Sub, a, b)
}
fn mul(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Mul, a, b)
}
fn div(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Div, a, b)
}
fn pow(a: Expr, b: Expr) -> Expr {
    bin(BinOp::Pow, a, b)
}

impl Expr {
    /// Constant folding plus neutral-element elimination, bottom-up.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => neg(a.simplify()),
            Expr::Bin(op, a, b) => bin(*op, a.simplify(), b.simplify()),
            Expr::Call(f, a) => call(*f, a.simplify()),
        }
    }

    /// Exact symbolic partial derivative with respect to `var`, simplified.
    pub fn diff(&self, var: Var) -> Expr {
        match self {
            Expr::Num(_) => num(0.0),
            Expr::Var(v) => num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.diff(var)),
            Expr::Bin(op, a, b) => {
                let (da, db) = (a.diff(var), b.diff(var));
                let (a, b) = (a.simplify(), b.simplify());
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                    BinOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), pow(b, num(2.0))),
                    BinOp::Pow => {
                        if !b.uses(var) {
                            // d(a^n) = n a^(n-1) a'
                            let n_minus_1 = sub(b.clone(), num(1.0));
                            mul(mul(b, pow(a, n_minus_1)), da)
                        } else {
                            // d(a^b) = a^b (b' ln a + b a'/a)
                            let whole = pow(a.clone(), b.clone());
                            let t1 = mul(db, call(Func::Log, a.clone()));
                            let t2 = div(mul(b, da), a);
                            mul(whole, add(t1, t2))
                        }
                    }
                }
            }
            Expr::Call(f, a) => {
                let da = a.diff(var);
                if is(&da, 0.0) {
                    return num(0.0);
                }
                let a = a.simplify();
                let outer = match f {
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Exp => call(Func::Exp, a),
                    Func::Log => div(num(1.0), a),
                    Func::Sqrt => div(num(1.0), mul(num(2.0), call(Func::Sqrt, a))),
                    Func::Abs => div(a.clone(), call(Func::Abs, a)),
                    Func::Tanh => sub(num(1.0), pow(call(Func::Tanh, a), num(2.0))),
                };
                mul(outer, da)
            }
        }
    }
}
