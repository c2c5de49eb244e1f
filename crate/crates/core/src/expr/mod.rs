//! Arithmetic expressions used for coefficients, right-hand sides,
//! characteristics and boundary data.
//!
//! Expressions are parsed against a declared variable set, evaluated in
//! IEEE double precision and differentiated symbolically. Domain violations
//! (division by zero, `log` of a nonpositive number, `sqrt` of a negative
//! number, non-finite results) are reported as errors instead of NaN.

mod diff;
mod parse;

use std::collections::HashMap;
use std::fmt;
use std::ops;

use thiserror::Error;

pub use parse::{parse, parse_names};

/// Every variable name the language knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X1,
    X2,
    U,
    P,
    Q,
    Y1,
    Y2,
    T,
}

impl Var {
    pub const ALL: [Var; 8] = [
        Var::X1,
        Var::X2,
        Var::U,
        Var::P,
        Var::Q,
        Var::Y1,
        Var::Y2,
        Var::T,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::U => "u",
            Var::P => "p",
            Var::Q => "q",
            Var::Y1 => "y1",
            Var::Y2 => "y2",
            Var::T => "t",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Variable bindings for [`Expr::eval`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Env {
    vals: [f64; 8],
    bound: u8,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: Var, value: f64) -> &mut Self {
        self.vals[var.index()] = value;
        self.bound |= 1 << var.index();
        self
    }

    pub fn with(mut self, var: Var, value: f64) -> Self {
        self.set(var, value);
        self
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        if self.bound & (1 << var.index()) != 0 {
            Some(self.vals[var.index()])
        } else {
            None
        }
    }

    pub fn xy(x1: f64, x2: f64) -> Self {
        Env::new().with(Var::X1, x1).with(Var::X2, x2)
    }

    pub fn y(y1: f64, y2: f64) -> Self {
        Env::new().with(Var::Y1, y1).with(Var::Y2, y2)
    }

    pub fn t(t: f64) -> Self {
        Env::new().with(Var::T, t)
    }

    /// Builds an environment from a name map; unknown names are rejected.
    pub fn from_map(map: &HashMap<String, f64>) -> Result<Self, ExprError> {
        let mut env = Env::new();
        for (name, &value) in map {
            let var = Var::from_name(name).ok_or_else(|| ExprError::UnknownIdentifier {
                name: name.clone(),
                offset: 0,
                declared: Var::ALL.iter().map(|v| v.name().to_string()).collect(),
            })?;
            env.set(var, value);
        }
        Ok(env)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}; declared variables: [{}]", declared.join(", "))]
    UnknownIdentifier {
        name: String,
        offset: usize,
        declared: Vec<String>,
    },
    #[error("no value bound for variable `{0}`")]
    MissingBinding(Var),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, x: f64) -> Result<f64, ExprError> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Log if x <= 0.0 => Err(ExprError::Domain(format!("log of nonpositive value {x}"))),
            Func::Log => Ok(x.ln()),
            Func::Sqrt if x < 0.0 => Err(ExprError::Domain(format!("sqrt of negative value {x}"))),
            Func::Sqrt => Ok(x.sqrt()),
            Func::Abs => Ok(x.abs()),
            Func::Tanh => Ok(x.tanh()),
        }
    }
}

/// Expression tree. Immutable once built; cloning is a deep copy.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn apply_bin(op: BinOp, a: f64, b: f64) -> Result<f64, ExprError> {
    match op {
        BinOp::Add => Ok(a + b),
        BinOp::Sub => Ok(a - b),
        BinOp::Mul => Ok(a * b),
        BinOp::Div if b == 0.0 => Err(ExprError::Domain(format!("division of {a} by zero"))),
        BinOp::Div => Ok(a / b),
        BinOp::Pow => {
            if a == 0.0 && b < 0.0 {
                return Err(ExprError::Domain(format!("0 raised to negative power {b}")));
            }
            let r = a.powf(b);
            if r.is_nan() {
                Err(ExprError::Domain(format!("{a} raised to non-integer power {b}")))
            } else {
                Ok(r)
            }
        }
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Bin(BinOp::Pow, Box::new(self), Box::new(exponent))
    }

    pub fn eval(&self, env: &Env) -> Result<f64, ExprError> {
        let v = self.eval_inner(env)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain(format!("non-finite result {v} evaluating `{self}`")))
        }
    }

    fn eval_inner(&self, env: &Env) -> Result<f64, ExprError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(v) => env.get(*v).ok_or(ExprError::MissingBinding(*v)),
            Expr::Neg(a) => Ok(-a.eval_inner(env)?),
            Expr::Bin(op, a, b) => apply_bin(*op, a.eval_inner(env)?, b.eval_inner(env)?),
            Expr::Call(f, a) => f.apply(a.eval_inner(env)?),
        }
    }

    /// Evaluates with a name map, matching the textual interface.
    pub fn eval_map(&self, env: &HashMap<String, f64>) -> Result<f64, ExprError> {
        self.eval(&Env::from_map(env)?)
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses(var),
            Expr::Bin(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    /// Variables appearing in the tree, sorted and deduplicated.
    pub fn variables(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Var::ALL.into_iter().filter(|v| self.uses(*v)).collect();
        out.sort();
        out
    }

    pub fn is_const(&self) -> bool {
        Var::ALL.iter().all(|v| !self.uses(*v))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// Replaces every occurrence of `var` by `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        match self {
            Expr::Var(v) if *v == var => with.clone(),
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(var, with))),
            Expr::Bin(op, a, b) => Expr::Bin(
                *op,
                Box::new(a.substitute(var, with)),
                Box::new(b.substitute(var, with)),
            ),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(var, with))),
        }
    }

    /// Binding strength used by the printer; higher binds tighter.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                // `--x` would still parse, but `-(-1)` reads better than `--1`
                write_child(f, a, 4)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let (sym, left, right) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => (" * ", 2, 3),
                    BinOp::Div => (" / ", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                write_child(f, a, left)?;
                f.write_str(sym)?;
                write_child(f, b, right)
            }
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Add, Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Sub, Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Mul, Box::new(self), Box::new(rhs))
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Div, Box::new(self), Box::new(rhs))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
