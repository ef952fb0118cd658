//! Closed-form expression trees over a single variable.
//!
//! The text form is prefix notation: `(div 1 (sqrt (sub 1 (mul t t))))`.
//! Exponents of `pow` are numeric literals, written as decimals or as
//! rationals like `5/2`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
}

/// The free variable.
pub fn var() -> Expr {
    Expr::Var
}

pub fn cst(value: f64) -> Expr {
    Expr::Const(value)
}

impl Expr {
    pub fn pow(self, exponent: f64) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Neg(a) => -a.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, e) => pow_value(a.eval(t), *e),
            Expr::Sqrt(a) => a.eval(t).sqrt(),
            Expr::Exp(a) => a.eval(t).exp(),
        }
    }

    pub fn jet(&self, t: f64, order: usize) -> Jet {
        match self {
            Expr::Const(c) => Jet::constant(*c, order),
            Expr::Var => Jet::variable(t, order),
            Expr::Neg(a) => -a.jet(t, order),
            Expr::Add(a, b) => a.jet(t, order) + b.jet(t, order),
            Expr::Sub(a, b) => a.jet(t, order) - b.jet(t, order),
            Expr::Mul(a, b) => a.jet(t, order) * b.jet(t, order),
            Expr::Div(a, b) => a.jet(t, order) / b.jet(t, order),
            Expr::Pow(a, e) => {
                let base = a.jet(t, order);
                if e.fract() == 0.0 && e.abs() <= 64.0 {
                    base.powi(*e as i32)
                } else {
                    base.powf(*e)
                }
            }
            Expr::Sqrt(a) => a.jet(t, order).sqrt(),
            Expr::Exp(a) => a.jet(t, order).exp(),
        }
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src);
        let mut pos = 0;
        let expr = parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(parse_error(pos, "trailing tokens"));
        }
        Ok(expr)
    }
}

fn pow_value(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

fn tokenize(src: &str) -> Vec<String> {
    src.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_owned).collect()
}

fn parse_error(position: usize, message: &str) -> Error {
    Error::Parse { position, message: message.to_owned() }
}

fn parse_number(tok: &str, pos: usize) -> Result<f64> {
    let value = match tok.split_once('/') {
        Some((num, den)) => {
            let n: f64 = num.parse().map_err(|_| parse_error(pos, "bad numerator"))?;
            let d: f64 = den.parse().map_err(|_| parse_error(pos, "bad denominator"))?;
            n / d
        }
        None => tok.parse().map_err(|_| parse_error(pos, &format!("unknown atom `{tok}`")))?,
    };
    if !value.is_finite() {
        return Err(parse_error(pos, "non-finite literal"));
    }
    Ok(value)
}

fn parse_expr(tokens: &[String], pos: &mut usize) -> Result<Expr> {
    let tok = tokens.get(*pos).ok_or_else(|| parse_error(*pos, "unexpected end of input"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let op = tokens.get(*pos).ok_or_else(|| parse_error(*pos, "missing operator"))?.clone();
            let op_pos = *pos;
            *pos += 1;
            let mut args = Vec::new();
            let mut exponent = None;
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err(parse_error(*pos, "unclosed parenthesis")),
                    Some(")") => {
                        *pos += 1;
                        break;
                    }
                    Some(lit) if op == "pow" && args.len() == 1 => {
                        exponent = Some(parse_number(lit, *pos)?);
                        *pos += 1;
                    }
                    Some(_) => args.push(parse_expr(tokens, pos)?),
                }
            }
            build(&op, args, exponent, op_pos)
        }
        ")" => Err(parse_error(*pos - 1, "unexpected `)`")),
        "t" | "x" => Ok(Expr::Var),
        lit => parse_number(lit, *pos - 1).map(Expr::Const),
    }
}

fn build(op: &str, args: Vec<Expr>, exponent: Option<f64>, pos: usize) -> Result<Expr> {
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(parse_error(pos, &format!("`{op}` takes {n} argument(s)")))
        }
    };
    let fold = |args: Vec<Expr>, f: fn(Expr, Expr) -> Expr| -> Result<Expr> {
        let mut it = args.into_iter();
        let first = it.next().ok_or_else(|| parse_error(pos, &format!("`{op}` needs arguments")))?;
        let mut acc = first;
        let mut count = 1;
        for a in it {
            acc = f(acc, a);
            count += 1;
        }
        if count < 2 {
            return Err(parse_error(pos, &format!("`{op}` takes at least 2 arguments")));
        }
        Ok(acc)
    };
    match op {
        "add" => fold(args, |a, b| a + b),
        "mul" => fold(args, |a, b| a * b),
        "sub" => {
            arity(2)?;
            let mut it = args.into_iter();
            Ok(it.next().unwrap() - it.next().unwrap())
        }
        "div" => {
            arity(2)?;
            let mut it = args.into_iter();
            Ok(it.next().unwrap() / it.next().unwrap())
        }
        "neg" => {
            arity(1)?;
            Ok(-args.into_iter().next().unwrap())
        }
        "sqrt" => {
            arity(1)?;
            Ok(args.into_iter().next().unwrap().sqrt())
        }
        "exp" => {
            arity(1)?;
            Ok(args.into_iter().next().unwrap().exp())
        }
        "pow" => {
            arity(1)?;
            let e = exponent.ok_or_else(|| parse_error(pos, "`pow` needs a numeric exponent"))?;
            Ok(args.into_iter().next().unwrap().pow(e))
        }
        other => Err(parse_error(pos, &format!("unknown operator `{other}`"))),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "t"),
            Expr::Neg(a) => write!(f, "(neg {a})"),
            Expr::Add(a, b) => write!(f, "(add {a} {b})"),
            Expr::Sub(a, b) => write!(f, "(sub {a} {b})"),
            Expr::Mul(a, b) => write!(f, "(mul {a} {b})"),
            Expr::Div(a, b) => write!(f, "(div {a} {b})"),
            Expr::Pow(a, e) => write!(f, "(pow {a} {e})"),
            Expr::Sqrt(a) => write!(f, "(sqrt {a})"),
            Expr::Exp(a) => write!(f, "(exp {a})"),
        }
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl $trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Box::new(self), Box::new(Expr::Const(rhs)))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Const(self)), Box::new(rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
