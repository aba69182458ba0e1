//! Expression frontend: a small arithmetic language over (x, y, z) with exact
//! derivatives by forward propagation of derivative-carrying values.
//!
//! The same AST evaluates with plain `f64`, with univariate [`Taylor`] series
//! (derivatives up to fourth order along x) and with [`Jet2`] (gradient and
//! Hessian in three variables). No numeric differentiation happens on this
//! path.

mod jet;
mod parse;
mod taylor;

pub use jet::Jet2;
pub use parse::parse_expression;
pub use taylor::Taylor;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Numeric carrier an [`Expr`] can be evaluated with.
pub trait Scalar: Copy {
    fn from_f64(v: f64) -> Self;
    fn add(self, r: Self) -> Self;
    fn sub(self, r: Self) -> Self;
    fn mul(self, r: Self) -> Self;
    fn div(self, r: Self) -> Self;
    fn neg(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn value(self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn add(self, r: Self) -> Self {
        self + r
    }
    fn sub(self, r: Self) -> Self {
        self - r
    }
    fn mul(self, r: Self) -> Self {
        self * r
    }
    fn div(self, r: Self) -> Self {
        self / r
    }
    fn neg(self) -> Self {
        -self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn value(self) -> f64 {
        self
    }
}

impl Scalar for Taylor {
    fn from_f64(v: f64) -> Self {
        Taylor::constant(v)
    }
    fn add(self, r: Self) -> Self {
        Taylor::add(self, r)
    }
    fn sub(self, r: Self) -> Self {
        Taylor::sub(self, r)
    }
    fn mul(self, r: Self) -> Self {
        Taylor::mul(self, r)
    }
    fn div(self, r: Self) -> Self {
        Taylor::div(self, r)
    }
    fn neg(self) -> Self {
        Taylor::neg(self)
    }
    fn sin(self) -> Self {
        Taylor::sin(self)
    }
    fn cos(self) -> Self {
        Taylor::cos(self)
    }
    fn exp(self) -> Self {
        Taylor::exp(self)
    }
    fn ln(self) -> Self {
        Taylor::ln(self)
    }
    fn sqrt(self) -> Self {
        Taylor::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        Taylor::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        Taylor::powf(self, p)
    }
    fn value(self) -> f64 {
        Taylor::value(&self)
    }
}

impl Scalar for Jet2 {
    fn from_f64(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn add(self, r: Self) -> Self {
        Jet2::add(self, r)
    }
    fn sub(self, r: Self) -> Self {
        Jet2::sub(self, r)
    }
    fn mul(self, r: Self) -> Self {
        Jet2::mul(self, r)
    }
    fn div(self, r: Self) -> Self {
        Jet2::div(self, r)
    }
    fn neg(self) -> Self {
        Jet2::neg(self)
    }
    fn sin(self) -> Self {
        Jet2::sin(self)
    }
    fn cos(self) -> Self {
        Jet2::cos(self)
    }
    fn exp(self) -> Self {
        Jet2::exp(self)
    }
    fn ln(self) -> Self {
        Jet2::ln(self)
    }
    fn sqrt(self) -> Self {
        Jet2::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        Jet2::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        Jet2::powf(self, p)
    }
    fn value(self) -> f64 {
        self.v
    }
}

impl Expr {
    pub fn eval<S: Scalar>(&self, vars: &dyn Fn(Var) -> S) -> Result<S> {
        Ok(match self {
            Expr::Num(v) => S::from_f64(*v),
            Expr::Var(v) => vars(*v),
            Expr::Neg(a) => a.eval(vars)?.neg(),
            Expr::Add(a, b) => a.eval(vars)?.add(b.eval(vars)?),
            Expr::Sub(a, b) => a.eval(vars)?.sub(b.eval(vars)?),
            Expr::Mul(a, b) => a.eval(vars)?.mul(b.eval(vars)?),
            Expr::Div(a, b) => {
                let d = b.eval(vars)?;
                if d.value() == 0.0 {
                    return Err(Error::Eval("division by zero".into()));
                }
                a.eval(vars)?.div(d)
            }
            Expr::Pow(base, exp) => {
                let b = base.eval(vars)?;
                if let Expr::Num(p) = **exp {
                    if p.fract() == 0.0 && p.abs() <= 64.0 {
                        return Ok(b.powi(p as i32));
                    }
                    if b.value() <= 0.0 {
                        return Err(Error::Eval(format!(
                            "fractional power of non-positive base {}",
                            b.value()
                        )));
                    }
                    return Ok(b.powf(p));
                }
                if b.value() <= 0.0 {
                    return Err(Error::Eval("power with variable exponent needs a positive base".into()));
                }
                let e = exp.eval(vars)?;
                b.ln().mul(e).exp()
            }
            Expr::Call(f, a) => {
                let u = a.eval(vars)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u.value() <= 0.0 {
                            return Err(Error::Eval(format!("log of non-positive argument {}", u.value())));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u.value() < 0.0 {
                            return Err(Error::Eval(format!("sqrt of negative argument {}", u.value())));
                        }
                        u.sqrt()
                    }
                }
            }
        })
    }

    /// Evaluate at a 3D point with plain floats.
    pub fn eval_xyz(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        self.eval(&|v| match v {
            Var::X => x,
            Var::Y => y,
            Var::Z => z,
        })
    }

    /// Value, gradient and Hessian at a 3D point.
    pub fn eval_jet(&self, x: f64, y: f64, z: f64) -> Result<Jet2> {
        self.eval(&|v| match v {
            Var::X => Jet2::variable(0, x),
            Var::Y => Jet2::variable(1, y),
            Var::Z => Jet2::variable(2, z),
        })
    }

    /// Univariate Taylor evaluation; y and z are treated as constants 0.
    pub fn eval_taylor(&self, x: f64) -> Result<Taylor> {
        self.eval(&|v| match v {
            Var::X => Taylor::variable(x),
            _ => Taylor::constant(0.0),
        })
    }

    /// True when the expression references only the variable x.
    pub fn is_univariate(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(v) => *v == Var::X,
            Expr::Neg(a) => a.is_univariate(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_univariate() && b.is_univariate()
            }
            Expr::Call(_, a) => a.is_univariate(),
        }
    }
}
