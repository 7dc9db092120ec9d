//! Immutable expression trees for multivariate real functions.
//!
//! Expressions are built either by [`parse`] or through the folding
//! constructors on [`Expr`]. Any subtree made only of literals is folded to a
//! single constant when the result is finite, so two trees that print the same
//! also compare equal.

mod algebra;
mod eval;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use algebra::Algebra;
pub use eval::EvalError;
pub use parse::{free_identifiers, parse, parse_with_constants, ParseError};

/// Unary builtins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Func {
    Ln,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "ln" => Some(Func::Ln),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression node. Variables are referenced by zero-based index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("variable index {index} out of range for arity {arity}")]
    Arity { index: usize, arity: usize },
    #[error("invalid variable list: {0}")]
    VarSpec(String),
}

/// Ordered, unique variable names; the arity is the number of names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSpec {
    names: Vec<String>,
}

impl VarSpec {
    pub fn new<I, S>(names: I) -> Result<Self, ExprError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(ExprError::VarSpec(
                "at least one variable is required".into(),
            ));
        }
        for (i, name) in names.iter().enumerate() {
            if !is_identifier(name) {
                return Err(ExprError::VarSpec(format!("`{name}` is not an identifier")));
            }
            if Func::from_name(name).is_some() {
                return Err(ExprError::VarSpec(format!(
                    "`{name}` is a builtin function"
                )));
            }
            if names[..i].contains(name) {
                return Err(ExprError::VarSpec(format!("duplicate variable `{name}`")));
            }
        }
        Ok(Self { names })
    }

    /// `x1, …, xn`.
    pub fn indexed(n: usize) -> Self {
        Self::indexed_with("x", n)
    }

    /// `prefix1, …, prefixn`.
    pub fn indexed_with(prefix: &str, n: usize) -> Self {
        assert!(n >= 1, "arity must be positive");
        Self {
            names: (1..=n).map(|i| format!("{prefix}{i}")).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Integer value of a literal exponent, if it has one.
pub(crate) fn integer_exponent(c: f64) -> Option<i32> {
    if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
        Some(c as i32)
    } else {
        None
    }
}

fn fold_binary(op: BinOp, a: f64, b: f64) -> Option<f64> {
    let v = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div if b != 0.0 => a / b,
        BinOp::Div => return None,
        BinOp::Pow => match integer_exponent(b) {
            Some(k) if k >= 0 || a != 0.0 => a.powi(k),
            Some(_) => return None,
            None if a > 0.0 => a.powf(b),
            None => return None,
        },
    };
    v.is_finite().then_some(v)
}

fn fold_call(f: Func, a: f64) -> Option<f64> {
    let v = match f {
        Func::Ln if a > 0.0 => a.ln(),
        Func::Exp => a.exp(),
        Func::Sqrt if a >= 0.0 => a.sqrt(),
        _ => return None,
    };
    v.is_finite().then_some(v)
}

impl Expr {
    /// Literal constant.
    ///
    /// Panics on NaN or infinity; trees never store non-finite constants.
    pub fn constant(c: f64) -> Expr {
        assert!(c.is_finite(), "non-finite constant {c}");
        Expr::Const(c)
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if let Some(v) = fold_binary(op, *x, *y) {
                return Expr::Const(v);
            }
        }
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        if let Expr::Const(x) = a {
            if let Some(v) = fold_call(f, x) {
                return Expr::Const(v);
            }
        }
        Expr::Call(f, Box::new(a))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            a => Expr::Neg(Box::new(a)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        Self::binary(BinOp::Add, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Self::binary(BinOp::Sub, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Self::binary(BinOp::Mul, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        Self::binary(BinOp::Div, a, b)
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Self::binary(BinOp::Pow, a, b)
    }

    pub fn powf(a: Expr, p: f64) -> Expr {
        Self::binary(BinOp::Pow, a, Expr::constant(p))
    }

    pub fn ln(a: Expr) -> Expr {
        Self::call(Func::Ln, a)
    }

    pub fn exp(a: Expr) -> Expr {
        Self::call(Func::Exp, a)
    }

    pub fn sqrt(a: Expr) -> Expr {
        Self::call(Func::Sqrt, a)
    }

    /// Sum of a non-empty list of terms, left-associated.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms
            .into_iter()
            .reduce(Expr::add)
            .unwrap_or(Expr::Const(0.0))
    }

    /// Product of a list of factors, left-associated.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        factors
            .into_iter()
            .reduce(Expr::mul)
            .unwrap_or(Expr::Const(1.0))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// One more than the largest variable index, or 0 for a closed expression.
    pub fn min_arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.min_arity(),
            Expr::Binary(_, a, b) => a.min_arity().max(b.min_arity()),
        }
    }

    /// Fails if the tree references a variable at or beyond `arity`.
    pub fn check_arity(&self, arity: usize) -> Result<(), ExprError> {
        match self.min_arity() {
            m if m > arity => Err(ExprError::Arity {
                index: m - 1,
                arity,
            }),
            _ => Ok(()),
        }
    }

    /// Replace variables by expressions. Unbound variables are kept as they
    /// are; the result must only reference variables below `target_arity`.
    pub fn substitute(
        &self,
        bindings: &BTreeMap<usize, Expr>,
        target_arity: usize,
    ) -> Result<Expr, ExprError> {
        for b in bindings.values() {
            b.check_arity(target_arity)?;
        }
        let out = self.substitute_unchecked(bindings);
        out.check_arity(target_arity)?;
        Ok(out)
    }

    fn substitute_unchecked(&self, bindings: &BTreeMap<usize, Expr>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => bindings.get(i).cloned().unwrap_or(Expr::Var(*i)),
            Expr::Neg(a) => Expr::neg(a.substitute_unchecked(bindings)),
            Expr::Call(f, a) => Expr::call(*f, a.substitute_unchecked(bindings)),
            Expr::Binary(op, a, b) => Expr::binary(
                *op,
                a.substitute_unchecked(bindings),
                b.substitute_unchecked(bindings),
            ),
        }
    }

    /// Fully parenthesized rendering with the given variable names.
    pub fn display<'a>(&'a self, vars: &'a VarSpec) -> Display<'a> {
        Display {
            expr: self,
            names: Some(vars),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }
}

/// Printer returned by [`Expr::display`]. Without names, variables print as
/// `x1 … xn`.
pub struct Display<'a> {
    expr: &'a Expr,
    names: Option<&'a VarSpec>,
}

impl Display<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(i) => match self.names.and_then(|v| v.names().get(*i)) {
                Some(name) => f.write_str(name),
                None => write!(f, "x{}", i + 1),
            },
            Expr::Neg(a) => {
                f.write_str("(-")?;
                self.write(a, f)?;
                f.write_str(")")
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                self.write(a, f)?;
                f.write_str(")")
            }
            Expr::Binary(op, a, b) => {
                f.write_str("(")?;
                self.write(a, f)?;
                write!(f, " {} ", op.symbol())?;
                self.write(b, f)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display {
            expr: self,
            names: None,
        }
        .write(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> VarSpec {
        VarSpec::new(["x", "y"]).unwrap()
    }

    #[test]
    fn varspec_rejects_duplicates_and_builtins() {
        assert!(VarSpec::new(["x", "x"]).is_err());
        assert!(VarSpec::new(["ln"]).is_err());
        assert!(VarSpec::new(Vec::<String>::new()).is_err());
        assert!(VarSpec::new(["1x"]).is_err());
        assert_eq!(VarSpec::indexed(3).names(), ["x1", "x2", "x3"]);
    }

    #[test]
    fn literal_subtrees_fold() {
        let e = Expr::add(
            Expr::constant(1.0),
            Expr::mul(Expr::constant(2.0), Expr::constant(3.0)),
        );
        assert_eq!(e, Expr::Const(7.0));
        // ln(-1) stays unevaluated so evaluation reports the domain error
        let bad = Expr::ln(Expr::constant(-1.0));
        assert!(matches!(bad, Expr::Call(Func::Ln, _)));
    }

    #[test]
    fn profile_substitution() {
        // phi(u) = u^2, u -> x2/x1, times x1
        let phi = Expr::powf(Expr::var(0), 2.0);
        let ratio = Expr::div(Expr::var(1), Expr::var(0));
        let mut b = BTreeMap::new();
        b.insert(0, ratio);
        let h = Expr::mul(Expr::var(0), phi.substitute(&b, 2).unwrap());
        assert_eq!(h.to_string(), "(x1 * ((x2 / x1) ^ 2.0))");
        assert_eq!(h.eval_scalar(&[2.0, 6.0]).unwrap(), 18.0);
    }

    #[test]
    fn identity_substitution_is_structural_identity() {
        let e = parse("x*exp(y) + ln(x+y)^2", &xy()).unwrap();
        let b: BTreeMap<usize, Expr> = (0..2).map(|i| (i, Expr::var(i))).collect();
        assert_eq!(e.substitute(&b, 2).unwrap(), e);
    }

    #[test]
    fn additive_separable_instance() {
        // h(x,y,z) = x + psi(y,z), psi(y,z) = sqrt(y z)
        let psi = parse("sqrt(y*z)", &VarSpec::new(["y", "z"]).unwrap()).unwrap();
        let mut b = BTreeMap::new();
        b.insert(0, Expr::var(1));
        b.insert(1, Expr::var(2));
        let h = Expr::add(Expr::var(0), psi.substitute(&b, 3).unwrap());
        let xyz = VarSpec::new(["x", "y", "z"]).unwrap();
        assert_eq!(h, parse("x + sqrt(y*z)", &xyz).unwrap());
        assert_eq!(h.eval_scalar(&[1.0, 4.0, 9.0]).unwrap(), 7.0);
    }

    #[test]
    fn substitution_arity_is_checked() {
        let e = Expr::var(0);
        let mut b = BTreeMap::new();
        b.insert(0, Expr::var(3));
        assert_eq!(
            e.substitute(&b, 2),
            Err(ExprError::Arity { index: 3, arity: 2 })
        );
    }

    #[test]
    fn negative_constants_print_parenthesized() {
        assert_eq!(Expr::constant(-2.5).to_string(), "(-2.5)");
        assert_eq!(Expr::constant(1e-7).to_string(), "1e-7");
    }
}
