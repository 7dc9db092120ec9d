use num_traits::{Float, One, Zero};
use thiserror::Error;

use super::{integer_exponent, Algebra, BinOp, Expr, Func};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{subexpr}`: {reason} (value {value})")]
    Domain {
        subexpr: String,
        reason: &'static str,
        value: f64,
    },
    #[error("derivative of `{subexpr}` is singular at {value}")]
    DerivativeSingularity { subexpr: String, value: f64 },
    #[error("expression needs {expected} coordinates, point has {found}")]
    ArityMismatch { expected: usize, found: usize },
}

fn domain(e: &Expr, reason: &'static str, value: f64) -> EvalError {
    EvalError::Domain {
        subexpr: e.to_string(),
        reason,
        value,
    }
}

impl Expr {
    /// Evaluate at a real point.
    pub fn eval_scalar(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.eval_in(point)
    }

    /// Evaluate over any [`Algebra`]. `point` holds one (already seeded)
    /// element per variable.
    pub fn eval_in<A: Algebra>(&self, point: &[A]) -> Result<A, EvalError> {
        let need = self.min_arity();
        if need > point.len() {
            return Err(EvalError::ArityMismatch {
                expected: need,
                found: point.len(),
            });
        }
        let out = self.eval_node(point)?;
        let v = out.value().as_f64();
        if !v.is_finite() {
            return Err(domain(self, "non-finite result", v));
        }
        Ok(out)
    }

    fn eval_node<A: Algebra>(&self, point: &[A]) -> Result<A, EvalError> {
        let n = point.len();
        match self {
            Expr::Const(c) => Ok(A::constant(A::Scalar::lit(*c), n)),
            Expr::Var(i) => Ok(point[*i].clone()),
            Expr::Neg(a) => Ok(a.eval_node(point)?.neg()),
            Expr::Call(func, a) => {
                let x = a.eval_node(point)?;
                let v = x.value();
                match func {
                    Func::Ln => {
                        if v <= A::Scalar::zero() || v.is_nan() {
                            return Err(domain(
                                self,
                                "logarithm of a non-positive value",
                                v.as_f64(),
                            ));
                        }
                        Ok(x.ln())
                    }
                    Func::Exp => Ok(x.exp()),
                    Func::Sqrt => {
                        if v < A::Scalar::zero() || v.is_nan() {
                            return Err(domain(
                                self,
                                "square root of a negative value",
                                v.as_f64(),
                            ));
                        }
                        if A::TRACKS_DERIVATIVES && v.is_zero() {
                            return Err(EvalError::DerivativeSingularity {
                                subexpr: self.to_string(),
                                value: 0.0,
                            });
                        }
                        Ok(x.sqrt())
                    }
                }
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval_node(point)?;
                match op {
                    BinOp::Pow => self.eval_pow(x, b, point),
                    _ => {
                        let y = b.eval_node(point)?;
                        Ok(match op {
                            BinOp::Add => x.add(&y),
                            BinOp::Sub => x.sub(&y),
                            BinOp::Mul => x.mul(&y),
                            BinOp::Div => {
                                if y.value().is_zero() {
                                    return Err(domain(self, "division by zero", 0.0));
                                }
                                x.div(&y)
                            }
                            BinOp::Pow => unreachable!(),
                        })
                    }
                }
            }
        }
    }

    // Integer literal exponents use powi (valid for any base); any other
    // exponent requires a positive base.
    fn eval_pow<A: Algebra>(&self, base: A, exponent: &Expr, point: &[A]) -> Result<A, EvalError> {
        let v = base.value();
        if let Expr::Const(c) = exponent {
            if let Some(k) = integer_exponent(*c) {
                if k < 0 && v.is_zero() {
                    return Err(domain(self, "negative power of zero", 0.0));
                }
                if k == 0 {
                    return Ok(A::constant(A::Scalar::one(), point.len()));
                }
                return Ok(base.powi(k));
            }
            if !(v > A::Scalar::zero()) {
                return Err(domain(
                    self,
                    "fractional power of a non-positive base",
                    v.as_f64(),
                ));
            }
            return Ok(base.powf(A::Scalar::lit(*c)));
        }
        if !(v > A::Scalar::zero()) {
            return Err(domain(
                self,
                "variable power of a non-positive base",
                v.as_f64(),
            ));
        }
        let y = exponent.eval_node(point)?;
        Ok(y.mul(&base.ln()).exp())
    }
}
