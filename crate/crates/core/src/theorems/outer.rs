use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{integer_exponent, parse, Expr, VarSpec};
use crate::jets::jet_eval;

/// Outer transform `F` of a homothetic function `F ∘ h`, with closed-form
/// first and second derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OuterFamily {
    /// `α·u + β`
    Affine { alpha: f64, beta: f64 },
    /// `α·u^p + β`
    Power { alpha: f64, p: f64, beta: f64 },
    /// `α·ln(u) + β`
    Log { alpha: f64, beta: f64 },
    /// `α·exp(u) + β`
    Exp { alpha: f64, beta: f64 },
    /// Arbitrary expression in the single variable `u`.
    Expr { source: String, expr: Expr },
}

/// `F(u)`, `F'(u)`, `F''(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl OuterFamily {
    pub fn identity() -> Self {
        OuterFamily::Affine {
            alpha: 1.0,
            beta: 0.0,
        }
    }

    pub fn power(alpha: f64, p: f64, beta: f64) -> Self {
        OuterFamily::Power { alpha, p, beta }
    }

    pub fn from_expr_text(source: &str) -> Result<Self> {
        let expr = parse(source, &VarSpec::new(["u"])?)?;
        Ok(OuterFamily::Expr {
            source: source.to_string(),
            expr,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            OuterFamily::Affine { .. } => "affine",
            OuterFamily::Power { .. } => "power",
            OuterFamily::Log { .. } => "log",
            OuterFamily::Exp { .. } => "exp",
            OuterFamily::Expr { .. } => "expr",
        }
    }

    pub fn is_affine(&self) -> bool {
        match self {
            OuterFamily::Affine { .. } => true,
            OuterFamily::Power { p, .. } => *p == 1.0,
            _ => false,
        }
    }

    pub fn eval(&self, u: f64) -> Result<OuterJet> {
        let domain = |reason: &'static str| {
            Error::Eval(crate::expr::EvalError::Domain {
                subexpr: self.to_string(),
                reason,
                value: u,
            })
        };
        let jet = match *self {
            OuterFamily::Affine { alpha, beta } => OuterJet {
                value: alpha * u + beta,
                d1: alpha,
                d2: 0.0,
            },
            OuterFamily::Power { alpha, p, beta } => match integer_exponent(p) {
                Some(k) => {
                    if k < 0 && u == 0.0 {
                        return Err(domain("negative power of zero"));
                    }
                    let kf = k as f64;
                    let d1 = if k == 0 { 0.0 } else { kf * u.powi(k - 1) };
                    let d2 = if k == 0 || k == 1 {
                        0.0
                    } else {
                        kf * (kf - 1.0) * u.powi(k - 2)
                    };
                    OuterJet {
                        value: alpha * u.powi(k) + beta,
                        d1: alpha * d1,
                        d2: alpha * d2,
                    }
                }
                None => {
                    if !(u > 0.0) {
                        return Err(domain("fractional power of a non-positive value"));
                    }
                    let up = u.powf(p);
                    OuterJet {
                        value: alpha * up + beta,
                        d1: alpha * p * up / u,
                        d2: alpha * p * (p - 1.0) * up / (u * u),
                    }
                }
            },
            OuterFamily::Log { alpha, beta } => {
                if !(u > 0.0) {
                    return Err(domain("logarithm of a non-positive value"));
                }
                OuterJet {
                    value: alpha * u.ln() + beta,
                    d1: alpha / u,
                    d2: -alpha / (u * u),
                }
            }
            OuterFamily::Exp { alpha, beta } => {
                let e = u.exp();
                OuterJet {
                    value: alpha * e + beta,
                    d1: alpha * e,
                    d2: alpha * e,
                }
            }
            OuterFamily::Expr { ref expr, .. } => {
                let j = jet_eval(expr, &[u])?;
                OuterJet {
                    value: j.val(),
                    d1: j.gradient()[0],
                    d2: j.hessian_entry(0, 0),
                }
            }
        };
        Ok(jet)
    }

    /// `F` as an expression in variable 0.
    pub fn to_expr(&self) -> Expr {
        let u = Expr::var(0);
        let affine = |alpha: f64, body: Expr, beta: f64| {
            Expr::add(Expr::mul(Expr::constant(alpha), body), Expr::constant(beta))
        };
        match *self {
            OuterFamily::Affine { alpha, beta } => affine(alpha, u, beta),
            OuterFamily::Power { alpha, p, beta } => affine(alpha, Expr::powf(u, p), beta),
            OuterFamily::Log { alpha, beta } => affine(alpha, Expr::ln(u), beta),
            OuterFamily::Exp { alpha, beta } => affine(alpha, Expr::exp(u), beta),
            OuterFamily::Expr { ref expr, .. } => expr.clone(),
        }
    }

    /// `F ∘ inner` over `arity` variables.
    pub fn compose(&self, inner: &Expr, arity: usize) -> Result<Expr> {
        let mut b = BTreeMap::new();
        b.insert(0, inner.clone());
        Ok(self.to_expr().substitute(&b, arity)?)
    }

    /// Fails with `ZeroFPrime` at the first `u` where `F'(u) = 0`.
    pub fn check_monotone(&self, us: &[f64]) -> Result<()> {
        for &u in us {
            if self.eval(u)?.d1 == 0.0 {
                return Err(Error::ZeroFPrime { u });
            }
        }
        Ok(())
    }
}

impl fmt::Display for OuterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OuterFamily::Affine { alpha, beta } => write!(f, "affine:alpha={alpha},beta={beta}"),
            OuterFamily::Power { alpha, p, beta } => {
                write!(f, "power:alpha={alpha},p={p},beta={beta}")
            }
            OuterFamily::Log { alpha, beta } => write!(f, "log:alpha={alpha},beta={beta}"),
            OuterFamily::Exp { alpha, beta } => write!(f, "exp:alpha={alpha},beta={beta}"),
            OuterFamily::Expr { source, .. } => write!(f, "expr:{source}"),
        }
    }
}

/// `kind:key=value,...` parameter lists shared by outer and model literals.
pub(crate) fn parse_params(body: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    if body.trim().is_empty() {
        return Ok(out);
    }
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("expected key=value, got `{part}`")))?;
        if out
            .insert(k.trim().to_string(), v.trim().to_string())
            .is_some()
        {
            return Err(Error::Invalid(format!(
                "duplicate parameter `{}`",
                k.trim()
            )));
        }
    }
    Ok(out)
}

pub(crate) fn take_f64(
    params: &mut BTreeMap<String, String>,
    key: &str,
    default: Option<f64>,
) -> Result<f64> {
    match params.remove(key) {
        Some(v) => v
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| {
                Error::Invalid(format!("parameter `{key}` is not a finite number: `{v}`"))
            }),
        None => default.ok_or_else(|| Error::Invalid(format!("missing parameter `{key}`"))),
    }
}

pub(crate) fn reject_leftovers(params: &BTreeMap<String, String>) -> Result<()> {
    match params.keys().next() {
        Some(k) => Err(Error::Invalid(format!("unknown parameter `{k}`"))),
        None => Ok(()),
    }
}

impl FromStr for OuterFamily {
    type Err = Error;

    /// `affine:alpha=1,beta=0`, `power:alpha=1,p=3,beta=0`, `log:…`, `exp:…`,
    /// or `expr:<expression in u>`. `alpha` defaults to 1 and `beta` to 0.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        if kind == "expr" {
            return OuterFamily::from_expr_text(body);
        }
        let mut params = parse_params(body)?;
        let alpha = take_f64(&mut params, "alpha", Some(1.0))?;
        let beta = take_f64(&mut params, "beta", Some(0.0))?;
        let outer = match kind {
            "affine" => OuterFamily::Affine { alpha, beta },
            "power" => OuterFamily::Power {
                alpha,
                p: take_f64(&mut params, "p", None)?,
                beta,
            },
            "log" => OuterFamily::Log { alpha, beta },
            "exp" => OuterFamily::Exp { alpha, beta },
            other => return Err(Error::Invalid(format!("unknown outer family `{other}`"))),
        };
        reject_leftovers(&params)?;
        if alpha == 0.0 {
            return Err(Error::Invalid("alpha must be nonzero".into()));
        }
        Ok(outer)
    }
}
