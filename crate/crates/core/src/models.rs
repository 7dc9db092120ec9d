//! Production models: perfect substitutes, Cobb-Douglas and ACMS (CES), with
//! closed-form flatness predicates for `F ∘ model`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{flatness, FlatnessVerdict, Verdict};
use crate::theorems::{parse_params, reject_leftovers, take_f64, OuterFamily};

const PARAM_TOL: f64 = 1e-12;

fn approx(a: f64, b: f64) -> bool {
    (a - b).abs() <= PARAM_TOL * a.abs().max(b.abs()).max(1.0)
}

/// `Σ a_i x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectSubstitute {
    pub a: Vec<f64>,
}

/// `γ · Π x_i^{α_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CobbDouglas {
    pub gamma: f64,
    pub alpha: Vec<f64>,
}

impl CobbDouglas {
    /// `b · L^k · C^{1−k}`.
    pub fn two_factor(b: f64, k: f64) -> Result<Self> {
        let m = Self {
            gamma: b,
            alpha: vec![k, 1.0 - k],
        };
        Model::CobbDouglas(m.clone()).validate()?;
        Ok(m)
    }
}

/// `γ · (Σ a_i^ρ x_i^ρ)^{d/ρ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acms {
    pub gamma: f64,
    pub a: Vec<f64>,
    pub rho: f64,
    pub d: f64,
}

impl Acms {
    /// Elasticity of substitution `s = 1/(1−ρ)`; undefined at `ρ = 1`.
    pub fn elasticity(&self) -> Option<f64> {
        (self.rho != 1.0).then(|| 1.0 / (1.0 - self.rho))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Model {
    #[serde(rename = "perfsub")]
    PerfectSubstitute(PerfectSubstitute),
    CobbDouglas(CobbDouglas),
    Acms(Acms),
}

impl Model {
    pub fn perfect_substitute(a: Vec<f64>) -> Result<Self> {
        let m = Model::PerfectSubstitute(PerfectSubstitute { a });
        m.validate()?;
        Ok(m)
    }

    pub fn cobb_douglas(gamma: f64, alpha: Vec<f64>) -> Result<Self> {
        let m = Model::CobbDouglas(CobbDouglas { gamma, alpha });
        m.validate()?;
        Ok(m)
    }

    pub fn acms(gamma: f64, a: Vec<f64>, rho: f64, d: f64) -> Result<Self> {
        let m = Model::Acms(Acms { gamma, a, rho, d });
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let nonzero = |name: &str, v: &[f64]| -> Result<()> {
            if v.len() < 2 {
                return Err(Error::Invalid(format!(
                    "`{name}` needs at least two inputs"
                )));
            }
            if v.iter().any(|x| *x == 0.0 || !x.is_finite()) {
                return Err(Error::Invalid(format!(
                    "`{name}` entries must be finite and nonzero"
                )));
            }
            Ok(())
        };
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("`{name}` must be positive")))
            }
        };
        match self {
            Model::PerfectSubstitute(m) => nonzero("a", &m.a),
            Model::CobbDouglas(m) => {
                positive("gamma", m.gamma)?;
                nonzero("alpha", &m.alpha)
            }
            Model::Acms(m) => {
                positive("gamma", m.gamma)?;
                nonzero("a", &m.a)?;
                if m.rho == 0.0 || !m.rho.is_finite() {
                    return Err(Error::Invalid("`rho` must be nonzero".into()));
                }
                if m.d == 0.0 || !m.d.is_finite() {
                    return Err(Error::Invalid("`d` must be nonzero".into()));
                }
                if m.rho.fract() != 0.0 && m.a.iter().any(|a| *a < 0.0) {
                    return Err(Error::Invalid(
                        "`a` must be positive when `rho` is not an integer".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Model::PerfectSubstitute(m) => m.a.len(),
            Model::CobbDouglas(m) => m.alpha.len(),
            Model::Acms(m) => m.a.len(),
        }
    }

    /// Homogeneity degree.
    pub fn degree(&self) -> f64 {
        match self {
            Model::PerfectSubstitute(_) => 1.0,
            Model::CobbDouglas(m) => m.alpha.iter().sum(),
            Model::Acms(m) => m.d,
        }
    }

    pub fn to_expr(&self) -> Expr {
        let x = Expr::var;
        match self {
            Model::PerfectSubstitute(m) => {
                Expr::sum(m.a.iter().enumerate().map(|(i, &a)| scaled(a, x(i))))
            }
            Model::CobbDouglas(m) => scaled(
                m.gamma,
                Expr::product(m.alpha.iter().enumerate().map(|(i, &a)| power(x(i), a))),
            ),
            Model::Acms(m) => {
                let inner = Expr::sum(
                    m.a.iter()
                        .enumerate()
                        .map(|(i, &a)| scaled(a.powf(m.rho), power(x(i), m.rho))),
                );
                scaled(m.gamma, power(inner, m.d / m.rho))
            }
        }
    }
}

fn scaled(c: f64, e: Expr) -> Expr {
    if c == 1.0 {
        e
    } else {
        Expr::mul(Expr::constant(c), e)
    }
}

fn power(e: Expr, p: f64) -> Expr {
    if p == 1.0 {
        e
    } else {
        Expr::powf(e, p)
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(":")
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::PerfectSubstitute(m) => write!(f, "perfsub:a={}", fmt_list(&m.a)),
            Model::CobbDouglas(m) => {
                write!(
                    f,
                    "cobb-douglas:gamma={},alpha={}",
                    m.gamma,
                    fmt_list(&m.alpha)
                )
            }
            Model::Acms(m) => write!(
                f,
                "acms:gamma={},a={},rho={},d={}",
                m.gamma,
                fmt_list(&m.a),
                m.rho,
                m.d
            ),
        }
    }
}

fn take_list(
    params: &mut std::collections::BTreeMap<String, String>,
    key: &str,
) -> Result<Vec<f64>> {
    let raw = params
        .remove(key)
        .ok_or_else(|| Error::Invalid(format!("missing parameter `{key}`")))?;
    raw.split(':')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    Error::Invalid(format!("`{key}` entry `{v}` is not a finite number"))
                })
        })
        .collect()
}

impl FromStr for Model {
    type Err = Error;

    /// `cobb-douglas:gamma=1,alpha=0.3:0.7`, `acms:gamma=1,a=1:1,rho=2,d=1`,
    /// `perfsub:a=2:3`. `gamma` defaults to 1.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Invalid(format!("model literal `{s}` has no parameters")))?;
        let mut params = parse_params(body)?;
        let model = match kind {
            "perfsub" | "perfect-substitute" => Model::PerfectSubstitute(PerfectSubstitute {
                a: take_list(&mut params, "a")?,
            }),
            "cobb-douglas" | "cd" => Model::CobbDouglas(CobbDouglas {
                gamma: take_f64(&mut params, "gamma", Some(1.0))?,
                alpha: take_list(&mut params, "alpha")?,
            }),
            "acms" | "ces" => Model::Acms(Acms {
                gamma: take_f64(&mut params, "gamma", Some(1.0))?,
                a: take_list(&mut params, "a")?,
                rho: take_f64(&mut params, "rho", None)?,
                d: take_f64(&mut params, "d", Some(1.0))?,
            }),
            other => return Err(Error::Invalid(format!("unknown model `{other}`"))),
        };
        reject_leftovers(&params)?;
        model.validate()?;
        Ok(model)
    }
}

/// Closed-form flatness prediction for `F ∘ model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticVerdict {
    pub expected: Verdict,
    pub reason: String,
    /// Narrow reading for Cobb-Douglas ("flat iff F and P are both linear"):
    /// flat only for affine `F` with `Σα = 1`. Equals `expected` otherwise.
    pub strict_reading: Verdict,
    /// Whether an additive constant in `F` was admitted.
    pub admits_additive_constant: bool,
}

fn flat_if(b: bool) -> Verdict {
    if b {
        Verdict::Flat
    } else {
        Verdict::NotFlat
    }
}

/// `F ∘ P` is `α·(linearly homogeneous) + β`.
fn linear_up_to_constants(outer: &OuterFamily, degree: f64) -> bool {
    match *outer {
        OuterFamily::Affine { .. } => approx(degree, 1.0),
        OuterFamily::Power { p, .. } => approx(p * degree, 1.0),
        _ => false,
    }
}

fn outer_beta(outer: &OuterFamily) -> f64 {
    match *outer {
        OuterFamily::Affine { beta, .. }
        | OuterFamily::Power { beta, .. }
        | OuterFamily::Log { beta, .. }
        | OuterFamily::Exp { beta, .. } => beta,
        OuterFamily::Expr { .. } => 0.0,
    }
}

pub fn analytic_flatness(model: &Model, outer: &OuterFamily) -> Result<AnalyticVerdict> {
    if let OuterFamily::Expr { source, .. } = outer {
        return Err(Error::UnsupportedOuter(format!(
            "expression outer `{source}` has no closed-form prediction"
        )));
    }
    if let OuterFamily::Power { p, .. } = outer {
        if *p == 0.0 {
            return Err(Error::Invalid("power outer with p = 0 is constant".into()));
        }
    }
    let d = model.degree();
    let linear = linear_up_to_constants(outer, d);
    let admits_additive_constant = outer_beta(outer) != 0.0;
    let v = match model {
        Model::PerfectSubstitute(_) => AnalyticVerdict {
            expected: Verdict::Flat,
            reason: "F of a perfect substitute has a rank-one Hessian".into(),
            strict_reading: Verdict::Flat,
            admits_additive_constant,
        },
        Model::CobbDouglas(_) => {
            let reason = if linear {
                format!("F ∘ P is linearly homogeneous up to constants (degree {d})")
            } else if approx(d, 1.0) {
                "P is linearly homogeneous but F is curved".to_string()
            } else {
                format!("det(P_ij) ≠ 0 for degree {d} and F does not solve d·u·F'' + (d−1)·F' = 0")
            };
            AnalyticVerdict {
                expected: flat_if(linear),
                reason,
                strict_reading: flat_if(outer.is_affine() && approx(d, 1.0)),
                admits_additive_constant,
            }
        }
        Model::Acms(m) => {
            let rho_one = approx(m.rho, 1.0);
            let reason = if rho_one {
                "rho = 1: Q is a power of a perfect substitute".to_string()
            } else if linear {
                format!("F ∘ Q is linearly homogeneous up to constants (degree {d})")
            } else {
                format!(
                    "rho = {} ≠ 1 and F ∘ Q is not linearly homogeneous up to constants",
                    m.rho
                )
            };
            let expected = flat_if(rho_one || linear);
            AnalyticVerdict {
                expected,
                reason,
                strict_reading: expected,
                admits_additive_constant,
            }
        }
    };
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub model: String,
    pub outer: String,
    pub analytic: AnalyticVerdict,
    pub numerical: FlatnessVerdict,
}

impl CrossCheck {
    pub fn agrees(&self) -> bool {
        self.analytic.expected == self.numerical.verdict
    }
}

/// `F ∘ model` as an expression.
pub fn composite(model: &Model, outer: &OuterFamily) -> Result<Expr> {
    outer.compose(&model.to_expr(), model.arity())
}

/// Numerical verdict and closed-form prediction side by side, without
/// failing on disagreement.
pub fn compare(model: &Model, outer: &OuterFamily, samples: &[Vec<f64>]) -> Result<CrossCheck> {
    let analytic = analytic_flatness(model, outer)?;
    let numerical = flatness(&composite(model, outer)?, samples)?;
    Ok(CrossCheck {
        model: model.to_string(),
        outer: outer.to_string(),
        analytic,
        numerical,
    })
}

/// Like [`compare`], but a disagreement is an error.
pub fn cross_check(model: &Model, outer: &OuterFamily, samples: &[Vec<f64>]) -> Result<CrossCheck> {
    let c = compare(model, outer, samples)?;
    if !c.agrees() {
        return Err(Error::Mismatch(format!(
            "{} with {}: predicted {:?}, measured {:?} (residual {:e})",
            c.model, c.outer, c.analytic.expected, c.numerical.verdict, c.numerical.max_residual
        )));
    }
    Ok(c)
}

/// (model, outer) pairs covering every branch of the closed-form predicates.
pub fn prediction_grid() -> Vec<(Model, OuterFamily)> {
    let mut models = vec![
        Model::perfect_substitute(vec![2.0, 3.0]),
        Model::perfect_substitute(vec![1.0, 0.5, 2.0]),
        Model::cobb_douglas(1.0, vec![0.3, 0.7]),
        Model::cobb_douglas(1.0, vec![0.35, 0.35]),
        Model::cobb_douglas(1.0, vec![0.65, 0.65]),
        Model::cobb_douglas(2.0, vec![0.2, 0.3, 0.5]),
        Model::cobb_douglas(1.0, vec![2.0, 1.0]),
    ];
    for rho in [0.5, 1.0, 2.0] {
        for d in [0.5, 1.0, 2.0] {
            models.push(Model::acms(1.0, vec![1.0, 1.0], rho, d));
        }
    }
    models.push(Model::acms(1.5, vec![0.6, 1.2, 0.9], -1.0, 1.0));
    let models: Vec<Model> = models
        .into_iter()
        .map(|m| m.expect("grid model is valid"))
        .collect();

    let mut out = Vec::new();
    for m in models {
        let d = m.degree();
        let outers = [
            OuterFamily::identity(),
            OuterFamily::Affine {
                alpha: 2.0,
                beta: 1.0,
            },
            OuterFamily::power(1.0, 2.0, 0.0),
            OuterFamily::power(3.0, 1.0 / d, -1.0),
            OuterFamily::Log {
                alpha: 1.0,
                beta: 0.0,
            },
        ];
        out.extend(outers.into_iter().map(|o| (m.clone(), o)));
    }
    out
}


#[cfg(test)]
mod grid_tests {
    use super::*;

    #[test]
    fn grid_agrees() {
        let grid = prediction_grid();
        assert!(grid.len() >= 40);
        for (m, o) in &grid {
            let s = crate::sampling::default_samples(m.arity(), 42);
            let c = compare(m, o, &s).unwrap();
            assert!(
                c.agrees(),
                "{} {} {:?} {:?} {:e}",
                c.model,
                c.outer,
                c.analytic.expected,
                c.numerical.verdict,
                c.numerical.max_residual
            );
        }
    }
}
