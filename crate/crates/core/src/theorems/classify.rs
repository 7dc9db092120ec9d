//! Classification of flat homothetic functions.
//!
//! Two inputs: a flat `F ∘ h` either has `h = (a·x + b·y)^d` or is linearly
//! homogeneous up to constants. Three or more inputs: either linearly
//! homogeneous up to constants, or `F(x_1 φ(x_2/x_1, …))` with a profile `φ`
//! whose Hessian is singular.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HomotheticSpec, OuterFamily};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{flatness_with, ma_residual, FlatnessThresholds, FlatnessVerdict, Verdict};
use crate::homogeneity::{
    estimate_degree, radial_affinity_residual, DEFAULT_RADIAL_TS, RADIAL_AFFINITY_TOL,
};
use crate::jets::jet_eval;
use crate::sampling::{default_samples, DEFAULT_SEED};

/// Bound on the normalized second derivatives of `h^{1/d}` (and on the
/// spread of its gradient) for the perfect-substitute case.
pub const CASE1_CURVATURE_TOL: f64 = 1e-7;
/// Bound on the normalized Monge-Ampère residual of a profile.
pub const PROFILE_DET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Case2 {
    /// `h = (a·x + b·y)^d`.
    InnerPerfectSubstitutePower {
        a: f64,
        b: f64,
    },
    LinearHomogeneousUpToConstants,
    NotFlat,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Evidence2 {
    pub flatness: Option<FlatnessVerdict>,
    /// Max over samples of `|ĥ_ij|·‖x‖∞ / ‖∇ĥ‖∞` for `ĥ = h^{1/d}`.
    pub linearized_curvature: Option<f64>,
    /// Max relative deviation of `∇ĥ` from its value at the first sample.
    pub coefficient_spread: Option<f64>,
    pub radial_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification2 {
    pub case: Case2,
    /// Both cases verified; the more specific one is reported.
    pub both_cases: bool,
    pub evidence: Evidence2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CaseN {
    LinearHomogeneousUpToConstants,
    /// `f = F(x_1 φ(x_2/x_1, …, x_n/x_1))`, `det(φ_ij) = 0`.
    ProfileFlat {
        profile: Expr,
    },
    NotFlat,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvidenceN {
    pub flatness: Option<FlatnessVerdict>,
    pub radial_residual: Option<f64>,
    /// Max normalized `|det(φ_ij)|` at the projected samples.
    pub profile_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationN {
    pub case: CaseN,
    pub evidence: EvidenceN,
}

fn require_samples(samples: &[Vec<f64>], arity: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Invalid(
            "classification needs at least one sample".into(),
        ));
    }
    if let Some(p) = samples.iter().find(|p| p.len() != arity) {
        return Err(Error::Invalid(format!(
            "sample has {} coordinates, expected {arity}",
            p.len()
        )));
    }
    Ok(())
}

struct Case1Check {
    a: f64,
    b: f64,
    curvature: f64,
    spread: f64,
}

impl Case1Check {
    fn passes(&self) -> bool {
        self.curvature <= CASE1_CURVATURE_TOL && self.spread <= CASE1_CURVATURE_TOL
    }
}

fn check_case1(spec: &HomotheticSpec, samples: &[Vec<f64>]) -> Result<Case1Check> {
    let hat = spec.linearized_inner();
    let mut grads = Vec::with_capacity(samples.len());
    let mut curvature: f64 = 0.0;
    for p in samples {
        let j = jet_eval(&hat, p)?;
        let g = j.gradient();
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let xnorm = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        curvature = curvature.max(j.hessian().max_abs() * xnorm / gnorm);
        grads.push(g.to_vec());
    }
    let g0 = &grads[0];
    let g0norm = g0.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let spread = grads
        .iter()
        .flat_map(|g| g.iter().zip(g0).map(|(a, b)| (a - b).abs()))
        .fold(0.0f64, f64::max)
        / g0norm;
    Ok(Case1Check {
        a: g0[0],
        b: g0[1],
        curvature,
        spread,
    })
}

/// Classify a two-input homothetic function.
pub fn classify_two_input(spec: &HomotheticSpec, samples: &[Vec<f64>]) -> Result<Classification2> {
    classify_two_input_with(spec, samples, FlatnessThresholds::default())
}

pub fn classify_two_input_with(
    spec: &HomotheticSpec,
    samples: &[Vec<f64>],
    thresholds: FlatnessThresholds,
) -> Result<Classification2> {
    if spec.arity != 2 {
        return Err(Error::Invalid(format!(
            "two-input classification needs arity 2, got {}",
            spec.arity
        )));
    }
    require_samples(samples, 2)?;
    let f = spec.composite()?;
    let flat = flatness_with(&f, samples, thresholds)?;
    let mut evidence = Evidence2 {
        flatness: Some(flat.clone()),
        ..Default::default()
    };
    if flat.verdict == Verdict::NotFlat {
        return Ok(Classification2 {
            case: Case2::NotFlat,
            both_cases: false,
            evidence,
        });
    }
    // a domain failure of h^{1/d} means case (1) does not verify
    let case1 = check_case1(spec, samples).ok();
    if let Some(c) = &case1 {
        evidence.linearized_curvature = Some(c.curvature);
        evidence.coefficient_spread = Some(c.spread);
    }
    let radial = radial_affinity_residual(&f, &samples[0], &DEFAULT_RADIAL_TS)?;
    evidence.radial_residual = Some(radial);
    let case2 = radial <= RADIAL_AFFINITY_TOL;
    match case1.filter(Case1Check::passes) {
        Some(c) => Ok(Classification2 {
            case: Case2::InnerPerfectSubstitutePower { a: c.a, b: c.b },
            both_cases: case2,
            evidence,
        }),
        None if case2 => Ok(Classification2 {
            case: Case2::LinearHomogeneousUpToConstants,
            both_cases: false,
            evidence,
        }),
        None => Err(Error::Inconsistent(format!(
            "flatness verdict {:?} (residual {:e}) but neither case verifies: {:?}",
            flat.verdict, flat.max_residual, evidence
        ))),
    }
}

/// Profile `φ(u_2, …, u_n) = h(1, u_2, …, u_n)` of a linearly homogeneous `h`.
pub fn profile_of(h: &Expr, arity: usize) -> Result<Expr> {
    if arity < 2 {
        return Err(Error::Invalid("profile needs at least two inputs".into()));
    }
    h.check_arity(arity)?;
    let est = estimate_degree(h, &default_samples(arity, DEFAULT_SEED))?;
    if !est.is_homogeneous() || (est.degree - 1.0).abs() > super::DEGREE_MATCH_TOL {
        return Err(Error::NotLinearlyHomogeneous {
            degree: est.degree,
            spread: est.spread,
        });
    }
    let mut b = BTreeMap::new();
    b.insert(0, Expr::constant(1.0));
    for k in 1..arity {
        b.insert(k, Expr::var(k - 1));
    }
    Ok(h.substitute(&b, arity - 1)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileConstruction {
    /// `F(x_1 φ(x_2/x_1, …, x_n/x_1))`.
    pub expr: Expr,
    pub arity: usize,
    /// Max normalized `|det(φ_ij)|` over default samples of the profile.
    pub profile_residual: f64,
    /// False when the profile Hessian is not singular; the result is then not
    /// expected to be flat.
    pub singular_profile: bool,
}

/// Build `F(x_1 φ(x_2/x_1, …))` from a profile of arity `profile_arity`.
pub fn construct_from_profile(
    outer: &OuterFamily,
    profile: &Expr,
    profile_arity: usize,
) -> Result<ProfileConstruction> {
    if profile_arity == 0 {
        return Err(Error::Invalid("profile arity must be at least 1".into()));
    }
    profile.check_arity(profile_arity)?;
    let n = profile_arity + 1;
    let mut b = BTreeMap::new();
    for k in 0..profile_arity {
        b.insert(k, Expr::div(Expr::var(k + 1), Expr::var(0)));
    }
    let h = Expr::mul(Expr::var(0), profile.substitute(&b, n)?);
    let expr = outer.compose(&h, n)?;
    let mut profile_residual: f64 = 0.0;
    for p in default_samples(profile_arity, DEFAULT_SEED) {
        profile_residual = profile_residual.max(ma_residual(profile, &p)?.normalized);
    }
    Ok(ProfileConstruction {
        expr,
        arity: n,
        profile_residual,
        singular_profile: profile_residual <= PROFILE_DET_TOL,
    })
}

/// Classify a homothetic function of three or more inputs.
pub fn classify_n_input(spec: &HomotheticSpec, samples: &[Vec<f64>]) -> Result<ClassificationN> {
    classify_n_input_with(spec, samples, FlatnessThresholds::default())
}

pub fn classify_n_input_with(
    spec: &HomotheticSpec,
    samples: &[Vec<f64>],
    thresholds: FlatnessThresholds,
) -> Result<ClassificationN> {
    if spec.arity < 3 {
        return Err(Error::Invalid(format!(
            "n-input classification needs arity >= 3, got {}",
            spec.arity
        )));
    }
    require_samples(samples, spec.arity)?;
    let f = spec.composite()?;
    let flat = flatness_with(&f, samples, thresholds)?;
    let mut evidence = EvidenceN {
        flatness: Some(flat.clone()),
        ..Default::default()
    };
    if flat.verdict == Verdict::NotFlat {
        return Ok(ClassificationN {
            case: CaseN::NotFlat,
            evidence,
        });
    }
    let radial = radial_affinity_residual(&f, &samples[0], &DEFAULT_RADIAL_TS)?;
    evidence.radial_residual = Some(radial);
    if radial <= RADIAL_AFFINITY_TOL {
        return Ok(ClassificationN {
            case: CaseN::LinearHomogeneousUpToConstants,
            evidence,
        });
    }
    let profile = profile_of(&spec.linearized_inner(), spec.arity)?;
    let mut worst: f64 = 0.0;
    for p in samples {
        let u: Vec<f64> = p[1..].iter().map(|x| x / p[0]).collect();
        worst = worst.max(ma_residual(&profile, &u)?.normalized);
    }
    evidence.profile_residual = Some(worst);
    if worst <= PROFILE_DET_TOL {
        Ok(ClassificationN {
            case: CaseN::ProfileFlat { profile },
            evidence,
        })
    } else {
        Err(Error::Inconsistent(format!(
            "flatness verdict {:?} and not radially affine, but the profile Hessian is regular \
             (residual {worst:e})",
            flat.verdict
        )))
    }
}
