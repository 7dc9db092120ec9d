use serde::{Deserialize, Serialize};

use super::{HomotheticSpec, OuterFamily};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::jet_eval;
use crate::smalllin::relative_difference;

/// Left and right sides of a checked identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|, scale)`.
    pub relerr: f64,
    /// Magnitude of the terms that were summed on either side; differences
    /// below rounding of this size are noise.
    pub scale: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64, scale: f64) -> Self {
        Self {
            lhs,
            rhs,
            relerr: relative_difference(lhs, rhs, scale),
            scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeIdentity {
    pub u: f64,
    pub f_prime: f64,
    pub f_second: f64,
    /// `det(f_ij)` from the jet Hessian of `F ∘ h`.
    pub lhs: f64,
    /// `F'^{n-1}·{F'·det(h_ij) + F''·Σ h_i h_j H_ij}`.
    pub rhs_corrected: f64,
    /// Same bracket with leading factor `F'^n`.
    pub rhs_uncorrected: f64,
    pub relerr: f64,
    pub scale: f64,
}

struct InnerParts {
    u: f64,
    grad: Vec<f64>,
    det: f64,
    adj_form: f64,
    hess_norm: f64,
    lhs: f64,
    lhs_scale: f64,
}

fn inner_parts(spec: &HomotheticSpec, point: &[f64]) -> Result<InnerParts> {
    if point.len() != spec.arity {
        return Err(Error::Invalid(format!(
            "point has {} coordinates, spec arity is {}",
            point.len(),
            spec.arity
        )));
    }
    let hj = jet_eval(&spec.inner, point)?;
    let hh = hj.hessian();
    let fh = jet_eval(&spec.composite()?, point)?.hessian();
    let n = spec.arity as i32;
    let adj_form = if spec.arity >= 2 {
        hh.adjugate_quadratic_form(hj.gradient())?
    } else {
        // adjugate of a 1x1 matrix is [1]
        hj.gradient()[0] * hj.gradient()[0]
    };
    Ok(InnerParts {
        u: hj.val(),
        grad: hj.gradient().to_vec(),
        det: hh.determinant(),
        adj_form,
        hess_norm: hh.frobenius_norm(),
        lhs: fh.determinant(),
        lhs_scale: fh.frobenius_norm().powi(n),
    })
}

/// Determinant of the composite Hessian against its cofactor expansion.
pub fn composite_hessian_identity(
    spec: &HomotheticSpec,
    point: &[f64],
) -> Result<CompositeIdentity> {
    let p = inner_parts(spec, point)?;
    let oj = spec.outer.eval(p.u)?;
    if oj.d1 == 0.0 {
        return Err(Error::ZeroFPrime { u: p.u });
    }
    let n = spec.arity as i32;
    let lead = oj.d1.powi(n - 1);
    let bracket = oj.d1 * p.det + oj.d2 * p.adj_form;
    let rhs_corrected = lead * bracket;
    let g2: f64 = p.grad.iter().map(|g| g * g).sum();
    let rhs_scale = lead.abs()
        * (oj.d1.abs() * p.hess_norm.powi(n) + oj.d2.abs() * g2 * p.hess_norm.powi(n - 1));
    let scale = p.lhs_scale.max(rhs_scale);
    Ok(CompositeIdentity {
        u: p.u,
        f_prime: oj.d1,
        f_second: oj.d2,
        lhs: p.lhs,
        rhs_corrected,
        rhs_uncorrected: oj.d1 * rhs_corrected,
        relerr: relative_difference(p.lhs, rhs_corrected, scale),
        scale,
    })
}

/// `det(f_ij) = det(h_ij)·F'^{n-1}/(d−1)·{(d−1)F' + d·h·F''}` for `d ≠ 1`.
pub fn factorization_identity(spec: &HomotheticSpec, point: &[f64]) -> Result<IdentityCheck> {
    let d = spec.degree;
    if d == 1.0 {
        return Err(Error::DegreeOne);
    }
    let p = inner_parts(spec, point)?;
    let oj = spec.outer.eval(p.u)?;
    if oj.d1 == 0.0 {
        return Err(Error::ZeroFPrime { u: p.u });
    }
    let n = spec.arity as i32;
    let lead = oj.d1.powi(n - 1);
    let rhs = p.det * lead / (d - 1.0) * ((d - 1.0) * oj.d1 + d * p.u * oj.d2);
    let rhs_scale =
        p.hess_norm.powi(n) * lead.abs() * (oj.d1.abs() + (d * p.u * oj.d2 / (d - 1.0)).abs());
    Ok(IdentityCheck::new(p.lhs, rhs, p.lhs_scale.max(rhs_scale)))
}

/// Normalized residual of `d·u·F''(u) + (d−1)·F'(u) = 0`.
pub fn ode_residual(outer: &OuterFamily, d: f64, u: f64) -> Result<f64> {
    let j = outer.eval(u)?;
    let a = d * u * j.d2;
    let b = (d - 1.0) * j.d1;
    Ok((a + b).abs() / a.abs().max(b.abs()).max(1e-12))
}

/// `h_1² h_22 + h_2² h_11 − 2 h_1 h_2 h_12` for a two-input `h`.
pub fn bracket2(h: &Expr, point: &[f64]) -> Result<f64> {
    if point.len() != 2 {
        return Err(Error::Invalid(format!(
            "bracket needs exactly two inputs, got {}",
            point.len()
        )));
    }
    h.check_arity(2)?;
    let j = jet_eval(h, point)?;
    let (h1, h2) = (j.gradient()[0], j.gradient()[1]);
    Ok(
        h1 * h1 * j.hessian_entry(1, 1) + h2 * h2 * j.hessian_entry(0, 0)
            - 2.0 * h1 * h2 * j.hessian_entry(0, 1),
    )
}

/// Terms of the substitution argument for a linearly homogeneous two-input
/// `h`, where `h_11 = −(y/x)h_12` and `h_22 = −(x/y)h_12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketChain {
    pub bracket: f64,
    /// `−(h_12/(xy))·(x h_1 + y h_2)²`.
    pub substituted: f64,
    /// `(x h_1 + y h_2)²`.
    pub euler_square: f64,
    /// `h²` (that is `d² h²` with `d = 1`).
    pub value_square: f64,
    pub bracket_relerr: f64,
    pub euler_relerr: f64,
}

pub fn bracket_chain(h: &Expr, point: &[f64]) -> Result<BracketChain> {
    let bracket = bracket2(h, point)?;
    let j = jet_eval(h, point)?;
    let (x, y) = (point[0], point[1]);
    let (h1, h2) = (j.gradient()[0], j.gradient()[1]);
    let h12 = j.hessian_entry(0, 1);
    let euler_square = (x * h1 + y * h2).powi(2);
    let substituted = -(h12 / (x * y)) * euler_square;
    let value_square = j.val() * j.val();
    // the bracket sums three terms; its rounding scale is their magnitude
    let terms = (h1 * h1 * j.hessian_entry(1, 1)).abs()
        + (h2 * h2 * j.hessian_entry(0, 0)).abs()
        + (2.0 * h1 * h2 * h12).abs();
    Ok(BracketChain {
        bracket,
        substituted,
        euler_square,
        value_square,
        bracket_relerr: relative_difference(bracket, substituted, terms),
        euler_relerr: relative_difference(euler_square, value_square, 0.0),
    })
}

/// `x_1^{n−1}·det(f_ij)` against `φ²·F'^{n−1}·F''·det(φ_ij)` for
/// `f = F(x_1 φ(x_2/x_1, …, x_n/x_1))`.
pub fn profile_identity(
    outer: &OuterFamily,
    profile: &Expr,
    point: &[f64],
) -> Result<IdentityCheck> {
    let n = point.len();
    if n < 2 {
        return Err(Error::Invalid(
            "profile identity needs at least two inputs".into(),
        ));
    }
    let x1 = point[0];
    if !(x1 > 0.0) {
        return Err(Error::Invalid(format!("x1 must be positive, got {x1}")));
    }
    let f = super::construct_from_profile(outer, profile, n - 1)?.expr;
    let fh = jet_eval(&f, point)?.hessian();
    let ni = n as i32;
    let lhs = x1.powi(ni - 1) * fh.determinant();
    let lhs_scale = x1.powi(ni - 1) * fh.frobenius_norm().powi(ni);

    let u: Vec<f64> = point[1..].iter().map(|x| x / x1).collect();
    let pj = jet_eval(profile, &u)?;
    let ph = pj.hessian();
    let phi = pj.val();
    let oj = outer.eval(x1 * phi)?;
    let coeff = phi * phi * oj.d1.powi(ni - 1) * oj.d2;
    let rhs = coeff * ph.determinant();
    let rhs_scale = coeff.abs() * ph.frobenius_norm().powi(ni - 1);
    Ok(IdentityCheck::new(lhs, rhs, lhs_scale.max(rhs_scale)))
}
