//! Homogeneity degree, Euler relations, marginal rates of substitution and
//! the "linearly homogeneous up to constants" test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::jet_eval;
use crate::sampling::probe_points;

/// Pointwise degree estimates must agree within this spread.
pub const HOMOGENEITY_SPREAD_TOL: f64 = 1e-7;
/// Maximum [`radial_affinity_residual`] for "linearly homogeneous up to
/// constants".
pub const RADIAL_AFFINITY_TOL: f64 = 1e-6;
/// Default radial scalings.
pub const DEFAULT_RADIAL_TS: [f64; 5] = [0.5, 0.75, 1.0, 1.5, 2.0];

const FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeEstimate {
    /// Median of the pointwise estimates `(x·∇e)/e`.
    pub degree: f64,
    /// Max minus min of the pointwise estimates.
    pub spread: f64,
    pub points: usize,
}

impl DegreeEstimate {
    pub fn is_homogeneous(&self) -> bool {
        self.spread <= HOMOGENEITY_SPREAD_TOL
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `|x·∇e − d·e| / max(|d·e|, 1e-12)`.
pub fn euler_residual(e: &Expr, point: &[f64], d: f64) -> Result<f64> {
    let j = jet_eval(e, point)?;
    let lhs = dot(point, j.gradient());
    let rhs = d * j.val();
    Ok((lhs - rhs).abs() / rhs.abs().max(FLOOR))
}

/// Median pointwise degree over `points`.
pub fn estimate_degree(e: &Expr, points: &[Vec<f64>]) -> Result<DegreeEstimate> {
    if points.is_empty() {
        return Err(Error::Invalid(
            "degree estimation needs at least one point".into(),
        ));
    }
    let mut ds = Vec::with_capacity(points.len());
    for (index, p) in points.iter().enumerate() {
        let j = jet_eval(e, p)?;
        if j.val() == 0.0 {
            return Err(Error::ZeroValue { index });
        }
        ds.push(dot(p, j.gradient()) / j.val());
    }
    ds.sort_by(f64::total_cmp);
    let m = ds.len();
    let degree = if m % 2 == 1 {
        ds[m / 2]
    } else {
        0.5 * (ds[m / 2 - 1] + ds[m / 2])
    };
    Ok(DegreeEstimate {
        degree,
        spread: ds[m - 1] - ds[0],
        points: m,
    })
}

/// `‖Hess(e)·x − (d−1)∇e‖∞`, normalized by the larger of `‖(d−1)∇e‖∞` and
/// the row scale `‖Hess‖max·‖x‖₁` (floored at 1e-12). The row scale keeps the
/// `d = 1` case, where both sides vanish, at rounding level.
pub fn second_euler_residual(e: &Expr, point: &[f64], d: f64) -> Result<f64> {
    let j = jet_eval(e, point)?;
    let hx = j.hessian().mul_vec(point)?;
    let rhs: Vec<f64> = j.gradient().iter().map(|g| (d - 1.0) * g).collect();
    let diff: Vec<f64> = hx.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let row_scale = j.hessian().max_abs() * point.iter().map(|x| x.abs()).sum::<f64>();
    Ok(inf_norm(&diff) / inf_norm(&rhs).max(row_scale).max(FLOOR))
}

/// Marginal rate of substitution `∂_i e / ∂_j e` (zero-based indices).
pub fn mrs(e: &Expr, point: &[f64], i: usize, j: usize) -> Result<f64> {
    let jet = jet_eval(e, point)?;
    mrs_from_gradient(jet.gradient(), i, j)
}

pub(crate) fn mrs_from_gradient(g: &[f64], i: usize, j: usize) -> Result<f64> {
    if i >= g.len() || j >= g.len() {
        return Err(Error::Invalid(format!(
            "index out of range for arity {}",
            g.len()
        )));
    }
    if i == j {
        return Ok(1.0);
    }
    if g[j] == 0.0 {
        return Err(Error::ZeroDerivative { index: j });
    }
    Ok(g[i] / g[j])
}

/// Largest relative change of any MRS pair when the point is scaled by `t`.
pub fn mrs_degree_zero_residual(e: &Expr, point: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("scale t must be positive, got {t}")));
    }
    let scaled: Vec<f64> = point.iter().map(|x| t * x).collect();
    let g0 = jet_eval(e, point)?.gradient().to_vec();
    let g1 = jet_eval(e, &scaled)?.gradient().to_vec();
    let n = point.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let m0 = mrs_from_gradient(&g0, i, j)?;
            let m1 = mrs_from_gradient(&g1, i, j)?;
            worst = worst.max((m1 - m0).abs() / m0.abs().max(FLOOR));
        }
    }
    Ok(worst)
}

struct AffineFit {
    intercept: f64,
    max_residual: f64,
    max_abs_value: f64,
}

fn fit_affine(e: &Expr, base: &[f64], ts: &[f64]) -> Result<AffineFit> {
    let ys = ts
        .iter()
        .map(|&t| {
            let p: Vec<f64> = base.iter().map(|x| t * x).collect();
            e.eval_scalar(&p)
        })
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    let m = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    let sxy: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (t - t_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let max_residual = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - (slope * t + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(AffineFit {
        intercept,
        max_residual,
        max_abs_value: ys.iter().fold(0.0, |m, y| m.max(y.abs())),
    })
}

/// Distance of `e` from the class `α·(linearly homogeneous) + β`.
///
/// `t ↦ e(t·x)` is fitted by least squares with `a(x)·t + β` at `point` and
/// at the fixed probe points. The result is the larger of the worst fit
/// residual and the spread of the fitted intercepts, both relative to the
/// largest value seen.
pub fn radial_affinity_residual(e: &Expr, point: &[f64], ts: &[f64]) -> Result<f64> {
    if ts.len() < 3 {
        return Err(Error::Invalid(
            "radial affinity needs at least three scalings".into(),
        ));
    }
    let t0 = ts[0];
    if ts.iter().all(|&t| t == t0) {
        return Err(Error::Invalid(
            "radial scalings must not all coincide".into(),
        ));
    }
    let mut bases = vec![point.to_vec()];
    bases.extend(probe_points(point.len()));
    let fits = bases
        .iter()
        .map(|b| fit_affine(e, b, ts))
        .collect::<Result<Vec<_>>>()?;
    let scale = fits.iter().fold(FLOOR, |m, f| m.max(f.max_abs_value));
    let fit_residual = fits.iter().fold(0.0_f64, |m, f| m.max(f.max_residual)) / scale;
    let (lo, hi) = fits
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
            (lo.min(f.intercept), hi.max(f.intercept))
        });
    Ok(fit_residual.max((hi - lo) / scale))
}
