//! Monge-Ampère residual, graph map and Gauss-Kronecker curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jets::jet_eval;
use crate::Matrix;

/// Point `(x, f(x))` on the graph hypersurface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub base: Vec<f64>,
    pub height: f64,
}

impl GraphPoint {
    pub fn new(e: &Expr, base: &[f64]) -> Result<Self> {
        Ok(Self {
            base: base.to_vec(),
            height: e.eval_scalar(base)?,
        })
    }

    /// Coordinates in `R^{n+1}`.
    pub fn coordinates(&self) -> Vec<f64> {
        let mut c = self.base.clone();
        c.push(self.height);
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaResidual {
    /// `det(f_ij)`.
    pub raw: f64,
    /// `|det| / max(‖Hess‖_F, floor)^n`; scale free.
    pub normalized: f64,
}

/// Relative size below which Hessian entries count as rounding noise.
pub const HESSIAN_NOISE_FLOOR: f64 = 1e-10;

/// Residual of `det(hess) = 0` for an already computed Hessian, with the
/// norm floored at `floor` (and `1e-300`).
pub fn ma_residual_of(hess: &Matrix, floor: f64) -> MaResidual {
    let raw = hess.determinant();
    let scale = hess
        .frobenius_norm()
        .max(floor)
        .powi(hess.order() as i32)
        .max(1e-300);
    MaResidual {
        raw,
        normalized: raw.abs() / scale,
    }
}

/// The norm floor is [`HESSIAN_NOISE_FLOOR`] times `‖∇f‖_∞ / ‖x‖_∞`, so an
/// affine function whose Hessian is pure rounding noise reads as flat.
pub fn ma_residual(e: &Expr, point: &[f64]) -> Result<MaResidual> {
    let j = jet_eval(e, point)?;
    let xs = point.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let floor = if xs > 0.0 {
        let g = j.gradient().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        HESSIAN_NOISE_FLOOR * g / xs
    } else {
        0.0
    };
    Ok(ma_residual_of(&j.hessian(), floor))
}

/// `det(Hess f) / (1 + |∇f|²)^{(n+2)/2}` for the upward unit normal.
pub fn gauss_kronecker(e: &Expr, point: &[f64]) -> Result<f64> {
    let j = jet_eval(e, point)?;
    let n = point.len() as f64;
    let g2: f64 = j.gradient().iter().map(|g| g * g).sum();
    Ok(j.hessian().determinant() / (1.0 + g2).powf((n + 2.0) / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Flat,
    NotFlat,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessThresholds {
    /// Flat when every normalized residual is below this.
    pub flat: f64,
    /// Not flat when some normalized residual exceeds this.
    pub reject: f64,
}

impl Default for FlatnessThresholds {
    fn default() -> Self {
        Self {
            flat: 1e-6,
            reject: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessVerdict {
    pub verdict: Verdict,
    pub max_residual: f64,
    /// Sample with the largest residual; present only for `NotFlat`.
    pub witness: Option<Vec<f64>>,
    pub witness_index: Option<usize>,
}

pub fn flatness(e: &Expr, samples: &[Vec<f64>]) -> Result<FlatnessVerdict> {
    flatness_with(e, samples, FlatnessThresholds::default())
}

/// Two-threshold flatness verdict. Ties for the largest residual go to the
/// lowest sample index.
pub fn flatness_with(
    e: &Expr,
    samples: &[Vec<f64>],
    th: FlatnessThresholds,
) -> Result<FlatnessVerdict> {
    if samples.is_empty() {
        return Err(Error::Invalid("flatness needs at least one sample".into()));
    }
    let mut worst = (0usize, -1.0f64);
    for (k, p) in samples.iter().enumerate() {
        let r = ma_residual(e, p)?.normalized;
        if r > worst.1 {
            worst = (k, r);
        }
    }
    let (index, max_residual) = worst;
    let verdict = if max_residual < th.flat {
        Verdict::Flat
    } else if max_residual > th.reject {
        Verdict::NotFlat
    } else {
        Verdict::Indeterminate
    };
    let not_flat = verdict == Verdict::NotFlat;
    Ok(FlatnessVerdict {
        verdict,
        max_residual,
        witness: not_flat.then(|| samples[index].clone()),
        witness_index: not_flat.then_some(index),
    })
}
