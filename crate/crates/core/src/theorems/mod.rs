//! Identities for the Hessian determinant of `f = F ∘ h` and the
//! classification of flat homothetic functions.
//!
//! With `f_ij = F'·h_ij + F''·h_i h_j` the matrix determinant lemma gives
//!
//! ```text
//! det(f_ij) = F'^{n-1} · { F'·det(h_ij) + F''·Σ h_i h_j H_ij }
//! ```
//!
//! where `H_ij` are the cofactors of `(h_ij)`. [`composite_hessian_identity`]
//! reports this alongside the variant with leading factor `F'^n`, which is
//! off by exactly `F'(u)`.

mod classify;
mod identities;
mod outer;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::homogeneity::{estimate_degree, DegreeEstimate};

pub use classify::{
    classify_n_input, classify_n_input_with, classify_two_input, classify_two_input_with,
    construct_from_profile, profile_of, Case2, CaseN, Classification2, ClassificationN, Evidence2,
    EvidenceN, ProfileConstruction, CASE1_CURVATURE_TOL, PROFILE_DET_TOL,
};
pub use identities::{
    bracket2, bracket_chain, composite_hessian_identity, factorization_identity, ode_residual,
    profile_identity, BracketChain, CompositeIdentity, IdentityCheck,
};
pub(crate) use outer::{parse_params, reject_leftovers, take_f64};
pub use outer::{OuterFamily, OuterJet};

/// Maximum `|d̂ − d|` accepted when validating a claimed degree.
pub const DEGREE_MATCH_TOL: f64 = 1e-6;

/// Homothetic function `F ∘ h` with `h` homogeneous of degree `d ≠ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotheticSpec {
    pub outer: OuterFamily,
    pub inner: Expr,
    pub degree: f64,
    pub arity: usize,
}

impl HomotheticSpec {
    pub fn new(outer: OuterFamily, inner: Expr, degree: f64, arity: usize) -> Result<Self> {
        if degree == 0.0 || !degree.is_finite() {
            return Err(Error::DegreeZero);
        }
        if arity == 0 {
            return Err(Error::Invalid("arity must be positive".into()));
        }
        inner.check_arity(arity)?;
        Ok(Self {
            outer,
            inner,
            degree,
            arity,
        })
    }

    /// Check that the inner function is homogeneous of the claimed degree at
    /// `samples`.
    pub fn validate(&self, samples: &[Vec<f64>]) -> Result<DegreeEstimate> {
        let est = estimate_degree(&self.inner, samples)?;
        if !est.is_homogeneous() || (est.degree - self.degree).abs() > DEGREE_MATCH_TOL {
            return Err(Error::Invalid(format!(
                "inner function is not homogeneous of degree {} (estimate {}, spread {:e})",
                self.degree, est.degree, est.spread
            )));
        }
        Ok(est)
    }

    /// `F ∘ h` as an expression.
    pub fn composite(&self) -> Result<Expr> {
        self.outer.compose(&self.inner, self.arity)
    }

    /// `h^{1/d}` on the positive branch; linearly homogeneous.
    pub fn linearized_inner(&self) -> Expr {
        if self.degree == 1.0 {
            self.inner.clone()
        } else {
            Expr::powf(self.inner.clone(), 1.0 / self.degree)
        }
    }
}
