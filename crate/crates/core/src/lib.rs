//! Numerical analysis of homothetic functions `f = F ∘ h` and the homogeneous
//! Monge-Ampère equation `det(f_ij) = 0`.
//!
//! The crate is layered bottom-up:
//!
//! * [`expr`] parses and evaluates expression trees over any [`expr::Algebra`];
//! * [`jets`] differentiates them to second order, with a finite-difference
//!   oracle;
//! * [`smalllin`] provides determinants, cofactors and adjugate forms;
//! * [`homogeneity`] and [`geometry`] compute degrees, Euler residuals,
//!   marginal rates of substitution, Monge-Ampère residuals and
//!   Gauss-Kronecker curvature;
//! * [`theorems`] checks the composite-Hessian identities and classifies flat
//!   homothetic functions;
//! * [`models`] covers perfect substitutes, Cobb-Douglas and ACMS/CES models.
//!
//! Expression evaluation, jets and the dense kernels are generic over
//! [`Scalar`] (`f32`/`f64`); the analysis layers work in `f64`.

pub mod battery;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod homogeneity;
pub mod jets;
pub mod models;
pub mod sampling;
pub mod scalar;
pub mod smalllin;
pub mod theorems;

pub use error::{Error, Result};
pub use expr::{parse, Expr, VarSpec};
pub use scalar::Scalar;

/// Double-precision jet.
pub type Jet = jets::Jet2<f64>;
/// Single-precision jet.
pub type Jet32 = jets::Jet2<f32>;
/// Double-precision symmetric matrix.
pub type Matrix = smalllin::SymMatrix<f64>;
/// Single-precision symmetric matrix.
pub type Matrix32 = smalllin::SymMatrix<f32>;
