use crate::scalar::Scalar;

/// Number-like type an [`Expr`](super::Expr) can be evaluated over.
///
/// Domain checks happen in the evaluator against [`Algebra::value`], so the
/// primitive operations here may assume their arguments are admissible.
pub trait Algebra: Clone {
    type Scalar: Scalar;

    /// True when the type carries derivatives. Such algebras reject points
    /// where a builtin is finite but not differentiable (`sqrt` at 0).
    const TRACKS_DERIVATIVES: bool;

    /// A constant in an algebra over `arity` variables.
    fn constant(c: Self::Scalar, arity: usize) -> Self;

    fn value(&self) -> Self::Scalar;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn recip(&self) -> Self;

    fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.recip())
    }

    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
    /// Real power with a constant exponent; the base is positive.
    fn powf(&self, p: Self::Scalar) -> Self;
}

impl<T: Scalar> Algebra for T {
    type Scalar = T;
    const TRACKS_DERIVATIVES: bool = false;

    fn constant(c: T, _arity: usize) -> Self {
        c
    }

    fn value(&self) -> T {
        *self
    }

    fn add(&self, rhs: &Self) -> Self {
        *self + *rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        *self - *rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        *self * *rhs
    }

    fn neg(&self) -> Self {
        -*self
    }

    fn recip(&self) -> Self {
        T::one() / *self
    }

    fn div(&self, rhs: &Self) -> Self {
        *self / *rhs
    }

    fn ln(&self) -> Self {
        num_traits::Float::ln(*self)
    }

    fn exp(&self) -> Self {
        num_traits::Float::exp(*self)
    }

    fn sqrt(&self) -> Self {
        num_traits::Float::sqrt(*self)
    }

    fn powi(&self, k: i32) -> Self {
        num_traits::Float::powi(*self, k)
    }

    fn powf(&self, p: T) -> Self {
        num_traits::Float::powf(*self, p)
    }
}
