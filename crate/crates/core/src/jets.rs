//! Second-order forward-mode differentiation.
//!
//! A [`Jet2`] carries a value, its gradient and the upper triangle of its
//! Hessian with respect to `n` input variables. Evaluating an expression over
//! jets yields exact (to rounding) first and second partials in a single pass.
//! [`fd_hessian`] is an independent central-difference oracle.

use crate::expr::{Algebra, EvalError, Expr};
use crate::scalar::Scalar;
use crate::smalllin::SymMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet2<T> {
    value: T,
    gradient: Vec<T>,
    // packed upper triangle, row by row
    hessian: Vec<T>,
}

#[inline]
fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i + 1) / 2 + (j - i)
}

impl<T: Scalar> Jet2<T> {
    pub fn constant(value: T, n: usize) -> Self {
        Self {
            value,
            gradient: vec![T::zero(); n],
            hessian: vec![T::zero(); packed_len(n)],
        }
    }

    /// Independent variable `index` of `n`, at `value`.
    pub fn variable(value: T, index: usize, n: usize) -> Self {
        let mut j = Self::constant(value, n);
        j.gradient[index] = T::one();
        j
    }

    pub fn arity(&self) -> usize {
        self.gradient.len()
    }

    pub fn val(&self) -> T {
        self.value
    }

    pub fn gradient(&self) -> &[T] {
        &self.gradient
    }

    pub fn hessian_entry(&self, i: usize, j: usize) -> T {
        self.hessian[packed_index(self.arity(), i, j)]
    }

    pub fn hessian(&self) -> SymMatrix<T> {
        SymMatrix::from_upper(self.arity(), |i, j| self.hessian_entry(i, j))
    }

    /// `g(self)` given `g`, `g'` and `g''` at the current value.
    fn chain(&self, g0: T, g1: T, g2: T) -> Self {
        let n = self.arity();
        let gradient = self.gradient.iter().map(|&d| g1 * d).collect();
        let mut hessian = Vec::with_capacity(self.hessian.len());
        for i in 0..n {
            for j in i..n {
                let h = self.hessian[hessian.len()];
                hessian.push(g1 * h + g2 * self.gradient[i] * self.gradient[j]);
            }
        }
        Self {
            value: g0,
            gradient,
            hessian,
        }
    }

    fn zip(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.arity(), rhs.arity());
        Self {
            value: f(self.value, rhs.value),
            gradient: self
                .gradient
                .iter()
                .zip(&rhs.gradient)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            hessian: self
                .hessian
                .iter()
                .zip(&rhs.hessian)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl<T: Scalar> Algebra for Jet2<T> {
    type Scalar = T;
    const TRACKS_DERIVATIVES: bool = true;

    fn constant(c: T, arity: usize) -> Self {
        Jet2::constant(c, arity)
    }

    fn value(&self) -> T {
        self.value
    }

    fn add(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }

    fn mul(&self, rhs: &Self) -> Self {
        let n = self.arity();
        let (a, b) = (self.value, rhs.value);
        let gradient = self
            .gradient
            .iter()
            .zip(&rhs.gradient)
            .map(|(&da, &db)| a * db + b * da)
            .collect();
        let mut hessian = Vec::with_capacity(self.hessian.len());
        for i in 0..n {
            for j in i..n {
                let k = hessian.len();
                hessian.push(
                    a * rhs.hessian[k]
                        + b * self.hessian[k]
                        + self.gradient[i] * rhs.gradient[j]
                        + rhs.gradient[i] * self.gradient[j],
                );
            }
        }
        Self {
            value: a * b,
            gradient,
            hessian,
        }
    }

    fn neg(&self) -> Self {
        self.chain(-self.value, -T::one(), T::zero())
    }

    fn recip(&self) -> Self {
        let r = T::one() / self.value;
        self.chain(r, -r * r, T::lit(2.0) * r * r * r)
    }

    fn ln(&self) -> Self {
        let r = T::one() / self.value;
        self.chain(self.value.ln(), r, -r * r)
    }

    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        let d1 = T::lit(0.5) / s;
        self.chain(s, d1, -d1 / (T::lit(2.0) * self.value))
    }

    fn powi(&self, k: i32) -> Self {
        let v = self.value;
        let kf = T::lit(k as f64);
        let d1 = if k == 0 {
            T::zero()
        } else {
            kf * v.powi(k - 1)
        };
        let d2 = if k == 0 || k == 1 {
            T::zero()
        } else {
            kf * (kf - T::one()) * v.powi(k - 2)
        };
        self.chain(v.powi(k), d1, d2)
    }

    fn powf(&self, p: T) -> Self {
        let v = self.value;
        let vp = v.powf(p);
        let d1 = p * vp / v;
        let d2 = p * (p - T::one()) * vp / (v * v);
        self.chain(vp, d1, d2)
    }
}

/// Second-order jet of `e` at `point`.
pub fn jet_eval<T: Scalar>(e: &Expr, point: &[T]) -> Result<Jet2<T>, EvalError> {
    let n = point.len();
    let seeds: Vec<Jet2<T>> = point
        .iter()
        .enumerate()
        .map(|(i, &x)| Jet2::variable(x, i, n))
        .collect();
    e.eval_in(&seeds)
}

/// Default finite-difference step before per-coordinate scaling.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Central-difference Hessian. Coordinate `i` uses the step
/// `step · max(1, |x_i|)`.
pub fn fd_hessian<T: Scalar>(e: &Expr, point: &[T], step: T) -> Result<SymMatrix<T>, EvalError> {
    assert!(step > T::zero(), "finite-difference step must be positive");
    let n = point.len();
    let h: Vec<T> = point.iter().map(|x| step * x.abs().max(T::one())).collect();
    let f = |shift: &[(usize, T)]| -> Result<T, EvalError> {
        let mut p = point.to_vec();
        for &(i, d) in shift {
            p[i] += d;
        }
        e.eval_in(&p)
    };
    let f0 = f(&[])?;
    let mut full = vec![T::zero(); n * n];
    for i in 0..n {
        let fp = f(&[(i, h[i])])?;
        let fm = f(&[(i, -h[i])])?;
        full[i * n + i] = (fp - T::lit(2.0) * f0 + fm) / (h[i] * h[i]);
        for j in 0..n {
            if j == i {
                continue;
            }
            let pp = f(&[(i, h[i]), (j, h[j])])?;
            let pm = f(&[(i, h[i]), (j, -h[j])])?;
            let mp = f(&[(i, -h[i]), (j, h[j])])?;
            let mm = f(&[(i, -h[i]), (j, -h[j])])?;
            full[i * n + j] = (pp - pm - mp + mm) / (T::lit(4.0) * h[i] * h[j]);
        }
    }
    Ok(SymMatrix::from_upper(n, |i, j| {
        (full[i * n + j] + full[j * n + i]) * T::lit(0.5)
    }))
}

/// Max-norm difference between the jet and finite-difference Hessians,
/// relative to `max(‖H‖_max, |f| / ‖x‖_∞², 1e-12)`.
pub fn fd_discrepancy(e: &Expr, point: &[f64], step: f64) -> Result<f64, EvalError> {
    let jet = jet_eval(e, point)?;
    let fd = fd_hessian(e, point, step)?;
    let xmax = point.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let diff = jet
        .hessian()
        .as_slice()
        .iter()
        .zip(fd.as_slice())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = jet
        .hessian()
        .max_abs()
        .max(jet.val().abs() / (xmax * xmax))
        .max(1e-12);
    Ok(diff / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, VarSpec};

    fn expr(text: &str) -> Expr {
        parse(text, &VarSpec::new(["x1", "x2"]).unwrap()).unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn fd_agrees() {
        for text in [
            "x1^3*x2^2",
            "exp(x1*x2)+ln(x1+x2^2)",
            "sqrt(x1*x2)",
            "x1^x2",
        ] {
            let r = fd_discrepancy(&expr(text), &[1.3, 0.7], DEFAULT_FD_STEP).unwrap();
            assert!(r < 1e-6, "{text}: {r}");
        }
    }

    #[test]
    fn bilinear() {
        let j = jet_eval(&expr("x1*x2"), &[2.0, 3.0]).unwrap();
        assert_eq!(j.val(), 6.0);
        assert_eq!(j.gradient(), [3.0, 2.0]);
        assert_eq!(j.hessian().rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn sum_of_squares() {
        let j = jet_eval(&expr("x1^2 + x2^2"), &[1.0, 1.0]).unwrap();
        assert_eq!(j.val(), 2.0);
        assert_eq!(j.gradient(), [2.0, 2.0]);
        assert_eq!(j.hessian().rows(), vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    }

    #[test]
    fn cobb_douglas_monomial() {
        // f = x^a y^b: f_x = a, f_xx = a(a-1), f_xy = ab at (1,1)
        let j = jet_eval(&expr("x1^0.3 * x2^0.7"), &[1.0, 1.0]).unwrap();
        assert_close(j.val(), 1.0, 1e-15);
        assert_close(j.gradient()[0], 0.3, 1e-15);
        assert_close(j.gradient()[1], 0.7, 1e-15);
        assert_close(j.hessian_entry(0, 0), -0.21, 1e-15);
        assert_close(j.hessian_entry(0, 1), 0.21, 1e-15);
        assert_close(j.hessian_entry(1, 1), -0.21, 1e-15);
    }

    #[test]
    fn quotient_and_builtins() {
        // f = ln(x)/y at (2,4): f_x = 1/(xy), f_y = -ln x / y^2,
        // f_xx = -1/(x^2 y), f_xy = -1/(x y^2), f_yy = 2 ln x / y^3
        let j = jet_eval(&expr("ln(x1)/x2"), &[2.0, 4.0]).unwrap();
        let l = 2f64.ln();
        assert_close(j.gradient()[0], 1.0 / 8.0, 1e-15);
        assert_close(j.gradient()[1], -l / 16.0, 1e-15);
        assert_close(j.hessian_entry(0, 0), -1.0 / 16.0, 1e-15);
        assert_close(j.hessian_entry(0, 1), -1.0 / 32.0, 1e-15);
        assert_close(j.hessian_entry(1, 1), 2.0 * l / 64.0, 1e-15);

        // sqrt(x y) at (1,1)
        let j = jet_eval(&expr("sqrt(x1*x2)"), &[1.0, 1.0]).unwrap();
        assert_close(j.hessian_entry(0, 0), -0.25, 1e-15);
        assert_close(j.hessian_entry(0, 1), 0.25, 1e-15);

        // variable exponent x^y at (2,3): f_y = 8 ln2, f_xy = x^{y-1}(1 + y ln x)
        let j = jet_eval(&expr("x1^x2"), &[2.0, 3.0]).unwrap();
        assert_close(j.gradient()[1], 8.0 * l, 1e-13);
        assert_close(j.hessian_entry(0, 1), 4.0 * (1.0 + 3.0 * l), 1e-13);
    }

    #[test]
    fn integer_powers_of_negative_bases() {
        let j = jet_eval(&expr("x1^3"), &[-2.0, 0.0]).unwrap();
        assert_eq!(j.val(), -8.0);
        assert_eq!(j.gradient()[0], 12.0);
        assert_eq!(j.hessian_entry(0, 0), -12.0);
        let j = jet_eval(&expr("x1^1"), &[0.0, 0.0]).unwrap();
        assert_eq!(j.hessian_entry(0, 0), 0.0);
    }

    #[test]
    fn sqrt_at_zero_is_singular() {
        assert!(matches!(
            jet_eval(&expr("sqrt(x1)"), &[0.0, 1.0]),
            Err(EvalError::DerivativeSingularity { .. })
        ));
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let j = jet_eval(&Expr::constant(4.5), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(j.val(), 4.5);
        assert!(j.gradient().iter().all(|&g| g == 0.0));
        assert_eq!(j.hessian().max_abs(), 0.0);
    }

    #[test]
    fn fd_oracle_examples() {
        let h = fd_hessian(&expr("x1*x2"), &[2.0, 3.0], 1e-4).unwrap();
        for (i, row) in h.rows().iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_close(v, if i == j { 0.0 } else { 1.0 }, 1e-6);
            }
        }
        let h = fd_hessian(&expr("x1^2 + x2^2"), &[1.0, 1.0], 1e-4).unwrap();
        for (i, row) in h.rows().iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_close(v, if i == j { 2.0 } else { 0.0 }, 1e-5);
            }
        }
    }

    #[test]
    fn f32_jets() {
        let j = jet_eval(&expr("x1*x2"), &[2.0f32, 3.0]).unwrap();
        assert_eq!(j.hessian_entry(0, 1), 1.0f32);
    }

    #[test]
    fn packed_layout() {
        let n = 4;
        let mut seen = vec![false; packed_len(n)];
        for i in 0..n {
            for j in i..n {
                let k = packed_index(n, i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(k, packed_index(n, j, i));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }
}
