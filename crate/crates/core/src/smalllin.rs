//! Small dense kernels for symmetric matrices: determinant, cofactors and the
//! adjugate quadratic form `vᵀ adj(m) v`.
//!
//! Orders up to 3 use explicit cofactor expansion. Larger orders use LU with
//! partial pivoting. Cofactors are always formed from deleted-row/column
//! minors, so they stay correct when the matrix is singular.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("operation needs order >= {min}, matrix has order {order}")]
    Order { order: usize, min: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

/// Symmetric matrix stored densely (row-major). Symmetry is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    /// Build from the upper triangle: `f(i, j)` is called for `i <= j` only.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    /// Build from rows, rejecting asymmetric or non-finite input.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
            data.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(LinalgError::Asymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_upper(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>, LinalgError> {
        self.check_dim(v.len())?;
        Ok(self
            .data
            .chunks(self.n)
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    /// `s·m + c·v vᵀ`.
    pub fn scaled_plus_outer(&self, s: T, c: T, v: &[T]) -> Result<Self, LinalgError> {
        self.check_dim(v.len())?;
        Ok(Self::from_upper(self.n, |i, j| {
            s * self.get(i, j) + c * v[i] * v[j]
        }))
    }

    fn check_dim(&self, len: usize) -> Result<(), LinalgError> {
        if len != self.n {
            return Err(LinalgError::Dimension {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }

    pub fn determinant(&self) -> T {
        det_square(&self.data, self.n)
    }

    /// Matrix of signed minors `H_ij = (-1)^{i+j} M_ij`.
    pub fn cofactor_matrix(&self) -> Result<Self, LinalgError> {
        let n = self.n;
        if n < 2 {
            return Err(LinalgError::Order { order: n, min: 2 });
        }
        let mut minor = vec![T::zero(); (n - 1) * (n - 1)];
        Ok(Self::from_upper(n, |i, j| {
            let mut k = 0;
            for r in (0..n).filter(|&r| r != i) {
                for c in (0..n).filter(|&c| c != j) {
                    minor[k] = self.data[r * n + c];
                    k += 1;
                }
            }
            let m = det_square(&minor, n - 1);
            if (i + j) % 2 == 0 {
                m
            } else {
                -m
            }
        }))
    }

    /// `Σ_ij v_i v_j H_ij` with `H` the cofactor matrix.
    pub fn adjugate_quadratic_form(&self, v: &[T]) -> Result<T, LinalgError> {
        self.check_dim(v.len())?;
        let h = self.cofactor_matrix()?;
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += v[i] * v[j] * h.get(i, j);
            }
        }
        Ok(acc)
    }
}

/// Determinant of a general row-major `n × n` matrix.
pub fn det_square<T: Scalar>(a: &[T], n: usize) -> T {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => T::one(),
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => det_lu(a, n),
    }
}

fn det_lu<T: Scalar>(a: &[T], n: usize) -> T {
    let mut m = a.to_vec();
    let mut det = T::one();
    for k in 0..n {
        let (p, pivot) =
            (k..n)
                .map(|r| (r, m[r * n + k].abs()))
                .fold(
                    (k, -T::one()),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot.is_zero() {
            return T::zero();
        }
        if p != k {
            for c in 0..n {
                m.swap(k * n + c, p * n + c);
            }
            det = -det;
        }
        let d = m[k * n + k];
        det *= d;
        for r in k + 1..n {
            let f = m[r * n + k] / d;
            if f.is_zero() {
                continue;
            }
            for c in k + 1..n {
                let u = m[k * n + c];
                m[r * n + c] -= f * u;
            }
        }
    }
    det
}

/// Relative difference with denominator `max(|a|, |b|, scale, 1e-300)`.
pub fn relative_difference(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(scale).max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SymMatrix<f64> {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn determinants() {
        assert_eq!(m(&[&[0.0, 1.0], &[1.0, 0.0]]).determinant(), -1.0);
        assert_eq!(m(&[&[2.0, 0.0], &[0.0, 2.0]]).determinant(), 4.0);
        // Hessian of x^2 y at (1,1)
        assert_eq!(m(&[&[2.0, 2.0], &[2.0, 0.0]]).determinant(), -4.0);
        assert_eq!(SymMatrix::<f64>::identity(3).determinant(), 1.0);
        assert_eq!(SymMatrix::<f64>::zeros(0).determinant(), 1.0);
    }

    #[test]
    fn lu_matches_expansion_order_four() {
        // tridiagonal (2,-1): det = n + 1
        let t = SymMatrix::<f64>::from_upper(4, |i, j| match j - i {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        assert!((t.determinant() - 5.0).abs() < 1e-12);
        let t5 = SymMatrix::<f64>::from_upper(5, |i, j| match j - i {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        assert!((t5.determinant() - 6.0).abs() < 1e-12);
        // pivoting: zero leading entry
        let p = m(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 3.0],
        ]);
        assert_eq!(p.determinant(), -3.0);
        let singular = SymMatrix::from_upper(4, |_, _| 1.0);
        assert_eq!(singular.determinant(), 0.0);
    }

    #[test]
    fn cofactors() {
        let d = m(&[&[2.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(d.cofactor_matrix().unwrap(), d);
        let a = m(&[&[1.0, 2.0], &[2.0, 5.0]]);
        assert_eq!(
            a.cofactor_matrix().unwrap(),
            m(&[&[5.0, -2.0], &[-2.0, 1.0]])
        );
        let i3 = SymMatrix::<f64>::identity(3);
        assert_eq!(i3.cofactor_matrix().unwrap(), i3);
        assert_eq!(
            SymMatrix::<f64>::identity(1).cofactor_matrix(),
            Err(LinalgError::Order { order: 1, min: 2 })
        );
    }

    #[test]
    fn adjugate_forms() {
        let a = m(&[&[2.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(a.adjugate_quadratic_form(&[2.0, 2.0]).unwrap(), 16.0);
        assert_eq!(a.adjugate_quadratic_form(&[0.0, 0.0]).unwrap(), 0.0);
        let s = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(
            s.cofactor_matrix().unwrap(),
            m(&[&[1.0, -1.0], &[-1.0, 1.0]])
        );
        assert_eq!(s.adjugate_quadratic_form(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(
            s.adjugate_quadratic_form(&[1.0]),
            Err(LinalgError::Dimension {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]),
            Err(LinalgError::Asymmetric { .. })
        ));
        assert!(matches!(
            SymMatrix::from_rows(&[vec![f64::NAN]]),
            Err(LinalgError::NonFinite { .. })
        ));
    }

    #[test]
    fn works_in_f32() {
        let a = SymMatrix::<f32>::from_upper(2, |i, j| if i == j { 3.0 } else { 1.0 });
        assert_eq!(a.determinant(), 8.0);
    }
}
