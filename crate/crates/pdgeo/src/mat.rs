//! Small dense square matrices in row-major storage.
//!
//! Everything in this crate runs at n <= 8, so the implementations favor
//! determinism and clarity over asymptotics.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;
use crate::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SqMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SqMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SqMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch(row.len(), n));
            }
            data.extend_from_slice(row);
        }
        Ok(SqMatrix { n, data })
    }

    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(data.len(), n * n));
        }
        Ok(SqMatrix { n, data })
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = diag[i];
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        debug_assert_eq!(n, other.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `self * diag(d) * self^T`; the result is symmetric up to rounding.
    pub fn congruence_diag(&self, d: &[T]) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc = acc + self[(i, k)] * d[k] * self[(j, k)];
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
        out
    }

    /// `self^T * m * self`, symmetrized. `m` must be symmetric.
    pub fn rotate_sym_into(&self, m: &Self) -> Self {
        let n = self.n;
        let tmp = self.transpose().mul(m);
        let full = tmp.mul(self);
        let mut out = Self::zeros(n);
        let half = T::of(0.5);
        for i in 0..n {
            for j in i..n {
                let v = (full[(i, j)] + full[(j, i)]) * half;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|v| *v * *v)
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn scale_col(&mut self, j: usize, s: T) {
        for i in 0..self.n {
            self[(i, j)] = self[(i, j)] * s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> T {
        let n = self.n;
        let mut a = self.clone();
        let mut det = T::one();
        for k in 0..n {
            let mut piv = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                if a[(i, k)].abs() > best {
                    best = a[(i, k)].abs();
                    piv = i;
                }
            }
            if best == T::zero() {
                return T::zero();
            }
            if piv != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(piv, j)];
                    a[(piv, j)] = t;
                }
                det = -det;
            }
            det = det * a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    a[(i, j)] = a[(i, j)] - f * a[(k, j)];
                }
            }
        }
        det
    }

    /// Max deviation of `self^T self` from the identity.
    pub fn orthogonality_defect(&self) -> T {
        let gram = self.transpose().mul(self);
        gram.max_abs_diff(&Self::identity(self.n))
    }

    /// Singular values by one-sided Jacobi (column orthogonalization).
    ///
    /// High relative accuracy even for strongly graded matrices of the form
    /// `D1 B D2` with extreme diagonal scalings, which two-sided methods on
    /// the assembled product would destroy.
    pub fn singular_values(&self) -> Result<Vec<T>> {
        let n = self.n;
        let mut g = self.clone();
        let eps = T::epsilon();
        let mut rotated = true;
        let mut sweeps = 0usize;
        while rotated {
            if sweeps > 60 {
                return Err(Error::EigDidNotConverge {
                    sweeps,
                    off: f64::NAN,
                });
            }
            rotated = false;
            for i in 0..n - 1 {
                for j in i + 1..n {
                    let mut aii = T::zero();
                    let mut ajj = T::zero();
                    let mut aij = T::zero();
                    for k in 0..n {
                        aii = aii + g[(k, i)] * g[(k, i)];
                        ajj = ajj + g[(k, j)] * g[(k, j)];
                        aij = aij + g[(k, i)] * g[(k, j)];
                    }
                    if aij.abs() <= eps * (aii * ajj).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let theta = (ajj - aii) / (T::of(2.0) * aij);
                    let t = {
                        let s = if theta >= T::zero() { T::one() } else { -T::one() };
                        s / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let gki = g[(k, i)];
                        let gkj = g[(k, j)];
                        g[(k, i)] = c * gki - s * gkj;
                        g[(k, j)] = s * gki + c * gkj;
                    }
                }
            }
            sweeps += 1;
        }
        let mut sv: Vec<T> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| g[(k, j)] * g[(k, j)])
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt()
            })
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Ok(sv)
    }

    /// Thin QR via modified Gram-Schmidt with the R diagonal forced positive.
    ///
    /// Fails when the columns are numerically dependent.
    pub fn qr_positive(&self) -> Result<(SqMatrix<T>, SqMatrix<T>)> {
        let n = self.n;
        let mut q = self.clone();
        let mut r = SqMatrix::zeros(n);
        for j in 0..n {
            for i in 0..j {
                let mut dot = T::zero();
                for k in 0..n {
                    dot = dot + q[(k, i)] * q[(k, j)];
                }
                r[(i, j)] = dot;
                for k in 0..n {
                    q[(k, j)] = q[(k, j)] - dot * q[(k, i)];
                }
            }
            let mut norm = T::zero();
            for k in 0..n {
                norm = norm + q[(k, j)] * q[(k, j)];
            }
            let norm = norm.sqrt();
            if norm <= T::epsilon() * T::of(64.0) {
                return Err(Error::Numerical("rank-deficient matrix in QR".into()));
            }
            r[(j, j)] = norm;
            for k in 0..n {
                q[(k, j)] = q[(k, j)] / norm;
            }
        }
        Ok((q, r))
    }
}

impl<T: Real> Index<(usize, usize)> for SqMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for SqMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}
