//! Symmetric matrices, positive-definite points, and the affine-invariant
//! Riemannian structure of PD(n).
//!
//! Conventions used throughout the crate:
//! * symmetric matrices are stored as the row-major upper triangle;
//! * spectral data is sorted by descending eigenvalue with a rotation of
//!   determinant +1;
//! * geodesics are unit speed, `d(c(0), c(t)) = |t|`.

use crate::mat::SqMatrix;
use crate::scalar::Real;
use crate::{Error, Result};

const MAX_JACOBI_SWEEPS: usize = 64;

/// Symmetric n x n matrix stored as its upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    upper: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    /// Build from the row-major upper triangle, `n*(n+1)/2` values.
    pub fn new(n: usize, upper: Vec<T>) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadDimension(n));
        }
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::DimensionMismatch(upper.len(), n * (n + 1) / 2));
        }
        if !upper.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("non-finite entry in symmetric matrix".into()));
        }
        Ok(SymMatrix { n, upper })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![T::zero(); n * (n + 1) / 2])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(f(i, j));
            }
        }
        Self::new(n, upper)
    }

    pub fn from_diag(diag: &[T]) -> Result<Self> {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { T::zero() })
    }

    /// Symmetrize a full square matrix as `(m + m^T)/2`; also reports the
    /// largest absolute asymmetry found.
    pub fn from_square_symmetrized(m: &SqMatrix<T>) -> Result<(Self, T)> {
        let n = m.dim();
        let mut asym = T::zero();
        let half = T::of(0.5);
        let sym = Self::from_fn(n, |i, j| {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d > asym {
                asym = d;
            }
            (m[(i, j)] + m[(j, i)]) * half
        })?;
        Ok((sym, asym))
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        a * self.n - a * (a + 1) / 2 + b
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.upper[self.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j);
        self.upper[k] = v;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn upper_triangle(&self) -> &[T] {
        &self.upper
    }

    pub fn to_square(&self) -> SqMatrix<T> {
        let n = self.n;
        let mut m = SqMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().map(|v| *v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(SymMatrix {
            n: self.n,
            upper: self
                .upper
                .iter()
                .zip(other.upper.iter())
                .map(|(a, b)| *a + *b)
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                let sq = v * v;
                acc = acc + if i == j { sq } else { sq + sq };
            }
        }
        acc.sqrt()
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.upper
            .iter()
            .zip(other.upper.iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Spectral decomposition of a symmetric matrix: `rotation * diag(eigenvalues)
/// * rotation^T`, eigenvalues descending, `det(rotation) = +1`.
#[derive(Debug, Clone)]
pub struct SymEig<T> {
    pub rotation: SqMatrix<T>,
    pub eigenvalues: Vec<T>,
}

/// Eigendecomposition by cyclic Jacobi with a fixed row-major sweep order,
/// so results are reproducible bit for bit.
pub fn sym_eig<T: Real>(s: &SymMatrix<T>) -> Result<SymEig<T>> {
    let n = s.dim();
    let mut a = s.to_square();
    let mut q = SqMatrix::identity(n);
    let frob = a.frobenius_norm();
    let stop = frob * T::epsilon();

    let mut converged = false;
    let mut final_off = T::zero();
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + a[(i, j)] * a[(i, j)];
            }
        }
        final_off = off.sqrt();
        if final_off <= stop || frob == T::zero() {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apr = a[(p, r)];
                if apr == T::zero() {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (T::of(2.0) * apr);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;

                // Rotate rows/columns p and r of `a`.
                let app = a[(p, p)];
                let arr = a[(r, r)];
                a[(p, p)] = app - t * apr;
                a[(r, r)] = arr + t * apr;
                a[(p, r)] = T::zero();
                a[(r, p)] = T::zero();
                for k in 0..n {
                    if k != p && k != r {
                        let akp = a[(k, p)];
                        let akr = a[(k, r)];
                        let new_kp = c * akp - sn * akr;
                        let new_kr = sn * akp + c * akr;
                        a[(k, p)] = new_kp;
                        a[(p, k)] = new_kp;
                        a[(k, r)] = new_kr;
                        a[(r, k)] = new_kr;
                    }
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - sn * qkr;
                    q[(k, r)] = sn * qkp + c * qkr;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigDidNotConverge {
            sweeps: MAX_JACOBI_SWEEPS,
            off: final_off.as_f64(),
        });
    }

    // Sort descending; the Jacobi accumulation has det +1, so a sign flip is
    // needed exactly when the sort permutation is odd.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<T> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut rotation = SqMatrix::zeros(n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            rotation[(i, new_j)] = q[(i, old_j)];
        }
    }
    if permutation_is_odd(&order) {
        rotation.scale_col(n - 1, -T::one());
    }
    Ok(SymEig {
        rotation,
        eigenvalues,
    })
}

fn permutation_is_odd(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut odd = false;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

/// A point of PD(n): symmetric positive-definite matrix with its spectral
/// decomposition cached.
#[derive(Debug, Clone)]
pub struct SpdPoint<T> {
    mat: SymMatrix<T>,
    eig: SymEig<T>,
}

impl<T: Real> SpdPoint<T> {
    /// Validated constructor: rejects matrices whose smallest eigenvalue is
    /// not safely positive, `min > n * eps * max`.
    pub fn new(mat: SymMatrix<T>) -> Result<Self> {
        let eig = sym_eig(&mat)?;
        let max = eig.eigenvalues[0];
        let min = eig.eigenvalues[mat.dim() - 1];
        let floor = T::of(mat.dim() as f64) * T::epsilon() * max;
        if !(max > T::zero() && min > floor) {
            return Err(Error::NotPositiveDefinite {
                min_eig: min.as_f64(),
                max_eig: max.as_f64(),
            });
        }
        Ok(SpdPoint { mat, eig })
    }

    /// Construct from spectral data, checking only strict positivity and
    /// finiteness. Used where positivity holds by construction but the
    /// condition number may exceed what [`SpdPoint::new`] tolerates
    /// (e.g. far points on a geodesic ray).
    pub fn from_eigen(rotation: SqMatrix<T>, eigenvalues: Vec<T>) -> Result<Self> {
        let n = rotation.dim();
        if eigenvalues.len() != n {
            return Err(Error::DimensionMismatch(eigenvalues.len(), n));
        }
        if !eigenvalues.iter().all(|l| *l > T::zero() && l.is_finite()) {
            let min = eigenvalues.iter().cloned().fold(T::infinity(), T::min);
            let max = eigenvalues.iter().cloned().fold(-T::infinity(), T::max);
            return Err(Error::NotPositiveDefinite {
                min_eig: min.as_f64(),
                max_eig: max.as_f64(),
            });
        }
        let full = rotation.congruence_diag(&eigenvalues);
        if !full.is_finite() {
            return Err(Error::Overflow("matrix assembly from eigenvalues".into()));
        }
        let (mat, _) = SymMatrix::from_square_symmetrized(&full)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eigenvalues[j]
                .partial_cmp(&eigenvalues[i])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let sorted: Vec<T> = order.iter().map(|&i| eigenvalues[i]).collect();
        let mut rot = SqMatrix::zeros(n);
        for (new_j, &old_j) in order.iter().enumerate() {
            for i in 0..n {
                rot[(i, new_j)] = rotation[(i, old_j)];
            }
        }
        if permutation_is_odd(&order) {
            rot.scale_col(n - 1, -T::one());
        }
        Ok(SpdPoint {
            mat,
            eig: SymEig {
                rotation: rot,
                eigenvalues: sorted,
            },
        })
    }

    /// Internal constructor for products that are positive definite by
    /// construction; checks positivity of the computed spectrum only.
    pub(crate) fn from_symmetric_lenient(mat: SymMatrix<T>) -> Result<Self> {
        let eig = sym_eig(&mat)?;
        let min = eig.eigenvalues[mat.dim() - 1];
        if !(min > T::zero()) {
            return Err(Error::Numerical(format!(
                "positivity lost in an exact-arithmetic-SPD product (min eigenvalue {:e})",
                min.as_f64()
            )));
        }
        Ok(SpdPoint { mat, eig })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(SymMatrix::from_fn(n, |i, j| {
            if i == j {
                T::one()
            } else {
                T::zero()
            }
        })?)
    }

    pub fn from_diag(diag: &[T]) -> Result<Self> {
        Self::new(SymMatrix::from_diag(diag)?)
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &SymMatrix<T> {
        &self.mat
    }

    pub fn eigen(&self) -> &SymEig<T> {
        &self.eig
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.mat.get(i, j)
    }

    pub fn det(&self) -> T {
        self.eig
            .eigenvalues
            .iter()
            .fold(T::one(), |acc, l| acc * *l)
    }

    /// log det, stable for spread spectra.
    pub fn log_det(&self) -> T {
        self.eig.eigenvalues.iter().map(|l| l.ln()).sum()
    }

    /// `p^e` as a full symmetric square matrix, via the cached spectrum.
    pub fn power(&self, e: T) -> SqMatrix<T> {
        let powered: Vec<T> = self.eig.eigenvalues.iter().map(|l| l.powf(e)).collect();
        self.eig.rotation.congruence_diag(&powered)
    }

    /// Riemannian log at the identity: `Q diag(ln l) Q^T`.
    pub fn log(&self) -> SymMatrix<T> {
        let logged: Vec<T> = self.eig.eigenvalues.iter().map(|l| l.ln()).collect();
        let full = self.eig.rotation.congruence_diag(&logged);
        SymMatrix::from_square_symmetrized(&full)
            .expect("log of SPD point is finite")
            .0
    }

    /// Distance to the identity, `(sum ln^2 l_i)^(1/2)`.
    pub fn dist_to_identity(&self) -> T {
        self.eig
            .eigenvalues
            .iter()
            .map(|l| {
                let x = l.ln();
                x * x
            })
            .sum::<T>()
            .sqrt()
    }

    /// Unit-speed geodesic from `self` to `other` together with its length.
    pub fn geodesic_to(&self, other: &SpdPoint<T>) -> Result<(Geodesic<T>, T)> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let inner = translate_to_identity(self, other)?;
        let log_inner = inner.log();
        let len = log_inner.frobenius_norm();
        // A = p^{1/2} log(p^{-1/2} q p^{-1/2}) p^{1/2}
        let half = self.power(T::of(0.5));
        let full = half.mul(&log_inner.to_square()).mul(&half);
        let (tangent, _) = SymMatrix::from_square_symmetrized(&full)?;
        let geo = Geodesic::new(self.clone(), tangent)?;
        Ok((geo, len))
    }
}

/// Riemannian exponential at the identity.
pub fn spd_exp<T: Real>(s: &SymMatrix<T>) -> Result<SpdPoint<T>> {
    let eig = sym_eig(s)?;
    let exped: Vec<T> = eig.eigenvalues.iter().map(|l| l.exp()).collect();
    if !exped.iter().all(|v| v.is_finite() && *v > T::zero()) {
        return Err(Error::Overflow("matrix exponential".into()));
    }
    SpdPoint::from_eigen(eig.rotation, exped)
}

/// Riemannian log at the identity (inverse of [`spd_exp`]).
pub fn spd_log<T: Real>(p: &SpdPoint<T>) -> SymMatrix<T> {
    p.log()
}

/// Affine-invariant distance `||log(p^{-1/2} q p^{-1/2})||_F`.
///
/// Evaluated through the singular values of `D_p^{-1} R_p^T R_q D_q` with
/// `p = R_p D_p^2 R_p^T`, `q = R_q D_q^2 R_q^T`: the eigenvalues of the
/// conjugated product are the squared singular values of that graded factor,
/// which keeps full relative accuracy even when `p` or `q` is extremely
/// ill conditioned (far points on geodesic rays).
pub fn metric_dist<T: Real>(p: &SpdPoint<T>, q: &SpdPoint<T>) -> Result<T> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    let n = p.dim();
    let w = p.eig.rotation.transpose().mul(&q.eig.rotation);
    let mut g = SqMatrix::zeros(n);
    for i in 0..n {
        let pi = p.eig.eigenvalues[i].sqrt();
        for j in 0..n {
            let qj = q.eig.eigenvalues[j].sqrt();
            g[(i, j)] = w[(i, j)] / pi * qj;
        }
    }
    if !g.is_finite() {
        return Err(Error::Overflow("distance evaluation".into()));
    }
    let sv = g.singular_values()?;
    let mut acc = T::zero();
    for s in sv {
        if !(s > T::zero()) {
            return Err(Error::Numerical("singular value collapsed to zero".into()));
        }
        let l = T::of(2.0) * s.ln();
        acc = acc + l * l;
    }
    Ok(acc.sqrt())
}

/// The isometry that carries `q` to the identity, applied to `p`:
/// `q^{-1/2} p q^{-1/2}`.
pub fn translate_to_identity<T: Real>(q: &SpdPoint<T>, p: &SpdPoint<T>) -> Result<SpdPoint<T>> {
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch(q.dim(), p.dim()));
    }
    let neg_half = q.power(-T::of(0.5));
    let full = neg_half.mul(&p.matrix().to_square()).mul(&neg_half);
    if !full.is_finite() {
        return Err(Error::Overflow("translation to the identity".into()));
    }
    let (sym, _) = SymMatrix::from_square_symmetrized(&full)?;
    SpdPoint::from_symmetric_lenient(sym)
}

/// Distance from `p` to its nearest scalar matrix `det(p)^{1/n} I`.
pub fn geodesic_anisotropy<T: Real>(p: &SpdPoint<T>) -> T {
    let n = p.dim();
    // ln of the scalar factor; exp(mean of ln eigenvalues) avoids det overflow.
    let mean_log: T = p.eig.eigenvalues.iter().map(|l| l.ln()).sum::<T>() / T::of(n as f64);
    p.eig
        .eigenvalues
        .iter()
        .map(|l| {
            let d = l.ln() - mean_log;
            d * d
        })
        .sum::<T>()
        .sqrt()
}

/// Unit-speed geodesic: base point plus a tangent normalized so that
/// `||A||_base = 1`.
#[derive(Debug, Clone)]
pub struct Geodesic<T> {
    base: SpdPoint<T>,
    tangent: SymMatrix<T>,
    /// `base^{-1/2} A base^{-1/2}`, cached for evaluation.
    conj_tangent: SymMatrix<T>,
}

impl<T: Real> Geodesic<T> {
    /// Normalizes the tangent at construction; a zero tangent is rejected.
    pub fn new(base: SpdPoint<T>, tangent: SymMatrix<T>) -> Result<Self> {
        if base.dim() != tangent.dim() {
            return Err(Error::DimensionMismatch(base.dim(), tangent.dim()));
        }
        let neg_half = base.power(-T::of(0.5));
        let conj_full = neg_half.mul(&tangent.to_square()).mul(&neg_half);
        let (conj, _) = SymMatrix::from_square_symmetrized(&conj_full)?;
        let norm = conj.frobenius_norm();
        if norm <= T::epsilon().sqrt() * T::of(1e-3) || !norm.is_finite() {
            return Err(Error::InvalidDirection(
                "geodesic tangent is zero or non-finite".into(),
            ));
        }
        Ok(Geodesic {
            base,
            tangent: tangent.scale(T::one() / norm),
            conj_tangent: conj.scale(T::one() / norm),
        })
    }

    pub fn base(&self) -> &SpdPoint<T> {
        &self.base
    }

    pub fn tangent(&self) -> &SymMatrix<T> {
        &self.tangent
    }

    /// `c(t) = base^{1/2} exp(t B) base^{1/2}` with `B` the conjugated tangent.
    pub fn point(&self, t: T) -> Result<SpdPoint<T>> {
        let eig = sym_eig(&self.conj_tangent)?;
        let exped: Vec<T> = eig.eigenvalues.iter().map(|l| (*l * t).exp()).collect();
        if !exped.iter().all(|v| v.is_finite() && *v > T::zero()) {
            return Err(Error::Overflow("geodesic evaluation".into()));
        }
        let half = self.base.power(T::of(0.5));
        let carrier = half.mul(&eig.rotation);
        let full = carrier.congruence_diag(&exped);
        if !full.is_finite() {
            return Err(Error::Overflow("geodesic evaluation".into()));
        }
        let (sym, _) = SymMatrix::from_square_symmetrized(&full)?;
        SpdPoint::from_symmetric_lenient(sym)
    }
}

/// Point at parameter `t in [0, 1]` of the geodesic segment from `p` to `q`:
/// `p^{1/2} (p^{-1/2} q p^{-1/2})^t p^{1/2}`.
pub fn interpolate<T: Real>(p: &SpdPoint<T>, q: &SpdPoint<T>, t: T) -> Result<SpdPoint<T>> {
    let inner = translate_to_identity(p, q)?;
    let powered: Vec<T> = inner
        .eigen()
        .eigenvalues
        .iter()
        .map(|l| l.powf(t))
        .collect();
    let half = p.power(T::of(0.5));
    let carrier = half.mul(&inner.eigen().rotation);
    let full = carrier.congruence_diag(&powered);
    let (sym, _) = SymMatrix::from_square_symmetrized(&full)?;
    SpdPoint::from_symmetric_lenient(sym)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd2(a: f64, b: f64, c: f64) -> SpdPoint<f64> {
        SpdPoint::new(SymMatrix::new(2, vec![a, b, c]).unwrap()).unwrap()
    }

    #[test]
    fn eig_identity() {
        let s = SymMatrix::<f64>::from_diag(&[1.0, 1.0]).unwrap();
        let e = sym_eig(&s).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0]);
        assert!(e.rotation.max_abs_diff(&SqMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn eig_already_diagonal_sorted() {
        let s = SymMatrix::<f64>::from_diag(&[3.0, 1.0]).unwrap();
        let e = sym_eig(&s).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
    }

    #[test]
    fn eig_hand_2x2() {
        // [[2,1],[1,1]] has eigenvalues (3 +- sqrt(5))/2.
        let s = SymMatrix::new(2, vec![2.0, 1.0, 1.0]).unwrap();
        let e = sym_eig(&s).unwrap();
        let sqrt5 = 5.0f64.sqrt();
        assert!((e.eigenvalues[0] - (3.0 + sqrt5) / 2.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - (3.0 - sqrt5) / 2.0).abs() < 1e-12);
        assert!((e.rotation.det() - 1.0).abs() < 1e-12);
        // Reconstruction within 1e-10 * ||S||.
        let rec = e.rotation.congruence_diag(&e.eigenvalues);
        assert!(rec.max_abs_diff(&s.to_square()) < 1e-10 * s.frobenius_norm());
    }

    #[test]
    fn eig_reconstructs_random_5x5() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = SymMatrix::<f64>::from_fn(5, |_, _| rng.gen_range(-2.0..2.0)).unwrap();
            let e = sym_eig(&s).unwrap();
            let rec = e.rotation.congruence_diag(&e.eigenvalues);
            assert!(rec.max_abs_diff(&s.to_square()) < 1e-10 * s.frobenius_norm().max(1.0));
            assert!(e.rotation.orthogonality_defect() < 1e-12);
            assert!((e.rotation.det() - 1.0).abs() < 1e-12);
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn spd_validation_rejects_indefinite() {
        let s = SymMatrix::new(2, vec![1.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            SpdPoint::new(s),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn log_exp_round_trip() {
        let e = std::f64::consts::E;
        let p = SpdPoint::from_diag(&[e, 1.0 / e]).unwrap();
        let l = spd_log(&p);
        assert!((l.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((l.get(1, 1) + 1.0).abs() < 1e-12);
        assert!(l.get(0, 1).abs() < 1e-12);

        let p2 = spd_exp(&l).unwrap();
        assert!(p2.matrix().max_abs_diff(p.matrix()) < 1e-12);

        let s = SymMatrix::new(2, vec![0.3, -0.2, 0.9]).unwrap();
        let back = spd_log(&spd_exp(&s).unwrap());
        assert!(back.max_abs_diff(&s) < 1e-12);
    }

    #[test]
    fn metric_dist_hand_values() {
        let i = SpdPoint::identity(2).unwrap();
        assert!(metric_dist(&i, &i).unwrap() < 1e-15);

        let e2 = (2.0f64).exp();
        let p = SpdPoint::from_diag(&[e2, 1.0]).unwrap();
        assert!((metric_dist(&p, &i).unwrap() - 2.0).abs() < 1e-12);

        let q = spd2(2.0, 1.0, 1.0);
        let sqrt5 = 5.0f64.sqrt();
        let l1 = ((3.0 + sqrt5) / 2.0f64).ln();
        let l2 = ((3.0 - sqrt5) / 2.0f64).ln();
        let expected = (l1 * l1 + l2 * l2).sqrt();
        assert!((metric_dist(&q, &i).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn geodesic_hand_value_and_unit_speed() {
        let i = SpdPoint::identity(2).unwrap();
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        let a = SymMatrix::from_diag(&[inv_sqrt2, -inv_sqrt2]).unwrap();
        let c = Geodesic::new(i.clone(), a).unwrap();
        let t = 2.0f64.sqrt();
        let p = c.point(t).unwrap();
        let e = std::f64::consts::E;
        assert!((p.get(0, 0) - e).abs() < 1e-12);
        assert!((p.get(1, 1) - 1.0 / e).abs() < 1e-12);

        assert!(c.point(0.0).unwrap().matrix().max_abs_diff(i.matrix()) < 1e-14);
        let d = metric_dist(&c.point(0.0).unwrap(), &p).unwrap();
        assert!((d - t).abs() < 1e-8);
    }

    #[test]
    fn translation_and_isometry() {
        let q = spd2(2.0, 1.0, 1.5);
        let hat = translate_to_identity(&q, &q).unwrap();
        assert!(hat.matrix().max_abs_diff(SpdPoint::identity(2).unwrap().matrix()) < 1e-12);

        let p1 = spd2(1.0, 0.3, 2.0);
        let p2 = spd2(3.0, -0.4, 1.0);
        let d = metric_dist(&p1, &p2).unwrap();
        let h1 = translate_to_identity(&q, &p1).unwrap();
        let h2 = translate_to_identity(&q, &p2).unwrap();
        let dh = metric_dist(&h1, &h2).unwrap();
        assert!((d - dh).abs() < 1e-10);
    }

    #[test]
    fn anisotropy_hand_values() {
        let i = SpdPoint::<f64>::identity(2).unwrap();
        assert!(geodesic_anisotropy(&i) < 1e-15);
        let e = std::f64::consts::E;
        let p = SpdPoint::from_diag(&[e, 1.0 / e]).unwrap();
        assert!((geodesic_anisotropy(&p) - 2.0f64.sqrt()).abs() < 1e-12);
        // Scale invariance.
        let p3 = spd2(1.7, 0.4, 0.9);
        let scaled = spd2(1.7 * 3.0, 0.4 * 3.0, 0.9 * 3.0);
        assert!((geodesic_anisotropy(&p3) - geodesic_anisotropy(&scaled)).abs() < 1e-10);
    }

    #[test]
    fn midpoint_splits_distance() {
        let p = spd2(1.0, 0.2, 1.5);
        let q = spd2(2.5, -0.3, 0.8);
        let m = interpolate(&p, &q, 0.5).unwrap();
        let d = metric_dist(&p, &q).unwrap();
        assert!((metric_dist(&p, &m).unwrap() - d / 2.0).abs() < 1e-10);
        assert!((metric_dist(&m, &q).unwrap() - d / 2.0).abs() < 1e-10);
    }

    #[test]
    fn geodesic_overflow_reported() {
        let i = SpdPoint::identity(2).unwrap();
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        let a = SymMatrix::from_diag(&[inv_sqrt2, -inv_sqrt2]).unwrap();
        let c = Geodesic::new(i, a).unwrap();
        assert!(matches!(c.point(2000.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn far_ray_points_construct_via_from_eigen() {
        // Condition numbers far beyond the strict SPD gate are fine here.
        let rot = SqMatrix::<f64>::identity(2);
        let p = SpdPoint::from_eigen(rot, vec![(20.0f64).exp(), (-20.0f64).exp()]).unwrap();
        assert!((p.dist_to_identity() - 800.0f64.sqrt()).abs() < 1e-9);
    }
}
