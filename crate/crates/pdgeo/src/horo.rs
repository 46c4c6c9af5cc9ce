//! Flats, horospherical projection, Busemann functions, horoballs, and
//! horoextents.
//!
//! A flat is the set of points sharing an eigenbasis `Q`; under the entrywise
//! log of eigenvalues it is isometric to Euclidean `R^n`. A horofunction here
//! is a normalized Busemann function `b(p) = lim d(p, c(t)) - t` of a
//! unit-speed geodesic ray `c(t) = exp(t Q diag(a) Q^T)` through the
//! identity, with `b(I) = 0`. It has the closed form
//!
//! ```text
//! b(p) = -<a, ln f>,   f = flat part of the unipotent-diagonal
//!                          factorization of Q^T p Q
//! ```
//!
//! where the factorization `p' = v f v^T` (v unit upper triangular, f
//! positive diagonal) is computed by recursively splitting off the Schur
//! complement of the trailing 1x1 block. The closed form requires the
//! direction `a` to be strictly decreasing; directions with repeated entries
//! are outside the supported class.

use crate::mat::SqMatrix;
use crate::scalar::Real;
use crate::spd::{sym_eig, Geodesic, SpdPoint, SymMatrix};
use crate::{Error, Result};

/// Minimum admissible gap between consecutive direction entries.
pub const DIRECTION_GAP: f64 = 1e-9;

/// Slack used by [`Horoball::contains`].
pub const HOROBALL_SLACK: f64 = 1e-12;

/// An n-flat of PD(n), identified by a rotation `Q` in SO(n).
#[derive(Debug, Clone)]
pub struct Flat<T> {
    rotation: SqMatrix<T>,
}

impl<T: Real> Flat<T> {
    /// Validates orthogonality and `det = +1`, both within 1e-10.
    pub fn new(rotation: SqMatrix<T>) -> Result<Self> {
        let tol = T::of(1e-10).max(T::epsilon() * T::of(64.0));
        let defect = rotation.orthogonality_defect();
        if defect > tol {
            return Err(Error::NotRotation(format!(
                "orthogonality defect {:e}",
                defect.as_f64()
            )));
        }
        let det = rotation.det();
        if (det - T::one()).abs() > tol {
            return Err(Error::NotRotation(format!("determinant {}", det.as_f64())));
        }
        Ok(Flat { rotation })
    }

    pub(crate) fn new_unchecked(rotation: SqMatrix<T>) -> Self {
        Flat { rotation }
    }

    pub fn identity(n: usize) -> Self {
        Flat {
            rotation: SqMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.rotation.dim()
    }

    pub fn rotation(&self) -> &SqMatrix<T> {
        &self.rotation
    }
}

/// Which end of the ray the Busemann limit follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `b(p) = lim_{t -> +inf} d(p, c(t)) - t`.
    Forward,
    /// `b(p) = lim_{t -> -inf} d(p, c(t)) + t`.
    Reverse,
}

impl Orientation {
    pub fn sign_str(self) -> &'static str {
        match self {
            Orientation::Forward => "+",
            Orientation::Reverse => "-",
        }
    }

    pub fn from_sign_str(s: &str) -> Result<Self> {
        match s {
            "+" => Ok(Orientation::Forward),
            "-" => Ok(Orientation::Reverse),
            other => Err(Error::InvalidParameter(format!(
                "orientation must be \"+\" or \"-\", got {other:?}"
            ))),
        }
    }
}

/// Normalized Busemann function, identified by a flat, a unit direction with
/// strictly decreasing entries, and an orientation.
///
/// The reverse orientation is evaluated through the reversed ray
/// `c(-t) = exp(-t A)`: its direction `-a` is re-sorted into canonical
/// decreasing form by conjugating with the order-reversing signed permutation
/// (adjusted to determinant +1), so every stored horofunction keeps the same
/// canonical frame discipline.
#[derive(Debug, Clone)]
pub struct Horofunction<T> {
    flat: Flat<T>,
    direction: Vec<T>,
    orientation: Orientation,
    // Canonical evaluation frame: for Forward this is (Q, a); for Reverse it
    // is (Q S, rev(-a)) with S the order-reversing signed permutation.
    eval_rotation: SqMatrix<T>,
    eval_direction: Vec<T>,
}

impl<T: Real> Horofunction<T> {
    pub fn new(flat: Flat<T>, direction: Vec<T>, orientation: Orientation) -> Result<Self> {
        let n = flat.dim();
        if direction.len() != n {
            return Err(Error::DimensionMismatch(direction.len(), n));
        }
        let norm: T = direction.iter().map(|a| *a * *a).sum::<T>().sqrt();
        let unit_tol = T::of(1e-12).max(T::epsilon() * T::of(16.0));
        if (norm - T::one()).abs() > unit_tol {
            return Err(Error::InvalidDirection(format!(
                "direction must be unit length (norm {}); normalize it first",
                norm.as_f64()
            )));
        }
        for w in direction.windows(2) {
            if !(w[0] - w[1] > T::of(DIRECTION_GAP)) {
                return Err(Error::InvalidDirection(
                    "direction entries must be strictly decreasing with gap > 1e-9".into(),
                ));
            }
        }
        let (eval_rotation, eval_direction) = match orientation {
            Orientation::Forward => (flat.rotation().clone(), direction.clone()),
            Orientation::Reverse => {
                let s = reversal_matrix(n);
                (flat.rotation().mul(&s), reversed_negated(&direction))
            }
        };
        Ok(Horofunction {
            flat,
            direction,
            orientation,
            eval_rotation,
            eval_direction,
        })
    }

    pub fn flat(&self) -> &Flat<T> {
        &self.flat
    }

    pub fn direction(&self) -> &[T] {
        &self.direction
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.flat.dim()
    }

    /// Frame in which this horofunction is the linear functional
    /// `y -> -<a_eval, y>` of the log flat coordinates.
    pub fn eval_frame(&self) -> (&SqMatrix<T>, &[T]) {
        (&self.eval_rotation, &self.eval_direction)
    }

    /// The horofunction of the opposite end of the same ray.
    pub fn reversed(&self) -> Horofunction<T> {
        let orientation = match self.orientation {
            Orientation::Forward => Orientation::Reverse,
            Orientation::Reverse => Orientation::Forward,
        };
        Horofunction::new(self.flat.clone(), self.direction.clone(), orientation)
            .expect("reversal preserves validity")
    }

    /// Tangent of the evaluated ray at the identity, `R diag(a) R^T`.
    pub fn ray_tangent(&self) -> SymMatrix<T> {
        let full = self.eval_rotation.congruence_diag(&self.eval_direction);
        SymMatrix::from_square_symmetrized(&full)
            .expect("tangent assembly is finite")
            .0
    }

    /// Closed-form Busemann value; `b(I) = 0` holds structurally.
    pub fn busemann(&self, p: &SpdPoint<T>) -> Result<T> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch(p.dim(), self.dim()));
        }
        self.busemann_square(&p.matrix().to_square())
    }

    pub(crate) fn busemann_square(&self, p_full: &SqMatrix<T>) -> Result<T> {
        let rotated = self.eval_rotation.rotate_sym_into(p_full);
        let f = flat_part(rotated)?;
        let mut acc = T::zero();
        for (a, fi) in self.eval_direction.iter().zip(f.iter()) {
            acc = acc - *a * fi.ln();
        }
        Ok(acc)
    }

    /// Busemann function of this horofunction after composing the flat with
    /// `rot` (flat rotation `Q * rot`), evaluated by rotating the point
    /// instead of rebuilding the flat.
    pub fn busemann_rotated(&self, rot: &SqMatrix<T>, p: &SpdPoint<T>) -> Result<T> {
        if rot.dim() != self.dim() {
            return Err(Error::DimensionMismatch(rot.dim(), self.dim()));
        }
        // b_{Q rot}(p) = b_Q(r^T p r) with r = Q rot Q^T.
        let q = self.flat.rotation();
        let r = q.mul(rot).mul(&q.transpose());
        let rotated = r.rotate_sym_into(&p.matrix().to_square());
        self.busemann_square(&rotated)
    }

    /// Riemannian gradient of the Busemann function at `p` (a unit tangent
    /// vector at `p`): with `Q^T p Q = v f v^T` in the evaluation frame,
    /// `grad b = -Q (v f diag(a) v^T) Q^T`.
    pub fn gradient(&self, p: &SpdPoint<T>) -> Result<SymMatrix<T>> {
        let rotated = self.eval_rotation.rotate_sym_into(&p.matrix().to_square());
        let (nu, f) = unipotent_diagonal(rotated)?;
        let fa: Vec<T> = f
            .iter()
            .zip(self.eval_direction.iter())
            .map(|(fi, ai)| *fi * *ai)
            .collect();
        let inner = nu.congruence_diag(&fa);
        let full = self.eval_rotation.mul(&inner).mul(&self.eval_rotation.transpose());
        let (sym, _) = SymMatrix::from_square_symmetrized(&full)?;
        Ok(sym.scale(-T::one()))
    }

    /// Horofunction asymptotic to the ray `exp_base(t W)`, in canonical form.
    ///
    /// The base point is arbitrary; the returned function is still normalized
    /// to vanish at the identity.
    pub fn from_ray(base: &SpdPoint<T>, tangent: &SymMatrix<T>) -> Result<Horofunction<T>> {
        if base.dim() != tangent.dim() {
            return Err(Error::DimensionMismatch(base.dim(), tangent.dim()));
        }
        let geo = Geodesic::new(base.clone(), tangent.clone())?;
        // r(t) = base^{1/2} exp(t B) base^{1/2}; with B = U diag(l) U^T the ray
        // is asymptotic to the canonical ray of the QR frame of base^{1/2} U.
        let neg = base.power(-T::of(0.5));
        let conj_full = neg.mul(&geo.tangent().to_square()).mul(&neg);
        let (conj, _) = SymMatrix::from_square_symmetrized(&conj_full)?;
        let eig = sym_eig(&conj)?;
        let m = base.power(T::of(0.5)).mul(&eig.rotation);
        let (mut q, _r) = m.qr_positive()?;
        if (q.det() - T::one()).abs() > T::of(0.5) {
            // det -1: flipping one column keeps the flat and the direction.
            let n = q.dim();
            q.scale_col(n - 1, -T::one());
        }
        let norm: T = eig.eigenvalues.iter().map(|l| *l * *l).sum::<T>().sqrt();
        let direction: Vec<T> = eig.eigenvalues.iter().map(|l| *l / norm).collect();
        Horofunction::new(Flat::new(q)?, direction, Orientation::Forward)
    }

    /// The opposing pair `(b_+, b_-)` of the canonical ray `exp(t Q diag(a) Q^T)`.
    pub fn opposing_pair(flat: &Flat<T>, direction: &[T]) -> Result<(Self, Self)> {
        let plus = Horofunction::new(flat.clone(), direction.to_vec(), Orientation::Forward)?;
        let minus = plus.reversed();
        Ok((plus, minus))
    }
}

/// Order-reversing signed permutation with determinant +1.
pub(crate) fn reversal_matrix<T: Real>(n: usize) -> SqMatrix<T> {
    let mut s = SqMatrix::zeros(n);
    for i in 0..n {
        s[(i, n - 1 - i)] = T::one();
    }
    // The exchange matrix has det (-1)^{n(n-1)/2}; flip one column if needed.
    if (n * (n - 1) / 2) % 2 == 1 {
        s.scale_col(0, -T::one());
    }
    s
}

fn reversed_negated<T: Real>(a: &[T]) -> Vec<T> {
    a.iter().rev().map(|x| -*x).collect()
}

/// Unique decomposition `p' = v f v^T` of a symmetric positive-definite
/// matrix (already rotated into the flat frame): `v` unit upper triangular,
/// `f` positive diagonal.
#[derive(Debug, Clone)]
pub struct HoroDecomposition<T> {
    pub unipotent: SqMatrix<T>,
    pub flat_part: Vec<T>,
}

impl<T: Real> HoroDecomposition<T> {
    /// `v f v^T`, for reconstruction checks.
    pub fn reconstruct(&self) -> SqMatrix<T> {
        self.unipotent.congruence_diag(&self.flat_part)
    }

    /// Entrywise log of the flat part: the Euclidean chart coordinates.
    pub fn log_coordinates(&self) -> Vec<T> {
        self.flat_part.iter().map(|f| f.ln()).collect()
    }
}

/// Horospherical projection: rotate `p` into the flat frame and peel trailing
/// 1x1 Schur complements.
pub fn horo_project<T: Real>(p: &SpdPoint<T>, flat: &Flat<T>) -> Result<HoroDecomposition<T>> {
    if p.dim() != flat.dim() {
        return Err(Error::DimensionMismatch(p.dim(), flat.dim()));
    }
    let rotated = flat.rotation().rotate_sym_into(&p.matrix().to_square());
    let (unipotent, flat_part) = unipotent_diagonal(rotated)?;
    Ok(HoroDecomposition {
        unipotent,
        flat_part,
    })
}

/// Full decomposition: returns (v, f).
fn unipotent_diagonal<T: Real>(mut m: SqMatrix<T>) -> Result<(SqMatrix<T>, Vec<T>)> {
    let n = m.dim();
    let mut nu = SqMatrix::identity(n);
    let mut f = vec![T::zero(); n];
    for k in (1..n).rev() {
        let d = m[(k, k)];
        if !(d > T::zero()) {
            return Err(Error::Numerical(
                "positivity lost in a Schur complement during horospherical projection".into(),
            ));
        }
        f[k] = d;
        for i in 0..k {
            nu[(i, k)] = m[(i, k)] / d;
        }
        for i in 0..k {
            let mik = m[(i, k)];
            for j in i..k {
                let v = m[(i, j)] - mik * m[(j, k)] / d;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    f[0] = m[(0, 0)];
    if !(f[0] > T::zero()) {
        return Err(Error::Numerical(
            "positivity lost in a Schur complement during horospherical projection".into(),
        ));
    }
    Ok((nu, f))
}

/// Flat part only; same recursion without accumulating the unipotent factor.
pub(crate) fn flat_part<T: Real>(mut m: SqMatrix<T>) -> Result<Vec<T>> {
    let n = m.dim();
    let mut f = vec![T::zero(); n];
    for k in (1..n).rev() {
        let d = m[(k, k)];
        if !(d > T::zero()) {
            return Err(Error::Numerical(
                "positivity lost in a Schur complement during horospherical projection".into(),
            ));
        }
        f[k] = d;
        for i in 0..k {
            let mik = m[(i, k)];
            for j in i..k {
                let v = m[(i, j)] - mik * m[(j, k)] / d;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    f[0] = m[(0, 0)];
    if !(f[0] > T::zero()) {
        return Err(Error::Numerical(
            "positivity lost in a Schur complement during horospherical projection".into(),
        ));
    }
    Ok(f)
}

/// Sublevel set `{p : b(p) <= level}` of a horofunction.
#[derive(Debug, Clone)]
pub struct Horoball<T> {
    pub horofunction: Horofunction<T>,
    pub level: T,
}

impl<T: Real> Horoball<T> {
    pub fn contains(&self, p: &SpdPoint<T>) -> Result<bool> {
        Ok(self.horofunction.busemann(p)? <= self.level + T::of(HOROBALL_SLACK))
    }
}

/// Horoextent of a point set along a geodesic through the identity:
/// `|max b_+ + max b_-|`.
pub fn horoextent<T: Real>(ray: &Geodesic<T>, points: &[SpdPoint<T>]) -> Result<T> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = ray.base().dim();
    let ident = SymMatrix::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })?;
    if ray.base().matrix().max_abs_diff(&ident) > T::of(1e-9) {
        return Err(Error::InvalidParameter(
            "horoextent requires a geodesic through the identity".into(),
        ));
    }
    let eig = sym_eig(ray.tangent())?;
    let norm: T = eig.eigenvalues.iter().map(|l| *l * *l).sum::<T>().sqrt();
    let direction: Vec<T> = eig.eigenvalues.iter().map(|l| *l / norm).collect();
    let flat = Flat::new(eig.rotation)?;
    horoextent_dir(&flat, &direction, points)
}

/// Horoextent along the canonical ray of `(flat, direction)`.
pub fn horoextent_dir<T: Real>(
    flat: &Flat<T>,
    direction: &[T],
    points: &[SpdPoint<T>],
) -> Result<T> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (plus, minus) = Horofunction::opposing_pair(flat, direction)?;
    let mut max_plus = -T::infinity();
    let mut max_minus = -T::infinity();
    for p in points {
        max_plus = max_plus.max(plus.busemann(p)?);
        max_minus = max_minus.max(minus.busemann(p)?);
    }
    Ok((max_plus + max_minus).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spd::{metric_dist, spd_exp, translate_to_identity};

    fn ident(n: usize) -> SpdPoint<f64> {
        SpdPoint::identity(n).unwrap()
    }

    fn diag(d: &[f64]) -> SpdPoint<f64> {
        SpdPoint::from_diag(d).unwrap()
    }

    #[test]
    fn flat_rejects_non_rotation() {
        let m = SqMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(Flat::new(m), Err(Error::NotRotation(_))));
        let m2 = SqMatrix::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(Flat::new(m2), Err(Error::NotRotation(_))));
    }

    #[test]
    fn projection_diagonal_point_is_trivial() {
        let p = diag(&[3.0, 0.5]);
        let d = horo_project(&p, &Flat::identity(2)).unwrap();
        assert!(d.unipotent.max_abs_diff(&SqMatrix::identity(2)) < 1e-14);
        assert!((d.flat_part[0] - 3.0).abs() < 1e-14);
        assert!((d.flat_part[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn projection_hand_schur() {
        // [[2,1],[1,1]]: trailing Schur complement 2 - 1*1/1 = 1.
        let p = SpdPoint::<f64>::new(SymMatrix::new(2, vec![2.0, 1.0, 1.0]).unwrap()).unwrap();
        let d = horo_project(&p, &Flat::identity(2)).unwrap();
        assert!((d.flat_part[0] - 1.0).abs() < 1e-14);
        assert!((d.flat_part[1] - 1.0).abs() < 1e-14);
        assert!((d.unipotent[(0, 1)] - 1.0).abs() < 1e-14);
        assert!((d.unipotent[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((d.unipotent[(1, 1)] - 1.0).abs() < 1e-14);
        let rec = d.reconstruct();
        assert!(rec.max_abs_diff(&p.matrix().to_square()) < 1e-12);
    }

    #[test]
    fn projection_reconstructs_random() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 4] {
            for _ in 0..20 {
                let p = crate::oracle::random_spd(n, 2.0, &mut rng).unwrap();
                let flat = Flat::<f64>::new(crate::oracle::random_rotation(n, &mut rng)).unwrap();
                let d = horo_project(&p, &flat).unwrap();
                let rotated = flat.rotation().rotate_sym_into(&p.matrix().to_square());
                let scale = rotated.frobenius_norm();
                assert!(d.reconstruct().max_abs_diff(&rotated) < 1e-9 * scale.max(1.0));
                assert!(d.flat_part.iter().all(|f| *f > 0.0));
            }
        }
    }

    #[test]
    fn busemann_is_zero_at_identity() {
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        for orientation in [Orientation::Forward, Orientation::Reverse] {
            let h = Horofunction::new(
                Flat::identity(2),
                vec![inv_sqrt2, -inv_sqrt2],
                orientation,
            )
            .unwrap();
            assert_eq!(h.busemann(&ident(2)).unwrap(), 0.0);
        }
    }

    #[test]
    fn busemann_hand_values() {
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        let h = Horofunction::new(
            Flat::identity(2),
            vec![inv_sqrt2, -inv_sqrt2],
            Orientation::Forward,
        )
        .unwrap();
        let p = diag(&[(2.0f64.sqrt()).exp(), 1.0]);
        assert!((h.busemann(&p).unwrap() + 1.0).abs() < 1e-12);

        // Reverse orientation of the same ray at the same point: +1.
        let hm = h.reversed();
        assert!((hm.busemann(&p).unwrap() - 1.0).abs() < 1e-12);

        // Within a flat the function is the linear functional -<a, log p>.
        let sqrt5 = 5.0f64.sqrt();
        let h2 = Horofunction::new(
            Flat::identity(2),
            vec![2.0 / sqrt5, 1.0 / sqrt5],
            Orientation::Forward,
        )
        .unwrap();
        let q = diag(&[std::f64::consts::E, 1.0]);
        assert!((h2.busemann(&q).unwrap() + 2.0 / sqrt5).abs() < 1e-12);
    }

    #[test]
    fn busemann_direction_validation() {
        assert!(Horofunction::new(
            Flat::identity(2),
            vec![0.9, 0.1],
            Orientation::Forward
        )
        .is_err());
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert!(Horofunction::new(
            Flat::identity(2),
            vec![inv_sqrt2, inv_sqrt2],
            Orientation::Forward
        )
        .is_err());
        assert!(Horofunction::new(
            Flat::identity(2),
            vec![-inv_sqrt2, inv_sqrt2],
            Orientation::Forward
        )
        .is_err());
    }

    #[test]
    fn rotated_busemann_matches_composed_flat() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 3] {
            for _ in 0..25 {
                let base = crate::oracle::random_rotation::<f64>(n, &mut rng);
                let rot = crate::oracle::random_rotation::<f64>(n, &mut rng);
                let dir = crate::oracle::random_direction::<f64>(n, 0.05, &mut rng);
                let p = crate::oracle::random_spd(n, 1.5, &mut rng).unwrap();
                for orientation in [Orientation::Forward, Orientation::Reverse] {
                    let h =
                        Horofunction::new(Flat::new(base.clone()).unwrap(), dir.clone(), orientation)
                            .unwrap();
                    let composed = Horofunction::new(
                        Flat::new(base.mul(&rot)).unwrap(),
                        dir.clone(),
                        orientation,
                    )
                    .unwrap();
                    let a = h.busemann_rotated(&rot, &p).unwrap();
                    let b = composed.busemann(&p).unwrap();
                    assert!((a - b).abs() < 1e-10, "orientation {orientation:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn rotation_preserves_determinant() {
        let theta = 0.37f64;
        let q = SqMatrix::from_rows(&[
            vec![(theta / 2.0).cos(), -(theta / 2.0).sin()],
            vec![(theta / 2.0).sin(), (theta / 2.0).cos()],
        ])
        .unwrap();
        let p = SpdPoint::new(SymMatrix::new(2, vec![2.0, 0.7, 1.0]).unwrap()).unwrap();
        let rotated = q.rotate_sym_into(&p.matrix().to_square());
        assert!((rotated.det() - p.matrix().to_square().det()).abs() < 1e-12);
    }

    #[test]
    fn horoextent_trivial_and_hand_value() {
        let i = ident(2);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        let flat = Flat::identity(2);
        let dir = vec![inv_sqrt2, -inv_sqrt2];
        assert!(horoextent_dir(&flat, &dir, &[i.clone()]).unwrap() < 1e-15);

        let e = std::f64::consts::E;
        let x = vec![diag(&[e, 1.0]), diag(&[1.0 / e, 1.0])];
        let ext = horoextent_dir(&flat, &dir, &x).unwrap();
        assert!((ext - 2.0f64.sqrt()).abs() < 1e-12);

        // Same value through the geodesic-facing entry point.
        let a = SymMatrix::from_diag(&[inv_sqrt2, -inv_sqrt2]).unwrap();
        let ray = Geodesic::new(i, a).unwrap();
        assert!((horoextent(&ray, &x).unwrap() - 2.0f64.sqrt()).abs() < 1e-12);

        assert!(matches!(
            horoextent_dir(&flat, &dir, &[]),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn horoextent_invariant_under_translation_along_ray() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n = 2;
            let flat = Flat::<f64>::new(crate::oracle::random_rotation(n, &mut rng)).unwrap();
            let dir = crate::oracle::random_direction::<f64>(n, 0.05, &mut rng);
            let xs: Vec<_> = (0..5)
                .map(|_| crate::oracle::random_spd(n, 1.2, &mut rng).unwrap())
                .collect();
            let ext = horoextent_dir(&flat, &dir, &xs).unwrap();

            // Translate everything by a point on the ray; the tangent's flat
            // coordinates are unchanged, so the same (flat, dir) applies.
            let tangent_full = flat.rotation().congruence_diag(&dir);
            let (tangent, _) = SymMatrix::from_square_symmetrized(&tangent_full).unwrap();
            let r = spd_exp(&tangent.scale(0.8)).unwrap();
            let moved: Vec<_> = xs
                .iter()
                .map(|x| translate_to_identity(&r, x).unwrap())
                .collect();
            let ext2 = horoextent_dir(&flat, &dir, &moved).unwrap();
            assert!((ext - ext2).abs() < 1e-9, "{ext} vs {ext2}");
        }
    }

    #[test]
    fn gradient_is_unit_and_descends() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for n in [2usize, 3] {
            for _ in 0..10 {
                let h = crate::oracle::random_horofunction::<f64>(n, 0.05, &mut rng).unwrap();
                let p = crate::oracle::random_spd(n, 1.5, &mut rng).unwrap();
                let g = h.gradient(&p).unwrap();
                // Unit in the metric at p: ||p^{-1/2} G p^{-1/2}||_F = 1.
                let neg = p.power(-0.5);
                let conj = neg.mul(&g.to_square()).mul(&neg);
                let norm = conj.frobenius_norm();
                assert!((norm - 1.0).abs() < 1e-9, "grad norm {norm}");

                // First-order decrease along -grad.
                let geo = Geodesic::new(p.clone(), g.scale(-1.0)).unwrap();
                let step = 1e-6;
                let b0 = h.busemann(&p).unwrap();
                let b1 = h.busemann(&geo.point(step).unwrap()).unwrap();
                assert!(((b0 - b1) / step - 1.0).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn from_ray_through_identity_matches_direct() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let flat = Flat::<f64>::new(crate::oracle::random_rotation(2, &mut rng)).unwrap();
        let dir = crate::oracle::random_direction::<f64>(2, 0.1, &mut rng);
        let h = Horofunction::new(flat.clone(), dir.clone(), Orientation::Forward).unwrap();
        let from_ray = Horofunction::from_ray(&ident(2), &h.ray_tangent()).unwrap();
        let p = crate::oracle::random_spd(2, 1.0, &mut rng).unwrap();
        assert!(
            (h.busemann(&p).unwrap() - from_ray.busemann(&p).unwrap()).abs() < 1e-10
        );
    }

    #[test]
    fn from_ray_offset_base_is_asymptotic_to_original_ray() {
        // The canonical horofunction built from a ray off the identity must
        // stay within bounded distance of that ray: d(r(t), c(t)) bounded as
        // t grows, with c the canonical representative.
        let base = diag(&[1.5, 0.4]);
        let w = SymMatrix::new(2, vec![0.3, 0.5, -0.2]).unwrap();
        let h = Horofunction::from_ray(&base, &w).unwrap();
        let geo = Geodesic::new(base, w).unwrap();
        // (Comparing two far ray points head-on runs out of f64 precision
        // past t ~ 25, so the audit stops at 20; the gap has plateaued by
        // then.)
        let mut last = f64::INFINITY;
        for t in [5.0, 10.0, 20.0] {
            let r_t = geo.point(t).unwrap();
            let c_t = crate::oracle::ray_point(&h, t).unwrap();
            let gap = metric_dist(&r_t, &c_t).unwrap();
            assert!(gap <= last + 1e-9, "asymptotic rays should not diverge");
            last = gap;
        }
        // And the closed form agrees with the limit definition of that ray.
        let p = diag(&[0.9, 1.7]);
        let b_limit = crate::oracle::busemann_by_limit(&h, &p, 40.0).unwrap();
        assert!((h.busemann(&p).unwrap() - b_limit).abs() < 1e-6);
    }

    #[test]
    fn horoball_contains_boundary() {
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        let h = Horofunction::new(
            Flat::identity(2),
            vec![inv_sqrt2, -inv_sqrt2],
            Orientation::Forward,
        )
        .unwrap();
        let p = diag(&[(2.0f64.sqrt()).exp(), 1.0]);
        let ball = Horoball {
            horofunction: h,
            level: -1.0,
        };
        assert!(ball.contains(&p).unwrap());
        let deeper = Horoball {
            horofunction: ball.horofunction.clone(),
            level: -1.0 - 1e-6,
        };
        assert!(!deeper.contains(&p).unwrap());
    }
}
