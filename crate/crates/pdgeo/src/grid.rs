//! Discretization of the space of directions SO(n).
//!
//! Rotations are decomposed into `C(n,2)` plane rotations in a fixed lex
//! plane order (a generalized Euler-angle scheme); the grid is the Cartesian
//! product of per-plane angle grids. The angular step is derived from the
//! Lipschitz behavior of Busemann functions under rotation of the flat, so a
//! grid built from [`grid_resolution`] changes any Busemann value over the
//! data by at most half the extent budget.
//!
//! Angle conventions: a plane rotation by Q-angle `phi` acts on PD(n) as a
//! rotation by the effective angle `theta = 2 phi`; the grid step `delta` is
//! quoted in `theta` units, so consecutive flats differ by `delta / 2` in
//! matrix angle.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::horo::Flat;
use crate::mat::SqMatrix;
use crate::scalar::Real;
use crate::{Error, Result};

/// One plane-rotation factor of a canonical decomposition. Planes are
/// 0-based with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensFactor<T> {
    pub i: usize,
    pub j: usize,
    pub angle: T,
}

/// Rotation by `angle` in coordinate plane `(i, j)`.
pub fn givens_rotation<T: Real>(n: usize, i: usize, j: usize, angle: T) -> SqMatrix<T> {
    let mut g = SqMatrix::identity(n);
    let (c, s) = (angle.cos(), angle.sin());
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = -s;
    g[(j, i)] = s;
    g
}

fn lex_planes(n: usize) -> Vec<(usize, usize)> {
    let mut planes = Vec::with_capacity(n * (n - 1) / 2);
    for c in 0..n {
        for j in c + 1..n {
            planes.push((c, j));
        }
    }
    planes
}

/// Canonical decomposition of a rotation into exactly `C(n,2)` plane
/// rotations, one per plane in lex order:
/// `Q = G(0,1) G(0,2) .. G(0,n-1) G(1,2) .. G(n-2,n-1)`.
///
/// Factors `(c, c+1)` carry angles in `(-pi, pi]`; the remaining factors stay
/// in `[-pi/2, pi/2]` (spherical-coordinate ranges).
pub fn givens_decompose<T: Real>(q: &SqMatrix<T>) -> Result<Vec<GivensFactor<T>>> {
    let n = q.dim();
    let defect = q.orthogonality_defect();
    if defect > T::of(1e-8) {
        return Err(Error::NotRotation(format!(
            "orthogonality defect {:e}",
            defect.as_f64()
        )));
    }
    if q.det() < T::zero() {
        return Err(Error::NotRotation("determinant is negative".into()));
    }
    let mut w = q.clone();
    let mut factors = Vec::with_capacity(n * (n - 1) / 2);
    for c in 0..n.saturating_sub(1) {
        // Spherical angles of the working matrix's column c.
        let col: Vec<T> = (0..n).map(|i| w[(i, c)]).collect();
        let mut prefix = col[c] * col[c] + col[c + 1] * col[c + 1];
        let mut angles = vec![T::zero(); n]; // angles[j] for plane (c, j)
        angles[c + 1] = col[c + 1].atan2(col[c]);
        for j in c + 2..n {
            angles[j] = col[j].atan2(prefix.sqrt());
            prefix = prefix + col[j] * col[j];
        }
        // Peel the factors off: W <- G(c,c+1)^T W, then G(c,c+2)^T, ...
        for j in c + 1..n {
            apply_transposed_givens(&mut w, c, j, angles[j]);
        }
        for j in c + 1..n {
            factors.push(GivensFactor {
                i: c,
                j,
                angle: angles[j],
            });
        }
    }
    Ok(factors)
}

fn apply_transposed_givens<T: Real>(w: &mut SqMatrix<T>, i: usize, j: usize, angle: T) {
    let (c, s) = (angle.cos(), angle.sin());
    let n = w.dim();
    for k in 0..n {
        let wi = w[(i, k)];
        let wj = w[(j, k)];
        w[(i, k)] = c * wi + s * wj;
        w[(j, k)] = -s * wi + c * wj;
    }
}

/// Product of the factors in their stored (lex) order.
pub fn givens_reconstruct<T: Real>(n: usize, factors: &[GivensFactor<T>]) -> SqMatrix<T> {
    let mut q = SqMatrix::identity(n);
    for f in factors {
        q = q.mul(&givens_rotation(n, f.i, f.j, f.angle));
    }
    q
}

fn max_abs_angle<T: Real>(factors: &[GivensFactor<T>]) -> T {
    factors
        .iter()
        .map(|f| f.angle.abs())
        .fold(T::zero(), T::max)
}

/// Angle between two rotations: the largest absolute canonical Givens angle
/// of the relative rotation, taken over both orders so the result is exactly
/// symmetric.
pub fn angle_distance<T: Real>(q1: &SqMatrix<T>, q2: &SqMatrix<T>) -> Result<T> {
    if q1.dim() != q2.dim() {
        return Err(Error::DimensionMismatch(q1.dim(), q2.dim()));
    }
    let rel = q1.transpose().mul(q2);
    let fwd = max_abs_angle(&givens_decompose(&rel)?);
    let rev = max_abs_angle(&givens_decompose(&rel.transpose())?);
    Ok(fwd.max(rev))
}

/// Distance between the *flats* generated by two rotations: the smallest
/// [`angle_distance`] over the sign-diagonal identifications `Q ~ Q D`
/// (`D = diag(+-1)`, `det D = +1`), which leave every tangent
/// `Q diag(a) Q^T` unchanged. In SO(2) this is the rotation angle modulo pi.
pub fn flat_distance<T: Real>(q1: &SqMatrix<T>, q2: &SqMatrix<T>) -> Result<T> {
    let n = q1.dim();
    let mut best = T::infinity();
    for mask in 0..(1u32 << (n - 1)) {
        // Choose signs for the first n-1 columns; the last sign keeps det +1.
        let mut flipped = q1.clone();
        let mut parity = false;
        for col in 0..n - 1 {
            if mask >> col & 1 == 1 {
                flipped.scale_col(col, -T::one());
                parity = !parity;
            }
        }
        if parity {
            flipped.scale_col(n - 1, -T::one());
        }
        best = best.min(angle_distance(&flipped, q2)?);
    }
    Ok(best)
}

/// Grid resolution in effective-rotation units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution<T> {
    /// All data sits at the origin; a single flat represents every direction.
    SingleFlat,
    /// Angular step of the direction grid.
    Step(T),
}

/// Angular step guaranteeing that any Busemann value over data within
/// distance `d_x` of the origin moves by at most `epsilon / 2` between a ray
/// and its nearest grid ray: `delta = (eps/2) / (2 C(n,2) sqrt(2)
/// sinh(d_x/sqrt(2)))`.
pub fn grid_resolution<T: Real>(epsilon: T, d_x: T, n: usize) -> Result<Resolution<T>> {
    resolution_from_budget(epsilon / T::of(2.0), d_x, n)
}

/// Step with an explicit per-point Busemann budget (the hull uses
/// `epsilon / 2`, the center solver `epsilon`).
pub(crate) fn resolution_from_budget<T: Real>(
    budget: T,
    d_x: T,
    n: usize,
) -> Result<Resolution<T>> {
    if !(budget > T::zero()) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    if d_x < T::zero() {
        return Err(Error::InvalidParameter("d_x must be nonnegative".into()));
    }
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    if d_x == T::zero() {
        return Ok(Resolution::SingleFlat);
    }
    let pairs = T::of((n * (n - 1) / 2) as f64);
    let sqrt2 = T::of(2.0).sqrt();
    let denom = T::of(2.0) * pairs * sqrt2 * (d_x / sqrt2).sinh();
    Ok(Resolution::Step(budget / denom))
}

#[derive(Debug, Clone)]
pub(crate) struct PlaneGrid<T> {
    pub i: usize,
    pub j: usize,
    /// Q-angle sample points.
    pub angles: Vec<T>,
    /// Full-circle factor (2 pi period) vs clamped half range.
    pub wraps: bool,
    /// SO(2) only: matrix angles phi and phi + pi generate the same flat.
    pub half_period: bool,
}

/// Finite family of flats covering the space of directions.
#[derive(Debug, Clone)]
pub struct DirectionGrid<T> {
    dim: usize,
    step: Option<T>,
    flats: Vec<Flat<T>>,
    provenance: Vec<Vec<GivensFactor<T>>>,
    planes: Vec<PlaneGrid<T>>,
    /// Pre-dedup cell index -> flat index.
    cell_to_flat: Vec<u32>,
}

impl<T: Real> DirectionGrid<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Angular step in effective-rotation units; `None` for the single-flat
    /// grid.
    pub fn step(&self) -> Option<T> {
        self.step
    }

    pub fn len(&self) -> usize {
        self.flats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flats.is_empty()
    }

    pub fn flats(&self) -> &[Flat<T>] {
        &self.flats
    }

    pub fn provenance(&self) -> &[Vec<GivensFactor<T>>] {
        &self.provenance
    }

    /// Grid flat nearest to `target` in [`flat_distance`], by exhaustive scan.
    pub fn nearest_flat(&self, target: &SqMatrix<T>) -> Result<(usize, T)> {
        let mut best = (0usize, T::infinity());
        for (k, f) in self.flats.iter().enumerate() {
            let d = flat_distance(f.rotation(), target)?;
            if d < best.1 {
                best = (k, d);
            }
        }
        Ok(best)
    }

    /// Grid flat obtained by snapping each canonical angle of `target` to its
    /// per-plane grid; returns the flat index and its [`flat_distance`] to
    /// the target. O(n^3), independent of the grid size.
    pub fn snap(&self, target: &SqMatrix<T>) -> Result<(usize, T)> {
        if self.planes.is_empty() || self.flats.len() == 1 {
            return Ok((0, flat_distance(self.flats[0].rotation(), target)?));
        }
        let factors = givens_decompose(target)?;
        let mut cell = 0usize;
        for (plane, factor) in self.planes.iter().zip(factors.iter()) {
            debug_assert_eq!((plane.i, plane.j), (factor.i, factor.j));
            let idx =
                nearest_angle_index(&plane.angles, factor.angle, plane.wraps, plane.half_period);
            cell = cell * plane.angles.len() + idx;
        }
        let flat = self.cell_to_flat[cell] as usize;
        Ok((flat, flat_distance(self.flats[flat].rotation(), target)?))
    }
}

fn nearest_angle_index<T: Real>(angles: &[T], target: T, wraps: bool, half_period: bool) -> usize {
    let mut best = (0usize, T::infinity());
    let two_pi = T::of(std::f64::consts::TAU);
    let pi = T::of(std::f64::consts::PI);
    for (k, a) in angles.iter().enumerate() {
        let raw = (*a - target).abs();
        let mut d = raw;
        if wraps {
            d = d.min((raw - two_pi).abs());
        }
        if half_period {
            d = d.min((raw - pi).abs());
        }
        if d < best.1 {
            best = (k, d);
        }
    }
    best.0
}

/// Default cell cap for grid construction.
pub const DEFAULT_GRID_CAP: usize = 250_000;

/// Build the direction grid at the given resolution.
///
/// For n = 2 the grid is the 1-D circle grid: `ceil(2 pi / delta)` flats at
/// matrix angles `k delta / 2`, covering the effective-rotation period
/// `2 pi` (matrix-angle period `pi`; the antipodal rays inside each flat are
/// handled by orientation signs). For n >= 3 it is the Cartesian product of
/// per-plane grids at matrix-angle step `delta / C(n,2)`, which keeps the
/// composed snap error within `delta` after accumulating over all planes.
pub fn build_grid<T: Real>(
    n: usize,
    resolution: &Resolution<T>,
    cap: usize,
) -> Result<DirectionGrid<T>> {
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    let delta = match resolution {
        Resolution::SingleFlat => {
            let provenance = lex_planes(n)
                .into_iter()
                .map(|(i, j)| GivensFactor {
                    i,
                    j,
                    angle: T::zero(),
                })
                .collect();
            return Ok(DirectionGrid {
                dim: n,
                step: None,
                flats: vec![Flat::identity(n)],
                provenance: vec![provenance],
                planes: Vec::new(),
                cell_to_flat: vec![0],
            });
        }
        Resolution::Step(d) => {
            if !(*d > T::zero()) {
                return Err(Error::InvalidParameter("grid step must be positive".into()));
            }
            *d
        }
    };

    let two_pi = T::of(std::f64::consts::TAU);
    let pi = T::of(std::f64::consts::PI);
    let planes: Vec<PlaneGrid<T>> = if n == 2 {
        let count = (two_pi / delta).ceil().as_f64() as usize;
        let count = count.max(1);
        let half = delta / T::of(2.0);
        let angles = (0..count).map(|k| T::of(k as f64) * half).collect();
        vec![PlaneGrid {
            i: 0,
            j: 1,
            angles,
            wraps: true,
            half_period: true,
        }]
    } else {
        let pairs = (n * (n - 1) / 2) as f64;
        let step = delta / T::of(pairs);
        lex_planes(n)
            .into_iter()
            .map(|(i, j)| {
                let wraps = j == i + 1;
                let (start, len) = if wraps {
                    (-pi, two_pi)
                } else {
                    (-pi / T::of(2.0), pi)
                };
                let count = ((len / step).ceil().as_f64() as usize).max(1);
                let actual = len / T::of(count as f64);
                let angles = (0..count)
                    .map(|k| start + (T::of(k as f64) + T::of(0.5)) * actual)
                    .collect();
                PlaneGrid {
                    i,
                    j,
                    angles,
                    wraps,
                    half_period: false,
                }
            })
            .collect()
    };

    let mut cells: u128 = 1;
    for p in &planes {
        cells = cells.saturating_mul(p.angles.len() as u128);
    }
    if cells > cap as u128 {
        return Err(Error::GridCap {
            cells,
            cap,
            epsilon_fit: None,
        });
    }

    let mut flats = Vec::new();
    let mut provenance = Vec::new();
    let mut cell_to_flat = Vec::with_capacity(cells as usize);
    let mut seen: HashMap<Vec<i64>, u32> = HashMap::new();
    let mut indices = vec![0usize; planes.len()];
    loop {
        let factors: Vec<GivensFactor<T>> = planes
            .iter()
            .zip(indices.iter())
            .map(|(p, &k)| GivensFactor {
                i: p.i,
                j: p.j,
                angle: p.angles[k],
            })
            .collect();
        let rotation = givens_reconstruct(n, &factors);
        let key: Vec<i64> = rotation
            .as_slice()
            .iter()
            .map(|v| (v.as_f64() / 1e-9).round() as i64)
            .collect();
        let flat_idx = match seen.get(&key) {
            Some(&idx) => idx,
            None => {
                let idx = flats.len() as u32;
                seen.insert(key, idx);
                flats.push(Flat::new_unchecked(rotation));
                provenance.push(factors);
                idx
            }
        };
        cell_to_flat.push(flat_idx);

        // Odometer.
        let mut done = true;
        for k in (0..indices.len()).rev() {
            indices[k] += 1;
            if indices[k] < planes[k].angles.len() {
                done = false;
                break;
            }
            indices[k] = 0;
        }
        if done {
            break;
        }
    }

    Ok(DirectionGrid {
        dim: n,
        step: Some(delta),
        flats,
        provenance,
        planes,
        cell_to_flat,
    })
}

/// Randomized covering audit: samples Haar rotations, snaps each to the grid,
/// and returns the largest [`flat_distance`] observed. For a grid built at
/// step `delta` the result must stay below `delta`.
pub fn covering_audit<T: Real>(
    grid: &DirectionGrid<T>,
    samples: usize,
    seed: u64,
) -> Result<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();
    for _ in 0..samples {
        let target = crate::oracle::random_rotation::<T>(grid.dim(), &mut rng);
        let (_, d) = grid.snap(&target)?;
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}
