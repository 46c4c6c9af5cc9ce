//! eps-approximate horo-center points.
//!
//! A horo-center of N points must lie in every horoball containing more than
//! `N d / (d+1)` of them, `d = n(n+1)/2`. Constraints are generated per grid
//! flat from hyperplanes through n chart points whose halfspace holds at
//! least the threshold count; each qualifying halfspace dualizes to the
//! minimal horoball of its direction containing the selected subset. The
//! solve is a two-phase geodesically convex optimization: a Polyak-style
//! subgradient phase drives the worst constraint violation to zero (every
//! Busemann subgradient has unit norm, so the step size needs no line
//! search), then a projected-descent phase lowers the objective
//! `tr(log p) = log det p` while staying feasible, keeping the best feasible
//! candidate seen.

use rayon::prelude::*;

use crate::chull::{affine_span, direction_net, hyperplane_normal};
use crate::grid::{build_grid, resolution_from_budget, DirectionGrid, DEFAULT_GRID_CAP};
use crate::horo::{flat_part, Horofunction};
use crate::hull::{horofunction_for_normal, origin_for, shift_all, OriginPolicy};
use crate::mat::SqMatrix;
use crate::scalar::Real;
use crate::spd::{Geodesic, SpdPoint};
use crate::{Error, Result};

/// One depth constraint: `b(p) <= level`.
#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub horofunction: Horofunction<T>,
    pub level: T,
    pub provenance: ConstraintProvenance,
}

/// Grid flat and defining point subset (at most n indices).
#[derive(Debug, Clone)]
pub struct ConstraintProvenance {
    pub flat: usize,
    pub subset: Vec<usize>,
}

struct FrameGroup<T> {
    rotation: SqMatrix<T>,
    /// (evaluation direction, level, constraint index)
    items: Vec<(Vec<T>, T, usize)>,
}

/// Generated constraint family with shared-frame evaluation batches.
pub struct ConstraintSet<T> {
    dim: usize,
    n_points: usize,
    threshold: usize,
    constraints: Vec<Constraint<T>>,
    groups: Vec<FrameGroup<T>>,
}

impl<T: Real> ConstraintSet<T> {
    fn assemble(dim: usize, n_points: usize, threshold: usize, constraints: Vec<Constraint<T>>) -> Self {
        use std::collections::HashMap;
        let mut groups: Vec<FrameGroup<T>> = Vec::new();
        let mut by_frame: HashMap<Vec<i64>, usize> = HashMap::new();
        for (idx, c) in constraints.iter().enumerate() {
            let (rotation, direction) = c.horofunction.eval_frame();
            let key: Vec<i64> = rotation
                .as_slice()
                .iter()
                .map(|v| (v.as_f64() / 1e-12).round() as i64)
                .collect();
            let g = match by_frame.get(&key) {
                Some(&g) => g,
                None => {
                    by_frame.insert(key, groups.len());
                    groups.push(FrameGroup {
                        rotation: rotation.clone(),
                        items: Vec::new(),
                    });
                    groups.len() - 1
                }
            };
            groups[g].items.push((direction.to_vec(), c.level, idx));
        }
        ConstraintSet {
            dim,
            n_points,
            threshold,
            constraints,
            groups,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Manifold dimension `d = n(n+1)/2` (the combinatorial dimension of the
    /// underlying constraint-minimization problem).
    pub fn manifold_dim(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    /// Smallest integer exceeding `N d / (d+1)`.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    /// Subset of the constraints as a standalone set (same threshold).
    pub fn restricted(&self, keep: &[usize]) -> ConstraintSet<T> {
        let constraints: Vec<Constraint<T>> =
            keep.iter().map(|&k| self.constraints[k].clone()).collect();
        ConstraintSet::assemble(self.dim, self.n_points, self.threshold, constraints)
    }

    /// Worst violation `b_i(p) - level_i` and the index attaining it.
    pub fn max_violation(&self, p: &SpdPoint<T>) -> Result<(T, usize)> {
        let sq = p.matrix().to_square();
        let mut worst = (-T::infinity(), 0usize);
        for g in &self.groups {
            let rotated = g.rotation.rotate_sym_into(&sq);
            let f = flat_part(rotated)?;
            let y: Vec<T> = f.iter().map(|v| v.ln()).collect();
            for (a, level, idx) in &g.items {
                let mut b = T::zero();
                for (ai, yi) in a.iter().zip(y.iter()) {
                    b = b - *ai * *yi;
                }
                let v = b - *level;
                if v > worst.0 {
                    worst = (v, *idx);
                }
            }
        }
        Ok(worst)
    }

    /// Independent recount: how many of `xs` the constraint's horoball holds.
    pub fn recount_contained(&self, idx: usize, xs: &[SpdPoint<T>]) -> Result<usize> {
        let c = &self.constraints[idx];
        let mut count = 0;
        for x in xs {
            if c.horofunction.busemann(x)? <= c.level + T::of(1e-9) {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// Horo-center count threshold: smallest integer greater than `N d/(d+1)`.
pub fn depth_threshold(n_points: usize, dim: usize) -> usize {
    let d = dim * (dim + 1) / 2;
    n_points * d / (d + 1) + 1
}

/// Generate the depth constraints of `xs` (already translated so the chosen
/// origin is the identity) over the direction grid.
///
/// Per flat: every n-subset of chart points spanning a hyperplane
/// contributes its two closed halfspaces; a halfspace holding at least the
/// threshold count of chart points (slack 1e-9) is dualized to the horoball
/// of its normal at the supporting level of the contained subset.
/// Affinely dependent subsets are skipped. Charts whose affine rank is below
/// n are handled inside their span (hyperplanes of the span) together with
/// the orthogonal-complement directions, which hold every point.
pub fn generate_constraints<T: Real>(
    xs: &[SpdPoint<T>],
    grid: &DirectionGrid<T>,
) -> Result<ConstraintSet<T>> {
    let n = grid.dim();
    if xs.len() < n {
        return Err(Error::InvalidParameter(format!(
            "need at least {n} points, got {}",
            xs.len()
        )));
    }
    if xs.iter().any(|x| x.dim() != n) {
        return Err(Error::DimensionMismatch(xs[0].dim(), n));
    }
    let m = depth_threshold(xs.len(), n);
    let net_step = grid.step().unwrap_or_else(|| T::of(0.1)).as_f64();

    let per_flat: Vec<Result<Vec<Constraint<T>>>> = grid
        .flats()
        .par_iter()
        .enumerate()
        .map(|(flat_idx, flat)| {
            let chart = crate::hull::project_to_flat(xs, flat)?;
            let mut local: Vec<Constraint<T>> = Vec::new();
            let mut emit = |normal: &[T], contained: &[usize], subset: Vec<usize>| -> Result<()> {
                let (h, _) = horofunction_for_normal(normal, flat)?;
                let mut level = -T::infinity();
                for &k in contained {
                    level = level.max(h.busemann(&xs[k])?);
                }
                local.push(Constraint {
                    horofunction: h,
                    level,
                    provenance: ConstraintProvenance {
                        flat: flat_idx,
                        subset,
                    },
                });
                Ok(())
            };

            let (origin, basis) = affine_span(&chart.points);
            let rank = basis.len();
            if rank == 0 {
                // All points coincide in this chart: every direction holds
                // everything; sample a net.
                let all: Vec<usize> = (0..xs.len()).collect();
                for u in direction_net::<T>(n, T::of(net_step)) {
                    emit(&u, &all, all[..n.min(all.len())].to_vec())?;
                }
            } else if rank < n {
                // Reduce to span coordinates and enumerate span hyperplanes.
                let reduced: Vec<Vec<T>> = chart
                    .points
                    .iter()
                    .map(|p| {
                        let d: Vec<T> = p
                            .iter()
                            .zip(origin.iter())
                            .map(|(a, b)| *a - *b)
                            .collect();
                        basis.iter().map(|b| dot(&d, b)).collect()
                    })
                    .collect();
                enumerate_halfspaces(&reduced, m, &mut |u_span, contained, subset| {
                    let mut normal = vec![T::zero(); n];
                    for (c, b) in u_span.iter().zip(basis.iter()) {
                        for (nk, bk) in normal.iter_mut().zip(b.iter()) {
                            *nk = *nk + *c * *bk;
                        }
                    }
                    emit(&normal, contained, subset)
                })?;
                // Orthogonal complement: all points share these coordinates.
                let all: Vec<usize> = (0..xs.len()).collect();
                for w in orthogonal_complement(&basis, n) {
                    emit(&w, &all, all[..n.min(all.len())].to_vec())?;
                    let neg: Vec<T> = w.iter().map(|v| -*v).collect();
                    emit(&neg, &all, all[..n.min(all.len())].to_vec())?;
                }
            } else {
                enumerate_halfspaces(&chart.points, m, &mut |u, contained, subset| {
                    emit(u, contained, subset)
                })?;
            }
            Ok(local)
        })
        .collect();

    let mut constraints: Vec<Constraint<T>> = Vec::new();
    for group in per_flat {
        constraints.extend(group?);
    }
    prune_constraints(&mut constraints);
    if constraints.is_empty() {
        return Err(Error::Numerical(
            "constraint generation produced no qualifying halfspaces".into(),
        ));
    }
    Ok(ConstraintSet::assemble(n, xs.len(), m, constraints))
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b.iter()).map(|(x, y)| *x * *y).sum()
}

/// Enumerate hyperplanes through d-subsets of a full-rank cloud in R^d and
/// call `emit` for each closed halfspace containing at least `m` points.
fn enumerate_halfspaces<T: Real>(
    points: &[Vec<T>],
    m: usize,
    emit: &mut impl FnMut(&[T], &[usize], Vec<usize>) -> Result<()>,
) -> Result<()> {
    let d = points[0].len();
    let count = points.len();
    if count < d {
        return Ok(());
    }
    let scale = points
        .iter()
        .map(|p| dot(p, p).sqrt())
        .fold(T::zero(), T::max)
        .max(T::one());
    let tol = T::of(1e-9) * scale;
    let slack = T::of(1e-9);

    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        if let Some(normal) = hyperplane_normal(points, &subset, tol) {
            let beta0 = dot(&normal, &points[subset[0]]);
            for sign in [T::one(), -T::one()] {
                let u: Vec<T> = normal.iter().map(|v| *v * sign).collect();
                let beta = beta0 * sign;
                let contained: Vec<usize> = (0..count)
                    .filter(|&k| dot(&u, &points[k]) <= beta + slack)
                    .collect();
                if contained.len() >= m {
                    emit(&u, &contained, subset.clone())?;
                }
            }
        }
        // Next d-combination.
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            if subset[k] + 1 <= count - (d - k) {
                subset[k] += 1;
                for t in k + 1..d {
                    subset[t] = subset[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Orthonormal completion of `basis` to a basis of R^n.
fn orthogonal_complement<T: Real>(basis: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    let mut full: Vec<Vec<T>> = basis.to_vec();
    let mut out = Vec::new();
    for axis in 0..n {
        if full.len() == n {
            break;
        }
        let mut v = vec![T::zero(); n];
        v[axis] = T::one();
        for b in &full {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi = *vi - c * *bi;
            }
        }
        let len = dot(&v, &v).sqrt();
        if len > T::of(1e-6) {
            let unit: Vec<T> = v.into_iter().map(|x| x / len).collect();
            full.push(unit.clone());
            out.push(unit);
        }
    }
    out
}

/// Keep one constraint per ray direction (quantized tangent), at the lowest
/// level; higher levels of the same direction are implied.
fn prune_constraints<T: Real>(constraints: &mut Vec<Constraint<T>>) {
    use std::collections::HashMap;
    let mut by_dir: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut kept: Vec<Constraint<T>> = Vec::new();
    for c in constraints.drain(..) {
        let tangent = c.horofunction.ray_tangent();
        let key: Vec<i64> = tangent
            .upper_triangle()
            .iter()
            .map(|v| (v.as_f64() / 1e-9).round() as i64)
            .collect();
        match by_dir.get(&key) {
            Some(&k) => {
                if c.level < kept[k].level {
                    kept[k] = c;
                }
            }
            None => {
                by_dir.insert(key, kept.len());
                kept.push(c);
            }
        }
    }
    *constraints = kept;
}

/// Solver output.
#[derive(Debug, Clone)]
pub struct CenterResult<T> {
    pub point: SpdPoint<T>,
    /// Worst `b_i(point) - level_i` over the constraint set (in the frame the
    /// constraints were generated in).
    pub max_violation: T,
    /// `tr(log point)` in the constraint frame.
    pub objective: T,
    pub iterations: usize,
}

const PHASE1_CAP: usize = 100_000;
const PHASE2_BUDGET: usize = 2000;

pub fn solve_center<T: Real>(cs: &ConstraintSet<T>, tol: T) -> Result<CenterResult<T>> {
    solve_center_from(cs, tol, None)
}

/// Solve with an optional warm start (used by the nested-set audits).
pub fn solve_center_from<T: Real>(
    cs: &ConstraintSet<T>,
    tol: T,
    start: Option<&SpdPoint<T>>,
) -> Result<CenterResult<T>> {
    if cs.is_empty() {
        return Err(Error::InvalidParameter("empty constraint set".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let n = cs.dim();
    let mut x = match start {
        Some(p) => p.clone(),
        None => SpdPoint::identity(n)?,
    };
    let mut iterations = 0usize;

    // Phase 1: Polyak subgradient on F(p) = max_i (b_i(p) - r_i), aiming a
    // little inside the feasible region; the target offset shrinks on stall.
    let mut gamma = T::of(1e-2);
    let gamma_floor = (tol / T::of(10.0)).min(T::of(1e-9));
    let mut best_f = T::infinity();
    let mut best_x = x.clone();
    let mut since_improvement = 0usize;
    let mut feasible: Option<SpdPoint<T>> = None;
    while iterations < PHASE1_CAP {
        let (f, worst_idx) = cs.max_violation(&x)?;
        if f < best_f {
            best_f = f;
            best_x = x.clone();
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        if f <= T::zero() {
            feasible = Some(x.clone());
            break;
        }
        if since_improvement > 60 {
            gamma = (gamma / T::of(10.0)).max(gamma_floor);
            x = best_x.clone();
            since_improvement = 0;
        }
        let g = cs.constraints[worst_idx].horofunction.gradient(&x)?;
        let step = (f + gamma).min(T::one());
        let geo = Geodesic::new(x, g.scale(-T::one()))?;
        x = geo.point(step)?;
        iterations += 1;
    }
    let x0 = match feasible {
        Some(p) => p,
        None if best_f <= tol => best_x.clone(),
        None => {
            return Err(Error::Solver {
                iterations,
                best_violation: best_f.as_f64(),
            })
        }
    };

    // Phase 2: lower tr(log p) by scaling steps with feasibility
    // reprojection; accept only feasible strict improvements, within a fixed
    // candidate budget so degenerate (unbounded) constraint sets still
    // terminate.
    let mut x = x0;
    let mut best_obj = x.log_det();
    let mut best_x = x.clone();
    let mut step = T::of(0.25);
    for _ in 0..PHASE2_BUDGET {
        if step < T::of(1e-4) {
            break;
        }
        let dir = x.matrix().scale(-T::one());
        let geo = Geodesic::new(x.clone(), dir)?;
        let mut cand = geo.point(step)?;
        iterations += 1;
        let (mut f, mut worst_idx) = cs.max_violation(&cand)?;
        let mut inner = 0usize;
        while f > T::zero() && inner < 200 {
            let g = cs.constraints[worst_idx].horofunction.gradient(&cand)?;
            let s = (f + tol).min(T::of(0.5));
            let geo = Geodesic::new(cand, g.scale(-T::one()))?;
            cand = geo.point(s)?;
            let e = cs.max_violation(&cand)?;
            f = e.0;
            worst_idx = e.1;
            inner += 1;
            iterations += 1;
        }
        let mut accepted = false;
        if f <= T::zero() {
            let obj = cand.log_det();
            if obj < best_obj - tol {
                best_obj = obj;
                best_x = cand.clone();
                x = cand;
                accepted = true;
            }
        }
        if !accepted {
            step = step * T::of(0.5);
        }
    }

    let (max_violation, _) = cs.max_violation(&best_x)?;
    Ok(CenterResult {
        point: best_x,
        max_violation,
        objective: best_obj,
        iterations,
    })
}

/// Per-dimension default cap on the point count for subset enumeration.
pub fn default_subset_cap(n: usize) -> usize {
    match n {
        2 => 40,
        3 => 25,
        _ => 15,
    }
}

#[derive(Debug, Clone)]
pub struct CenterParams {
    pub tol: f64,
    pub grid_cap: usize,
    pub subset_cap: Option<usize>,
    pub origin: OriginPolicy,
    pub seed: u64,
}

impl Default for CenterParams {
    fn default() -> Self {
        CenterParams {
            tol: 1e-7,
            grid_cap: DEFAULT_GRID_CAP,
            subset_cap: None,
            origin: OriginPolicy::Auto,
            seed: 0,
        }
    }
}

/// Everything a caller needs to report about an approximate horo-center run.
#[derive(Debug, Clone)]
pub struct CenterRun<T> {
    /// `result.point` is mapped back to the input frame; violation and
    /// objective refer to the translated frame the constraints live in.
    pub result: CenterResult<T>,
    pub origin_shift: SpdPoint<T>,
    pub d_x: T,
    pub constraints_count: usize,
    pub grid_size: usize,
    pub seed: u64,
}

/// End-to-end eps-approximate horo-center: translate to the origin, build
/// the grid at step `eps / (C(n,2) 2 sqrt(2) sinh(d_X/sqrt(2)))`, generate
/// constraints, solve, and map the point back.
pub fn approx_horo_center<T: Real>(
    xs: &[SpdPoint<T>],
    epsilon: T,
    params: &CenterParams,
) -> Result<CenterRun<T>> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = xs[0].dim();
    if xs.len() < n + 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} points, got {}",
            n + 1,
            xs.len()
        )));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let cap = params.subset_cap.unwrap_or_else(|| default_subset_cap(n));
    if xs.len() > cap {
        return Err(Error::TooManyPoints {
            n_points: xs.len(),
            cap,
        });
    }

    let origin = origin_for(xs, params.origin)?;
    let shifted = shift_all(xs, &origin)?;
    let mut d_x = T::zero();
    for x in &shifted {
        d_x = d_x.max(x.dist_to_identity());
    }
    if d_x < T::of(1e-12) {
        d_x = T::zero();
    }

    let resolution = resolution_from_budget(epsilon, d_x, n)?;
    let grid = build_grid(n, &resolution, params.grid_cap)?;
    let constraints = generate_constraints(&shifted, &grid)?;
    let tol = T::of(params.tol);
    let solved = solve_center(&constraints, tol)?;

    // Map the point back through the inverse shift: q^{1/2} p q^{1/2}.
    let half = origin.power(T::of(0.5));
    let full = half.mul(&solved.point.matrix().to_square()).mul(&half);
    let (sym, _) = crate::spd::SymMatrix::from_square_symmetrized(&full)?;
    let mapped = SpdPoint::from_symmetric_lenient(sym)?;

    Ok(CenterRun {
        result: CenterResult {
            point: mapped,
            max_violation: solved.max_violation,
            objective: solved.objective,
            iterations: solved.iterations,
        },
        origin_shift: origin,
        d_x,
        constraints_count: constraints.len(),
        grid_size: grid.len(),
        seed: params.seed,
    })
}

/// Solve in the translated frame without mapping back; the tests that audit
/// constraint satisfaction work here.
pub fn approx_horo_center_frames<T: Real>(
    xs: &[SpdPoint<T>],
    epsilon: T,
    params: &CenterParams,
) -> Result<(CenterRun<T>, ConstraintSet<T>, Vec<SpdPoint<T>>, SpdPoint<T>)> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = xs[0].dim();
    let origin = origin_for(xs, params.origin)?;
    let shifted = shift_all(xs, &origin)?;
    let mut d_x = T::zero();
    for x in &shifted {
        d_x = d_x.max(x.dist_to_identity());
    }
    if d_x < T::of(1e-12) {
        d_x = T::zero();
    }
    let resolution = resolution_from_budget(epsilon, d_x, n)?;
    let grid = build_grid(n, &resolution, params.grid_cap)?;
    let constraints = generate_constraints(&shifted, &grid)?;
    let solved = solve_center(&constraints, T::of(params.tol))?;
    let hat = solved.point.clone();
    let half = origin.power(T::of(0.5));
    let full = half.mul(&solved.point.matrix().to_square()).mul(&half);
    let (sym, _) = crate::spd::SymMatrix::from_square_symmetrized(&full)?;
    let mapped = SpdPoint::from_symmetric_lenient(sym)?;
    let run = CenterRun {
        result: CenterResult {
            point: mapped,
            max_violation: solved.max_violation,
            objective: solved.objective,
            iterations: solved.iterations,
        },
        origin_shift: origin,
        d_x,
        constraints_count: constraints.len(),
        grid_size: grid.len(),
        seed: params.seed,
    };
    Ok((run, constraints, shifted, hat))
}
