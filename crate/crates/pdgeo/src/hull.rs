//! Construction of the eps-ball hull: a finite set of horoballs containing
//! the data whose horoextent along every geodesic ray through the origin
//! matches the data's extent up to `epsilon`.
//!
//! Pipeline: translate the data so a discrete 1-center sits at the identity,
//! build a direction grid from the Lipschitz resolution, then per grid flat
//! project the data into the flat's log chart, take the Euclidean convex
//! hull there, and turn each supporting halfspace into the horoball of the
//! matching ray. Emitted levels are exact suprema of the Busemann function
//! over the data, so containment and supportedness hold by construction.

use rayon::prelude::*;

use crate::chull::{self, Halfspace};
use crate::grid::{build_grid, grid_resolution, DEFAULT_GRID_CAP};
use crate::horo::{flat_part, Flat, Horoball, Horofunction, Orientation};
use crate::mat::SqMatrix;
use crate::scalar::Real;
use crate::spd::{metric_dist, translate_to_identity, SpdPoint};
use crate::{Error, Result};

/// Slack for hull membership tests.
pub const HULL_SLACK: f64 = 1e-9;

/// A point set projected into a flat's log chart.
#[derive(Debug, Clone)]
pub struct FlatChart<T> {
    pub flat: Flat<T>,
    /// One coordinate vector per input point, in input order.
    pub points: Vec<Vec<T>>,
}

/// Log-chart coordinates of every point of `xs` in `flat`: the entrywise log
/// of the diagonal factor of the horospherical decomposition.
pub fn project_to_flat<T: Real>(xs: &[SpdPoint<T>], flat: &Flat<T>) -> Result<FlatChart<T>> {
    let mut points = Vec::with_capacity(xs.len());
    for x in xs {
        if x.dim() != flat.dim() {
            return Err(Error::DimensionMismatch(x.dim(), flat.dim()));
        }
        let rotated = flat.rotation().rotate_sym_into(&x.matrix().to_square());
        let f = flat_part(rotated)?;
        points.push(f.into_iter().map(|v| v.ln()).collect());
    }
    Ok(FlatChart {
        flat: flat.clone(),
        points,
    })
}

/// Supporting halfspaces of the chart. Degenerate charts (affine rank below
/// n) are hulled inside their span; a rank-0 chart falls back to a direction
/// net at angular step `net_step`.
pub fn flat_convex_hull<T: Real>(chart: &FlatChart<T>, net_step: T) -> Vec<Halfspace<T>> {
    chull::hull_halfspaces(&chart.points, net_step)
}

/// Horoball dual to a chart halfspace: the Busemann function of the ray with
/// flat-frame direction `-normal`, at the exact supporting level over `xs`.
///
/// The direction is brought to canonical decreasing form by composing the
/// flat rotation with a signed permutation; normals with (numerically) tied
/// entries are minimally perturbed to restore the gap and flagged.
pub fn facet_to_horoball<T: Real>(
    halfspace: &Halfspace<T>,
    flat: &Flat<T>,
    xs: &[SpdPoint<T>],
) -> Result<(Horoball<T>, bool)> {
    let (horofunction, perturbed) = horofunction_for_normal(&halfspace.normal, flat)?;
    let mut level = -T::infinity();
    for x in xs {
        level = level.max(horofunction.busemann(x)?);
    }
    Ok((
        Horoball {
            horofunction,
            level,
        },
        perturbed,
    ))
}

/// Canonical horofunction whose Busemann function restricts, on the flat's
/// chart, to the linear functional `y -> <normal, y>`.
pub(crate) fn horofunction_for_normal<T: Real>(
    normal: &[T],
    flat: &Flat<T>,
) -> Result<(Horofunction<T>, bool)> {
    let n = flat.dim();
    if normal.len() != n {
        return Err(Error::DimensionMismatch(normal.len(), n));
    }
    let mut w: Vec<T> = normal.iter().map(|u| -*u).collect();
    let norm: T = w.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if !(norm > T::zero()) {
        return Err(Error::InvalidDirection("zero facet normal".into()));
    }
    for v in w.iter_mut() {
        *v = *v / norm;
    }

    // Sort descending, remembering where each sorted entry came from.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut sorted: Vec<T> = order.iter().map(|&k| w[k]).collect();

    // Tied entries leave the canonical class; spread them minimally.
    let gap = T::of(crate::horo::DIRECTION_GAP * 10.0);
    let mut perturbed = false;
    for k in 1..n {
        if sorted[k - 1] - sorted[k] < gap {
            sorted[k] = sorted[k - 1] - gap;
            perturbed = true;
        }
    }
    if perturbed {
        let len: T = sorted.iter().map(|v| *v * *v).sum::<T>().sqrt();
        for v in sorted.iter_mut() {
            *v = *v / len;
        }
        // Renormalization can re-shrink a gap below the constructor's floor;
        // one more spread pass keeps it safely above.
        for k in 1..n {
            if sorted[k - 1] - sorted[k] < T::of(crate::horo::DIRECTION_GAP * 2.0) {
                sorted[k] = sorted[k - 1] - gap;
            }
        }
    }

    // Signed permutation carrying diag(sorted) onto diag(w), det +1.
    let mut perm = SqMatrix::zeros(n);
    for (sorted_pos, &orig) in order.iter().enumerate() {
        perm[(orig, sorted_pos)] = T::one();
    }
    if perm.det() < T::zero() {
        perm.scale_col(n - 1, -T::one());
    }
    let frame = flat.rotation().mul(&perm);
    let horofunction = Horofunction::new(Flat::new(frame)?, sorted, Orientation::Forward)?;
    Ok((horofunction, perturbed))
}

/// Where a hull horoball came from.
#[derive(Debug, Clone)]
pub struct Provenance {
    /// Index into the direction grid.
    pub flat: usize,
    /// Input-point indices supporting the originating facet.
    pub vertices: Vec<usize>,
    /// Direction was perturbed away from tied entries.
    pub perturbed: bool,
}

#[derive(Debug, Clone)]
pub struct HullBall<T> {
    pub ball: Horoball<T>,
    pub provenance: Provenance,
}

/// How the origin of the hull frame is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginPolicy {
    /// Discrete 1-center: the input point minimizing the maximum distance to
    /// the others (a certified member of the convex hull).
    Auto,
    /// A specific input point.
    Index(usize),
    /// No translation; the data is used as-is.
    None,
}

#[derive(Debug, Clone)]
pub struct HullParams {
    pub grid_cap: usize,
    pub origin: OriginPolicy,
}

impl Default for HullParams {
    fn default() -> Self {
        HullParams {
            grid_cap: DEFAULT_GRID_CAP,
            origin: OriginPolicy::Auto,
        }
    }
}

/// Finite horoball intersection approximating the ball hull of a point set.
#[derive(Debug, Clone)]
pub struct BallHull<T> {
    /// The point translated to the identity before the build.
    pub origin_shift: SpdPoint<T>,
    pub epsilon: T,
    pub d_x: T,
    pub balls: Vec<HullBall<T>>,
    /// Cells in the direction grid the build used.
    pub grid_len: usize,
}

/// Discrete 1-center of the set: index minimizing the max distance.
pub fn one_center_index<T: Real>(xs: &[SpdPoint<T>]) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut best = (0usize, T::infinity());
    for i in 0..xs.len() {
        let mut radius = T::zero();
        for j in 0..xs.len() {
            if i != j {
                radius = radius.max(metric_dist(&xs[i], &xs[j])?);
            }
        }
        if radius < best.1 {
            best = (i, radius);
        }
    }
    Ok(best.0)
}

/// Origin point selected by the policy (the point carried to the identity).
pub fn origin_for<T: Real>(xs: &[SpdPoint<T>], policy: OriginPolicy) -> Result<SpdPoint<T>> {
    match policy {
        OriginPolicy::Auto => Ok(xs[one_center_index(xs)?].clone()),
        OriginPolicy::Index(i) => xs.get(i).cloned().ok_or(Error::InvalidParameter(format!(
            "origin index {i} out of range for {} points",
            xs.len()
        ))),
        OriginPolicy::None => SpdPoint::identity(xs[0].dim()),
    }
}

/// Translate the whole configuration so `origin` sits at the identity.
pub(crate) fn shift_all<T: Real>(
    xs: &[SpdPoint<T>],
    origin: &SpdPoint<T>,
) -> Result<Vec<SpdPoint<T>>> {
    xs.iter().map(|x| translate_to_identity(origin, x)).collect()
}

pub fn build_eps_ball_hull<T: Real>(xs: &[SpdPoint<T>], epsilon: T) -> Result<BallHull<T>> {
    build_eps_ball_hull_with(xs, epsilon, &HullParams::default())
}

pub fn build_eps_ball_hull_with<T: Real>(
    xs: &[SpdPoint<T>],
    epsilon: T,
    params: &HullParams,
) -> Result<BallHull<T>> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let n = xs[0].dim();
    let origin = origin_for(xs, params.origin)?;
    let shifted = shift_all(xs, &origin)?;
    let mut d_x = T::zero();
    for x in &shifted {
        d_x = d_x.max(x.dist_to_identity());
    }
    // Points coinciding with the origin up to rounding count as distance 0.
    if d_x < T::of(1e-12) {
        d_x = T::zero();
    }

    let resolution = grid_resolution(epsilon, d_x, n)?;
    let grid = build_grid(n, &resolution, params.grid_cap).map_err(|e| match e {
        Error::GridCap { cells, cap, .. } => Error::GridCap {
            cells,
            cap,
            epsilon_fit: Some(epsilon_fitting_cap::<T>(d_x, n, cap)),
        },
        other => other,
    })?;

    let net_step = grid.step().unwrap_or_else(|| T::of(0.1));
    let per_flat: Vec<Result<Vec<HullBall<T>>>> = grid
        .flats()
        .par_iter()
        .enumerate()
        .map(|(flat_idx, flat)| {
            let chart = project_to_flat(&shifted, flat)?;
            let facets = flat_convex_hull(&chart, net_step);
            let mut balls = Vec::with_capacity(facets.len());
            for facet in &facets {
                let (ball, perturbed) = facet_to_horoball(facet, flat, &shifted)?;
                balls.push(HullBall {
                    ball,
                    provenance: Provenance {
                        flat: flat_idx,
                        vertices: facet.support.clone(),
                        perturbed,
                    },
                });
            }
            Ok(balls)
        })
        .collect();

    let mut balls: Vec<HullBall<T>> = Vec::new();
    for group in per_flat {
        balls.extend(group?);
    }
    dedup_balls(&mut balls);

    Ok(BallHull {
        origin_shift: origin,
        epsilon,
        d_x,
        balls,
        grid_len: grid.len(),
    })
}

/// Largest epsilon the cap would reject at this `d_x` (n = 2 arithmetic is
/// exact; higher n uses the same period bound per plane).
fn epsilon_fitting_cap<T: Real>(d_x: T, n: usize, cap: usize) -> f64 {
    let sqrt2 = std::f64::consts::SQRT_2;
    let pairs = (n * (n - 1) / 2) as f64;
    let sinh = (d_x.as_f64() / sqrt2).sinh();
    // cells ~ (2 pi / delta)^planes with delta = (eps/2)/(2 pairs sqrt2 sinh)
    let per_plane = (cap as f64).powf(1.0 / pairs);
    let delta = std::f64::consts::TAU / per_plane.max(1.0);
    delta * 2.0 * 2.0 * pairs * sqrt2 * sinh
}

/// Merge horoballs equal up to 1e-9 in (ray tangent, level), keeping the
/// first provenance. Adjacent grid flats produce near-duplicate supports.
fn dedup_balls<T: Real>(balls: &mut Vec<HullBall<T>>) {
    use std::collections::HashMap;
    let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
    let mut kept = Vec::with_capacity(balls.len());
    for b in balls.drain(..) {
        let tangent = b.ball.horofunction.ray_tangent();
        let mut key: Vec<i64> = tangent
            .upper_triangle()
            .iter()
            .map(|v| (v.as_f64() / 1e-9).round() as i64)
            .collect();
        key.push((b.ball.level.as_f64() / 1e-9).round() as i64);
        if seen.insert(key, ()).is_none() {
            kept.push(b);
        }
    }
    *balls = kept;
}

/// Membership in the hull: after applying the origin shift, `b(p) <= level +
/// 1e-9` for every horoball.
pub fn hull_contains<T: Real>(hull: &BallHull<T>, p: &SpdPoint<T>) -> Result<bool> {
    if p.dim() != hull.origin_shift.dim() {
        return Err(Error::DimensionMismatch(p.dim(), hull.origin_shift.dim()));
    }
    let shifted = translate_to_identity(&hull.origin_shift, p)?;
    let slack = T::of(HULL_SLACK);
    for b in &hull.balls {
        if b.ball.horofunction.busemann(&shifted)? > b.ball.level + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horo::horoextent_dir;
    use crate::spd::SymMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> SpdPoint<f64> {
        SpdPoint::from_diag(d).unwrap()
    }

    #[test]
    fn project_identity_is_zero() {
        let chart = project_to_flat(&[SpdPoint::<f64>::identity(2).unwrap()], &Flat::identity(2)).unwrap();
        assert_eq!(chart.points.len(), 1);
        assert!(chart.points[0].iter().all(|v| v.abs() < 1e-14));

        let chart = project_to_flat(&[diag(&[std::f64::consts::E, 1.0])], &Flat::identity(2)).unwrap();
        assert!((chart.points[0][0] - 1.0).abs() < 1e-14);
        assert!(chart.points[0][1].abs() < 1e-14);
    }

    #[test]
    fn chart_is_isometric_on_commuting_family() {
        // Points sharing the identity eigenbasis: chart distances match the
        // manifold metric.
        let xs = vec![diag(&[1.0, 1.0]), diag(&[2.0, 0.5]), diag(&[0.7, 1.9])];
        let chart = project_to_flat(&xs, &Flat::identity(2)).unwrap();
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let dm = metric_dist(&xs[i], &xs[j]).unwrap();
                let dc: f64 = chart.points[i]
                    .iter()
                    .zip(chart.points[j].iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                assert!((dm - dc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn facet_dual_hand_case() {
        // u = (0,-1), offset 0 in the identity flat.
        let xs = vec![diag(&[std::f64::consts::E, 1.0]), diag(&[1.0, 1.0])];
        let hs = Halfspace {
            normal: vec![0.0, -1.0],
            offset: 0.0,
            support: vec![0],
        };
        let (ball, perturbed) = facet_to_horoball(&hs, &Flat::identity(2), &xs).unwrap();
        assert!(!perturbed);
        // Canonical direction is (1, 0): -u sorted descending.
        assert!((ball.horofunction.direction()[0] - 1.0).abs() < 1e-12);
        assert!(ball.horofunction.direction()[1].abs() < 1e-12);
        assert!(ball.level.abs() < 1e-12);
        assert!(ball.contains(&xs[0]).unwrap());
        assert!(ball.contains(&xs[1]).unwrap());
        // Scaling diag(1, e) down the excluded side leaves the ball.
        let outside = diag(&[(-10.0f64).exp(), (-9.0f64).exp()]);
        assert!(!ball.contains(&outside).unwrap());
    }

    #[test]
    fn facet_dual_handles_tied_normals() {
        let s = 1.0 / 2.0f64.sqrt();
        let xs = vec![diag(&[1.2, 0.9]), diag(&[0.8, 1.1])];
        let hs = Halfspace {
            normal: vec![-s, -s],
            offset: 0.0,
            support: vec![0],
        };
        let (ball, perturbed) = facet_to_horoball(&hs, &Flat::identity(2), &xs).unwrap();
        assert!(perturbed);
        // Containment at the exact supporting level regardless.
        assert!(ball.contains(&xs[0]).unwrap());
        assert!(ball.contains(&xs[1]).unwrap());
    }

    #[test]
    fn membership_equals_halfspace_membership_on_diagonal_cloud() {
        // Within a flat the Busemann function is the linear functional, so
        // ball membership must match chart membership for diagonal points,
        // inside and outside alike.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sample_diag = |rng: &mut ChaCha8Rng| {
            let a: f64 = rand::Rng::gen_range(rng, -1.5..1.5);
            let b: f64 = rand::Rng::gen_range(rng, -1.5..1.5);
            diag(&[a.exp(), b.exp()])
        };
        let xs: Vec<SpdPoint<f64>> = (0..12).map(|_| sample_diag(&mut rng)).collect();
        let flat = Flat::identity(2);
        let chart = project_to_flat(&xs, &flat).unwrap();
        let facets = flat_convex_hull(&chart, 0.1);
        assert!(!facets.is_empty());
        let balls: Vec<(Halfspace<f64>, Horoball<f64>)> = facets
            .into_iter()
            .map(|hs| {
                let (ball, _) = facet_to_horoball(&hs, &flat, &xs).unwrap();
                (hs, ball)
            })
            .collect();
        for _ in 0..1000 {
            let probe = sample_diag(&mut rng);
            let y = vec![probe.get(0, 0).ln(), probe.get(1, 1).ln()];
            for (hs, ball) in &balls {
                let in_half =
                    y.iter().zip(hs.normal.iter()).map(|(y, u)| y * u).sum::<f64>()
                        <= ball.level + 1e-9;
                // Facet offsets equal the supporting level for in-flat data,
                // so the halfspace at the ball's level is the dual object.
                let in_ball = ball.horofunction.busemann(&probe).unwrap() <= ball.level + 1e-9;
                assert_eq!(in_half, in_ball);
            }
        }
    }

    #[test]
    fn horosphere_points_project_onto_the_hyperplane() {
        // Walk to the horosphere along geodesics from inside points; the
        // chart coordinates of the crossing lie on the dual hyperplane.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let xs: Vec<SpdPoint<f64>> = (0..6)
            .map(|_| crate::oracle::random_spd(2, 1.0, &mut rng).unwrap())
            .collect();
        let flat = Flat::identity(2);
        let chart = project_to_flat(&xs, &flat).unwrap();
        let facets = flat_convex_hull(&chart, 0.1);
        let (ball, _) = facet_to_horoball(&facets[0], &flat, &xs).unwrap();
        let (frame_rotation, frame_dir) = ball.horofunction.eval_frame();
        let frame = Flat::new(frame_rotation.clone()).unwrap();
        for x in &xs {
            let b0 = ball.horofunction.busemann(x).unwrap();
            if b0 >= ball.level - 1e-12 {
                continue;
            }
            // March along the horofunction's uphill gradient to b = level.
            let grad = ball.horofunction.gradient(x).unwrap();
            let geo = crate::spd::Geodesic::new(x.clone(), grad.scale(-1.0)).unwrap();
            // b decreases at unit speed along -grad, so b = level is reached
            // at parameter b0 - level going backwards.
            let crossing = geo.point(b0 - ball.level).unwrap();
            let b_cross = ball.horofunction.busemann(&crossing).unwrap();
            assert!((b_cross - ball.level).abs() < 1e-7);
            let y = crate::horo::horo_project(&crossing, &frame)
                .unwrap()
                .log_coordinates();
            let lin: f64 = frame_dir.iter().zip(y.iter()).map(|(a, y)| -a * y).sum();
            assert!(
                (lin - ball.level).abs() < 1e-7,
                "horosphere point off the hyperplane by {:e}",
                lin - ball.level
            );
        }
    }

    #[test]
    fn single_point_hull_levels_zero() {
        let hull = build_eps_ball_hull(&[diag(&[2.0, 0.5])], 0.1).unwrap();
        assert_eq!(hull.grid_len, 1);
        assert!(!hull.balls.is_empty());
        for b in &hull.balls {
            assert!(b.ball.level.abs() < 1e-9, "level {}", b.ball.level);
        }
        assert!(hull_contains(&hull, &diag(&[2.0, 0.5])).unwrap());
    }

    #[test]
    fn commuting_pair_restricted_to_their_flat_gives_two_caps() {
        let xs = vec![diag(&[1.0, 1.0]), diag(&[3.0, 0.25])];
        let hull = build_eps_ball_hull(&[xs[0].clone(), xs[1].clone()], 0.2).unwrap();
        // The auto origin is one of the inputs; the shifted pair stays
        // diagonal, so the identity-rotation flat (index 0) sees a collinear
        // chart with exactly two supporting halfspaces.
        let flat0: Vec<&HullBall<f64>> =
            hull.balls.iter().filter(|b| b.provenance.flat == 0).collect();
        assert_eq!(flat0.len(), 2);
        for x in &xs {
            assert!(hull_contains(&hull, x).unwrap());
        }
    }

    #[test]
    fn hull_contains_inputs_and_midpoints_not_outliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let xs: Vec<SpdPoint<f64>> = (0..8)
            .map(|_| crate::oracle::random_spd(2, 1.0, &mut rng).unwrap())
            .collect();
        let hull = build_eps_ball_hull(&xs, 0.25).unwrap();
        for b in &hull.balls {
            // Supportedness: some input touches the level.
            let shifted = shift_all(&xs, &hull.origin_shift).unwrap();
            let max = shifted
                .iter()
                .map(|x| b.ball.horofunction.busemann(x).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((max - b.ball.level).abs() < 1e-9);
        }
        for x in &xs {
            assert!(hull_contains(&hull, x).unwrap());
        }
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let m = crate::spd::interpolate(&xs[i], &xs[j], 0.5).unwrap();
                assert!(hull_contains(&hull, &m).unwrap());
            }
        }
        // A point far along a grid direction is excluded.
        let shifted = shift_all(&xs, &hull.origin_shift).unwrap();
        let mut d_x = 0.0f64;
        for x in &shifted {
            d_x = d_x.max(x.dist_to_identity());
        }
        let tangent = SymMatrix::from_diag(&[1.0 / 2.0f64.sqrt(), -1.0 / 2.0f64.sqrt()]).unwrap();
        let ray = crate::spd::Geodesic::new(SpdPoint::identity(2).unwrap(), tangent).unwrap();
        let far = ray.point(d_x + 1.0).unwrap();
        // Map back through the origin shift so hull_contains sees the raw frame.
        let half = hull.origin_shift.power(0.5);
        let raw_full = half.mul(&far.matrix().to_square()).mul(&half);
        let (raw_sym, _) = SymMatrix::from_square_symmetrized(&raw_full).unwrap();
        let far_raw = SpdPoint::new(raw_sym).unwrap();
        assert!(!hull_contains(&hull, &far_raw).unwrap());
    }

    #[test]
    fn grid_direction_extents_are_exact() {
        // For directions inside grid flats, the supporting levels from the
        // chart hull vertices reproduce max busemann exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<SpdPoint<f64>> = (0..9)
            .map(|_| crate::oracle::random_spd(2, 1.2, &mut rng).unwrap())
            .collect();
        let origin = origin_for(&xs, OriginPolicy::Auto).unwrap();
        let shifted = shift_all(&xs, &origin).unwrap();
        let mut d_x = 0.0f64;
        for x in &shifted {
            d_x = d_x.max(x.dist_to_identity());
        }
        let resolution = grid_resolution(0.3, d_x, 2).unwrap();
        let grid = build_grid(2, &resolution, 100_000).unwrap();
        for flat in grid.flats().iter().step_by(7) {
            let chart = project_to_flat(&shifted, flat).unwrap();
            let facets = flat_convex_hull(&chart, 0.1);
            let mut vertices: Vec<usize> = facets.iter().flat_map(|f| f.support.clone()).collect();
            vertices.sort_unstable();
            vertices.dedup();
            for _ in 0..10 {
                let dir = crate::oracle::random_direction::<f64>(2, 1e-3, &mut rng);
                for orientation in [Orientation::Forward, Orientation::Reverse] {
                    let h = Horofunction::new(flat.clone(), dir.clone(), orientation).unwrap();
                    let max_all = shifted
                        .iter()
                        .map(|x| h.busemann(x).unwrap())
                        .fold(f64::NEG_INFINITY, f64::max);
                    // Support over hull vertices only, evaluated in the chart
                    // of the horofunction's own frame: equals -<a_eval, y>.
                    let max_vertices = vertices
                        .iter()
                        .map(|&k| h.busemann(&shifted[k]).unwrap())
                        .fold(f64::NEG_INFINITY, f64::max);
                    assert!(
                        (max_all - max_vertices).abs() < 1e-9,
                        "direction support must be attained at hull vertices"
                    );
                }
            }
        }
        // And the horoextent along those directions matches the vertex data.
        let flat = &grid.flats()[0];
        let dir = vec![0.8, -0.6];
        let ext = horoextent_dir(flat, &dir, &shifted).unwrap();
        assert!(ext >= 0.0);
    }

    #[test]
    fn grid_cap_error_carries_epsilon_hint() {
        let xs = vec![diag(&[4.0, 0.2]), diag(&[0.3, 3.0]), diag(&[1.0, 1.0])];
        let err = build_eps_ball_hull_with(
            &xs,
            1e-4,
            &HullParams {
                grid_cap: 64,
                origin: OriginPolicy::Auto,
            },
        )
        .unwrap_err();
        match err {
            Error::GridCap { epsilon_fit, .. } => assert!(epsilon_fit.unwrap() > 1e-4),
            other => panic!("expected GridCap, got {other:?}"),
        }
    }
}
