//! Supporting-halfspace enumeration for small point clouds in low dimension.
//!
//! The hull construction only ever needs the outer description: a set of
//! halfspaces `<u, y> <= b` with unit normals, each supported by at least one
//! point, jointly containing the cloud, and equal to the facet set when the
//! cloud is full-dimensional. Dimensions in play are tiny (the flat chart of
//! PD(n) is R^n with n <= 8), so the algorithms favor determinism:
//! monotone chain for 2-D, incremental face walking for 3-D, supporting
//! hyperplane enumeration above that.
//!
//! Degenerate clouds (affine rank below the ambient dimension) are reduced to
//! their affine span and hulled there; a rank-0 cloud (all points equal)
//! falls back to a direction net, one touching halfspace per net direction.

use crate::scalar::Real;

/// A supporting halfspace `{ y : <normal, y> <= offset }` with the indices of
/// the points attaining the offset.
#[derive(Debug, Clone)]
pub struct Halfspace<T> {
    pub normal: Vec<T>,
    pub offset: T,
    pub support: Vec<usize>,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b.iter()).map(|(x, y)| *x * *y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b.iter()).map(|(x, y)| *x - *y).collect()
}

/// Exact support data for a direction: offset and attaining indices.
fn supported<T: Real>(points: &[Vec<T>], normal: &[T]) -> (T, Vec<usize>) {
    let mut best = -T::infinity();
    for p in points {
        let v = dot(normal, p);
        if v > best {
            best = v;
        }
    }
    let tol = T::of(1e-9) * (T::one() + best.abs());
    let support = points
        .iter()
        .enumerate()
        .filter(|(_, p)| dot(normal, p) >= best - tol)
        .map(|(k, _)| k)
        .collect();
    (best, support)
}

/// Orthonormal basis of the affine span of the cloud, with a relative rank
/// tolerance. Returns (base point index 0 coordinates, basis vectors).
pub fn affine_span<T: Real>(points: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let origin = points[0].clone();
    let dim = origin.len();
    let mut scale = T::zero();
    for p in points {
        scale = scale.max(norm(&sub(p, &origin)));
    }
    let tol = T::of(1e-9) * (scale + T::one());
    let mut basis: Vec<Vec<T>> = Vec::new();
    for p in points.iter().skip(1) {
        if basis.len() == dim {
            break;
        }
        let mut v = sub(p, &origin);
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi = *vi - c * *bi;
            }
        }
        let len = norm(&v);
        if len > tol {
            for vi in v.iter_mut() {
                *vi = *vi / len;
            }
            basis.push(v);
        }
    }
    (origin, basis)
}

/// Supporting halfspaces of a point cloud. `net_step` is the angular step of
/// the direction net used for rank-0 clouds.
pub fn hull_halfspaces<T: Real>(points: &[Vec<T>], net_step: T) -> Vec<Halfspace<T>> {
    if points.is_empty() {
        return Vec::new();
    }
    let dim = points[0].len();
    let (origin, basis) = affine_span(points);
    let rank = basis.len();

    if rank == 0 {
        // Single distinct point: one touching halfspace per net direction.
        return direction_net(dim, net_step)
            .into_iter()
            .map(|u| {
                let (offset, support) = supported(points, &u);
                Halfspace {
                    normal: u,
                    offset,
                    support,
                }
            })
            .collect();
    }

    let halfspaces_in_span = if rank == dim {
        full_rank_hull(points)
    } else {
        // Hull inside the span, then lift the normals back.
        let reduced: Vec<Vec<T>> = points
            .iter()
            .map(|p| {
                let d = sub(p, &origin);
                basis.iter().map(|b| dot(&d, b)).collect()
            })
            .collect();
        let inner = full_rank_hull(&reduced);
        inner
            .into_iter()
            .map(|h| {
                let mut normal = vec![T::zero(); dim];
                for (c, b) in h.normal.iter().zip(basis.iter()) {
                    for (nk, bk) in normal.iter_mut().zip(b.iter()) {
                        *nk = *nk + *c * *bk;
                    }
                }
                Halfspace {
                    normal,
                    offset: T::zero(), // recomputed below
                    support: h.support,
                }
            })
            .collect()
    };

    // Re-anchor every halfspace on the original cloud: exact offsets, exact
    // support sets, unit normals.
    let mut out: Vec<Halfspace<T>> = Vec::new();
    for mut h in halfspaces_in_span {
        let len = norm(&h.normal);
        if !(len > T::zero()) {
            continue;
        }
        for v in h.normal.iter_mut() {
            *v = *v / len;
        }
        let (offset, support) = supported(points, &h.normal);
        out.push(Halfspace {
            normal: h.normal,
            offset,
            support,
        });
    }
    dedup_halfspaces(&mut out);
    out
}

fn dedup_halfspaces<T: Real>(hs: &mut Vec<Halfspace<T>>) {
    let mut kept: Vec<Halfspace<T>> = Vec::with_capacity(hs.len());
    'outer: for h in hs.drain(..) {
        for k in &kept {
            let close = h
                .normal
                .iter()
                .zip(k.normal.iter())
                .all(|(a, b)| (*a - *b).abs() < T::of(1e-9))
                && (h.offset - k.offset).abs() < T::of(1e-9);
            if close {
                continue 'outer;
            }
        }
        kept.push(h);
    }
    *hs = kept;
}

fn full_rank_hull<T: Real>(points: &[Vec<T>]) -> Vec<Halfspace<T>> {
    match points[0].len() {
        1 => hull_1d(points),
        2 => hull_2d(points),
        3 => hull_3d(points),
        _ => hull_nd(points),
    }
}

fn hull_1d<T: Real>(points: &[Vec<T>]) -> Vec<Halfspace<T>> {
    [T::one(), -T::one()]
        .into_iter()
        .map(|s| {
            let normal = vec![s];
            let (offset, support) = supported(points, &normal);
            Halfspace {
                normal,
                offset,
                support,
            }
        })
        .collect()
}

/// Andrew's monotone chain; emits one halfspace per hull edge.
fn hull_2d<T: Real>(points: &[Vec<T>]) -> Vec<Halfspace<T>> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .partial_cmp(&points[b][0])
            .unwrap()
            .then(points[a][1].partial_cmp(&points[b][1]).unwrap())
    });
    idx.dedup_by(|&mut a, &mut b| {
        (points[a][0] - points[b][0]).abs() < T::of(1e-12)
            && (points[a][1] - points[b][1]).abs() < T::of(1e-12)
    });

    let cross = |o: usize, a: usize, b: usize| -> T {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };

    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= T::zero()
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= T::zero()
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    let ring: Vec<usize> = lower.into_iter().chain(upper).collect();

    let mut out = Vec::with_capacity(ring.len());
    for k in 0..ring.len() {
        let a = ring[k];
        let b = ring[(k + 1) % ring.len()];
        // Outward normal of the CCW edge a -> b.
        let e = sub(&points[b], &points[a]);
        let normal = vec![e[1], -e[0]];
        let len = norm(&normal);
        if !(len > T::zero()) {
            continue;
        }
        out.push(Halfspace {
            normal: normal.into_iter().map(|v| v / len).collect(),
            offset: T::zero(),
            support: vec![a, b],
        });
    }
    out
}

/// Incremental 3-D hull: maintain outward-oriented triangles, delete visible
/// faces, stitch the horizon.
fn hull_3d<T: Real>(points: &[Vec<T>]) -> Vec<Halfspace<T>> {
    let n = points.len();
    let scale = points
        .iter()
        .map(|p| norm(p))
        .fold(T::zero(), T::max)
        .max(T::one());
    let tol = T::of(1e-9) * scale;

    // Seed tetrahedron from the affine-span construction order.
    let (_, basis) = affine_span(points);
    debug_assert_eq!(basis.len(), 3);
    let mut seed = vec![0usize];
    {
        let origin = &points[0];
        let mut picked: Vec<Vec<T>> = Vec::new();
        for (k, p) in points.iter().enumerate().skip(1) {
            if seed.len() == 4 {
                break;
            }
            let mut v = sub(p, origin);
            for b in &picked {
                let c = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b.iter()) {
                    *vi = *vi - c * *bi;
                }
            }
            let len = norm(&v);
            if len > tol {
                for vi in v.iter_mut() {
                    *vi = *vi / len;
                }
                picked.push(v);
                seed.push(k);
            }
        }
    }
    debug_assert_eq!(seed.len(), 4);

    #[derive(Clone)]
    struct Face<T> {
        v: [usize; 3],
        normal: Vec<T>,
        offset: T,
    }

    let make_face = |a: usize, b: usize, c: usize, inside: &[T]| -> Face<T> {
        let u = sub(&points[b], &points[a]);
        let w = sub(&points[c], &points[a]);
        let mut normal = vec![
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ];
        let len = norm(&normal);
        for v in normal.iter_mut() {
            *v = *v / len;
        }
        let mut offset = dot(&normal, &points[a]);
        if dot(&normal, inside) > offset {
            for v in normal.iter_mut() {
                *v = -*v;
            }
            offset = -offset;
        }
        Face {
            v: [a, b, c],
            normal,
            offset,
        }
    };

    // Interior reference point: tetrahedron centroid.
    let inside: Vec<T> = (0..3)
        .map(|k| {
            seed.iter()
                .map(|&i| points[i][k])
                .fold(T::zero(), |a, b| a + b)
                / T::of(4.0)
        })
        .collect();

    let mut faces = vec![
        make_face(seed[0], seed[1], seed[2], &inside),
        make_face(seed[0], seed[1], seed[3], &inside),
        make_face(seed[0], seed[2], seed[3], &inside),
        make_face(seed[1], seed[2], seed[3], &inside),
    ];

    for p in 0..n {
        if seed.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = (0..faces.len())
            .filter(|&f| dot(&faces[f].normal, &points[p]) > faces[f].offset + tol)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // Horizon: edges of visible faces shared with an invisible face.
        use std::collections::HashMap;
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for &f in &visible {
            let v = faces[f].v;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[0], v[2])] {
                let key = if a < b { (a, b) } else { (b, a) };
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let horizon: Vec<(usize, usize)> = edge_count
            .iter()
            .filter(|(_, &c)| c == 1)
            .map(|(&e, _)| e)
            .collect();
        let visible_set: std::collections::HashSet<usize> = visible.iter().cloned().collect();
        let mut next: Vec<Face<T>> = faces
            .iter()
            .enumerate()
            .filter(|(k, _)| !visible_set.contains(k))
            .map(|(_, f)| f.clone())
            .collect();
        for (a, b) in horizon {
            next.push(make_face(a, b, p, &inside));
        }
        faces = next;
    }

    faces
        .into_iter()
        .map(|f| Halfspace {
            normal: f.normal,
            offset: f.offset,
            support: f.v.to_vec(),
        })
        .collect()
}

/// Supporting-hyperplane enumeration over all d-subsets; O(N^{d+1}) but the
/// call sites are desk scale.
fn hull_nd<T: Real>(points: &[Vec<T>]) -> Vec<Halfspace<T>> {
    let dim = points[0].len();
    let n = points.len();
    let scale = points
        .iter()
        .map(|p| norm(p))
        .fold(T::zero(), T::max)
        .max(T::one());
    let tol = T::of(1e-9) * scale;
    let mut out: Vec<Halfspace<T>> = Vec::new();
    let mut subset: Vec<usize> = (0..dim).collect();
    loop {
        if let Some(normal) = hyperplane_normal(points, &subset, tol) {
            for sign in [T::one(), -T::one()] {
                let u: Vec<T> = normal.iter().map(|v| *v * sign).collect();
                let offset = dot(&u, &points[subset[0]]);
                if points.iter().all(|p| dot(&u, p) <= offset + tol) {
                    out.push(Halfspace {
                        normal: u,
                        offset,
                        support: subset.clone(),
                    });
                }
            }
        }
        // Next combination.
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if subset[k] + 1 <= n - (dim - k) {
                subset[k] += 1;
                for m in k + 1..dim {
                    subset[m] = subset[m - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Unit normal of the hyperplane through the given affinely independent
/// points, or `None` when they are (numerically) dependent.
pub(crate) fn hyperplane_normal<T: Real>(
    points: &[Vec<T>],
    subset: &[usize],
    tol: T,
) -> Option<Vec<T>> {
    let dim = points[0].len();
    debug_assert_eq!(subset.len(), dim);
    let origin = &points[subset[0]];
    // Orthonormalize the differences, then take any unit vector orthogonal to
    // all of them.
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(dim - 1);
    for &k in subset.iter().skip(1) {
        let mut v = sub(&points[k], origin);
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi = *vi - c * *bi;
            }
        }
        let len = norm(&v);
        if len <= tol {
            return None;
        }
        for vi in v.iter_mut() {
            *vi = *vi / len;
        }
        basis.push(v);
    }
    // Complete the basis: orthogonalize coordinate axes.
    for axis in 0..dim {
        let mut v = vec![T::zero(); dim];
        v[axis] = T::one();
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b.iter()) {
                *vi = *vi - c * *bi;
            }
        }
        let len = norm(&v);
        if len > T::of(1e-6) {
            for vi in v.iter_mut() {
                *vi = *vi / len;
            }
            return Some(v);
        }
    }
    None
}

/// Deterministic net of unit directions with angular resolution about `step`.
pub fn direction_net<T: Real>(dim: usize, step: T) -> Vec<Vec<T>> {
    let step = step.min(T::of(0.5)).max(T::of(1e-3));
    match dim {
        1 => vec![vec![T::one()], vec![-T::one()]],
        2 => {
            let tau = T::of(std::f64::consts::TAU);
            let count = (tau / step).ceil().as_f64() as usize;
            (0..count)
                .map(|k| {
                    let a = T::of(k as f64) * tau / T::of(count as f64);
                    vec![a.cos(), a.sin()]
                })
                .collect()
        }
        _ => {
            // Polar product net: u = (cos t, sin t * v) with v a net on the
            // (dim-1)-sphere.
            let pi = T::of(std::f64::consts::PI);
            let rings = ((pi / step).ceil().as_f64() as usize).max(2);
            let mut out = Vec::new();
            for r in 0..=rings {
                let t = pi * T::of(r as f64) / T::of(rings as f64);
                let (ct, st) = (t.cos(), t.sin());
                if r == 0 || r == rings {
                    let mut u = vec![T::zero(); dim];
                    u[0] = ct;
                    out.push(u);
                    continue;
                }
                for v in direction_net::<T>(dim - 1, step / st.max(T::of(0.2))) {
                    let mut u = Vec::with_capacity(dim);
                    u.push(ct);
                    u.extend(v.into_iter().map(|x| x * st));
                    out.push(u);
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains_normal(hs: &[Halfspace<f64>], u: &[f64], beta: f64) -> bool {
        hs.iter().any(|h| {
            h.normal
                .iter()
                .zip(u.iter())
                .all(|(a, b)| (a - b).abs() < 1e-9)
                && (h.offset - beta).abs() < 1e-9
        })
    }

    #[test]
    fn triangle_facets_by_hand() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]];
        let hs = hull_halfspaces(&pts, 0.1);
        assert_eq!(hs.len(), 3);
        let s = 1.0 / 2.0f64.sqrt();
        assert!(contains_normal(&hs, &[0.0, -1.0], 0.0));
        assert!(contains_normal(&hs, &[-1.0, 0.0], 0.0));
        assert!(contains_normal(&hs, &[s, s], 2.0 * s));
    }

    #[test]
    fn halfspaces_contain_and_touch() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for dim in [2usize, 3] {
            for _ in 0..20 {
                let pts: Vec<Vec<f64>> = (0..12)
                    .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect();
                let hs = hull_halfspaces(&pts, 0.1);
                assert!(!hs.is_empty());
                for h in &hs {
                    for p in &pts {
                        assert!(dot(&h.normal, p) <= h.offset + 1e-9);
                    }
                    assert!(!h.support.is_empty());
                    for &s in &h.support {
                        assert!((dot(&h.normal, &pts[s]) - h.offset).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn planar_hull_matches_brute_force_supporting_lines() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..10)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let hs = hull_halfspaces(&pts, 0.1);
            // Brute force: every pair that supports the cloud must appear.
            let mut brute: Vec<(Vec<f64>, f64)> = Vec::new();
            for a in 0..pts.len() {
                for b in 0..pts.len() {
                    if a == b {
                        continue;
                    }
                    let e = sub(&pts[b], &pts[a]);
                    let len = norm(&e);
                    if len < 1e-12 {
                        continue;
                    }
                    let u = vec![e[1] / len, -e[0] / len];
                    let beta = dot(&u, &pts[a]);
                    if pts.iter().all(|p| dot(&u, p) <= beta + 1e-12) {
                        if !brute
                            .iter()
                            .any(|(v, o)| (v[0] - u[0]).abs() < 1e-9 && (v[1] - u[1]).abs() < 1e-9 && (o - beta).abs() < 1e-9)
                        {
                            brute.push((u, beta));
                        }
                    }
                }
            }
            assert_eq!(hs.len(), brute.len());
            for (u, beta) in &brute {
                assert!(contains_normal(&hs, u, *beta), "missing {u:?} {beta}");
            }
        }
    }

    #[test]
    fn single_point_uses_net() {
        let pts: Vec<Vec<f64>> = vec![vec![0.25, -0.5]];
        let hs = hull_halfspaces(&pts, 0.5);
        assert!(hs.len() >= 4);
        for h in &hs {
            assert!((dot(&h.normal, &pts[0]) - h.offset).abs() < 1e-12);
            assert_eq!(h.support, vec![0]);
        }
    }

    #[test]
    fn collinear_cloud_gets_exactly_the_two_end_caps() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![0.5, 0.5],
        ];
        let hs = hull_halfspaces(&pts, 0.1);
        assert_eq!(hs.len(), 2);
        let s = 1.0 / 2.0f64.sqrt();
        assert!(contains_normal(&hs, &[s, s], 4.0 * s));
        assert!(contains_normal(&hs, &[-s, -s], 0.0));
        // End caps are supported by the extreme points.
        for h in &hs {
            assert_eq!(h.support.len(), 1);
        }
    }

    #[test]
    fn rank2_cloud_in_3d_reduces_to_plane_hull() {
        // Square in the z = 1 plane.
        let pts = vec![
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![0.0, 1.0, 1.0],
        ];
        let pts: Vec<Vec<f64>> = pts;
        let hs = hull_halfspaces(&pts, 0.1);
        assert_eq!(hs.len(), 4);
        for h in &hs {
            assert!(h.normal[2].abs() < 1e-9, "normal should lie in the plane");
        }
    }

    #[test]
    fn hull_3d_box() {
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push(vec![x, y, z]);
                }
            }
        }
        pts.push(vec![0.5, 0.5, 0.5]);
        let hs = hull_halfspaces(&pts, 0.1);
        // Six facet planes after dedup of coplanar triangles.
        assert_eq!(hs.len(), 6);
        for h in &hs {
            let ones = h.normal.iter().filter(|v| v.abs() > 0.9).count();
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn hull_4d_cross_polytope() {
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for k in 0..4 {
            for s in [1.0, -1.0] {
                let mut p = vec![0.0; 4];
                p[k] = s;
                pts.push(p);
            }
        }
        let hs = hull_halfspaces(&pts, 0.3);
        assert_eq!(hs.len(), 16);
        for h in &hs {
            for v in &h.normal {
                assert!((v.abs() - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn net_resolution() {
        for dim in [2usize, 3] {
            let net = direction_net::<f64>(dim, 0.3);
            // Every random direction has a net neighbor within ~step.
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
            for _ in 0..200 {
                let mut u: Vec<f64> = (0..dim)
                    .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
                    .collect();
                let len = norm(&u);
                if len < 1e-6 {
                    continue;
                }
                for v in u.iter_mut() {
                    *v /= len;
                }
                let best = net
                    .iter()
                    .map(|w| dot(w, &u).clamp(-1.0, 1.0).acos())
                    .fold(f64::INFINITY, f64::min);
                assert!(best < 0.45, "dim {dim}: gap {best}");
            }
        }
    }
}
