//! Euclidean primitives in arbitrary dimension: distances, minimum enclosing
//! balls, axis-parallel boxes and convex-hull membership / projection.
//!
//! Vectors are plain `&[f64]` slices; point sets are slices of anything that
//! derefs to one.

use crate::error::{check_dim, Error, Result};

/// Tolerance for comparisons that are exact in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance for results of iterative solvers.
pub const ITERATIVE_TOL: f64 = 1e-6;
/// Default relative accuracy of [`min_enclosing_ball`].
pub const DEFAULT_MEB_EPS: f64 = 1e-4;

const MEB_MAX_ITERS: usize = 200_000;
const HULL_MAX_ITERS: usize = 10_000;

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    Ok(dist_sq(a, b).sqrt())
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Coordinate-wise mean of a nonempty point set.
pub fn mean<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<f64>> {
    common_dim(points)?;
    Ok(shifted_mean(points.iter().map(AsRef::as_ref)))
}

/// Mean as `x_0 + sum_i (x_i - x_0) / k`, which returns the common value
/// exactly when all points coincide.
pub(crate) fn shifted_mean<'a>(mut points: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let first = points.next().expect("nonempty");
    let mut acc = vec![0.0; first.len()];
    let mut k = 1usize;
    for p in points {
        for ((a, x), x0) in acc.iter_mut().zip(p).zip(first) {
            *a += x - x0;
        }
        k += 1;
    }
    acc.iter()
        .zip(first)
        .map(|(a, x0)| x0 + a / k as f64)
        .collect()
}

/// Scalar version of [`shifted_mean`].
pub(crate) fn shifted_mean_1d(values: &[f64]) -> f64 {
    let x0 = values[0];
    x0 + values[1..].iter().map(|x| x - x0).sum::<f64>() / values.len() as f64
}

/// Dimension shared by all points, or an error for empty / ragged input.
pub(crate) fn common_dim<P: AsRef<[f64]>>(points: &[P]) -> Result<usize> {
    let first = points.first().ok_or(Error::Empty("point set"))?;
    let dim = first.as_ref().len();
    for p in points {
        check_dim(dim, p.as_ref().len())?;
    }
    Ok(dim)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    /// Whether `p` lies within `radius * (1 + rel_slack)` of the center.
    pub fn contains(&self, p: &[f64], rel_slack: f64) -> bool {
        dist_sq(&self.center, p).sqrt() <= self.radius * (1.0 + rel_slack) + f64::EPSILON
    }
}

/// Closed axis-parallel box `[lo[0], hi[0]] x ... x [lo[d-1], hi[d-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperbox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Hyperbox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if let Some(k) = (0..lo.len()).find(|&k| !(lo[k] <= hi[k])) {
            return Err(Error::InvalidParameter(format!(
                "hyperbox coordinate {k}: lo {} > hi {}",
                lo[k], hi[k]
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The degenerate box `{p}`.
    pub fn point(p: &[f64]) -> Self {
        Self {
            lo: p.to_vec(),
            hi: p.to_vec(),
        }
    }

    /// Smallest box containing every point.
    pub fn bounding<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = common_dim(points)?;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in points {
            for (k, &x) in p.as_ref().iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    pub fn diagonal(&self) -> f64 {
        dist_sq(&self.lo, &self.hi).sqrt()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&x, (&l, &h))| x >= l - tol && x <= h + tol)
    }
}

/// Per-coordinate `[max(lo), min(hi)]`, or `None` when some coordinate is
/// empty by more than `tol`. Coordinates that are empty by at most `tol`
/// collapse to the midpoint of the gap.
pub fn hyperbox_intersection(a: &Hyperbox, b: &Hyperbox, tol: f64) -> Result<Option<Hyperbox>> {
    check_dim(a.dim(), b.dim())?;
    let mut lo = Vec::with_capacity(a.dim());
    let mut hi = Vec::with_capacity(a.dim());
    for k in 0..a.dim() {
        let l = a.lo[k].max(b.lo[k]);
        let h = a.hi[k].min(b.hi[k]);
        if l <= h {
            lo.push(l);
            hi.push(h);
        } else if l <= h + tol {
            let mid = 0.5 * (l + h);
            lo.push(mid);
            hi.push(mid);
        } else {
            return Ok(None);
        }
    }
    Ok(Some(Hyperbox { lo, hi }))
}

/// Ball containing every point whose radius is at most `(1 + eps)` times the
/// minimum possible radius.
///
/// Frank-Wolfe on the dual of the minimum enclosing ball problem with away
/// steps: each iteration either moves the center towards the farthest point
/// or away from the closest support point, with exact line search. The dual
/// objective is a lower bound on the squared optimal radius, so the loop
/// stops with a certificate once the farthest point is within `(1 + eps)`
/// of it.
pub fn min_enclosing_ball<P: AsRef<[f64]>>(points: &[P], eps: f64) -> Result<Ball> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let dim = common_dim(points)?;
    // Working relative to the mean keeps the dual objective free of
    // cancellation when the ball is small compared to its distance from 0.
    let origin = mean(points)?;
    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.as_ref().iter().zip(&origin).map(|(x, o)| x - o).collect())
        .collect();
    let weights = meb_weights(&centered, eps);

    let mut center = origin;
    for (w, p) in weights.iter().zip(&centered) {
        if *w != 0.0 {
            for (c, x) in center.iter_mut().zip(p) {
                *c += w * x;
            }
        }
    }
    debug_assert_eq!(center.len(), dim);
    let radius = points
        .iter()
        .map(|p| dist_sq(&center, p.as_ref()))
        .fold(0.0_f64, f64::max)
        .sqrt();
    Ok(Ball { center, radius })
}

/// Convex weights of the (approximate) minimum enclosing ball center.
pub(crate) fn meb_weights(points: &[Vec<f64>], eps: f64) -> Vec<f64> {
    let k = points.len();
    let dim = points[0].len();
    let norms: Vec<f64> = points.iter().map(|p| norm_sq(p)).collect();
    let scale = norms.iter().cloned().fold(0.0_f64, f64::max);

    let farthest_from = |q: &[f64]| -> (usize, f64) {
        points.iter().map(|p| dist_sq(p, q)).enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, d)| if d > best.1 { (i, d) } else { best },
        )
    };
    let (alpha, _) = farthest_from(&points[0]);
    let (beta, spread) = farthest_from(&points[alpha]);
    let mut u = vec![0.0; k];
    if spread <= f64::MIN_POSITIVE || alpha == beta {
        u[alpha] = 1.0;
        return u;
    }
    u[alpha] = 0.5;
    u[beta] = 0.5;
    let mut center: Vec<f64> = points[alpha]
        .iter()
        .zip(&points[beta])
        .map(|(a, b)| 0.5 * (a + b))
        .collect();

    let target = (1.0 + eps) * (1.0 + eps);
    let mut dists = vec![0.0; k];
    for iter in 0..MEB_MAX_ITERS {
        if iter % 512 == 511 {
            // Refresh the incrementally updated center to stop drift.
            center.iter_mut().for_each(|c| *c = 0.0);
            for (w, p) in u.iter().zip(points) {
                if *w != 0.0 {
                    for (c, x) in center.iter_mut().zip(p) {
                        *c += w * x;
                    }
                }
            }
        }
        for (d, p) in dists.iter_mut().zip(points) {
            *d = dist_sq(p, &center);
        }
        let gamma =
            (u.iter().zip(&norms).map(|(w, n)| w * n).sum::<f64>() - norm_sq(&center)).max(0.0);
        let (far, far_d) =
            dists.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |b, (i, &d)| if d > b.1 { (i, d) } else { b },
            );
        if far_d <= target * gamma || far_d <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        let (near, near_d) = dists.iter().enumerate().filter(|(i, _)| u[*i] > 0.0).fold(
            (0, f64::INFINITY),
            |b, (i, &d)| if d < b.1 { (i, d) } else { b },
        );
        let eps_plus = far_d / gamma - 1.0;
        let eps_minus = 1.0 - near_d / gamma;
        if eps_plus >= eps_minus || u[near] >= 1.0 {
            let lambda = eps_plus / (2.0 * (1.0 + eps_plus));
            u.iter_mut().for_each(|w| *w *= 1.0 - lambda);
            u[far] += lambda;
            for (c, x) in center.iter_mut().zip(&points[far]) {
                *c = (1.0 - lambda) * *c + lambda * x;
            }
        } else {
            let drop_step = u[near] / (1.0 - u[near]);
            let lambda = (eps_minus / (2.0 * (1.0 - eps_minus))).min(drop_step);
            u.iter_mut().for_each(|w| *w *= 1.0 + lambda);
            if lambda >= drop_step {
                u[near] = 0.0;
            } else {
                u[near] -= lambda;
            }
            for (c, x) in center.iter_mut().zip(&points[near]) {
                *c = (1.0 + lambda) * *c - lambda * x;
            }
        }
    }
    debug_assert_eq!(center.len(), dim);
    u
}

/// Result of a hull membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct HullMembership {
    pub inside: bool,
    /// Convex weights of the closest point found; a membership witness when
    /// `inside` holds.
    pub weights: Vec<f64>,
    /// Distance from the query to the closest point found.
    pub distance: f64,
}

/// Whether `p` lies within `tol` of the convex hull of `points`.
pub fn convex_hull_contains<P: AsRef<[f64]>>(
    points: &[P],
    p: &[f64],
    tol: f64,
) -> Result<HullMembership> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let (weights, residual) = min_norm_over_hull(points, p, tol)?;
    let distance = norm_sq(&residual).sqrt();
    Ok(HullMembership {
        inside: distance <= tol,
        weights,
        distance,
    })
}

/// Point of the convex hull of `points` closest to `p`, up to `tol` in distance.
pub fn project_onto_hull<P: AsRef<[f64]>>(points: &[P], p: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let (_, residual) = min_norm_over_hull(points, p, tol)?;
    Ok(residual.iter().zip(p).map(|(r, x)| r + x).collect())
}

/// Minimizes `|sum_i w_i points[i] - p|` over the probability simplex with
/// Wolfe's active-set method. Stops once the Frank-Wolfe duality gap is at
/// most `tol^2 / 2`, which puts the returned point within `tol` of the exact
/// projection. Returns the weights and the residual `sum_i w_i points[i] - p`.
fn min_norm_over_hull<P: AsRef<[f64]>>(
    points: &[P],
    p: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = common_dim(points)?;
    check_dim(dim, p.len())?;
    let q: Vec<Vec<f64>> = points
        .iter()
        .map(|v| v.as_ref().iter().zip(p).map(|(a, b)| a - b).collect())
        .collect();
    let start = (0..q.len())
        .min_by(|&i, &j| norm_sq(&q[i]).total_cmp(&norm_sq(&q[j])))
        .expect("nonempty");
    let mut active = vec![start];
    let mut lambda = vec![1.0];
    let mut x = q[start].clone();
    let gap_target = 0.5 * tol * tol;

    'major: for _ in 0..HULL_MAX_ITERS {
        let xx = norm_sq(&x);
        if xx == 0.0 {
            break;
        }
        let (j, gj) = q
            .iter()
            .enumerate()
            .map(|(i, v)| (i, dot(v, &x)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        if xx - gj <= gap_target || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let Some(mu) = affine_minimizer(&q, &active) else {
                // The new point is numerically in the affine hull already.
                active.pop();
                lambda.pop();
                break 'major;
            };
            if mu.iter().all(|&m| m > 0.0) {
                lambda = mu;
                break;
            }
            // Move from lambda toward mu until the first weight hits zero.
            let (drop, theta) = lambda
                .iter()
                .zip(&mu)
                .enumerate()
                .filter(|(_, (_, m))| **m <= 0.0)
                .map(|(i, (l, m))| (i, l / (l - m)))
                .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
            if active[drop] == j && theta == 0.0 {
                active.pop();
                lambda.pop();
                break 'major;
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * m;
            }
            lambda[drop] = 0.0;
            let mut i = 0;
            while i < active.len() {
                if lambda[i] <= 0.0 {
                    active.remove(i);
                    lambda.remove(i);
                } else {
                    i += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
        x = vec![0.0; dim];
        for (&i, &l) in active.iter().zip(&lambda) {
            for (a, v) in x.iter_mut().zip(&q[i]) {
                *a += l * v;
            }
        }
    }
    let mut w = vec![0.0; q.len()];
    for (&i, &l) in active.iter().zip(&lambda) {
        w[i] = l;
    }
    Ok((w, x))
}

/// Affine weights of the point of least norm in the affine hull of
/// `q[active]`, or `None` when those points are affinely dependent.
fn affine_minimizer(q: &[Vec<f64>], active: &[usize]) -> Option<Vec<f64>> {
    let base = &q[active[0]];
    let k = active.len() - 1;
    // Modified Gram-Schmidt on the edge vectors q[a] - base.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![vec![0.0; k]; k];
    for (c, &a) in active[1..].iter().enumerate() {
        let mut v: Vec<f64> = q[a].iter().zip(base).map(|(x, b)| x - b).collect();
        let scale = norm_sq(&v).sqrt();
        for (row, e) in basis.iter().enumerate() {
            let proj = dot(e, &v);
            r[row][c] = proj;
            v.iter_mut().zip(e).for_each(|(x, y)| *x -= proj * y);
        }
        let len = norm_sq(&v).sqrt();
        if !(len > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return None;
        }
        r[c][c] = len;
        v.iter_mut().for_each(|x| *x /= len);
        basis.push(v);
    }
    // Solve R alpha = -E^T base by back substitution.
    let mut alpha = vec![0.0; k];
    for row in (0..k).rev() {
        let mut s = -dot(&basis[row], base);
        for c in row + 1..k {
            s -= r[row][c] * alpha[c];
        }
        alpha[row] = s / r[row][row];
    }
    let mut mu = Vec::with_capacity(k + 1);
    mu.push(1.0 - alpha.iter().sum::<f64>());
    mu.extend(alpha);
    Some(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_relative_eq!(
            euclidean_distance(&[1.0, 1.0, 1.0], &[0.0; 3]).unwrap(),
            3f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(matches!(
            euclidean_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn meb_examples() {
        let b = min_enclosing_ball(&[[2.0, 2.0]], 1e-4).unwrap();
        assert_eq!(b.center, vec![2.0, 2.0]);
        assert_eq!(b.radius, 0.0);

        let b = min_enclosing_ball(&[[0.0, 0.0], [2.0, 0.0]], 1e-4).unwrap();
        assert_relative_eq!(b.center[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.center[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(b.radius, 1.0, epsilon = 1e-12);

        let b = min_enclosing_ball(&[[1.0], [11.0 / 3.0], [4.0], [13.0 / 3.0]], 1e-4).unwrap();
        assert_relative_eq!(b.center[0], 8.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(b.radius, 5.0 / 3.0, epsilon = 1e-12);

        let third = 1.0 / 3.0;
        let pts = [
            [third, third, third],
            [third, third, 0.0],
            [third, 0.0, third],
            [0.0, third, third],
        ];
        let eps = 1e-4;
        let b = min_enclosing_ball(&pts, eps).unwrap();
        let exact = (2.0f64 / 3.0).sqrt() / 3.0;
        assert!(b.radius >= exact - 1e-12 && b.radius <= exact * (1.0 + eps));
        for c in &b.center {
            assert!((c - 2.0 / 9.0).abs() <= 2.0 * eps.sqrt() * exact);
        }
    }

    #[test]
    fn meb_rejects_bad_input() {
        let empty: [[f64; 2]; 0] = [];
        assert!(matches!(
            min_enclosing_ball(&empty, 1e-4),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            min_enclosing_ball(&[[0.0]], 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            min_enclosing_ball(&[vec![0.0], vec![0.0, 1.0]], 1e-4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn meb_duplicates_and_far_offset() {
        let b = min_enclosing_ball(&[[5.0, 5.0], [5.0, 5.0], [5.0, 5.0]], 1e-4).unwrap();
        assert_eq!(b.radius, 0.0);
        // Tiny ball far from the origin.
        let off = 1e6;
        let pts = [[off, off], [off + 1e-3, off], [off, off + 1e-3]];
        let b = min_enclosing_ball(&pts, 1e-4).unwrap();
        let exact = 1e-3 * 2f64.sqrt() / 2.0;
        assert!(b.radius <= exact * (1.0 + 1e-4) + 1e-12, "{}", b.radius);
    }

    #[test]
    fn intersection_examples() {
        let a = Hyperbox::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        let b = Hyperbox::new(vec![1.0, 1.0], vec![3.0, 3.0]).unwrap();
        let i = hyperbox_intersection(&a, &b, EXACT_TOL).unwrap().unwrap();
        assert_eq!(i.lo(), &[1.0, 1.0]);
        assert_eq!(i.hi(), &[2.0, 2.0]);

        let a = Hyperbox::new(vec![0.0], vec![1.0]).unwrap();
        let b = Hyperbox::new(vec![2.0], vec![3.0]).unwrap();
        assert!(hyperbox_intersection(&a, &b, EXACT_TOL).unwrap().is_none());

        let a = Hyperbox::new(vec![1.0], vec![2.0]).unwrap();
        let b = Hyperbox::new(vec![1.0], vec![13.0 / 3.0]).unwrap();
        let i = hyperbox_intersection(&a, &b, EXACT_TOL).unwrap().unwrap();
        assert_eq!((i.lo()[0], i.hi()[0]), (1.0, 2.0));

        let c = Hyperbox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(hyperbox_intersection(&a, &c, EXACT_TOL).is_err());
    }

    #[test]
    fn intersection_gap_within_tol_collapses_to_midpoint() {
        let a = Hyperbox::new(vec![0.0], vec![1.0]).unwrap();
        let b = Hyperbox::new(vec![1.0 + 1e-10], vec![2.0]).unwrap();
        let i = hyperbox_intersection(&a, &b, EXACT_TOL).unwrap().unwrap();
        assert!(i.is_point());
        assert_relative_eq!(i.lo()[0], 1.0 + 0.5e-10, epsilon = 1e-15);
    }

    #[test]
    fn hyperbox_rejects_inverted_bounds() {
        assert!(Hyperbox::new(vec![1.0], vec![0.0]).is_err());
        assert!(Hyperbox::new(vec![f64::NAN], vec![0.0]).is_err());
        assert!(Hyperbox::new(vec![0.0], vec![0.0]).unwrap().is_point());
    }

    #[test]
    fn hull_membership_examples() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let tol = 1e-9;
        let m = convex_hull_contains(&tri, &[0.0, 0.0], tol).unwrap();
        assert!(m.inside);
        assert_eq!(m.weights, vec![1.0, 0.0, 0.0]);

        let m = convex_hull_contains(&tri, &[1.0 / 3.0, 1.0 / 3.0], tol).unwrap();
        assert!(m.inside);
        let sum: f64 = m.weights.iter().sum();
        assert!((sum - 1.0).abs() <= tol);

        let m = convex_hull_contains(&tri, &[1.0, 1.0], tol).unwrap();
        assert!(!m.inside);
        assert_relative_eq!(m.distance, 0.5f64.sqrt(), epsilon = 1e-9);

        assert!(convex_hull_contains(&tri, &[1.0], tol).is_err());
        assert!(convex_hull_contains(&tri, &[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn projection_examples() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let q = project_onto_hull(&tri, &[0.2, 0.2], 1e-9).unwrap();
        assert!(dist_sq(&q, &[0.2, 0.2]).sqrt() <= 1e-9);

        let q = project_onto_hull(&[[0.0], [1.0]], &[3.0], 1e-9).unwrap();
        assert_relative_eq!(q[0], 1.0, epsilon = 1e-12);

        let q = project_onto_hull(&[[0.0, 0.0], [2.0, 0.0]], &[1.0, 1.0], 1e-9).unwrap();
        assert_relative_eq!(q[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(q[1], 0.0, epsilon = 1e-12);
    }
}
