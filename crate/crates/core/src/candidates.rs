//! Quantities derived from the vectors the server received in one round:
//! candidate centroids, the centroid hyperbox, the trimmed trusted hyperbox,
//! the covering ball and the safe area.

use itertools::Itertools;
use std::collections::BTreeSet;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{self, Ball, Hyperbox};

pub type ClientId = usize;

/// Default limit on the number of size-(n-t) subsets that may be enumerated.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Server-side view of one round.
///
/// Received vectors are kept sorted by client id, so everything computed
/// from a layout is independent of arrival order. Subset indices used below
/// are positions in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    n: usize,
    t: usize,
    dim: usize,
    received: Vec<(ClientId, Vec<f64>)>,
}

impl Layout {
    pub fn new(n: usize, t: usize, mut received: Vec<(ClientId, Vec<f64>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLayout("n must be positive".into()));
        }
        if 3 * t >= n {
            return Err(Error::InvalidLayout(format!(
                "need t < n/3, got n={n}, t={t}"
            )));
        }
        let m = received.len();
        if m < n - t || m > n {
            return Err(Error::InvalidLayout(format!(
                "received {m} vectors, expected between n-t={} and n={n}",
                n - t
            )));
        }
        received.sort_by_key(|(id, _)| *id);
        if let Some(w) = received.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidLayout(format!(
                "duplicate client id {}",
                w[0].0
            )));
        }
        if let Some((id, _)) = received.iter().find(|(id, _)| *id >= n) {
            return Err(Error::InvalidLayout(format!(
                "client id {id} out of range for n={n}"
            )));
        }
        let dim = received[0].1.len();
        if dim == 0 {
            return Err(Error::InvalidLayout(
                "vectors must have dimension >= 1".into(),
            ));
        }
        for (id, v) in &received {
            check_dim(dim, v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidLayout(format!(
                    "client {id} sent a non-finite entry"
                )));
            }
        }
        Ok(Self {
            n,
            t,
            dim,
            received,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of received vectors.
    pub fn m(&self) -> usize {
        self.received.len()
    }

    /// Size of the subsets whose centroids are candidates: `n - t`.
    pub fn subset_size(&self) -> usize {
        self.n - self.t
    }

    pub fn received(&self) -> &[(ClientId, Vec<f64>)] {
        &self.received
    }

    pub fn ids(&self) -> impl Iterator<Item = ClientId> + '_ {
        self.received.iter().map(|(id, _)| *id)
    }

    pub fn vector(&self, pos: usize) -> &[f64] {
        &self.received[pos].1
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.received.iter().map(|(_, v)| v.as_slice())
    }

    /// Number of candidate subsets, `C(m, n - t)`.
    pub fn subset_count(&self) -> u128 {
        binomial(self.m() as u128, self.subset_size() as u128)
    }

    pub(crate) fn check_enumeration_cap(&self) -> Result<()> {
        let subsets = self.subset_count();
        if subsets > ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                subsets,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(())
    }

    /// Size-(n-t) position subsets in lexicographic order.
    pub fn subsets(&self) -> impl Iterator<Item = Vec<usize>> {
        (0..self.m()).combinations(self.subset_size())
    }

    /// Centroid of the received vectors at the given positions.
    pub fn subset_mean(&self, subset: &[usize]) -> Vec<f64> {
        geometry::shifted_mean(subset.iter().map(|&i| self.received[i].1.as_slice()))
    }

    pub fn mean(&self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.m()).collect();
        self.subset_mean(&all)
    }

    /// Received values at coordinate `k`, ascending, ties broken by client id.
    fn sorted_coordinate(&self, k: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend(self.received.iter().map(|(_, v)| v[k]));
        // Stable sort over id-ordered input keeps ties in client-id order.
        buf.sort_by(|a, b| a.total_cmp(b));
    }
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All candidate centroids, one per size-(n-t) subset of the received vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCentroidSet {
    pub centroids: Vec<Vec<f64>>,
    /// Generating position subsets, aligned with `centroids`.
    pub subsets: Vec<Vec<usize>>,
}

pub fn candidate_centroids(layout: &Layout) -> Result<CandidateCentroidSet> {
    layout.check_enumeration_cap()?;
    let subsets: Vec<Vec<usize>> = layout.subsets().collect();
    let centroids = subsets.iter().map(|s| layout.subset_mean(s)).collect();
    Ok(CandidateCentroidSet { centroids, subsets })
}

/// Smallest axis-parallel box containing every candidate centroid, computed
/// per coordinate from the n-t smallest and n-t largest received values.
pub fn centroid_hyperbox(layout: &Layout) -> Hyperbox {
    let k = layout.subset_size();
    let m = layout.m();
    let mut lo = Vec::with_capacity(layout.dim());
    let mut hi = Vec::with_capacity(layout.dim());
    let mut buf = Vec::with_capacity(m);
    for c in 0..layout.dim() {
        layout.sorted_coordinate(c, &mut buf);
        lo.push(geometry::shifted_mean_1d(&buf[..k]));
        hi.push(geometry::shifted_mean_1d(&buf[m - k..]));
    }
    // Sums of sorted values keep lo <= hi; guard against rounding anyway.
    for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
        if *l > *h {
            let mid = 0.5 * (*l + *h);
            *l = mid;
            *h = mid;
        }
    }
    Hyperbox::new(lo, hi).expect("ordered bounds")
}

/// Per coordinate, the interval between the (m-(n-t)+1)-th and the (n-t)-th
/// smallest received values.
pub fn trimmed_trusted_hyperbox(layout: &Layout) -> Hyperbox {
    let k = layout.subset_size();
    let m = layout.m();
    let lo_idx = m - k;
    let hi_idx = k - 1;
    let mut lo = Vec::with_capacity(layout.dim());
    let mut hi = Vec::with_capacity(layout.dim());
    let mut buf = Vec::with_capacity(m);
    for c in 0..layout.dim() {
        layout.sorted_coordinate(c, &mut buf);
        lo.push(buf[lo_idx]);
        hi.push(buf[hi_idx]);
    }
    Hyperbox::new(lo, hi).expect("m - (n-t) < n - t since n > 3t")
}

/// Minimum enclosing ball (to relative accuracy `eps`) of the candidate
/// centroids.
///
/// The candidates all lie in the affine hull of the received vectors, so the
/// computation runs in an orthonormal basis of that hull, whose dimension is
/// below `m`, however large the ambient dimension is.
pub fn covering_ball(layout: &Layout, eps: f64) -> Result<Ball> {
    layout.check_enumeration_cap()?;
    let origin = layout.mean();
    let centered: Vec<Vec<f64>> = layout
        .vectors()
        .map(|v| v.iter().zip(&origin).map(|(x, o)| x - o).collect())
        .collect();
    let (basis, coords) = orthonormal_coordinates(&centered);
    if basis.is_empty() {
        return Ok(Ball {
            center: origin,
            radius: 0.0,
        });
    }
    let rank = basis.len();
    let k = layout.subset_size() as f64;
    let reduced: Vec<Vec<f64>> = layout
        .subsets()
        .map(|s| {
            let mut acc = vec![0.0; rank];
            for i in s {
                for (a, x) in acc.iter_mut().zip(&coords[i]) {
                    *a += x;
                }
            }
            acc.iter_mut().for_each(|a| *a /= k);
            acc
        })
        .collect();
    let ball = geometry::min_enclosing_ball(&reduced, eps)?;
    let mut center = origin;
    for (z, b) in ball.center.iter().zip(&basis) {
        for (c, x) in center.iter_mut().zip(b) {
            *c += z * x;
        }
    }
    Ok(Ball {
        center,
        radius: ball.radius,
    })
}

/// Orthonormal basis of the span of `vectors` (modified Gram-Schmidt with
/// one reorthogonalization pass) and each vector's coordinates in it.
fn orthonormal_coordinates(vectors: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let scale = vectors
        .iter()
        .map(|v| geometry::norm_sq(v))
        .fold(0.0_f64, f64::max)
        .sqrt();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if scale == 0.0 {
        return (basis, vec![Vec::new(); vectors.len()]);
    }
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = geometry::dot(&r, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = geometry::norm_sq(&r).sqrt();
        if norm > 1e-12 * scale {
            r.iter_mut().for_each(|x| *x /= norm);
            basis.push(r);
        }
    }
    let coords = vectors
        .iter()
        .map(|v| basis.iter().map(|b| geometry::dot(v, b)).collect())
        .collect();
    (basis, coords)
}

/// Largest participant count accepted by [`safe_area_point`].
pub const SAFE_AREA_MAX_N: usize = 12;

/// Point of the safe area (intersection of the convex hulls of all size-(n-t)
/// subsets of received vectors) closest to `target`.
///
/// Supported for d <= 2, where the safe area is an interval or a convex
/// polygon: each subset hull is written as a set of half-planes and the
/// closest feasible point is found among the target itself, its projections
/// onto every boundary line, and the pairwise intersections of boundary
/// lines.
pub fn safe_area_point(layout: &Layout, target: &[f64], tol: f64) -> Result<Vec<f64>> {
    let d = layout.dim();
    check_dim(d, target.len())?;
    let (n, t) = (layout.n(), layout.t());
    if d > 2 {
        return Err(Error::Unsupported(format!(
            "safe area needs d <= 2, got d={d}"
        )));
    }
    if n > SAFE_AREA_MAX_N {
        return Err(Error::Unsupported(format!(
            "safe area needs n <= {SAFE_AREA_MAX_N}, got n={n}"
        )));
    }
    if t * 3.max(d + 1) >= n {
        return Err(Error::Unsupported(format!(
            "safe area needs t < n/max(3, d+1), got n={n}, t={t}, d={d}"
        )));
    }
    let scale = layout
        .vectors()
        .flat_map(|v| v.iter())
        .chain(target)
        .fold(1.0_f64, |s, x| s.max(x.abs()));
    let slack = tol * scale;
    let planes = safe_area_halfplanes(layout);

    if d == 1 {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for h in &planes {
            if h.a[0] > 0.0 {
                hi = hi.min(h.b / h.a[0]);
            } else {
                lo = lo.max(h.b / h.a[0]);
            }
        }
        if lo > hi + slack {
            return Err(Error::Integrity(format!("empty safe area [{lo}, {hi}]")));
        }
        if lo > hi {
            return Ok(vec![0.5 * (lo + hi)]);
        }
        return Ok(vec![target[0].clamp(lo, hi)]);
    }

    let p = [target[0], target[1]];
    let feasible = |q: &[f64; 2]| {
        planes
            .iter()
            .all(|h| h.a[0] * q[0] + h.a[1] * q[1] <= h.b + slack)
    };
    if feasible(&p) {
        return Ok(p.to_vec());
    }
    let mut best: Option<([f64; 2], f64)> = None;
    let mut consider = |q: [f64; 2]| {
        if feasible(&q) {
            let dd = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            if best.is_none_or(|(_, b)| dd < b) {
                best = Some((q, dd));
            }
        }
    };
    for h in &planes {
        let viol = h.a[0] * p[0] + h.a[1] * p[1] - h.b;
        consider([p[0] - viol * h.a[0], p[1] - viol * h.a[1]]);
    }
    for (i, h) in planes.iter().enumerate() {
        for g in &planes[i + 1..] {
            let det = h.a[0] * g.a[1] - h.a[1] * g.a[0];
            if det.abs() <= 1e-12 {
                continue;
            }
            let x = (h.b * g.a[1] - h.a[1] * g.b) / det;
            let y = (h.a[0] * g.b - h.b * g.a[0]) / det;
            consider([x, y]);
        }
    }
    best.map(|(q, _)| q.to_vec())
        .ok_or_else(|| Error::Integrity("empty safe area".into()))
}

/// Half-plane `a . q <= b` with unit normal `a` (only `a[0]` used in 1-D).
#[derive(Debug, Clone, Copy)]
struct HalfPlane {
    a: [f64; 2],
    b: f64,
}

/// Deduplicated half-plane description of every subset hull.
fn safe_area_halfplanes(layout: &Layout) -> Vec<HalfPlane> {
    // Keys identify a constraint by the received positions that define it.
    #[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
    enum Key {
        Upper(usize),
        Lower(usize),
        Edge(usize, usize),
        LineSide(usize, usize, bool),
        Cap(usize, usize, bool),
        PointAxis(usize, u8),
    }
    let d = layout.dim();
    let pt = |i: usize| -> [f64; 2] {
        let v = layout.vector(i);
        [v[0], if d > 1 { v[1] } else { 0.0 }]
    };
    let mut keys = BTreeSet::new();
    for subset in layout.subsets() {
        if d == 1 {
            let lo = *subset
                .iter()
                .min_by(|&&a, &&b| pt(a)[0].total_cmp(&pt(b)[0]))
                .unwrap();
            let hi = *subset
                .iter()
                .max_by(|&&a, &&b| pt(a)[0].total_cmp(&pt(b)[0]))
                .unwrap();
            keys.insert(Key::Upper(hi));
            keys.insert(Key::Lower(lo));
            continue;
        }
        let hull = convex_hull_2d(&subset, &pt);
        match hull.len() {
            1 => {
                for axis in 0..4 {
                    keys.insert(Key::PointAxis(hull[0], axis));
                }
            }
            2 => {
                let (i, j) = (hull[0], hull[1]);
                keys.insert(Key::LineSide(i, j, true));
                keys.insert(Key::LineSide(i, j, false));
                keys.insert(Key::Cap(i, j, true));
                keys.insert(Key::Cap(i, j, false));
            }
            h => {
                for e in 0..h {
                    keys.insert(Key::Edge(hull[e], hull[(e + 1) % h]));
                }
            }
        }
    }

    let line = |i: usize, j: usize| -> ([f64; 2], f64) {
        let (p, q) = (pt(i), pt(j));
        let (ex, ey) = (q[0] - p[0], q[1] - p[1]);
        let len = ex.hypot(ey);
        let a = [ey / len, -ex / len];
        (a, a[0] * p[0] + a[1] * p[1])
    };
    keys.into_iter()
        .map(|key| match key {
            Key::Upper(i) => HalfPlane {
                a: [1.0, 0.0],
                b: pt(i)[0],
            },
            Key::Lower(i) => HalfPlane {
                a: [-1.0, 0.0],
                b: -pt(i)[0],
            },
            // Counter-clockwise hull: interior is to the left of each edge.
            Key::Edge(i, j) => {
                let (a, b) = line(i, j);
                HalfPlane { a, b }
            }
            Key::LineSide(i, j, pos) => {
                let (a, b) = line(i, j);
                if pos {
                    HalfPlane { a, b }
                } else {
                    HalfPlane {
                        a: [-a[0], -a[1]],
                        b: -b,
                    }
                }
            }
            Key::Cap(i, j, at_j) => {
                let (p, q) = (pt(i), pt(j));
                let len = (q[0] - p[0]).hypot(q[1] - p[1]);
                let u = [(q[0] - p[0]) / len, (q[1] - p[1]) / len];
                if at_j {
                    HalfPlane {
                        a: u,
                        b: u[0] * q[0] + u[1] * q[1],
                    }
                } else {
                    HalfPlane {
                        a: [-u[0], -u[1]],
                        b: -(u[0] * p[0] + u[1] * p[1]),
                    }
                }
            }
            Key::PointAxis(i, axis) => {
                let p = pt(i);
                match axis {
                    0 => HalfPlane {
                        a: [1.0, 0.0],
                        b: p[0],
                    },
                    1 => HalfPlane {
                        a: [-1.0, 0.0],
                        b: -p[0],
                    },
                    2 => HalfPlane {
                        a: [0.0, 1.0],
                        b: p[1],
                    },
                    _ => HalfPlane {
                        a: [0.0, -1.0],
                        b: -p[1],
                    },
                }
            }
        })
        .collect()
}

/// Counter-clockwise convex hull (Andrew's monotone chain) of the given
/// positions, without duplicate or collinear vertices. Returns one position
/// for a point set, two for a segment.
fn convex_hull_2d(positions: &[usize], pt: &dyn Fn(usize) -> [f64; 2]) -> Vec<usize> {
    let mut idx = positions.to_vec();
    idx.sort_by(|&a, &b| {
        let (p, q) = (pt(a), pt(b));
        p[0].total_cmp(&q[0])
            .then(p[1].total_cmp(&q[1]))
            .then(a.cmp(&b))
    });
    idx.dedup_by(|a, b| pt(*a) == pt(*b));
    if idx.len() <= 2 {
        return idx;
    }
    let cross = |o: usize, a: usize, b: usize| {
        let (o, a, b) = (pt(o), pt(a), pt(b));
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let chain = |order: &mut dyn Iterator<Item = usize>| {
        let mut c: Vec<usize> = Vec::new();
        for i in order {
            while c.len() >= 2 && cross(c[c.len() - 2], c[c.len() - 1], i) <= 0.0 {
                c.pop();
            }
            c.push(i);
        }
        c.pop();
        c
    };
    let mut hull = chain(&mut idx.iter().copied());
    hull.extend(chain(&mut idx.iter().rev().copied()));
    hull
}
