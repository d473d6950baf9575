//! Independent brute-force oracles shared by the property tests.
#![allow(dead_code)]

use fedcent::{ClientId, Layout};
use proptest::prelude::*;

/// All `k`-subsets of `0..m` in lexicographic order, built recursively.
pub fn combos(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

pub fn avg(vs: &[&[f64]]) -> Vec<f64> {
    let d = vs[0].len();
    (0..d)
        .map(|k| vs.iter().map(|v| v[k]).sum::<f64>() / vs.len() as f64)
        .collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Means of every size-(n-t) subset of the received vectors.
pub fn brute_centroids(layout: &Layout) -> Vec<Vec<f64>> {
    let vs: Vec<&[f64]> = layout.vectors().collect();
    combos(vs.len(), layout.n() - layout.t())
        .into_iter()
        .map(|s| avg(&s.iter().map(|&i| vs[i]).collect::<Vec<_>>()))
        .collect()
}

pub fn bounds(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = points[0].len();
    let lo = (0..d)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi = (0..d)
        .map(|k| {
            points
                .iter()
                .map(|p| p[k])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    (lo, hi)
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Center and radius of the smallest sphere through `support` within its
/// affine hull.
fn circumsphere(support: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let p0 = support[0];
    let diffs: Vec<Vec<f64>> = support[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let k = diffs.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| 2.0 * dot(&diffs[i], &diffs[j])).collect())
        .collect();
    let rhs: Vec<f64> = (0..k).map(|i| dot(&diffs[i], &diffs[i])).collect();
    let lambda = if k == 0 { vec![] } else { solve(gram, rhs)? };
    let mut c = p0.to_vec();
    for (l, dv) in lambda.iter().zip(&diffs) {
        for (ci, di) in c.iter_mut().zip(dv) {
            *ci += l * di;
        }
    }
    let r = dist(&c, p0);
    Some((c, r))
}

/// Exact minimum enclosing ball by trying every support set of at most
/// `d + 1` points. Only for a handful of points in low dimension.
pub fn exact_meb(points: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let d = points[0].len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for size in 1..=(d + 1).min(points.len()) {
        for s in combos(points.len(), size) {
            let support: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
            let Some((c, r)) = circumsphere(&support) else {
                continue;
            };
            if best.as_ref().is_some_and(|b| b.1 <= r) {
                continue;
            }
            if points
                .iter()
                .all(|p| dist(p, &c) <= r * (1.0 + 1e-9) + 1e-12)
            {
                best = Some((c, r));
            }
        }
    }
    best.expect("some support set encloses everything")
}

/// Random valid layout: `n` in 4..=`max_n`, `t < n/3`, dimension `1..=max_d`,
/// with between `n - t` and `n` received vectors.
pub fn layouts(max_n: usize, max_d: usize) -> impl Strategy<Value = Layout> {
    (4..=max_n, 1..=max_d)
        .prop_flat_map(|(n, d)| {
            let tmax = (n - 1) / 3;
            (Just(n), 1..=tmax, Just(d))
        })
        .prop_flat_map(|(n, t, d)| (Just(n), Just(t), n - t..=n, Just(d)))
        .prop_flat_map(|(n, t, m, d)| {
            (
                Just(n),
                Just(t),
                proptest::sample::subsequence((0..n).collect::<Vec<ClientId>>(), m),
                proptest::collection::vec(proptest::collection::vec(-10.0..10.0f64, d), m),
            )
        })
        .prop_map(|(n, t, ids, vs)| Layout::new(n, t, ids.into_iter().zip(vs).collect()).unwrap())
}

/// Whether some point of `set` agrees with `p` to 1e-12 relative per coordinate.
pub fn near_member(set: &[Vec<f64>], p: &[f64]) -> bool {
    set.iter().any(|c| {
        c.iter()
            .zip(p)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0))
    })
}
