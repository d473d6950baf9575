//! Ground-truth-aware metrics and instance generators.
//!
//! This is the only module that knows which clients are faulty. The lower
//! bound generators build the worst-case layouts for box and convex
//! validity; [`gen_random_instance`] produces the randomized layouts used by
//! the property suites.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::candidates::{covering_ball, ClientId, Layout};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{self, Ball, Hyperbox};
use crate::seed;

/// Distances and radii at or below this are treated as zero.
pub const ZERO_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub honest: Vec<(ClientId, Vec<f64>)>,
    pub faulty: BTreeSet<ClientId>,
}

impl GroundTruth {
    pub fn new(mut honest: Vec<(ClientId, Vec<f64>)>, faulty: BTreeSet<ClientId>) -> Result<Self> {
        if honest.is_empty() {
            return Err(Error::Empty("ground truth has no honest vectors"));
        }
        honest.sort_by_key(|(id, _)| *id);
        if let Some((id, _)) = honest.iter().find(|(id, _)| faulty.contains(id)) {
            return Err(Error::InvalidParameter(format!(
                "client {id} is listed both honest and faulty"
            )));
        }
        let dim = honest[0].1.len();
        for (_, v) in &honest {
            check_dim(dim, v.len())?;
        }
        Ok(Self { honest, faulty })
    }

    pub fn honest_vectors(&self) -> Vec<&[f64]> {
        self.honest.iter().map(|(_, v)| v.as_slice()).collect()
    }

    pub fn dim(&self) -> usize {
        self.honest[0].1.len()
    }

    /// Smallest axis-parallel box containing the honest vectors.
    pub fn trusted_hyperbox(&self) -> Hyperbox {
        Hyperbox::bounding(&self.honest_vectors()).expect("nonempty, equal dimensions")
    }

    fn common_honest_vector(&self) -> Option<&[f64]> {
        let first = self.honest[0].1.as_slice();
        self.honest
            .iter()
            .all(|(_, v)| v.as_slice() == first)
            .then_some(first)
    }
}

/// Approximation ratio; `Infinite` when the covering ball is a point but the
/// output is not on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn value(&self) -> f64 {
        match self {
            Ratio::Finite(r) => *r,
            Ratio::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ratio::Finite(_))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{r}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub cent_star: Vec<f64>,
    pub rad_cov: f64,
    pub distance: f64,
    pub ratio: Ratio,
}

/// Centroid of the non-faulty vectors.
pub fn cent_star(truth: &GroundTruth) -> Vec<f64> {
    geometry::mean(&truth.honest_vectors()).expect("ground truth is nonempty")
}

pub fn approximation_ratio(
    output: &[f64],
    truth: &GroundTruth,
    layout: &Layout,
    eps: f64,
) -> Result<RatioReport> {
    let ball = covering_ball(layout, eps)?;
    ratio_against_ball(output, truth, &ball)
}

/// [`approximation_ratio`] with a covering ball computed beforehand.
pub fn ratio_against_ball(output: &[f64], truth: &GroundTruth, ball: &Ball) -> Result<RatioReport> {
    check_dim(truth.dim(), output.len())?;
    check_dim(ball.center.len(), output.len())?;
    let cent = cent_star(truth);
    let distance = geometry::dist_sq(output, &cent).sqrt();
    let rad_cov = ball.radius;
    let ratio = if rad_cov <= ZERO_RADIUS {
        if distance <= ZERO_RADIUS {
            Ratio::Finite(0.0)
        } else {
            Ratio::Infinite
        }
    } else {
        Ratio::Finite(distance / rad_cov)
    };
    Ok(RatioReport {
        cent_star: cent,
        rad_cov,
        distance,
        ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Weak,
    Strong,
    Box,
    Convex,
}

/// Whether `output` satisfies the validity condition on this round.
///
/// Weak and strong validity constrain the output only when their premise
/// holds (all clients honest with one common vector, respectively all honest
/// vectors equal); otherwise they are vacuously true.
pub fn check_validity(
    kind: Validity,
    truth: &GroundTruth,
    layout: &Layout,
    output: &[f64],
    tol: f64,
) -> bool {
    if output.len() != truth.dim() || output.len() != layout.dim() {
        return false;
    }
    match kind {
        Validity::Weak => {
            if !truth.faulty.is_empty() || truth.honest.len() != layout.n() {
                return true;
            }
            match truth.common_honest_vector() {
                Some(v) => geometry::dist_sq(v, output).sqrt() <= tol,
                None => true,
            }
        }
        Validity::Strong => match truth.common_honest_vector() {
            Some(v) => geometry::dist_sq(v, output).sqrt() <= tol,
            None => true,
        },
        Validity::Box => truth.trusted_hyperbox().contains(output, tol),
        Validity::Convex => geometry::convex_hull_contains(&truth.honest_vectors(), output, tol)
            .map(|m| m.inside)
            .unwrap_or(false),
    }
}

/// Largest pairwise distance among the honest vectors.
pub fn nonfaulty_diameter(truth: &GroundTruth) -> f64 {
    let vs = truth.honest_vectors();
    let mut best = 0.0_f64;
    for (i, a) in vs.iter().enumerate() {
        for b in &vs[i + 1..] {
            best = best.max(geometry::dist_sq(a, b));
        }
    }
    best.sqrt()
}

fn unit(d: usize, k: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k] = scale;
    v
}

fn assemble(
    n: usize,
    t: usize,
    honest: Vec<Vec<f64>>,
    faulty: Vec<Vec<f64>>,
) -> Result<(Layout, GroundTruth)> {
    let h = honest.len();
    let received: Vec<(ClientId, Vec<f64>)> =
        honest.into_iter().chain(faulty).enumerate().collect();
    let truth = GroundTruth::new(received[..h].to_vec(), (h..received.len()).collect())?;
    let layout = Layout::new(n, t, received)?;
    Ok((layout, truth))
}

/// Number of axis directions used by the box-validity lower bound:
/// `min(floor((n - t) / t), d)`.
pub fn box_lb_directions(n: usize, t: usize, d: usize) -> usize {
    ((n - t) / t).min(d)
}

/// Layout whose trimmed trusted hyperbox is the origin while the honest
/// centroid is not: t honest vectors at `x * u_k` for each of the first k*
/// axes, the other honest vectors and all t faulty ones at the origin.
/// Honest clients get the low ids, faulty clients the last t.
pub fn gen_box_lb_instance(n: usize, t: usize, d: usize, x: f64) -> Result<(Layout, GroundTruth)> {
    if t == 0 || n <= 3 * t {
        return Err(Error::InvalidParameter(format!(
            "need t >= 1 and n > 3t, got n={n}, t={t}"
        )));
    }
    if d == 0 || !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need d >= 1 and x > 0, got d={d}, x={x}"
        )));
    }
    let k = box_lb_directions(n, t, d);
    let mut honest = vec![vec![0.0; d]; n - t - k * t];
    for axis in 0..k {
        honest.extend(std::iter::repeat_n(unit(d, axis, x), t));
    }
    assemble(n, t, honest, vec![vec![0.0; d]; t])
}

/// Layout whose safe area is the origin: t honest vectors at `eps * u_i` for
/// every axis i, the remaining n - dt vectors at the origin, t of them
/// faulty. Honest clients get the low ids, faulty clients the last t.
pub fn gen_convex_lb_instance(
    n: usize,
    t: usize,
    d: usize,
    eps: f64,
) -> Result<(Layout, GroundTruth)> {
    if t == 0 || d == 0 || n <= 3.max(d + 1) * t {
        return Err(Error::InvalidParameter(format!(
            "need t >= 1, d >= 1 and n > max(3, d+1) t, got n={n}, t={t}, d={d}"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("need eps > 0, got {eps}")));
    }
    let mut honest = Vec::with_capacity(n - t);
    for axis in 0..d {
        honest.extend(std::iter::repeat_n(unit(d, axis, eps), t));
    }
    honest.extend(std::iter::repeat_n(vec![0.0; d], n - d * t - t));
    assemble(n, t, honest, vec![vec![0.0; d]; t])
}

/// How faulty clients choose their vectors in [`gen_random_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultStrategy {
    /// Far outliers in random directions.
    Outliers,
    /// Negated copies of honest vectors.
    SignFlip,
    /// All faulty vectors at one point just past the honest extremes.
    Colluding,
    /// Drawn like honest vectors, hence indistinguishable.
    Mimic,
    /// Per coordinate, the lowest or highest honest value.
    Extremes,
    /// No message.
    Omit,
}

pub const FAULT_STRATEGIES: &[FaultStrategy] = &[
    FaultStrategy::Outliers,
    FaultStrategy::SignFlip,
    FaultStrategy::Colluding,
    FaultStrategy::Mimic,
    FaultStrategy::Extremes,
    FaultStrategy::Omit,
];

/// Random layout with `faulty` Byzantine clients following `strategy`.
///
/// Honest vectors are Gaussian around a random center with a random
/// per-instance spread spanning several orders of magnitude; some instances
/// put a fraction of honest clients in a second cluster.
pub fn gen_random_instance<R: Rng>(
    n: usize,
    t: usize,
    d: usize,
    faulty: usize,
    strategy: FaultStrategy,
    rng: &mut R,
) -> Result<(Layout, GroundTruth)> {
    if n <= 3 * t || faulty > t || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "need n > 3t, faulty <= t and d >= 1, got n={n}, t={t}, faulty={faulty}, d={d}"
        )));
    }
    let normal = |rng: &mut R| -> f64 { StandardNormal.sample(rng) };
    let center: Vec<f64> = (0..d).map(|_| 3.0 * normal(rng)).collect();
    let spread = 10f64.powf(rng.random_range(-2.0..1.0));
    let second: Option<Vec<f64>> = rng.random_bool(0.3).then(|| {
        center
            .iter()
            .map(|c| c + 4.0 * spread * normal(rng))
            .collect()
    });
    let h = n - faulty;
    let honest: Vec<Vec<f64>> = (0..h)
        .map(|i| {
            let base = match &second {
                Some(s) if i % 3 == 0 => s,
                _ => &center,
            };
            base.iter().map(|c| c + spread * normal(rng)).collect()
        })
        .collect();

    let lo: Vec<f64> = (0..d)
        .map(|k| honest.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..d)
        .map(|k| {
            honest
                .iter()
                .map(|v| v[k])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let colluding_point: Vec<f64> = (0..d)
        .map(|k| {
            if rng.random_bool(0.5) {
                hi[k] + spread
            } else {
                lo[k] - spread
            }
        })
        .collect();
    let bad: Vec<Option<Vec<f64>>> = (0..faulty)
        .map(|_| match strategy {
            FaultStrategy::Outliers => Some(
                center
                    .iter()
                    .map(|c| c + 100.0 * spread * normal(rng))
                    .collect(),
            ),
            FaultStrategy::SignFlip => {
                let v = &honest[rng.random_range(0..h)];
                Some(v.iter().map(|x| -x).collect())
            }
            FaultStrategy::Colluding => Some(colluding_point.clone()),
            FaultStrategy::Mimic => Some(center.iter().map(|c| c + spread * normal(rng)).collect()),
            FaultStrategy::Extremes => Some(
                (0..d)
                    .map(|k| if rng.random_bool(0.5) { hi[k] } else { lo[k] })
                    .collect(),
            ),
            FaultStrategy::Omit => None,
        })
        .collect();

    // Random client ids so faulty clients are not always last.
    let mut ids: Vec<ClientId> = (0..n).collect();
    ids.shuffle(rng);
    let honest_pairs: Vec<(ClientId, Vec<f64>)> = ids[..h].iter().copied().zip(honest).collect();
    let faulty_ids: BTreeSet<ClientId> = ids[h..].iter().copied().collect();
    let mut received = honest_pairs.clone();
    received.extend(
        ids[h..]
            .iter()
            .zip(bad)
            .filter_map(|(&id, v)| v.map(|v| (id, v))),
    );
    let truth = GroundTruth::new(honest_pairs, faulty_ids)?;
    let layout = Layout::new(n, t, received)?;
    Ok((layout, truth))
}

/// Convenience wrapper seeding [`gen_random_instance`] from a plain seed.
pub fn gen_random_instance_seeded(
    n: usize,
    t: usize,
    d: usize,
    faulty: usize,
    strategy: FaultStrategy,
    seed_value: u64,
) -> Result<(Layout, GroundTruth)> {
    let mut rng = seed::rng(seed_value);
    gen_random_instance(n, t, d, faulty, strategy, &mut rng)
}
