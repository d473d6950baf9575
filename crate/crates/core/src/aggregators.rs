//! Aggregation rules the server can run on a round's [`Layout`].
//!
//! Aggregators see only the layout. They never learn which clients are
//! faulty.

use std::fmt;

use crate::candidates::{
    centroid_hyperbox, covering_ball, safe_area_point, trimmed_trusted_hyperbox, ClientId, Layout,
};
use crate::error::{Error, Result};
use crate::geometry::{self, Hyperbox, DEFAULT_MEB_EPS, EXACT_TOL};

pub const AGGREGATOR_NAMES: &[&str] = &["mean", "ball_center", "mda", "box", "safe_area"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Client ids of the subset whose mean was output (MDA).
    pub chosen_subset: Option<Vec<ClientId>>,
    /// Trimmed trusted hyperbox and centroid hyperbox (Box).
    pub boxes: Option<(Hyperbox, Hyperbox)>,
    /// Radius of the covering ball (ball center, safe area).
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationResult {
    pub output: Vec<f64>,
    pub aggregator: &'static str,
    pub diagnostics: Diagnostics,
}

impl AggregationResult {
    fn plain(aggregator: &'static str, output: Vec<f64>) -> Self {
        Self {
            output,
            aggregator,
            diagnostics: Diagnostics::default(),
        }
    }
}

pub trait Aggregator: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn aggregate(&self, layout: &Layout) -> Result<AggregationResult>;
}

/// Looks up an aggregator by name with its default parameters.
pub fn get_aggregator(name: &str) -> Result<Box<dyn Aggregator>> {
    get_aggregator_with_eps(name, DEFAULT_MEB_EPS)
}

/// Like [`get_aggregator`], with the covering-ball accuracy for the
/// aggregators that compute one.
pub fn get_aggregator_with_eps(name: &str, eps: f64) -> Result<Box<dyn Aggregator>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    Ok(match name {
        "mean" => Box::new(Mean),
        "ball_center" => Box::new(BallCenter { eps }),
        "mda" => Box::new(Mda),
        "box" => Box::new(BoxCenter { tol: EXACT_TOL }),
        "safe_area" => Box::new(SafeArea {
            eps,
            tol: EXACT_TOL,
        }),
        _ => {
            return Err(Error::UnknownAggregator {
                name: name.to_string(),
                valid: AGGREGATOR_NAMES,
            })
        }
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Mean;

#[derive(Debug, Clone, Copy)]
pub struct BallCenter {
    pub eps: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Mda;

#[derive(Debug, Clone, Copy)]
pub struct BoxCenter {
    pub tol: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SafeArea {
    pub eps: f64,
    pub tol: f64,
}

impl Aggregator for Mean {
    fn name(&self) -> &'static str {
        "mean"
    }

    fn aggregate(&self, layout: &Layout) -> Result<AggregationResult> {
        Ok(aggregate_mean(layout))
    }
}

impl Aggregator for BallCenter {
    fn name(&self) -> &'static str {
        "ball_center"
    }

    fn aggregate(&self, layout: &Layout) -> Result<AggregationResult> {
        aggregate_ball_center(layout, self.eps)
    }
}

impl Aggregator for Mda {
    fn name(&self) -> &'static str {
        "mda"
    }

    fn aggregate(&self, layout: &Layout) -> Result<AggregationResult> {
        aggregate_mda(layout)
    }
}

impl Aggregator for BoxCenter {
    fn name(&self) -> &'static str {
        "box"
    }

    fn aggregate(&self, layout: &Layout) -> Result<AggregationResult> {
        aggregate_box_with_tol(layout, self.tol)
    }
}

impl Aggregator for SafeArea {
    fn name(&self) -> &'static str {
        "safe_area"
    }

    fn aggregate(&self, layout: &Layout) -> Result<AggregationResult> {
        aggregate_safe_area_with_tol(layout, self.eps, self.tol)
    }
}

/// Coordinate-wise mean of all received vectors.
pub fn aggregate_mean(layout: &Layout) -> AggregationResult {
    AggregationResult::plain("mean", layout.mean())
}

/// Center of the minimum covering ball of the candidate centroids.
pub fn aggregate_ball_center(layout: &Layout, eps: f64) -> Result<AggregationResult> {
    let ball = covering_ball(layout, eps)?;
    Ok(AggregationResult {
        output: ball.center,
        aggregator: "ball_center",
        diagnostics: Diagnostics {
            radius: Some(ball.radius),
            ..Default::default()
        },
    })
}

/// Minimum-diameter averaging: the mean of the size-(n-t) subset with the
/// smallest maximum pairwise distance. Ties go to the lexicographically
/// smallest subset.
pub fn aggregate_mda(layout: &Layout) -> Result<AggregationResult> {
    layout.check_enumeration_cap()?;
    let m = layout.m();
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let d = geometry::dist_sq(layout.vector(i), layout.vector(j));
            dist[i * m + j] = d;
            dist[j * m + i] = d;
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in layout.subsets() {
        let mut diam = 0.0_f64;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                diam = diam.max(dist[i * m + j]);
            }
        }
        if best.as_ref().is_none_or(|(b, _)| diam < *b) {
            best = Some((diam, subset));
        }
    }
    let (_, subset) = best.expect("at least one subset");
    let output = layout.subset_mean(&subset);
    let ids = subset.iter().map(|&i| layout.received()[i].0).collect();
    Ok(AggregationResult {
        output,
        aggregator: "mda",
        diagnostics: Diagnostics {
            chosen_subset: Some(ids),
            ..Default::default()
        },
    })
}

/// Center of the intersection of the trimmed trusted hyperbox and the
/// centroid hyperbox.
pub fn aggregate_box(layout: &Layout) -> Result<AggregationResult> {
    aggregate_box_with_tol(layout, EXACT_TOL)
}

fn aggregate_box_with_tol(layout: &Layout, tol: f64) -> Result<AggregationResult> {
    let tth = trimmed_trusted_hyperbox(layout);
    let ch = centroid_hyperbox(layout);
    let mut output = Vec::with_capacity(layout.dim());
    for k in 0..layout.dim() {
        let lo = tth.lo()[k].max(ch.lo()[k]);
        let hi = tth.hi()[k].min(ch.hi()[k]);
        // A gap can only come from rounding in the hyperbox means.
        let slack = tol * lo.abs().max(hi.abs()).max(1.0);
        if lo > hi + slack {
            return Err(Error::Integrity(format!(
                "TTH and CH disjoint at coordinate {k}: [{}, {}] vs [{}, {}]",
                tth.lo()[k],
                tth.hi()[k],
                ch.lo()[k],
                ch.hi()[k]
            )));
        }
        output.push(0.5 * (lo + hi));
    }
    Ok(AggregationResult {
        output,
        aggregator: "box",
        diagnostics: Diagnostics {
            boxes: Some((tth, ch)),
            ..Default::default()
        },
    })
}

/// Point of the safe area closest to the covering-ball center.
pub fn aggregate_safe_area(layout: &Layout, eps: f64) -> Result<AggregationResult> {
    aggregate_safe_area_with_tol(layout, eps, EXACT_TOL)
}

fn aggregate_safe_area_with_tol(layout: &Layout, eps: f64, tol: f64) -> Result<AggregationResult> {
    if layout.dim() > 2 {
        return Err(Error::Unsupported(format!(
            "safe area needs d <= 2, got d={}",
            layout.dim()
        )));
    }
    let ball = covering_ball(layout, eps)?;
    let output = safe_area_point(layout, &ball.center, tol)?;
    Ok(AggregationResult {
        output,
        aggregator: "safe_area",
        diagnostics: Diagnostics {
            radius: Some(ball.radius),
            ..Default::default()
        },
    })
}
