//! `fedcent gen-instance`: lower-bound and random layouts as layout files.

use std::str::FromStr;

use fedcent::evaluation::{
    gen_box_lb_instance, gen_convex_lb_instance, gen_random_instance_seeded, FaultStrategy,
};

use crate::error::{config_err, CliError};
use crate::layout_file::format_layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    BoxLb,
    ConvexLb,
    Random,
}

impl FromStr for InstanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "box_lb" => Ok(InstanceKind::BoxLb),
            "convex_lb" => Ok(InstanceKind::ConvexLb),
            "random" => Ok(InstanceKind::Random),
            other => Err(format!(
                "unknown instance kind `{other}` (valid: box_lb, convex_lb, random)"
            )),
        }
    }
}

fn parse_strategy(s: &str) -> Result<FaultStrategy, CliError> {
    Ok(match s {
        "outliers" => FaultStrategy::Outliers,
        "sign_flip" => FaultStrategy::SignFlip,
        "colluding" => FaultStrategy::Colluding,
        "mimic" => FaultStrategy::Mimic,
        "extremes" => FaultStrategy::Extremes,
        "omit" => FaultStrategy::Omit,
        other => {
            return Err(CliError::Config(format!(
                "unknown fault strategy `{other}` (valid: outliers, sign_flip, colluding, mimic, extremes, omit)"
            )))
        }
    })
}

#[derive(Debug, Clone)]
pub struct InstanceParams {
    pub kind: InstanceKind,
    pub n: usize,
    pub t: usize,
    pub d: usize,
    /// Scale of the box construction.
    pub x: f64,
    /// Scale of the convex construction.
    pub eps: f64,
    pub seed: u64,
    /// Faulty clients in a random instance; defaults to `t`.
    pub faulty: Option<usize>,
    pub strategy: String,
}

pub fn cmd_gen_instance(p: &InstanceParams) -> Result<String, CliError> {
    let (layout, truth) = match p.kind {
        InstanceKind::BoxLb => gen_box_lb_instance(p.n, p.t, p.d, p.x),
        InstanceKind::ConvexLb => gen_convex_lb_instance(p.n, p.t, p.d, p.eps),
        InstanceKind::Random => gen_random_instance_seeded(
            p.n,
            p.t,
            p.d,
            p.faulty.unwrap_or(p.t),
            parse_strategy(&p.strategy)?,
            p.seed,
        ),
    }
    .map_err(config_err)?;
    Ok(format_layout(&layout, &truth.faulty))
}
