use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use super::mlp::{
    evaluate_model, forward_loss_grad, init_model, local_update, Activation, MlpConfig, ModelParams,
};
use super::partition::{partition_data, PartitionScheme};
use crate::aggregators::{get_aggregator_with_eps, AggregationResult, Aggregator};
use crate::attacks::{apply_attack, select_attacked, AttackSpec};
use crate::candidates::{covering_ball, ClientId, Layout};
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::evaluation::{nonfaulty_diameter, ratio_against_ball, GroundTruth, Ratio};
use crate::geometry::DEFAULT_MEB_EPS;
use crate::seed;

pub const DEFAULT_HIDDEN: [usize; 2] = [32, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Clients send full-shard gradients; the server steps along the aggregate.
    FedSgd,
    /// Clients send locally trained parameters; the aggregate becomes the model.
    FedAvg,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fedsgd" => Ok(Mode::FedSgd),
            "fedavg" => Ok(Mode::FedAvg),
            other => Err(Error::InvalidParameter(format!(
                "unknown training mode `{other}` (valid: fedsgd, fedavg)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::FedSgd => "fedsgd",
            Mode::FedAvg => "fedavg",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: Mode,
    pub rounds: usize,
    pub lr: f64,
    pub n: usize,
    pub t: usize,
    pub aggregator: String,
    /// Covering-ball accuracy, for the aggregator and for the metrics.
    pub eps: f64,
    pub attack: AttackSpec,
    pub partition: PartitionScheme,
    /// FedAvg local steps; `None` means one pass over the shard.
    pub local_steps: Option<usize>,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(mode: Mode, rounds: usize, lr: f64, n: usize, t: usize, aggregator: &str) -> Self {
        Self {
            mode,
            rounds,
            lr,
            n,
            t,
            aggregator: aggregator.to_string(),
            eps: DEFAULT_MEB_EPS,
            attack: AttackSpec::none(),
            partition: PartitionScheme::Homogeneous,
            local_steps: None,
            batch_size: 32,
            hidden: DEFAULT_HIDDEN.to_vec(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be >= 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lr must be positive, got {}",
                self.lr
            )));
        }
        if self.n == 0 || 3 * self.t >= self.n {
            return Err(Error::InvalidParameter(format!(
                "need n > 3t with n >= 1, got n={}, t={}",
                self.n, self.t
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.batch_size == 0 || self.local_steps == Some(0) {
            return Err(Error::InvalidParameter(
                "batch_size and local_steps must be >= 1".into(),
            ));
        }
        if self.hidden.contains(&0) {
            return Err(Error::InvalidParameter(
                "hidden layer sizes must be positive".into(),
            ));
        }
        self.attack.validate(self.t)
    }

    /// `lr / (1 + decay * round)` with `decay = lr / rounds`.
    pub fn lr_at(&self, round: usize) -> f64 {
        let decay = self.lr / self.rounds as f64;
        self.lr / (1.0 + decay * round as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub accuracy: f64,
    pub loss: f64,
    /// `None` when the candidate set is too large to enumerate.
    pub rad_cov: Option<f64>,
    pub nonfaulty_diameter: f64,
    pub ratio: Option<Ratio>,
    pub elapsed_ms: f64,
}

/// Everything the server saw and produced in one round.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub record: RoundRecord,
    pub layout: Layout,
    pub truth: GroundTruth,
    pub aggregation: AggregationResult,
}

#[derive(Debug)]
pub struct Simulation<'a> {
    cfg: TrainConfig,
    aggregator: Box<dyn Aggregator>,
    params: ModelParams,
    shards: Vec<Dataset>,
    test: &'a Dataset,
    attacked: BTreeSet<ClientId>,
    round: usize,
}

impl<'a> Simulation<'a> {
    pub fn new(cfg: TrainConfig, train: &Dataset, test: &'a Dataset) -> Result<Self> {
        cfg.validate()?;
        if train.dim() != test.dim() || train.class_count != test.class_count {
            return Err(Error::InvalidParameter(
                "train and test sets differ in feature dimension or class count".into(),
            ));
        }
        let aggregator = get_aggregator_with_eps(&cfg.aggregator, cfg.eps)?;
        let mut layer_sizes = vec![train.dim()];
        layer_sizes.extend(&cfg.hidden);
        layer_sizes.push(train.class_count);
        let params = init_model(&MlpConfig {
            layer_sizes,
            activation: Activation::Relu,
            init_seed: cfg.seed,
        })?;
        let shards: Vec<Dataset> = partition_data(
            &train.labels,
            train.class_count,
            cfg.partition,
            cfg.n,
            cfg.seed,
        )?
        .iter()
        .map(|idx| train.subset(idx))
        .collect();
        if let Some(i) = shards.iter().position(Dataset::is_empty) {
            return Err(Error::InvalidParameter(format!(
                "client {i} received an empty shard"
            )));
        }
        let attacked = select_attacked(cfg.n, cfg.attack.f, cfg.seed)?;
        Ok(Self {
            cfg,
            aggregator,
            params,
            shards,
            test,
            attacked,
            round: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn shards(&self) -> &[Dataset] {
        &self.shards
    }

    pub fn attacked(&self) -> &BTreeSet<ClientId> {
        &self.attacked
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn is_done(&self) -> bool {
        self.round >= self.cfg.rounds
    }

    /// Runs one round and keeps the full server view.
    pub fn step_detailed(&mut self) -> Result<RoundOutcome> {
        let started = Instant::now();
        let r = self.round;
        let lr = self.cfg.lr_at(r);

        // Honest vectors, computed in parallel and collected in client order.
        let honest: Vec<Vec<f64>> = match self.cfg.mode {
            Mode::FedSgd => self
                .shards
                .par_iter()
                .map(|s| {
                    forward_loss_grad(&self.params, s.features.view(), &s.labels).map(|(_, g)| g)
                })
                .collect::<Result<_>>()?,
            Mode::FedAvg => self
                .shards
                .par_iter()
                .enumerate()
                .map(|(i, s)| {
                    let steps = self
                        .cfg
                        .local_steps
                        .unwrap_or_else(|| s.len().div_ceil(self.cfg.batch_size));
                    let local_seed =
                        seed::derive(self.cfg.seed, seed::TAG_LOCAL, i as u64, r as u64);
                    local_update(&self.params, s, steps, self.cfg.batch_size, lr, local_seed)
                        .map(|p| p.flat)
                })
                .collect::<Result<_>>()?,
        };

        let mut received = Vec::with_capacity(self.cfg.n);
        let mut truth_vectors = Vec::with_capacity(self.cfg.n);
        for (i, v) in honest.into_iter().enumerate() {
            if self.attacked.contains(&i) {
                let attack_seed = seed::derive(self.cfg.seed, seed::TAG_ATTACK, i as u64, r as u64);
                if let Some(sent) = apply_attack(&self.cfg.attack.kind, &v, attack_seed)? {
                    received.push((i, sent));
                }
            } else {
                received.push((i, v.clone()));
                truth_vectors.push((i, v));
            }
        }
        let layout = Layout::new(self.cfg.n, self.cfg.t, received)?;
        let truth = GroundTruth::new(truth_vectors, self.attacked.clone())?;
        let aggregation = self.aggregator.aggregate(&layout)?;

        match self.cfg.mode {
            Mode::FedSgd => {
                for (x, g) in self.params.flat.iter_mut().zip(&aggregation.output) {
                    *x -= lr * g;
                }
            }
            Mode::FedAvg => self.params.flat.clone_from(&aggregation.output),
        }
        self.round += 1;

        let (accuracy, loss) = evaluate_model(&self.params, self.test)?;
        let (rad_cov, ratio) = match covering_ball(&layout, self.cfg.eps) {
            Ok(ball) => {
                let report = ratio_against_ball(&aggregation.output, &truth, &ball)?;
                (Some(report.rad_cov), Some(report.ratio))
            }
            Err(Error::EnumerationCap { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        let record = RoundRecord {
            round: self.round,
            accuracy,
            loss,
            rad_cov,
            nonfaulty_diameter: nonfaulty_diameter(&truth),
            ratio,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        log::debug!(
            "round {} acc {:.4} loss {:.4} rad_cov {:?}",
            record.round,
            record.accuracy,
            record.loss,
            record.rad_cov
        );
        Ok(RoundOutcome {
            record,
            layout,
            truth,
            aggregation,
        })
    }

    pub fn step(&mut self) -> Result<RoundRecord> {
        self.step_detailed().map(|o| o.record)
    }

    /// Runs the remaining rounds, handing each record to `sink` as it is
    /// produced. Stops at the first error from a round or from `sink`.
    pub fn run_with<F>(&mut self, mut sink: F) -> Result<Vec<RoundRecord>>
    where
        F: FnMut(&RoundRecord) -> Result<()>,
    {
        let mut records = Vec::with_capacity(self.cfg.rounds - self.round);
        while !self.is_done() {
            let rec = self.step()?;
            sink(&rec)?;
            records.push(rec);
        }
        Ok(records)
    }

    pub fn run(&mut self) -> Result<Vec<RoundRecord>> {
        self.run_with(|_| Ok(()))
    }
}
