//! Run configuration: a TOML file whose tables and dotted keys are checked
//! strictly. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use fedcent::aggregators::AGGREGATOR_NAMES;
use fedcent::attacks::{AttackKind, AttackSpec};
use fedcent::dataio::{load_csv, load_idx, synth_blobs, Dataset};
use fedcent::flsim::{Mode, PartitionScheme, TrainConfig, DEFAULT_HIDDEN};
use fedcent::geometry::DEFAULT_MEB_EPS;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub clients: ClientsConfig,
    #[serde(default)]
    pub attack: AttackConfig,
    pub aggregator: AggregatorConfig,
    pub training: TrainingConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Idx,
    Csv,
    Synth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(rename = "type")]
    pub kind: DatasetKind,
    /// IDX image file.
    pub images: Option<PathBuf>,
    /// IDX label file.
    pub labels: Option<PathBuf>,
    /// CSV file.
    pub path: Option<PathBuf>,
    /// Keep only the first `limit` samples before splitting.
    pub limit: Option<usize>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    pub dim: Option<usize>,
    pub classes: Option<usize>,
    pub per_class: Option<usize>,
    pub spread: Option<f64>,
}

fn default_test_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientsConfig {
    pub n: usize,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    #[serde(default = "default_attack_kind")]
    pub kind: String,
    #[serde(default)]
    pub f: usize,
    /// fixed_vector payload.
    pub value: Option<Vec<f64>>,
    /// gaussian_noise scale.
    pub sigma: Option<f64>,
    /// shift direction and length.
    pub direction: Option<Vec<f64>>,
    pub magnitude: Option<f64>,
}

fn default_attack_kind() -> String {
    "sign_flip".into()
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            kind: default_attack_kind(),
            f: 0,
            value: None,
            sigma: None,
            direction: None,
            magnitude: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregatorConfig {
    pub name: String,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    DEFAULT_MEB_EPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub mode: String,
    pub rounds: usize,
    pub lr: f64,
    pub local_steps: Option<usize>,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
}

fn default_batch() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    pub scheme: String,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self {
            scheme: "homogeneous".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.dataset.images);
        resolve(&mut cfg.dataset.labels);
        resolve(&mut cfg.dataset.path);
        resolve(&mut cfg.output.csv);
        resolve(&mut cfg.output.svg);
        Ok(cfg)
    }

    /// Everything checkable without touching the dataset.
    pub fn validate(&self) -> Result<(), CliError> {
        if !AGGREGATOR_NAMES.contains(&self.aggregator.name.as_str()) {
            return Err(CliError::Config(format!(
                "unknown aggregator `{}` (valid: {})",
                self.aggregator.name,
                AGGREGATOR_NAMES.join(", ")
            )));
        }
        let d = &self.dataset;
        if !(0.0..1.0).contains(&d.test_fraction) || d.test_fraction == 0.0 {
            return Err(CliError::Config(format!(
                "dataset.test_fraction must be in (0, 1), got {}",
                d.test_fraction
            )));
        }
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "dataset type {:?} needs {what}",
                    d.kind
                )))
            }
        };
        match d.kind {
            DatasetKind::Idx => need(
                d.images.is_some() && d.labels.is_some(),
                "images and labels",
            )?,
            DatasetKind::Csv => need(d.path.is_some(), "path")?,
            DatasetKind::Synth => need(
                d.dim.is_some() && d.classes.is_some() && d.per_class.is_some(),
                "dim, classes and per_class",
            )?,
        }
        self.train_config()?.validate().map_err(config_err)
    }

    pub fn attack_spec(&self) -> Result<AttackSpec, CliError> {
        let a = &self.attack;
        let missing = |field: &str| {
            CliError::Config(format!("attack kind `{}` needs attack.{field}", a.kind))
        };
        let kind = match a.kind.as_str() {
            "fixed_vector" => {
                AttackKind::FixedVector(a.value.clone().ok_or_else(|| missing("value"))?)
            }
            "gaussian_noise" => AttackKind::GaussianNoise {
                sigma: a.sigma.ok_or_else(|| missing("sigma"))?,
            },
            "shift" => AttackKind::Shift {
                direction: a.direction.clone().ok_or_else(|| missing("direction"))?,
                magnitude: a.magnitude.ok_or_else(|| missing("magnitude"))?,
            },
            other => other.parse().map_err(config_err)?,
        };
        Ok(AttackSpec { kind, f: a.f })
    }

    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let mode: Mode = self.training.mode.parse().map_err(config_err)?;
        let mut cfg = TrainConfig::new(
            mode,
            self.training.rounds,
            self.training.lr,
            self.clients.n,
            self.clients.t,
            &self.aggregator.name,
        );
        cfg.eps = self.aggregator.eps;
        cfg.attack = self.attack_spec()?;
        cfg.partition = self
            .partition
            .scheme
            .parse::<PartitionScheme>()
            .map_err(config_err)?;
        cfg.local_steps = self.training.local_steps;
        cfg.batch_size = self.training.batch_size;
        cfg.hidden = self.model.hidden.clone();
        cfg.seed = self.seed;
        Ok(cfg)
    }

    /// Loads the dataset and splits it into train and test sets.
    pub fn load_data(&self) -> Result<(Dataset, Dataset), CliError> {
        let d = &self.dataset;
        let data = match d.kind {
            DatasetKind::Idx => load_idx(
                d.images.as_ref().expect("validated"),
                d.labels.as_ref().expect("validated"),
            ),
            DatasetKind::Csv => load_csv(d.path.as_ref().expect("validated")),
            DatasetKind::Synth => synth_blobs(
                d.dim.expect("validated"),
                d.classes.expect("validated"),
                d.per_class.expect("validated"),
                d.spread.unwrap_or(1.0),
                self.seed,
            ),
        }
        .map_err(config_err)?;
        let data = match d.limit {
            Some(k) => data.truncate(k),
            None => data,
        };
        data.split(d.test_fraction, self.seed).map_err(config_err)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the resolved config in canonical TOML form.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SYNTH: &str = r#"
seed = 3
dataset.type = "synth"
dataset.dim = 4
dataset.classes = 3
dataset.per_class = 20
clients.n = 4
clients.t = 1
attack.kind = "sign_flip"
attack.f = 1
aggregator.name = "mda"
training.mode = "fedsgd"
training.rounds = 5
training.lr = 0.1
"#;

    #[test]
    fn parses_dotted_keys() {
        let cfg = RunConfig::parse(SYNTH).unwrap();
        assert_eq!(cfg.clients.n, 4);
        assert_eq!(cfg.partition.scheme, "homogeneous");
        assert_eq!(cfg.model.hidden, vec![32, 16]);
        let tc = cfg.train_config().unwrap();
        assert_eq!(tc.attack.kind, AttackKind::SignFlip);
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_configs() {
        let err = RunConfig::parse(&SYNTH.replace("\"mda\"", "\"krum\"")).unwrap_err();
        assert!(err.to_string().contains("box"), "{err}");
        assert!(RunConfig::parse(&SYNTH.replace("rounds = 5", "rounds = 0")).is_err());
        assert!(RunConfig::parse(&format!("{SYNTH}\ntraining.momentum = 0.9\n")).is_err());
        assert!(RunConfig::parse(&SYNTH.replace("clients.t = 1", "clients.t = 2")).is_err());
        assert!(RunConfig::parse(&SYNTH.replace("\"sign_flip\"", "\"shift\"")).is_err());
        assert!(RunConfig::parse(&SYNTH.replace("dataset.dim = 4\n", "")).is_err());
    }
}
