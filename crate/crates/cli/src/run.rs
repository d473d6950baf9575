//! `fedcent run`: one training run from a config file.

use std::path::{Path, PathBuf};

use fedcent::flsim::{RoundRecord, Simulation};
use fedcent::Error;

use crate::config::RunConfig;
use crate::error::{config_err, CliError};
use crate::report::{svg_chart, CsvSink, DECISIONS};

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub csv: Option<PathBuf>,
}

pub fn metadata(cfg: &RunConfig) -> Vec<String> {
    let mut lines = vec![
        "fedcent run".to_string(),
        format!("config_sha256: {}", cfg.hash()),
        format!("seed: {}", cfg.seed),
        format!("decisions: {}", DECISIONS.join("; ")),
        "config:".to_string(),
    ];
    lines.extend(cfg.to_toml().lines().map(|l| format!("  {l}")));
    lines
}

/// Runs training and streams rows to the CSV. On failure the rows written
/// so far stay on disk.
pub fn cmd_run(config_path: &Path, overrides: &RunOverrides) -> Result<Vec<RoundRecord>, CliError> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(p) = &overrides.csv {
        cfg.output.csv = Some(p.clone());
    }
    run_config(&cfg)
}

pub fn run_config(cfg: &RunConfig) -> Result<Vec<RoundRecord>, CliError> {
    cfg.validate()?;
    let csv_path = cfg
        .output
        .csv
        .clone()
        .ok_or_else(|| CliError::Config("no CSV output path (output.csv or --out)".into()))?;
    let (train, test) = cfg.load_data()?;
    log::info!(
        "{} train / {} test samples, dimension {}, {} classes",
        train.len(),
        test.len(),
        train.dim(),
        train.class_count
    );
    let mut sim = Simulation::new(cfg.train_config()?, &train, &test).map_err(config_err)?;
    log::info!("attacked clients: {:?}", sim.attacked());
    let mut sink = CsvSink::create(&csv_path, &metadata(cfg))
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", csv_path.display())))?;
    let records = sim
        .run_with(|r| {
            log::info!(
                "round {} accuracy {:.4} loss {:.4}",
                r.round,
                r.accuracy,
                r.loss
            );
            sink.write(r).map_err(Error::Io)
        })
        .map_err(|e| {
            CliError::Runtime(format!("{e} (partial results in {})", csv_path.display()))
        })?;
    if let Some(svg) = &cfg.output.svg {
        let title = format!(
            "{} {} f={} {}",
            cfg.training.mode, cfg.aggregator.name, cfg.attack.f, cfg.attack.kind
        );
        if let Some(dir) = svg.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        }
        std::fs::write(svg, svg_chart(&records, &title))
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", svg.display())))?;
    }
    Ok(records)
}
