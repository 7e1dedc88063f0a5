use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use steanesim::concat::MAX_LEVEL;
use steanesim::metrics::MetricKind;
use steanesim::sampling::{ImportanceConfig, SamplingMode};

use crate::output::write_atomic;

pub const CONFIG_FORMAT: &str = "steanesim-campaign";
pub const CONFIG_VERSION: u32 = 1;
pub const CONFIG_FILE: &str = "config.json";

/// Which of the two logical averages is reported as the headline estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Average of the metric over syndrome histories.
    #[default]
    AvgOfMetric,
    /// Metric of the average logical channel.
    MetricOfAvg,
}

/// Flat, versioned campaign description. Every field has a CLI flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub format: String,
    pub version: u32,
    /// Channels per δ value.
    pub count: usize,
    pub deltas: Vec<f64>,
    pub master_seed: u64,
    pub levels: Vec<usize>,
    pub metrics: Vec<MetricKind>,
    pub sampler: SamplingMode,
    pub beta: Option<f64>,
    pub cutoff: f64,
    /// Histories per (channel, level).
    pub samples: usize,
    /// Replace sampling at level 1 by weighted enumeration of all syndromes.
    pub enumerate_level1: bool,
    pub checkpoints_per_decade: usize,
    pub averaging: Averaging,
    /// Points on each named-channel reference curve; zero disables them.
    pub reference_points: usize,
    pub output: PathBuf,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            format: CONFIG_FORMAT.to_string(),
            version: CONFIG_VERSION,
            count: 100,
            deltas: vec![0.04],
            master_seed: 1,
            levels: vec![1, 2],
            metrics: vec![MetricKind::Infidelity, MetricKind::DiamondDistance],
            sampler: SamplingMode::Direct,
            beta: None,
            cutoff: 0.5,
            samples: 100,
            enumerate_level1: false,
            checkpoints_per_decade: 1,
            averaging: Averaging::AvgOfMetric,
            reference_points: 0,
            output: PathBuf::from("campaign"),
        }
    }
}

impl CampaignConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: CampaignConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config is serialisable");
        s.push('\n');
        s
    }

    pub fn importance(&self) -> ImportanceConfig {
        ImportanceConfig {
            mode: self.sampler,
            beta: self.beta,
            cutoff: self.cutoff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.format == CONFIG_FORMAT, "unknown config format {:?}", self.format);
        ensure!(
            self.version == CONFIG_VERSION,
            "config version {} is not supported (expected {CONFIG_VERSION})",
            self.version
        );
        ensure!(self.count > 0, "count must be positive");
        ensure!(!self.deltas.is_empty(), "at least one delta is required");
        for &d in &self.deltas {
            ensure!(d.is_finite() && d >= 0.0, "delta must be finite and nonnegative, got {d}");
        }
        ensure!(!self.levels.is_empty(), "at least one level is required");
        for &l in &self.levels {
            ensure!((1..=MAX_LEVEL).contains(&l), "level must be between 1 and {MAX_LEVEL}, got {l}");
        }
        ensure!(!self.metrics.is_empty(), "at least one metric is required");
        ensure!(self.samples > 0, "samples must be positive");
        ensure!(self.checkpoints_per_decade > 0, "checkpoints per decade must be positive");
        self.importance().validate()?;
        Ok(())
    }

    /// Writes `config.json` into the output directory, or checks that an
    /// existing one describes the same campaign.
    pub fn pin(&self) -> Result<()> {
        fs::create_dir_all(&self.output).with_context(|| format!("creating {}", self.output.display()))?;
        let path = self.output.join(CONFIG_FILE);
        if path.exists() {
            let existing = CampaignConfig::load(&path)?;
            if !existing.same_campaign(self) {
                bail!(
                    "{} describes a different campaign; refusing to resume (use a fresh output directory)",
                    path.display()
                );
            }
        }
        write_atomic(&path, self.to_json().as_bytes())
    }

    /// Equal in everything that determines the data files. Reference curves
    /// live in their own file and may be added later.
    fn same_campaign(&self, other: &CampaignConfig) -> bool {
        let strip = |c: &CampaignConfig| CampaignConfig {
            reference_points: 0,
            ..c.clone()
        };
        strip(self) == strip(other)
    }
}
