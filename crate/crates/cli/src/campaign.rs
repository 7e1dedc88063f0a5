use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use steanesim::channel::{
    gamma_to_vec, member_seed, named_channel, random_channel, splitmix64, Channel, ChannelRecord, NamedChannel,
};
use steanesim::concat::{
    enumerate_level1, estimate_all, outlier_histogram, sample_histories, summarize, ConcatSimulator, EstimateConfig,
    EstimateRecord, LogicalEstimate,
};
use steanesim::metrics::MetricKind;
use steanesim::sampling::{HistogramConfig, ImportanceConfig, TracePoint};

use crate::config::{Averaging, CampaignConfig};
use crate::output::{read_lines, write_atomic, write_lines};

pub const CHANNELS_FILE: &str = "channels.jsonl";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const ML_FILE: &str = "ml_dataset.jsonl";

/// Channels simulated between two atomic rewrites of a results file.
const BATCH: usize = 32;

pub fn results_path(dir: &Path, level: usize) -> PathBuf {
    dir.join(format!("results_l{level}.jsonl"))
}

pub fn scatter_path(dir: &Path, level: usize) -> PathBuf {
    dir.join(format!("scatter_l{level}.jsonl"))
}

pub fn reference_path(dir: &Path, level: usize) -> PathBuf {
    dir.join(format!("reference_l{level}.jsonl"))
}

/// Master seed of the ensemble for the `index`-th δ value.
fn ensemble_seed(master_seed: u64, index: usize) -> u64 {
    splitmix64(master_seed.wrapping_add(index as u64))
}

/// Sampling seed of a (channel, level) task; independent of campaign order.
fn task_seed(channel_seed: u64, level: usize) -> u64 {
    member_seed(channel_seed, level as u64)
}

fn generate_channels(config: &CampaignConfig) -> Result<Vec<Channel>> {
    let jobs: Vec<(f64, u64)> = config
        .deltas
        .iter()
        .enumerate()
        .flat_map(|(d, &delta)| {
            let master = ensemble_seed(config.master_seed, d);
            (0..config.count as u64).map(move |i| (delta, member_seed(master, i)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(delta, seed)| random_channel(delta, seed).map_err(Into::into))
        .collect()
}

/// `gen-ensemble`: writes the channel file.
pub fn gen_ensemble(config: &CampaignConfig) -> Result<Vec<Channel>> {
    config.pin()?;
    write_channels(config)
}

fn write_channels(config: &CampaignConfig) -> Result<Vec<Channel>> {
    let channels = generate_channels(config)?;
    let records: Vec<ChannelRecord> = channels.iter().map(Channel::to_record).collect();
    write_lines(&config.output.join(CHANNELS_FILE), &records)?;
    Ok(channels)
}

/// Channels of the campaign, from the channel file when present.
pub fn load_channels(config: &CampaignConfig) -> Result<Vec<Channel>> {
    let path = config.output.join(CHANNELS_FILE);
    if !path.exists() {
        return write_channels(config);
    }
    let records: Vec<ChannelRecord> = read_lines(&path)?;
    let expected = generate_channels(config)?;
    ensure!(
        records.len() == expected.len()
            && records.iter().zip(&expected).all(|(r, e)| Some(r.seed) == e.meta().seed),
        "{} does not match the configured ensemble; refusing to continue",
        path.display()
    );
    records
        .iter()
        .map(|r| Channel::from_record(r).map_err(Into::into))
        .collect()
}

fn estimate_channel(
    channel: &Channel,
    level: usize,
    config: &CampaignConfig,
) -> Result<(EstimateConfig, Vec<LogicalEstimate>)> {
    let seed = channel.meta().seed.map_or(0, |s| task_seed(s, level));
    let mut est = EstimateConfig {
        sampling: config.importance(),
        checkpoints_per_decade: config.checkpoints_per_decade,
        ..EstimateConfig::new(level, config.samples, config.metrics.clone(), seed)
    };
    if level == 1 && config.enumerate_level1 {
        let samples = enumerate_level1(channel)?;
        est.n_samples = samples.len();
        est.sampling = ImportanceConfig::uniform();
        let estimates = summarize(&samples, &est)?;
        return Ok((est, estimates));
    }
    let estimates = estimate_all(channel, &est)?;
    Ok((est, estimates))
}

fn headline(estimate: &LogicalEstimate, averaging: Averaging) -> f64 {
    match averaging {
        Averaging::AvgOfMetric => estimate.avg_of_metric,
        Averaging::MetricOfAvg => estimate.metric_of_avg,
    }
}

/// One point of a physical-versus-logical scatter plot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterRecord {
    pub channel_index: usize,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub level: usize,
    pub averaging: Averaging,
    pub physical: BTreeMap<MetricKind, f64>,
    pub logical: BTreeMap<MetricKind, f64>,
    pub resolution_limited: BTreeMap<MetricKind, bool>,
}

impl ScatterRecord {
    fn new(record: &EstimateRecord, averaging: Averaging) -> Self {
        ScatterRecord {
            channel_index: record.channel_index,
            seed: record.seed,
            delta: record.delta,
            level: record.level,
            averaging,
            physical: record.physical.clone(),
            logical: record.estimates.iter().map(|e| (e.metric, headline(e, averaging))).collect(),
            resolution_limited: record
                .estimates
                .iter()
                .map(|e| (e.metric, e.resolution_limited))
                .collect(),
        }
    }
}

/// A named channel's point on a reference curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub family: String,
    pub parameter: f64,
    pub level: usize,
    pub averaging: Averaging,
    pub physical: BTreeMap<MetricKind, f64>,
    pub logical: BTreeMap<MetricKind, f64>,
}

/// `simulate`: results, scatter and reference files for every level.
pub fn simulate(config: &CampaignConfig) -> Result<()> {
    config.pin()?;
    let channels = load_channels(config)?;
    for &level in &config.levels {
        let path = results_path(&config.output, level);
        let mut done: Vec<EstimateRecord> = if path.exists() { read_lines(&path)? } else { Vec::new() };
        for (i, r) in done.iter().enumerate() {
            ensure!(
                r.channel_index == i && r.seed == channels.get(i).and_then(|c| c.meta().seed),
                "{} line {} does not match channel {i}; refusing to resume",
                path.display(),
                i + 1
            );
            ensure!(
                r.level == level && same_settings(r, config),
                "{} was produced with different settings; refusing to resume",
                path.display()
            );
        }
        while done.len() < channels.len() {
            let start = done.len();
            let end = (start + BATCH).min(channels.len());
            let batch: Vec<EstimateRecord> = (start..end)
                .into_par_iter()
                .map(|i| {
                    let ch = &channels[i];
                    let (est, estimates) = estimate_channel(ch, level, config)
                        .with_context(|| format!("channel {i}, level {level}"))?;
                    Ok(EstimateRecord::new(i, ch, &est, estimates)?)
                })
                .collect::<Result<_>>()?;
            done.extend(batch);
            write_lines(&path, &done)?;
        }
        let scatter: Vec<ScatterRecord> = done.iter().map(|r| ScatterRecord::new(r, config.averaging)).collect();
        write_lines(&scatter_path(&config.output, level), &scatter)?;
        if config.reference_points > 0 {
            write_lines(&reference_path(&config.output, level), &reference_curves(config, level)?)?;
        }
    }
    Ok(())
}

fn same_settings(record: &EstimateRecord, config: &CampaignConfig) -> bool {
    let metrics: Vec<MetricKind> = record.estimates.iter().map(|e| e.metric).collect();
    let enumerated = record.level == 1 && config.enumerate_level1;
    metrics == config.metrics && (enumerated || record.n_samples == config.samples)
}

/// Log-spaced grid from `lo` to `hi` with `n` points.
fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Depolarizing and rotation channels over a range of physical strengths.
pub fn reference_curves(config: &CampaignConfig, level: usize) -> Result<Vec<ReferenceRecord>> {
    let mut points: Vec<(&str, f64, NamedChannel)> = Vec::new();
    for p in log_grid(1e-3, 0.3, config.reference_points) {
        points.push(("depolarizing", p, NamedChannel::Depolarizing { p }));
    }
    for theta in log_grid(1e-2, 1.0, config.reference_points) {
        points.push(("rotation", theta, NamedChannel::Rotation { theta }));
    }
    points
        .par_iter()
        .enumerate()
        .map(|(k, &(family, parameter, kind))| {
            let ch = named_channel(kind)?;
            let seed = member_seed(config.master_seed ^ 0x5245_4645_5245_4e43, k as u64);
            let est = EstimateConfig {
                sampling: config.importance(),
                ..EstimateConfig::new(level, config.samples, config.metrics.clone(), task_seed(seed, level))
            };
            let estimates = if level == 1 && config.enumerate_level1 {
                let samples = enumerate_level1(&ch)?;
                summarize(
                    &samples,
                    &EstimateConfig {
                        n_samples: samples.len(),
                        ..est.clone()
                    },
                )?
            } else {
                estimate_all(&ch, &est)?
            };
            let physical = config
                .metrics
                .iter()
                .map(|&m| Ok((m, m.evaluate(&ch)?)))
                .collect::<Result<_>>()?;
            Ok(ReferenceRecord {
                family: family.to_string(),
                parameter,
                level,
                averaging: config.averaging,
                physical,
                logical: estimates.iter().map(|e| (e.metric, headline(e, config.averaging))).collect(),
            })
        })
        .collect()
}

/// One line of the metric table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricLine {
    pub seed: Option<u64>,
    pub metric: MetricKind,
    pub value: f64,
}

/// `metrics`: physical metric table of the ensemble.
pub fn metrics(config: &CampaignConfig) -> Result<()> {
    let channels = load_channels(config)?;
    let lines: Vec<Vec<MetricLine>> = channels
        .par_iter()
        .map(|ch| {
            config
                .metrics
                .iter()
                .map(|&m| {
                    Ok(MetricLine {
                        seed: ch.meta().seed,
                        metric: m,
                        value: m.evaluate(ch)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let lines: Vec<MetricLine> = lines.into_iter().flatten().collect();
    write_lines(&config.output.join(METRICS_FILE), &lines)
}

fn pick_channel(config: &CampaignConfig, index: usize) -> Result<Channel> {
    let channels = load_channels(config)?;
    match channels.into_iter().nth(index) {
        Some(ch) => Ok(ch),
        None => bail!("channel index {index} is out of range"),
    }
}

/// `histogram`: density of syndrome histories over probability and logical noise.
pub fn histogram(
    config: &CampaignConfig,
    index: usize,
    level: usize,
    metric: MetricKind,
    budget: usize,
    bins: HistogramConfig,
) -> Result<PathBuf> {
    ensure!(bins.probability.bins > 0 && bins.noise.bins > 0, "histogram needs at least one bin per axis");
    let ch = pick_channel(config, index)?;
    let seed = ch.meta().seed.map_or(0, |s| task_seed(s, level));
    let hist = outlier_histogram(&ch, level, metric, config.samples, budget, bins, seed)?;
    let path = config.output.join(format!("histogram_l{level}_c{index}.json"));
    let mut text = serde_json::to_string(&hist.to_json())?;
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// `trace`: running estimates of one channel under direct and importance sampling.
pub fn trace(config: &CampaignConfig, index: usize, level: usize, metric: MetricKind) -> Result<PathBuf> {
    let ch = pick_channel(config, index)?;
    let seed = ch.meta().seed.map_or(0, |s| task_seed(s, level));
    let importance = match config.sampler {
        steanesim::sampling::SamplingMode::Direct => ImportanceConfig::power_law(),
        _ => config.importance(),
    };
    let mut lines: Vec<TracePoint> = Vec::new();
    for sampling in [ImportanceConfig::direct(), importance] {
        let est = EstimateConfig {
            sampling,
            checkpoints_per_decade: config.checkpoints_per_decade,
            ..EstimateConfig::new(level, config.samples, vec![metric], seed)
        };
        let sim = ConcatSimulator::new(&ch, sampling)?;
        let samples = sample_histories(&sim, level, config.samples, seed)?;
        lines.extend(summarize(&samples, &est)?.remove(0).convergence_trace);
    }
    let path = config.output.join(format!("trace_l{level}_c{index}.jsonl"));
    write_lines(&path, &lines)?;
    Ok(path)
}

/// Logical estimate of one level in the exported dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlLevel {
    pub level: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub resolution_limited: bool,
}

/// One channel of the dataset handed to downstream fitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlRecord {
    pub channel_index: usize,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub gamma: Vec<f64>,
    /// The twelve free Γ entries: columns 1-3 of each row, row by row.
    pub features: Vec<f64>,
    pub metric: MetricKind,
    pub averaging: Averaging,
    pub physical: BTreeMap<MetricKind, f64>,
    pub levels: Vec<MlLevel>,
}

/// `export-ml`: joins the channel file with every available results file.
pub fn export_ml(config: &CampaignConfig, metric: MetricKind) -> Result<PathBuf> {
    let channels = load_channels(config)?;
    let mut per_level = Vec::new();
    for &level in &config.levels {
        let path = results_path(&config.output, level);
        ensure!(path.exists(), "{} is missing; run `simulate` first", path.display());
        let records: Vec<EstimateRecord> = read_lines(&path)?;
        ensure!(
            records.len() == channels.len(),
            "{} is incomplete ({} of {} channels)",
            path.display(),
            records.len(),
            channels.len()
        );
        per_level.push(records);
    }
    let mut out = Vec::with_capacity(channels.len());
    for (i, ch) in channels.iter().enumerate() {
        let mut levels = Vec::new();
        let mut physical = BTreeMap::new();
        for records in &per_level {
            let r = &records[i];
            ensure!(r.seed == ch.meta().seed, "results for channel {i} do not match its seed");
            physical.extend(r.physical.iter().map(|(k, v)| (*k, *v)));
            let e = r
                .estimates
                .iter()
                .find(|e| e.metric == metric)
                .with_context(|| format!("metric {metric} was not simulated"))?;
            levels.push(MlLevel {
                level: r.level,
                estimate: headline(e, config.averaging),
                std_error: e.std_error,
                resolution_limited: e.resolution_limited,
            });
        }
        out.push(MlRecord {
            channel_index: i,
            seed: ch.meta().seed,
            delta: ch.meta().delta,
            gamma: gamma_to_vec(ch.gamma()),
            features: ch.free_parameters().to_vec(),
            metric,
            averaging: config.averaging,
            physical,
            levels,
        });
    }
    let path = config.output.join(ML_FILE);
    write_lines(&path, &out)?;
    Ok(path)
}
