//! Recursive simulation of a concatenated code and the two logical-noise
//! averages: the metric of the average channel and the average of the metric.
//!
//! A level-ℓ block takes the seven level-(ℓ-1) conditional channels as its
//! per-qubit noise. Lower-level conditional channels need not preserve trace,
//! so each block's syndrome distribution is renormalised and the
//! normalisation (the block likelihood) is folded into the sample weight.
//! This keeps the estimator unbiased for the joint distribution of all
//! syndromes in the history.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{Channel, CptpReport, RealMatrix4};
use crate::metrics::{MetricError, MetricKind};
use crate::qec::{BlockAnalysis, BlockInput, QecError, QecRound};
use crate::sampling::{
    checkpoints, weighted_mean, HistogramConfig, ImportanceConfig, SamplingError, SamplingMode, SyndromeHistogram,
    TracePoint,
};

pub const MAX_LEVEL: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConcatError {
    #[error("level must be between 1 and {MAX_LEVEL}, got {0}")]
    BadLevel(usize),
    #[error("at least one sample is required")]
    NoSamples,
    #[error("level {level} block {index}: {source}")]
    Block {
        level: usize,
        index: usize,
        #[source]
        source: QecError,
    },
    #[error(transparent)]
    Qec(#[from] QecError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// One sampled syndrome history and the resulting logical channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcatResult {
    pub level: usize,
    /// Block syndromes in level order: all level-1 blocks, then level 2, and so on.
    pub syndrome_history: Vec<u8>,
    pub gamma: RealMatrix4,
    /// `Π_b Pr(s_b)/Q(s_b)` times the product of block likelihoods.
    pub weight: f64,
    /// `Pr(s_b)` of each block, in the same order as `syndrome_history`.
    pub trace: Vec<f64>,
    /// Product of block likelihoods (one for trace-preserving physical noise).
    pub likelihood: f64,
    /// Number of block analyses performed for this sample.
    pub blocks_analyzed: usize,
}

impl ConcatResult {
    /// The history as `6 · blocks` bits, syndrome bit `j` of each block in order.
    pub fn history_bits(&self) -> Vec<bool> {
        self.syndrome_history
            .iter()
            .flat_map(|&s| (0..6).map(move |j| (s >> j) & 1 == 1))
            .collect()
    }

    /// Joint probability of the whole syndrome history.
    pub fn history_probability(&self) -> f64 {
        self.trace.iter().product::<f64>() * self.likelihood
    }

    pub fn cp_report(&self) -> CptpReport {
        CptpReport::of_gamma(&self.gamma)
    }
}

/// Number of code blocks in a level-ℓ history, `(7^ℓ - 1) / 6`.
pub fn blocks_per_history(level: usize) -> usize {
    (7usize.pow(level as u32) - 1) / 6
}

struct Accumulator {
    by_level: Vec<Vec<(u8, f64)>>,
    weight: f64,
    likelihood: f64,
    blocks: usize,
}

/// Samples syndrome histories for a fixed physical channel.
pub struct ConcatSimulator {
    round: QecRound,
    physical: Vec<RealMatrix4>,
    sampling: ImportanceConfig,
    level1: Option<(BlockAnalysis, Option<Vec<f64>>)>,
}

impl ConcatSimulator {
    /// Simulator that analyses the i.i.d. level-1 block once and reuses it.
    pub fn new(channel: &Channel, sampling: ImportanceConfig) -> Result<Self, ConcatError> {
        let mut sim = Self::uncached(channel, sampling)?;
        let analysis = sim.analyze(1, 0, BlockInput::iid(channel, sim.round.num_qubits()))?;
        let proposal = sampling.proposal(analysis.probabilities());
        sim.level1 = Some((analysis, proposal));
        Ok(sim)
    }

    /// Simulator that re-analyses every level-1 block, as a plain recursion would.
    pub fn uncached(channel: &Channel, sampling: ImportanceConfig) -> Result<Self, ConcatError> {
        sampling.validate()?;
        let round = QecRound::steane();
        let n = round.num_qubits();
        // Validate the physical channel once; inner blocks trust the engine.
        BlockInput::new(vec![*channel.gamma(); n]).map_err(|source| ConcatError::Block {
            level: 1,
            index: 0,
            source,
        })?;
        Ok(ConcatSimulator {
            round,
            physical: vec![*channel.gamma(); n],
            sampling,
            level1: None,
        })
    }

    pub fn sampling(&self) -> &ImportanceConfig {
        &self.sampling
    }

    /// Exact level-1 syndrome distribution of the physical channel.
    pub fn level1_analysis(&self) -> Result<BlockAnalysis, ConcatError> {
        match &self.level1 {
            Some((a, _)) => Ok(a.clone()),
            None => self.analyze(1, 0, BlockInput::new_unchecked(self.physical.clone())),
        }
    }

    fn analyze(&self, level: usize, index: usize, input: BlockInput) -> Result<BlockAnalysis, ConcatError> {
        self.round
            .analyze(&input)
            .map_err(|source| ConcatError::Block { level, index, source })
    }

    /// Draws one level-`level` history.
    pub fn sample<R: Rng + ?Sized>(&self, level: usize, rng: &mut R) -> Result<ConcatResult, ConcatError> {
        if !(1..=MAX_LEVEL).contains(&level) {
            return Err(ConcatError::BadLevel(level));
        }
        let mut acc = Accumulator {
            by_level: vec![Vec::new(); level],
            weight: 1.0,
            likelihood: 1.0,
            blocks: 0,
        };
        let gamma = self.block(level, rng, &mut acc)?;
        let (syndrome_history, trace) = acc.by_level.into_iter().flatten().unzip();
        Ok(ConcatResult {
            level,
            syndrome_history,
            gamma,
            weight: acc.weight,
            trace,
            likelihood: acc.likelihood,
            blocks_analyzed: acc.blocks,
        })
    }

    fn block<R: Rng + ?Sized>(&self, level: usize, rng: &mut R, acc: &mut Accumulator) -> Result<RealMatrix4, ConcatError> {
        let index = acc.by_level[level - 1].len();
        let fresh;
        let (analysis, proposal) = match (&self.level1, level) {
            (Some((a, q)), 1) => (a, q.as_deref()),
            _ => {
                let input = if level == 1 {
                    BlockInput::new_unchecked(self.physical.clone())
                } else {
                    let mut gammas = Vec::with_capacity(self.round.num_qubits());
                    for _ in 0..self.round.num_qubits() {
                        gammas.push(self.block(level - 1, rng, acc)?);
                    }
                    BlockInput::new_unchecked(gammas)
                };
                let a = self.analyze(level, index, input)?;
                acc.blocks += 1;
                let q = self.sampling.proposal(a.probabilities());
                fresh = (a, q);
                (&fresh.0, fresh.1.as_deref())
            }
        };
        let rec = analysis
            .sample(proposal, rng)
            .map_err(|source| ConcatError::Block { level, index, source })?;
        acc.weight *= rec.weight * rec.likelihood;
        acc.likelihood *= rec.likelihood;
        acc.by_level[level - 1].push((rec.syndrome as u8, rec.prob));
        Ok(rec.gamma)
    }
}

/// One history at `level` with no caching; the reference recursion.
pub fn simulate_level<R: Rng + ?Sized>(
    channel: &Channel,
    level: usize,
    sampling: ImportanceConfig,
    rng: &mut R,
) -> Result<ConcatResult, ConcatError> {
    ConcatSimulator::uncached(channel, sampling)?.sample(level, rng)
}

/// Independent stream for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` histories with per-sample streams, in index order.
pub fn sample_histories(
    sim: &ConcatSimulator,
    level: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<ConcatResult>, ConcatError> {
    (0..n as u64)
        .into_par_iter()
        .map(|j| sim.sample(level, &mut sample_rng(seed, j)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub level: usize,
    pub n_samples: usize,
    pub metrics: Vec<MetricKind>,
    pub sampling: ImportanceConfig,
    pub seed: u64,
    /// Trace checkpoints per decade of sample count.
    pub checkpoints_per_decade: usize,
}

impl EstimateConfig {
    pub fn new(level: usize, n_samples: usize, metrics: Vec<MetricKind>, seed: u64) -> Self {
        EstimateConfig {
            level,
            n_samples,
            metrics,
            sampling: ImportanceConfig::direct(),
            seed,
            checkpoints_per_decade: 1,
        }
    }
}

/// Sampled logical noise for one metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalEstimate {
    pub metric: MetricKind,
    pub level: usize,
    pub n_samples: usize,
    pub mode: SamplingMode,
    /// `Σ_j w_j 𝒩(ℰ^{s_j}) / Σ_j w_j`.
    pub avg_of_metric: f64,
    /// `𝒩(Σ_j w_j Γ^{s_j} / Σ_j w_j)`.
    pub metric_of_avg: f64,
    /// Per-sample variance of the weighted metric (see [`crate::sampling::WeightedMean`]).
    pub variance: f64,
    pub std_error: f64,
    /// Set when the estimate is below `1/N`, the smallest resolvable rate.
    pub resolution_limited: bool,
    pub convergence_trace: Vec<TracePoint>,
}

/// Estimates for every metric in `config`, all from the same histories.
pub fn estimate_all(channel: &Channel, config: &EstimateConfig) -> Result<Vec<LogicalEstimate>, ConcatError> {
    if config.n_samples == 0 {
        return Err(ConcatError::NoSamples);
    }
    if !(1..=MAX_LEVEL).contains(&config.level) {
        return Err(ConcatError::BadLevel(config.level));
    }
    let sim = ConcatSimulator::new(channel, config.sampling)?;
    let samples = sample_histories(&sim, config.level, config.n_samples, config.seed)?;
    summarize(&samples, config)
}

/// Estimate of a single metric.
pub fn estimate(
    channel: &Channel,
    level: usize,
    metric: MetricKind,
    n_samples: usize,
    sampling: ImportanceConfig,
    seed: u64,
) -> Result<LogicalEstimate, ConcatError> {
    let config = EstimateConfig {
        sampling,
        ..EstimateConfig::new(level, n_samples, vec![metric], seed)
    };
    Ok(estimate_all(channel, &config)?.remove(0))
}

/// Reduces sampled histories to estimates; reductions run in index order.
pub fn summarize(samples: &[ConcatResult], config: &EstimateConfig) -> Result<Vec<LogicalEstimate>, ConcatError> {
    let n = samples.len();
    if n == 0 {
        return Err(ConcatError::NoSamples);
    }
    let total_weight: f64 = samples.iter().map(|s| s.weight).sum();
    let average = samples
        .iter()
        .fold(RealMatrix4::zeros(), |acc, s| acc + s.gamma * s.weight)
        / total_weight;
    let marks = checkpoints(n, config.checkpoints_per_decade);
    let mut out = Vec::with_capacity(config.metrics.len());
    for &metric in &config.metrics {
        let values = metric_values(samples, metric)?;
        let weights: Vec<f64> = samples.iter().map(|s| s.weight).collect();
        let wm = weighted_mean(&weights, &values, &marks, config.sampling.mode.trace_label());
        out.push(LogicalEstimate {
            metric,
            level: config.level,
            n_samples: n,
            mode: config.sampling.mode,
            avg_of_metric: wm.mean,
            metric_of_avg: metric.evaluate_gamma(&average)?,
            variance: wm.variance,
            std_error: wm.std_error(n),
            resolution_limited: wm.mean < 1.0 / n as f64,
            convergence_trace: wm.trace,
        });
    }
    Ok(out)
}

/// Metric of each sample; identical channels (e.g. repeated level-1
/// syndromes) are evaluated once.
fn metric_values(samples: &[ConcatResult], metric: MetricKind) -> Result<Vec<f64>, ConcatError> {
    let key = |g: &RealMatrix4| -> [u64; 16] { std::array::from_fn(|k| g[(k / 4, k % 4)].to_bits()) };
    let cache: Mutex<HashMap<[u64; 16], f64>> = Mutex::new(HashMap::new());
    samples
        .par_iter()
        .map(|s| {
            let k = key(&s.gamma);
            if let Some(v) = cache.lock().expect("cache lock").get(&k) {
                return Ok(*v);
            }
            let v = metric.evaluate_gamma(&s.gamma)?;
            cache.lock().expect("cache lock").insert(k, v);
            Ok(v)
        })
        .collect()
}

/// Exact level-1 averages by enumerating all syndromes: `(Σ Pr 𝒩(Γ^s), 𝒩(Σ Pr Γ^s))`.
pub fn exact_level1(channel: &Channel, metric: MetricKind) -> Result<(f64, f64), ConcatError> {
    let round = QecRound::steane();
    let analysis = round.analyze(&BlockInput::iid(channel, round.num_qubits()))?;
    let mut avg_metric = 0.0;
    let mut avg_gamma = RealMatrix4::zeros();
    for (s, &p) in analysis.probabilities().iter().enumerate() {
        if p > 0.0 {
            let rec = analysis.record(s)?;
            avg_metric += p * metric.evaluate_gamma(&rec.gamma)?;
            avg_gamma += rec.gamma * p;
        }
    }
    Ok((avg_metric, metric.evaluate_gamma(&avg_gamma)?))
}

/// All level-1 syndromes of nonzero probability as weighted samples.
///
/// Each syndrome appears once with weight `K·Pr(s)`, `K` the support size, so
/// [`summarize`] over the returned set reproduces the exact averages.
pub fn enumerate_level1(channel: &Channel) -> Result<Vec<ConcatResult>, ConcatError> {
    let round = QecRound::steane();
    let analysis = round.analyze(&BlockInput::iid(channel, round.num_qubits()))?;
    let support = analysis.probabilities().iter().filter(|&&p| p > 0.0).count() as f64;
    let mut out = Vec::new();
    for (s, &p) in analysis.probabilities().iter().enumerate() {
        if p > 0.0 {
            let rec = analysis.record(s)?;
            out.push(ConcatResult {
                level: 1,
                syndrome_history: vec![s as u8],
                gamma: rec.gamma,
                weight: support * p * rec.likelihood,
                trace: vec![p],
                likelihood: rec.likelihood,
                blocks_analyzed: 1,
            });
        }
    }
    Ok(out)
}

/// Density of syndrome histories over `(Pr(history), 𝒩(ℰ^s))`.
///
/// Level 1 enumerates every syndrome. Higher levels sample histories
/// uniformly over nonzero-probability syndromes in each block, so bin counts
/// estimate the fraction of histories in each bin; `budget` caps the number
/// of samples.
pub fn outlier_histogram(
    channel: &Channel,
    level: usize,
    metric: MetricKind,
    samples: usize,
    budget: usize,
    config: HistogramConfig,
    seed: u64,
) -> Result<SyndromeHistogram, ConcatError> {
    if !(1..=MAX_LEVEL).contains(&level) {
        return Err(ConcatError::BadLevel(level));
    }
    let mut hist = SyndromeHistogram::new(config);
    if level == 1 {
        let round = QecRound::steane();
        let analysis = round.analyze(&BlockInput::iid(channel, round.num_qubits()))?;
        for (s, &p) in analysis.probabilities().iter().enumerate() {
            if p > 0.0 {
                hist.add(p, metric.evaluate_gamma(&analysis.record(s)?.gamma)?);
            }
        }
        hist.exhaustive = true;
        return Ok(hist);
    }
    let n = samples.min(budget);
    hist.truncated = n < samples;
    let sim = ConcatSimulator::new(channel, ImportanceConfig::uniform())?;
    let histories = sample_histories(&sim, level, n, seed)?;
    let values = metric_values(&histories, metric)?;
    for (h, v) in histories.iter().zip(values) {
        hist.add(h.history_probability(), v);
    }
    Ok(hist)
}

/// One line of the results file for a `(channel, level)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub channel_index: usize,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub level: usize,
    pub n_samples: usize,
    pub sample_seed: u64,
    pub physical: BTreeMap<MetricKind, f64>,
    pub estimates: Vec<LogicalEstimate>,
}

impl EstimateRecord {
    pub fn new(
        channel_index: usize,
        channel: &Channel,
        config: &EstimateConfig,
        estimates: Vec<LogicalEstimate>,
    ) -> Result<Self, ConcatError> {
        let mut physical = BTreeMap::new();
        for &m in &config.metrics {
            physical.insert(m, m.evaluate(channel)?);
        }
        Ok(EstimateRecord {
            channel_index,
            seed: channel.meta().seed,
            delta: channel.meta().delta,
            level: config.level,
            n_samples: config.n_samples,
            sample_seed: config.seed,
            physical,
            estimates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{named_channel, random_channel, NamedChannel};

    #[test]
    fn history_length_matches_block_count() {
        assert_eq!(blocks_per_history(1), 1);
        assert_eq!(blocks_per_history(2), 8);
        assert_eq!(blocks_per_history(3), 57);
        let ch = random_channel(0.05, 3).unwrap();
        let r = simulate_level(&ch, 2, ImportanceConfig::direct(), &mut sample_rng(1, 0)).unwrap();
        assert_eq!(r.syndrome_history.len(), 8);
        assert_eq!(r.history_bits().len(), 48);
        assert_eq!(r.blocks_analyzed, 8);
    }

    #[test]
    fn identity_stays_identity() {
        let id = Channel::identity();
        for level in 1..=3 {
            let r = simulate_level(&id, level, ImportanceConfig::direct(), &mut sample_rng(0, 0)).unwrap();
            assert_eq!(r.gamma, RealMatrix4::identity());
            assert!(r.syndrome_history.iter().all(|&s| s == 0));
            assert_eq!(r.weight, 1.0);
        }
    }

    #[test]
    fn cached_and_uncached_agree_bitwise() {
        let ch = random_channel(0.1, 8).unwrap();
        for sampling in [ImportanceConfig::direct(), ImportanceConfig::power_law()] {
            let cached = ConcatSimulator::new(&ch, sampling).unwrap();
            let plain = ConcatSimulator::uncached(&ch, sampling).unwrap();
            for j in 0..5 {
                let a = cached.sample(2, &mut sample_rng(4, j)).unwrap();
                let b = plain.sample(2, &mut sample_rng(4, j)).unwrap();
                assert_eq!(a.syndrome_history, b.syndrome_history);
                assert_eq!(a.gamma, b.gamma);
                assert_eq!(a.weight, b.weight);
                assert_eq!(a.blocks_analyzed + 7, b.blocks_analyzed);
            }
        }
    }

    #[test]
    fn enumeration_matches_exact_sums() {
        let ch = random_channel(0.1, 21).unwrap();
        let samples = enumerate_level1(&ch).unwrap();
        let config = EstimateConfig::new(1, samples.len(), vec![MetricKind::Infidelity], 0);
        let est = summarize(&samples, &config).unwrap().remove(0);
        let (avg, of_avg) = exact_level1(&ch, MetricKind::Infidelity).unwrap();
        assert!((est.avg_of_metric - avg).abs() < 1e-15);
        assert!((est.metric_of_avg - of_avg).abs() < 1e-15);
    }

    #[test]
    fn bad_level_rejected() {
        let ch = Channel::identity();
        assert_eq!(
            simulate_level(&ch, 0, ImportanceConfig::direct(), &mut sample_rng(0, 0)),
            Err(ConcatError::BadLevel(0))
        );
        assert!(simulate_level(&ch, 5, ImportanceConfig::direct(), &mut sample_rng(0, 0)).is_err());
    }

    #[test]
    fn infidelity_averages_coincide_in_direct_mode() {
        let ch = named_channel(NamedChannel::Depolarizing { p: 0.05 }).unwrap();
        let est = estimate(&ch, 1, MetricKind::Infidelity, 2000, ImportanceConfig::direct(), 3).unwrap();
        assert!((est.avg_of_metric - est.metric_of_avg).abs() < 1e-12, "{} {}", est.avg_of_metric, est.metric_of_avg);
        assert_eq!(est.convergence_trace.last().unwrap().n, 2000);
    }
}
