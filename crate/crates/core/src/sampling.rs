//! Syndrome proposal distributions, weighted estimators and histograms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{MetricError, MetricKind};
use crate::qec::SyndromeRecord;

/// Bisection tolerance on β.
pub const BETA_TOLERANCE: f64 = 1e-10;

/// `1 - Pr(0)` below which the power-law proposal is degenerate.
pub const DEGENERATE_MASS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("distribution is degenerate: {0}")]
    Degenerate(&'static str),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),
    #[error("beta must lie in (0, 1], got {0}")]
    BadBeta(f64),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Born-rule sampling, `Q = Pr`.
    #[default]
    Direct,
    /// `Q(s) ∝ Pr(s)^β` with β set by the trivial-syndrome cutoff.
    PowerLaw,
    /// Uniform over syndromes of nonzero probability; used to estimate the
    /// fraction of syndrome histories in a histogram bin.
    Uniform,
}

impl SamplingMode {
    pub fn trace_label(self) -> TraceMode {
        match self {
            SamplingMode::Direct => TraceMode::Direct,
            _ => TraceMode::Importance,
        }
    }
}

/// Proposal distribution applied independently to every block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceConfig {
    pub mode: SamplingMode,
    /// Fixed exponent; when absent it is solved per block from `cutoff`.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Target probability of the trivial syndrome under the proposal.
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

fn default_cutoff() -> f64 {
    0.5
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        ImportanceConfig {
            mode: SamplingMode::Direct,
            beta: None,
            cutoff: default_cutoff(),
        }
    }
}

impl ImportanceConfig {
    pub fn direct() -> Self {
        Self::default()
    }

    pub fn power_law() -> Self {
        ImportanceConfig {
            mode: SamplingMode::PowerLaw,
            ..Self::default()
        }
    }

    pub fn uniform() -> Self {
        ImportanceConfig {
            mode: SamplingMode::Uniform,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if let Some(b) = self.beta {
            if !(b > 0.0 && b <= 1.0) {
                return Err(SamplingError::BadBeta(b));
            }
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(SamplingError::InvalidDistribution("cutoff must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Proposal for one block, or `None` to sample from `probs` directly.
    ///
    /// A degenerate block (almost all mass on the trivial syndrome) falls back
    /// to direct sampling.
    pub fn proposal(&self, probs: &[f64]) -> Option<Vec<f64>> {
        match self.mode {
            SamplingMode::Direct => None,
            SamplingMode::Uniform => {
                let support = probs.iter().filter(|&&p| p > 0.0).count() as f64;
                Some(probs.iter().map(|&p| if p > 0.0 { 1.0 / support } else { 0.0 }).collect())
            }
            SamplingMode::PowerLaw => {
                let beta = match self.beta {
                    Some(b) => b,
                    None => solve_beta_with_cutoff(probs, self.cutoff).ok()?,
                };
                if beta == 1.0 {
                    None
                } else {
                    Some(power_law(probs, beta))
                }
            }
        }
    }
}

/// `Pr(s)^β / Σ_s Pr(s)^β`, computed in log space.
pub fn power_law(probs: &[f64], beta: f64) -> Vec<f64> {
    let log_max = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = probs
        .iter()
        .map(|&p| if p > 0.0 { (beta * (p.ln() - log_max)).exp() } else { 0.0 })
        .collect();
    let z: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|u| u / z).collect()
}

/// β with `Pr(0)^β / Σ_s Pr(s)^β = ½`, or one when `Pr(0) ≤ ½`.
pub fn solve_beta(probs: &[f64]) -> Result<f64, SamplingError> {
    solve_beta_with_cutoff(probs, 0.5)
}

pub fn solve_beta_with_cutoff(probs: &[f64], cutoff: f64) -> Result<f64, SamplingError> {
    if probs.is_empty() || probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(SamplingError::InvalidDistribution("entries must be finite and nonnegative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SamplingError::InvalidDistribution("entries must sum to one"));
    }
    let p0 = probs[0];
    if p0 <= cutoff {
        return Ok(1.0);
    }
    if 1.0 - p0 < DEGENERATE_MASS {
        return Err(SamplingError::Degenerate("all mass on the trivial syndrome"));
    }
    let logs: Vec<f64> = probs[1..].iter().filter(|&&p| p > 0.0).map(|p| p.ln() - p0.ln()).collect();
    // The ratio tends to 1/support as β → 0, so a root needs support > 1/cutoff.
    if ((logs.len() + 1) as f64) * cutoff <= 1.0 {
        return Err(SamplingError::Degenerate("support too small for the cutoff"));
    }
    // With Pr(0) the largest entry, every log is ≤ 0 and the ratio increases with β.
    let ratio = |beta: f64| 1.0 / (1.0 + logs.iter().map(|l| (beta * l).exp()).sum::<f64>());
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BETA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) > cutoff {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    Direct,
    Importance,
}

/// Running estimate after `n` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: usize,
    pub estimate: f64,
    pub mode: TraceMode,
}

/// Sample counts `{10, 100, …}` (or finer with `per_decade > 1`) up to and including `n`.
pub fn checkpoints(n: usize, per_decade: usize) -> Vec<usize> {
    let per_decade = per_decade.max(1);
    let mut out = Vec::new();
    let mut k = per_decade;
    loop {
        let c = 10f64.powf(k as f64 / per_decade as f64).round() as usize;
        if c >= n {
            break;
        }
        if out.last() != Some(&c) {
            out.push(c);
        }
        k += 1;
    }
    if n > 0 {
        out.push(n);
    }
    out
}

/// Self-normalised weighted mean `Σ w_j v_j / Σ w_j` with its running trace.
///
/// With unit weights this is the plain sample mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedMean {
    pub mean: f64,
    /// Per-sample variance: `N · variance` of the mean itself. With unit
    /// weights this is the unbiased sample variance of the values.
    pub variance: f64,
    pub trace: Vec<TracePoint>,
}

impl WeightedMean {
    pub fn std_error(&self, n: usize) -> f64 {
        (self.variance / n as f64).sqrt()
    }
}

/// Accumulates `(weights, values)` in index order, recording the trace at `marks`.
pub fn weighted_mean(weights: &[f64], values: &[f64], marks: &[usize], mode: TraceMode) -> WeightedMean {
    assert_eq!(weights.len(), values.len(), "one weight per value");
    let (mut num, mut den) = (0.0, 0.0);
    let mut trace = Vec::with_capacity(marks.len());
    let mut next = marks.iter().peekable();
    for (j, (w, v)) in weights.iter().zip(values).enumerate() {
        num += w * v;
        den += w;
        while next.peek().is_some_and(|&&m| m == j + 1) {
            trace.push(TracePoint {
                n: j + 1,
                estimate: if den > 0.0 { num / den } else { 0.0 },
                mode,
            });
            next.next();
        }
    }
    let n = values.len();
    let mean = if den > 0.0 { num / den } else { 0.0 };
    // Delta-method variance of the ratio, scaled so unit weights give the
    // unbiased sample variance.
    let variance = if n > 1 && den > 0.0 {
        let spread: f64 = weights.iter().zip(values).map(|(w, v)| (w * (v - mean)).powi(2)).sum();
        let nf = n as f64;
        nf / (nf - 1.0) * nf * spread / (den * den)
    } else {
        0.0
    };
    WeightedMean { mean, variance, trace }
}

/// Weighted average of `𝒩(Γ^{s_j})` over decoded records, with checkpoints `{10, 100, …}`.
pub fn importance_estimate(records: &[SyndromeRecord], metric: MetricKind) -> Result<WeightedMean, SamplingError> {
    let mut weights = Vec::with_capacity(records.len());
    let mut values = Vec::with_capacity(records.len());
    for r in records {
        weights.push(r.weight * r.likelihood);
        values.push(metric.evaluate_gamma(&r.gamma)?);
    }
    let mode = if records.iter().all(|r| r.weight == 1.0) {
        TraceMode::Direct
    } else {
        TraceMode::Importance
    };
    Ok(weighted_mean(&weights, &values, &checkpoints(records.len(), 1), mode))
}

/// Log-spaced bin edges for one histogram axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogAxis {
    pub min_exponent: f64,
    pub max_exponent: f64,
    pub bins: usize,
}

impl LogAxis {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins)
            .map(|k| {
                let e = self.min_exponent + (self.max_exponent - self.min_exponent) * k as f64 / self.bins as f64;
                10f64.powf(e)
            })
            .collect()
    }

    /// Bin of `value`; values outside the range (including zero) go to the edge bins.
    pub fn bin(&self, value: f64) -> usize {
        if !(value > 0.0) {
            return 0;
        }
        let frac = (value.log10() - self.min_exponent) / (self.max_exponent - self.min_exponent);
        ((frac * self.bins as f64).floor().max(0.0) as usize).min(self.bins - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub probability: LogAxis,
    pub noise: LogAxis,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            probability: LogAxis {
                min_exponent: -50.0,
                max_exponent: 0.0,
                bins: 50,
            },
            noise: LogAxis {
                min_exponent: -20.0,
                max_exponent: 0.0,
                bins: 50,
            },
        }
    }
}

/// Counts over `(Pr(s), 𝒩(ℰ^s))`, indexed `counts[probability bin][noise bin]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyndromeHistogram {
    pub config: HistogramConfig,
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
    /// True when every syndrome was enumerated rather than sampled.
    pub exhaustive: bool,
    /// True when the sample budget ran out before the requested count.
    pub truncated: bool,
}

#[derive(Serialize)]
struct HistogramExport<'a> {
    bins_p: Vec<f64>,
    bins_n: Vec<f64>,
    counts: &'a [Vec<u64>],
}

impl SyndromeHistogram {
    pub fn new(config: HistogramConfig) -> Self {
        SyndromeHistogram {
            config,
            counts: vec![vec![0; config.noise.bins]; config.probability.bins],
            total: 0,
            exhaustive: false,
            truncated: false,
        }
    }

    pub fn add(&mut self, probability: f64, noise: f64) {
        let i = self.config.probability.bin(probability);
        let j = self.config.noise.bin(noise);
        self.counts[i][j] += 1;
        self.total += 1;
    }

    /// Fraction of all entries in each bin.
    pub fn fractions(&self) -> Vec<Vec<f64>> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|row| row.iter().map(|&c| c as f64 / t).collect()).collect()
    }

    /// `{"bins_p": [...], "bins_n": [...], "counts": [[...]]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(HistogramExport {
            bins_p: self.config.probability.edges(),
            bins_n: self.config.noise.edges(),
            counts: &self.counts,
        })
        .expect("histogram is serialisable")
    }
}
