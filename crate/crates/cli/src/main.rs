//! Campaign driver: random ensembles, logical-noise simulations, metric
//! tables, histograms, convergence traces and dataset export.

mod campaign;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use steanesim::metrics::MetricKind;
use steanesim::sampling::{HistogramConfig, LogAxis, SamplingMode};

use config::{Averaging, CampaignConfig};

/// Environment variable holding the worker-thread count.
const WORKERS_ENV: &str = "STEANESIM_WORKERS";

#[derive(Parser)]
#[command(name = "steanesim", version, about = "Logical noise of the concatenated Steane code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the random channel ensemble.
    GenEnsemble(CampaignArgs),
    /// Estimate logical noise for every channel and level.
    Simulate(CampaignArgs),
    /// Tabulate physical metrics of the ensemble.
    Metrics(CampaignArgs),
    /// Histogram syndrome histories of one channel by probability and logical noise.
    Histogram {
        #[command(flatten)]
        campaign: CampaignArgs,
        #[command(flatten)]
        target: Target,
        /// Upper bound on sampled histories at levels above one.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long, default_value_t = 50)]
        bins_p: usize,
        #[arg(long, default_value_t = 50)]
        bins_n: usize,
        #[arg(long, default_value_t = -50.0, allow_negative_numbers = true)]
        min_log_p: f64,
        #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
        min_log_n: f64,
    },
    /// Convergence of the direct and importance estimators for one channel.
    Trace {
        #[command(flatten)]
        campaign: CampaignArgs,
        #[command(flatten)]
        target: Target,
    },
    /// Join channels and results into a dataset for downstream fitting.
    ExportMl {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Metric whose logical estimates are exported.
        #[arg(long, default_value = "infidelity", value_parser = parse_metric)]
        metric: MetricKind,
    },
}

#[derive(Args)]
struct Target {
    /// Index of the channel in the ensemble file.
    #[arg(long, default_value_t = 0)]
    channel: usize,
    #[arg(long, default_value_t = 2)]
    level: usize,
    #[arg(long, default_value = "infidelity", value_parser = parse_metric)]
    metric: MetricKind,
}

/// Campaign fields; flags override values loaded from `--config`.
#[derive(Args)]
struct CampaignArgs {
    /// Campaign file to start from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Channels per delta.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_metric)]
    metrics: Option<Vec<MetricKind>>,
    /// direct, power_law or uniform.
    #[arg(long, value_parser = parse_mode)]
    sampler: Option<SamplingMode>,
    /// Fixed power-law exponent; solved per block when absent.
    #[arg(long)]
    beta: Option<f64>,
    /// Proposal probability of the trivial syndrome.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Histories per channel and level.
    #[arg(long)]
    samples: Option<usize>,
    /// Enumerate all syndromes at level one instead of sampling.
    #[arg(long)]
    enumerate_level1: Option<bool>,
    #[arg(long)]
    checkpoints_per_decade: Option<usize>,
    #[arg(long, value_enum)]
    averaging: Option<Averaging>,
    #[arg(long)]
    reference_points: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl CampaignArgs {
    fn resolve(self) -> Result<CampaignConfig> {
        let mut c = match &self.config {
            Some(p) => CampaignConfig::load(p)?,
            None => CampaignConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        set!(
            count,
            deltas,
            master_seed,
            levels,
            metrics,
            sampler,
            cutoff,
            samples,
            enumerate_level1,
            checkpoints_per_decade,
            averaging,
            reference_points,
            output
        );
        if self.beta.is_some() {
            c.beta = self.beta;
        }
        c.validate()?;
        Ok(c)
    }
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_mode(s: &str) -> Result<SamplingMode, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown sampler {s:?} (expected direct, power_law or uniform)"))
}

fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{WORKERS_ENV}={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    init_workers()?;
    match Cli::parse().command {
        Command::GenEnsemble(args) => {
            let config = args.resolve()?;
            let channels = campaign::gen_ensemble(&config)?;
            eprintln!("wrote {} channels to {}", channels.len(), config.output.display());
        }
        Command::Simulate(args) => campaign::simulate(&args.resolve()?)?,
        Command::Metrics(args) => campaign::metrics(&args.resolve()?)?,
        Command::Histogram {
            campaign: args,
            target,
            budget,
            bins_p,
            bins_n,
            min_log_p,
            min_log_n,
        } => {
            let bins = HistogramConfig {
                probability: LogAxis {
                    min_exponent: min_log_p,
                    max_exponent: 0.0,
                    bins: bins_p,
                },
                noise: LogAxis {
                    min_exponent: min_log_n,
                    max_exponent: 0.0,
                    bins: bins_n,
                },
            };
            let path = campaign::histogram(&args.resolve()?, target.channel, target.level, target.metric, budget, bins)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Trace { campaign: args, target } => {
            let path = campaign::trace(&args.resolve()?, target.channel, target.level, target.metric)?;
            eprintln!("wrote {}", path.display());
        }
        Command::ExportMl { campaign: args, metric } => {
            let path = campaign::export_ml(&args.resolve()?, metric)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}
