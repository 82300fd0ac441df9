//! Flag and config-file merging. Flags win over the file, and the file wins over defaults.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use mcras::certify::CertifyConfig;
use mcras::harness::ExperimentConfig;
use mcras::output::OutputFormat;
use mcras::plan::{Accuracy, RelativeSpread};
use mcras::{DistributionSpec64, EstimatorKind};

pub const DEFAULT_TRIALS: u64 = 1000;

/// Contents of a `--config` TOML file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kind: Option<EstimatorKind>,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub distribution: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<OutputFormat>,
    #[serde(default)]
    pub verify: VerifyFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFile {
    pub epsilon_grid: Option<Vec<f64>>,
    pub grid_points: Option<usize>,
    pub scan_points: Option<usize>,
    pub inflate_alpha: Option<f64>,
    pub median_p_grid: Option<Vec<f64>>,
    pub median_k_max: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn parse_kind(s: &str) -> Result<EstimatorKind, String> {
    s.parse().map_err(|e: mcras::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: mcras::Error| e.to_string())
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Estimator: mean, mom or scaled.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<EstimatorKind>,
    /// Upper bound on sd/mean. Defaults to the distribution's exact value.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Source as family:params, e.g. exponential:1, lognormal:1,2, constant:7.
    #[arg(long)]
    pub distribution: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// json or csv. Without it a short text summary is printed.
    #[arg(long, value_parser = parse_format)]
    pub output: Option<OutputFormat>,
    /// TOML file with any of the above keys; flags take precedence.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
}

/// Flags merged over the config file.
#[derive(Debug)]
pub struct Resolved {
    pub kind: EstimatorKind,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub distribution: Option<DistributionSpec64>,
    pub trials: u64,
    pub seed: u64,
    pub output: Option<OutputFormat>,
    pub verify: VerifyFile,
}

impl Resolved {
    pub fn new(args: &CommonArgs, trials: Option<u64>) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let distribution = match args.distribution.clone().or(file.distribution) {
            Some(s) => Some(s.parse::<DistributionSpec64>().map_err(|e| anyhow!("--distribution: {e}"))?),
            None => None,
        };
        Ok(Self {
            kind: args.kind.or(file.kind).unwrap_or(EstimatorKind::ScaledMedian),
            c: args.c.or(file.c),
            epsilon: args.epsilon.or(file.epsilon),
            delta: args.delta.or(file.delta),
            distribution,
            trials: trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
            seed: args.seed.or(file.seed).unwrap_or(0),
            output: args.output.or(file.output),
            verify: file.verify,
        })
    }

    pub fn accuracy(&self) -> Result<Accuracy<f64>> {
        let epsilon = self.epsilon.ok_or_else(|| anyhow!("missing --epsilon"))?;
        let delta = self.delta.ok_or_else(|| anyhow!("missing --delta"))?;
        Ok(Accuracy::new(epsilon, delta)?)
    }

    pub fn spread(&self) -> Result<RelativeSpread<f64>> {
        let c = match (self.c, &self.distribution) {
            (Some(c), _) => c,
            (None, Some(d)) if d.true_c() > 0.0 => d.true_c(),
            (None, Some(d)) => bail!("{d} has no spread to plan with; pass --c"),
            (None, None) => bail!("missing --c (or a --distribution to take it from)"),
        };
        Ok(RelativeSpread::new(c)?)
    }

    pub fn distribution(&self) -> Result<DistributionSpec64> {
        self.distribution.ok_or_else(|| anyhow!("missing --distribution"))
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            kind: self.kind,
            accuracy: self.accuracy()?,
            c: self.spread()?,
            distribution: self.distribution()?,
            trials: self.trials,
            master_seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    /// Comma-separated ε values in (0, 1/3). Default 0.01, 0.02, ..., 0.33.
    #[arg(long, value_delimiter = ',')]
    pub epsilon_grid: Option<Vec<f64>>,
    /// Grid size for the h minimization (at least 1000).
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Grid size for the two-point scan.
    #[arg(long)]
    pub scan_points: Option<usize>,
    /// Multiply the certified α by this factor. Values well above 1 must produce FAIL.
    #[arg(long)]
    pub inflate_alpha: Option<f64>,
    /// Comma-separated tail masses p in (0, 1/2) for the median bound.
    #[arg(long, value_delimiter = ',')]
    pub median_p_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub median_k_max: Option<u64>,
}

impl VerifyArgs {
    pub fn certify_config(self, file: VerifyFile) -> CertifyConfig {
        let d = CertifyConfig::default();
        CertifyConfig {
            epsilon_grid: self.epsilon_grid.or(file.epsilon_grid).unwrap_or(d.epsilon_grid),
            grid_points: self.grid_points.or(file.grid_points).unwrap_or(d.grid_points),
            scan_points: self.scan_points.or(file.scan_points).unwrap_or(d.scan_points),
            alpha_inflation: self.inflate_alpha.or(file.inflate_alpha).unwrap_or(d.alpha_inflation),
            median_p_grid: self.median_p_grid.or(file.median_p_grid).unwrap_or(d.median_p_grid),
            median_k_max: self.median_k_max.or(file.median_k_max).unwrap_or(d.median_k_max),
        }
    }
}
