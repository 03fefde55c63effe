use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mtail::martingales::{MartingaleModel, NoiseFamily};
use mtail::montecarlo::{SamplingMode, SimulationConfig};
use mtail::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "mtail", version, about = "Martingale tail bounds and Monte Carlo checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an envelope over an x grid.
    Bound(BoundArgs),
    /// Estimate tail probabilities by simulation or enumeration.
    Simulate(SimulateArgs),
    /// Run the hard assertion suite on a model.
    Verify(VerifyArgs),
    /// Find the smallest constant for which an envelope dominates.
    Calibrate(CalibrateArgs),
    /// Least-squares regression estimate, interval and coverage.
    Regress(RegressArgs),
    /// Self-normalized statistic, envelope and comparison bound.
    Selfnorm(SelfnormArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x_from: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub x_to: f64,
    #[arg(long, default_value_t = 0.5)]
    pub x_step: f64,
}

impl GridArgs {
    pub fn points(&self) -> Result<Vec<f64>> {
        let (a, b, h) = (self.x_from, self.x_to, self.x_step);
        if !(a.is_finite() && b.is_finite() && h.is_finite()) || b < a || h <= 0.0 {
            return Err(Error::Config(format!("bad grid: from {a} to {b} step {h}")));
        }
        let n = ((b - a) / h + 1e-9).floor() as u64;
        if n > 10_000_000 {
            return Err(Error::Config("grid has more than 10^7 points".into()));
        }
        Ok((0..=n).map(|k| a + k as f64 * h).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Rademacher,
    VarianceSwitch,
    Regression,
    SelfNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Rademacher,
    Truncated,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "rademacher")]
    pub model: ModelKind,
    /// Model definition as JSON; overrides the other model flags.
    #[arg(long)]
    pub model_json: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Rademacher step scales, comma separated, with unit sum of squares.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long = "delta", id = "model_delta")]
    pub delta: Option<f64>,
    /// Lower covariate or magnitude bound.
    #[arg(long)]
    pub a: Option<f64>,
    /// Upper covariate or magnitude bound.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, value_enum, default_value = "rademacher")]
    pub noise: NoiseKind,
    /// Support of truncated noise.
    #[arg(long)]
    pub support: Option<f64>,
}

fn need<T: Copy>(v: Option<T>, flag: &str, model: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("--{flag} is required for --model {model}")))
}

impl ModelArgs {
    pub fn noise_family(&self) -> Result<NoiseFamily> {
        Ok(match self.noise {
            NoiseKind::Rademacher => NoiseFamily::RademacherScaled,
            NoiseKind::Truncated => NoiseFamily::TruncatedSymmetric {
                support: need(self.support, "support", "regression with truncated noise")?,
            },
        })
    }

    pub fn build(&self) -> Result<MartingaleModel> {
        if let Some(path) = &self.model_json {
            return MartingaleModel::from_json(&std::fs::read_to_string(path)?);
        }
        match self.model {
            ModelKind::Rademacher => match &self.weights {
                Some(w) => MartingaleModel::scaled_rademacher(w.clone()),
                None => MartingaleModel::equal_rademacher(need(self.n, "n", "rademacher")?),
            },
            ModelKind::VarianceSwitch => MartingaleModel::variance_switch(
                need(self.n, "n", "variance-switch")?,
                need(self.delta, "delta", "variance-switch")?,
            ),
            ModelKind::Regression => MartingaleModel::regression(
                self.theta,
                need(self.n, "n", "regression")?,
                self.a.unwrap_or(1.0),
                self.b.unwrap_or(2.0),
                self.sigma,
                self.noise_family()?,
            ),
            ModelKind::SelfNormalized => MartingaleModel::self_normalized(
                need(self.n, "n", "self-normalized")?,
                self.a.unwrap_or(1.0),
                self.b.unwrap_or(1.0),
            ),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[arg(long, default_value_t = 100_000)]
    pub paths: u64,
    #[arg(long, env = "MTAIL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, default_value_t = mtail::montecarlo::DEFAULT_CHUNK_SIZE)]
    pub chunk_size: u64,
    #[arg(long, default_value_t = mtail::montecarlo::DEFAULT_CONFIDENCE)]
    pub confidence: f64,
    /// Enumerate the exact law (at most 2^20 outcomes).
    #[arg(long, conflicts_with = "sample")]
    pub exhaustive: bool,
    /// Always sample, even when the law is small enough to enumerate.
    #[arg(long)]
    pub sample: bool,
}

impl RunArgs {
    pub fn config(&self, model: MartingaleModel) -> Result<SimulationConfig> {
        let mode = if self.exhaustive {
            SamplingMode::Exhaustive
        } else if self.sample {
            SamplingMode::Sample
        } else {
            SamplingMode::Auto
        };
        let cfg = SimulationConfig::new(model, self.paths, self.seed)
            .with_workers(self.workers)
            .with_chunk_size(self.chunk_size)
            .with_confidence(self.confidence)
            .with_mode(mode);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundEnvelope {
    Thm21,
    Thm22,
    Cor21,
    Dlp,
    McSandwich,
    Classical,
    WangJing,
    Regression,
    Selfnorm,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub envelope: BoundEnvelope,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// `E|<S>_n - 1|` for cor21.
    #[arg(long, default_value_t = 0.0)]
    pub qc_l1: f64,
    /// Moment order excess for the classical bounds.
    #[arg(long, default_value_t = 1.0)]
    pub delta_m: f64,
    /// Steps of the equal-weight Rademacher sum for classical and wang-jing.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Thresholds for P(S_n > x).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "1")]
    pub x: Vec<f64>,
    /// Importance sampling under the conjugate measure.
    #[arg(long)]
    pub is: bool,
    /// Tilt for importance sampling; defaults to the optimal one for each x.
    #[arg(long, requires = "is")]
    pub tilt: Option<f64>,
    /// Also write the path with this index as CSV next to the output.
    #[arg(long, requires = "out")]
    pub dump_path: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub grid: VerifyGrid,
    /// Highest moment order checked for the Bernstein condition.
    #[arg(long, default_value_t = 12)]
    pub max_order: u32,
    /// Check the moment condition and tail domination against this epsilon
    /// instead of the model's own.
    #[arg(long)]
    pub claim_epsilon: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyGrid {
    #[arg(long, default_value = "0.5,1,1.5,2,2.5,3,3.5,4", value_delimiter = ',')]
    pub domination_x: Vec<f64>,
    /// Largest x estimated by plain sampling; larger x use importance sampling.
    #[arg(long, default_value_t = 2.0)]
    pub plain_up_to: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrateEnvelope {
    Thm21,
    Thm22,
    Cor21,
    Brmti,
    Selfnorm,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum)]
    pub envelope: CalibrateEnvelope,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegressArgs {
    /// CSV with header `phi,x`; a dataset is simulated from the model when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    /// Invert the nonuniform envelope instead of the ratio band.
    #[arg(long)]
    pub use_envelope: bool,
    /// Run a coverage experiment with one replication per path.
    #[arg(long)]
    pub coverage: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelfnormArgs {
    /// CSV with header `xi`; the model is simulated when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
