//! Command-line flags, the optional JSON config file and their merge.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use overlapq::Variant;

pub const SEED_ENV: &str = "OVERLAPQ_SEED";
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "overlapq", version, about = "Overlap times in the two-station M/M/inf tandem queue")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the closed forms for one query.
    Analytic(QueryArgs),
    /// Estimate one query by Monte Carlo.
    Simulate(SimulateArgs),
    /// Run the closed form, the simulator and the event oracle on one query.
    Compare(QueryArgs),
    /// Reproduce the published tables.
    Tables(TablesArgs),
    /// Simulate N >= 3 stations against the conjectured joint tail.
    Conjecture(ConjectureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Printed,
    Consistent,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Printed => Variant::AsPrinted,
            VariantArg::Consistent => Variant::Consistent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args)]
pub struct QueryArgs {
    /// Arrival rate λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Service rate μ of each station.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Gap of the station-1 pair (n, n+j). Defaults to k.
    #[arg(long)]
    pub j: Option<u32>,
    /// Gap of the station-2 pair (m, m+k).
    #[arg(long)]
    pub k: Option<u32>,
    /// Offset m − n. Defaults to 0.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<i64>,
    /// Station-1 threshold.
    #[arg(long)]
    pub x: Option<f64>,
    /// Station-2 threshold.
    #[arg(long)]
    pub y: Option<f64>,
    /// Threshold for the sum of the two overlaps (same pair only).
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub n_samples: Option<u64>,
    /// RNG seed; falls back to $OVERLAPQ_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the flag names as keys; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Estimate the same-pair moments instead of a tail.
    #[arg(long)]
    pub moments: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// 1, 2, 3 or all.
    #[arg(long)]
    pub table: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ConjectureArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Comma-separated per-station thresholds (N >= 3).
    #[arg(long, value_delimiter = ',')]
    pub xs: Option<Vec<f64>>,
}

/// Keys accepted in a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub j: Option<u32>,
    pub k: Option<u32>,
    pub delta: Option<i64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub ell: Option<f64>,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub variant: Option<VariantArg>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub xs: Option<Vec<f64>>,
    pub table: Option<String>,
    pub moments: Option<bool>,
}

/// Flags merged over the config file over environment and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub j: Option<u32>,
    pub k: Option<u32>,
    pub delta: i64,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub ell: Option<f64>,
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub variant: Variant,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub xs: Option<Vec<f64>>,
    pub table: Option<String>,
    pub moments: bool,
}

/// A usage problem: bad flag value, unreadable config or missing field.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn read_config(path: &PathBuf) -> Result<FileConfig, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))
}

fn seed_from_env(env_seed: Option<String>) -> Result<Option<u64>, UsageError> {
    env_seed
        .map(|s| s.trim().parse().map_err(|_| UsageError(format!("{SEED_ENV} must be an unsigned integer, got {s:?}"))))
        .transpose()
}

impl RunConfig {
    /// Merge in priority order: flag, config file, environment, default.
    pub fn resolve(
        q: &QueryArgs,
        xs: Option<Vec<f64>>,
        table: Option<String>,
        moments: bool,
        env_seed: Option<String>,
    ) -> Result<Self, UsageError> {
        let file = match &q.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let seed = match q.seed.or(file.seed) {
            Some(s) => s,
            None => seed_from_env(env_seed)?.unwrap_or(DEFAULT_SEED),
        };
        let cfg = RunConfig {
            lambda: q.lambda.or(file.lambda),
            mu: q.mu.or(file.mu),
            j: q.j.or(file.j),
            k: q.k.or(file.k),
            delta: q.delta.or(file.delta).unwrap_or(0),
            x: q.x.or(file.x),
            y: q.y.or(file.y),
            ell: q.ell.or(file.ell),
            n_samples: q.n_samples.or(file.n_samples).unwrap_or(DEFAULT_SAMPLES),
            seed,
            workers: q.workers.or(file.workers).unwrap_or(1),
            variant: q.variant.or(file.variant).map(Variant::from).unwrap_or_default(),
            format: q.format.or(file.format).unwrap_or_default(),
            out: q.out.clone().or(file.out),
            xs: xs.or(file.xs),
            table: table.or(file.table),
            moments: moments || file.moments.unwrap_or(false),
        };
        if cfg.n_samples == 0 {
            return Err(UsageError("--n-samples must be >= 1".into()));
        }
        if cfg.workers == 0 {
            return Err(UsageError("--workers must be >= 1".into()));
        }
        Ok(cfg)
    }

    pub fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, UsageError> {
        value.ok_or_else(|| UsageError(format!("missing required --{flag}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("overlapq").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn negative_delta_parses() {
        let cli = parse(&["analytic", "--lambda", "10", "--mu", "2", "--k", "3", "--j", "5", "--delta", "-1"]);
        let Command::Analytic(q) = cli.command else { panic!() };
        assert_eq!(q.delta, Some(-1));
    }

    #[test]
    fn flags_beat_config_beats_env() {
        let dir = std::env::temp_dir().join(format!("overlapq-args-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(&path, r#"{"lambda": 3.0, "mu": 4.0, "seed": 11, "variant": "printed"}"#).unwrap();
        let q = QueryArgs { lambda: Some(5.0), config: Some(path.clone()), ..Default::default() };
        let cfg = RunConfig::resolve(&q, None, None, false, Some("99".into())).unwrap();
        assert_eq!(cfg.lambda, Some(5.0));
        assert_eq!(cfg.mu, Some(4.0));
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.variant, Variant::AsPrinted);

        let bare = QueryArgs::default();
        assert_eq!(RunConfig::resolve(&bare, None, None, false, Some("99".into())).unwrap().seed, 99);
        assert_eq!(RunConfig::resolve(&bare, None, None, false, None).unwrap().seed, DEFAULT_SEED);
        assert!(RunConfig::resolve(&bare, None, None, false, Some("x".into())).is_err());
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = std::env::temp_dir().join(format!("overlapq-args-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(&path, r#"{"lamda": 3.0}"#).unwrap();
        let q = QueryArgs { config: Some(path), ..Default::default() };
        assert!(RunConfig::resolve(&q, None, None, false, None).is_err());
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn zero_workers_rejected() {
        let q = QueryArgs { workers: Some(0), ..Default::default() };
        assert!(RunConfig::resolve(&q, None, None, false, None).is_err());
    }
}
