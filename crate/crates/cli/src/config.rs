//! Experiment configuration: a TOML file plus command-line overrides.
//!
//! ```toml
//! form = "delta-preimage"   # or a path to a form file
//! q = 5
//! d = [1, 2, 3, 4]          # default: every unit class mod q
//! xmax = 100000             # default: T, else 100000
//! T = 100000                # default: xmax
//! delta-grid = [0.1, 0.05, 0.01]
//! checkpoints = [1000, 2000, 4000]
//! seed = 0
//! out = "signeq-out"
//! cache = "cache"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use signeq::arith::gcd;
use signeq::halfint::HalfIntegralForm;
use signeq::satotate::checkpoint_schedule;
use signeq::Execution;

use crate::CliError;

pub const DELTA_PRESET: &str = "delta-preimage";
const DEFAULT_DELTA_GRID: [f64; 4] = [0.1, 0.05, 0.02, 0.01];

#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// Structured config file (TOML); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `delta-preimage` or a path to a form file.
    #[arg(long)]
    pub form: Option<String>,
    /// Squarefree t; must match the form.
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Residue classes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<u64>>,
    /// Range of n and of primes.
    #[arg(long)]
    pub xmax: Option<u64>,
    /// Coefficient truncation.
    #[arg(long = "T")]
    pub truncation: Option<u64>,
    /// Positive decreasing δ values, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub delta_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Run every loop on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConfigFile {
    form: Option<String>,
    t: Option<u64>,
    q: Option<u64>,
    d: Option<Vec<u64>>,
    xmax: Option<u64>,
    #[serde(rename = "T")]
    truncation: Option<u64>,
    delta_grid: Option<Vec<f64>>,
    checkpoints: Option<Vec<u64>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    cache: Option<PathBuf>,
}

/// The effective configuration echoed into every report. Output and cache
/// locations are not part of it.
#[derive(Serialize, Clone, Debug)]
pub struct ExperimentConfig {
    pub form: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form_sha256: Option<String>,
    pub t: u64,
    pub q: u64,
    pub d: Vec<u64>,
    pub xmax: u64,
    #[serde(rename = "T")]
    pub truncation: u64,
    pub delta_grid: Vec<f64>,
    pub checkpoints: Vec<u64>,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub cache: Option<PathBuf>,
    #[serde(skip)]
    pub exec: Execution,
}

pub enum FormSource {
    Delta,
    File(Box<HalfIntegralForm>),
}

impl ExperimentConfig {
    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.json().as_bytes()))
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn read_file_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

pub fn resolve(args: &ConfigArgs) -> Result<(ExperimentConfig, FormSource), CliError> {
    let file = match &args.config {
        Some(p) => read_file_config(p)?,
        None => ConfigFile::default(),
    };
    let form = args.form.clone().or(file.form).unwrap_or_else(|| DELTA_PRESET.to_string());
    let t_request = args.t.or(file.t);
    let (source, t, form_sha256) = if form == DELTA_PRESET {
        if t_request.is_some_and(|t| t != 1) {
            return Err(config_err("the delta-preimage preset has t = 1"));
        }
        (FormSource::Delta, 1, None)
    } else {
        let text = fs::read_to_string(&form).map_err(|e| config_err(format!("cannot read form file {form}: {e}")))?;
        let parsed = HalfIntegralForm::parse(&text).map_err(|e| config_err(format!("form file {form}: {e}")))?;
        if let Some(t) = t_request.filter(|&t| t != parsed.t()) {
            return Err(config_err(format!("--t {t} does not match t = {} in {form}", parsed.t())));
        }
        let t = parsed.t();
        (FormSource::File(Box::new(parsed)), t, Some(hex::encode(Sha256::digest(text.as_bytes()))))
    };

    let q = args.q.or(file.q).unwrap_or(5);
    if q == 0 {
        return Err(config_err("q must be positive"));
    }
    let d = args
        .d
        .clone()
        .or(file.d)
        .unwrap_or_else(|| (1..=q).filter(|&d| gcd(d, q) == 1).collect());
    if d.is_empty() {
        return Err(config_err("no residue classes given"));
    }
    if let Some(bad) = d.iter().find(|&&d| gcd(d, q) != 1) {
        return Err(config_err(format!("gcd({bad}, {q}) != 1")));
    }
    let t_given = args.truncation.or(file.truncation);
    let xmax = args.xmax.or(file.xmax).or(t_given).unwrap_or(100_000);
    if xmax < 1000 {
        return Err(config_err(format!("xmax = {xmax} is below 1000")));
    }
    let truncation = t_given.unwrap_or(xmax);
    if truncation < xmax {
        return Err(config_err(format!("T = {truncation} is below xmax = {xmax}")));
    }
    let delta_grid = args.delta_grid.clone().or(file.delta_grid).unwrap_or_else(|| DEFAULT_DELTA_GRID.to_vec());
    if delta_grid.is_empty() || delta_grid.iter().any(|&x| !(x > 0.0)) || delta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config_err("delta-grid must be positive and strictly decreasing"));
    }
    let checkpoints = file.checkpoints.unwrap_or_else(|| {
        let mut c = checkpoint_schedule(xmax);
        if c.last() != Some(&xmax) {
            c.push(xmax);
        }
        c
    });
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints.iter().any(|&c| c == 0 || c > xmax) {
        return Err(config_err("checkpoints must be increasing and within 1..=xmax"));
    }
    let config = ExperimentConfig {
        form,
        form_sha256,
        t,
        q,
        d,
        xmax,
        truncation,
        delta_grid,
        checkpoints,
        seed: args.seed.or(file.seed).unwrap_or(0),
        out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("signeq-out")),
        cache: args.cache.clone().or(file.cache),
        exec: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    Ok((config, source))
}
