//! Run configuration. One TOML file can hold a `seed` plus a section per
//! method; every key has a command-line flag that overrides it. Unknown
//! keys are rejected before anything touches the filesystem.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use uie_priors::DcpParams;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub depth_scale: Option<f64>,
    #[serde(default)]
    pub dcp: DcpSection,
    #[serde(default)]
    pub udcp: DcpSection,
    #[serde(default)]
    pub he: HeSection,
    #[serde(default)]
    pub retinex: RetinexSection,
    #[serde(default)]
    pub pauienet: NetSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub synth: SynthSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcpSection {
    pub patch: Option<usize>,
    pub omega: Option<f64>,
    pub top_frac: Option<f64>,
    pub guided_radius: Option<usize>,
    pub guided_eps: Option<f64>,
    pub t_floor: Option<f64>,
}

impl DcpSection {
    pub fn to_params(&self) -> DcpParams {
        let d = DcpParams::default();
        DcpParams {
            patch: self.patch.unwrap_or(d.patch),
            omega: self.omega.unwrap_or(d.omega),
            top_frac: self.top_frac.unwrap_or(d.top_frac),
            guided_radius: self.guided_radius.unwrap_or(d.guided_radius),
            guided_eps: self.guided_eps.unwrap_or(d.guided_eps),
            t_floor: self.t_floor.unwrap_or(d.t_floor),
        }
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeSection {
    pub bins: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetinexSection {
    pub scales: Option<Vec<f64>>,
}

pub const DEFAULT_RETINEX_SCALES: [f64; 3] = [15.0, 80.0, 250.0];

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSection {
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    /// Network preset: "full", "toy", or "tiny".
    pub net: Option<String>,
    pub iterations: Option<u64>,
    pub warmup: Option<u64>,
    pub sup_block: Option<u64>,
    pub unsup_block: Option<u64>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub alpha_lo: Option<f64>,
    pub alpha_hi: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub lambda_unsup: Option<f64>,
    pub checkpoint_interval: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub beta: Option<[f64; 3]>,
    pub ambient: Option<[f64; 3]>,
    pub jitter: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flag beats config beats built-in default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn pick_opt<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
