//! `synth`: build a synthetic dataset by pushing clean images through the
//! formation model with depth maps. The output directory is itself a
//! dataset root (`raw/`, `reference/`, `depth/`) with a manifest and a
//! ground-truth parameter file, so it feeds straight back into `train`
//! and transmission/depth evaluation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use uie_core::{degrade, transmission_from_depth, AmbientLight, AttenuationCoefficients};

use crate::io::{load_depth, load_image, save_image};
use crate::manifest::{ingest, scan};

pub const TRUTH_FILE: &str = "truth.toml";
pub const MANIFEST_FILE: &str = "manifest.toml";

pub struct SynthArgs {
    pub clean: PathBuf,
    pub depth: PathBuf,
    pub out: PathBuf,
    pub beta: [f64; 3],
    pub ambient: [f64; 3],
    /// Relative per-image perturbation of beta and ambient, in [0, 1).
    pub jitter: f64,
    pub depth_scale: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthEntry {
    pub id: String,
    pub beta: [f64; 3],
    pub ambient: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthFile {
    pub version: u32,
    pub depth_scale: f64,
    #[serde(default)]
    pub images: Vec<TruthEntry>,
}

impl TruthFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let truth: TruthFile =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if truth.version != 1 {
            bail!("{}: unsupported truth version {}", path.display(), truth.version);
        }
        Ok(truth)
    }
}

/// Returns the number of generated images.
pub fn run_synth(args: &SynthArgs) -> Result<usize> {
    if !(0.0..1.0).contains(&args.jitter) {
        bail!("jitter must lie in [0, 1), got {}", args.jitter);
    }
    let mut issues = Vec::new();
    let clean = scan(&args.clean, &mut issues)?;
    let depths = scan(&args.depth, &mut issues)?;
    for issue in &issues {
        eprintln!("warning: {issue}");
    }
    if clean.is_empty() {
        bail!("no clean images found under {}", args.clean.display());
    }

    for sub in ["raw", "reference", "depth"] {
        std::fs::create_dir_all(args.out.join(sub))
            .with_context(|| format!("creating {}", args.out.join(sub).display()))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut truth = TruthFile {
        version: 1,
        depth_scale: args.depth_scale,
        images: Vec::new(),
    };
    let mut written = 0;
    for (stem, clean_path) in &clean {
        // fixed draw order keeps the dataset reproducible even when some
        // images are skipped
        let mut draw = |base: f64| base * (1.0 + args.jitter * rng.gen_range(-1.0..=1.0));
        let beta = [draw(args.beta[0]), draw(args.beta[1]), draw(args.beta[2])];
        let ambient = [
            draw(args.ambient[0]).clamp(0.0, 1.0),
            draw(args.ambient[1]).clamp(0.0, 1.0),
            draw(args.ambient[2]).clamp(0.0, 1.0),
        ];

        let Some(depth_path) = depths.get(stem) else {
            eprintln!("warning: no depth map for {stem}, skipping");
            continue;
        };
        let j = load_image(clean_path)?;
        let d = load_depth(depth_path, args.depth_scale)?;
        if (d.height(), d.width()) != (j.height(), j.width()) {
            eprintln!("warning: depth for {stem} is a different size, skipping");
            continue;
        }

        let b = AttenuationCoefficients::new(beta)?;
        let a = AmbientLight::new(ambient)?;
        let t = transmission_from_depth(&d, &b);
        let degraded = degrade(&j, &t, &a)?;

        save_image(&args.out.join("raw").join(format!("{stem}.png")), &degraded)?;
        save_image(&args.out.join("reference").join(format!("{stem}.png")), &j)?;
        let depth_name = depth_path.file_name().context("depth file name")?;
        std::fs::copy(depth_path, args.out.join("depth").join(depth_name))
            .with_context(|| format!("copying {}", depth_path.display()))?;

        truth.images.push(TruthEntry {
            id: stem.clone(),
            beta,
            ambient,
        });
        written += 1;
    }

    let text = toml::to_string_pretty(&truth).context("serializing ground truth")?;
    std::fs::write(args.out.join(TRUTH_FILE), text)?;
    ingest(&args.out)?.manifest.save(&args.out.join(MANIFEST_FILE))?;
    Ok(written)
}
