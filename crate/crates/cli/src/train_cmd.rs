//! `train`: load a dataset, resize everything to the network resolution,
//! and drive the training loop. Checkpoints and the loss log land in the
//! output directory.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use uie_core::filter::bilinear_resize_3d;
use uie_core::Image;
use uie_net::{load_checkpoint, NetConfig, ParameterStore};
use uie_train::{train, LabeledPair, LossWeights, TrainOptions, TrainSchedule, TrainSummary};

use crate::manifest::{load_or_ingest, DatasetManifest, ManifestEntry};

pub const LOSS_LOG_FILE: &str = "loss_log.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetPreset {
    Full,
    Toy,
    Tiny,
}

impl NetPreset {
    pub fn config(self) -> NetConfig {
        match self {
            NetPreset::Full => NetConfig::default(),
            NetPreset::Toy => NetConfig::toy(),
            NetPreset::Tiny => NetConfig::tiny(),
        }
    }
}

pub struct TrainArgs {
    pub data: PathBuf,
    /// Extra unlabeled images; every entry counts, labeled or not.
    pub unlabeled: Option<PathBuf>,
    pub out: PathBuf,
    pub net: NetPreset,
    /// Resume from a checkpoint instead of a fresh initialization; the
    /// checkpoint's architecture wins over `net`.
    pub init_from: Option<PathBuf>,
    pub schedule: TrainSchedule,
    pub weights: LossWeights,
    pub checkpoint_interval: u64,
    pub seed: u64,
}

fn resized(img: &Image, size: usize) -> Result<Image> {
    if img.height() == size && img.width() == size {
        return Ok(img.clone());
    }
    Image::new(bilinear_resize_3d(img.data(), size, size)).context("resizing training input")
}

fn load_resized(manifest: &DatasetManifest, entry: &ManifestEntry, size: usize) -> Result<Image> {
    let img = crate::io::load_image(&manifest.resolve(&entry.degraded))?;
    resized(&img, size)
}

pub fn run_train(args: &TrainArgs) -> Result<TrainSummary> {
    let manifest = load_or_ingest(&args.data)?;
    let (mut store, cfg) = match &args.init_from {
        Some(path) => {
            let (store, cfg, _) = load_checkpoint(path)?;
            (store, cfg)
        }
        None => {
            let cfg = args.net.config();
            (ParameterStore::init(&cfg, args.seed)?, cfg)
        }
    };
    let size = cfg.input_size;

    let mut labeled = Vec::new();
    for entry in manifest.labeled() {
        let degraded = load_resized(&manifest, entry, size)
            .with_context(|| format!("labeled image {:?}", entry.id))?;
        let rel = entry.reference.as_ref().expect("labeled entry");
        let reference = crate::io::load_image(&manifest.resolve(rel))
            .and_then(|img| resized(&img, size))
            .with_context(|| format!("reference image {:?}", entry.id))?;
        labeled.push(LabeledPair::new(degraded, reference)?);
    }

    let mut unlabeled = Vec::new();
    for entry in manifest.unlabeled() {
        unlabeled.push(
            load_resized(&manifest, entry, size)
                .with_context(|| format!("unlabeled image {:?}", entry.id))?,
        );
    }
    if let Some(extra) = &args.unlabeled {
        let extra_manifest = load_or_ingest(extra)?;
        for entry in &extra_manifest.entries {
            unlabeled.push(
                load_resized(&extra_manifest, entry, size)
                    .with_context(|| format!("unlabeled image {:?}", entry.id))?,
            );
        }
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let log_path = args.out.join(LOSS_LOG_FILE);
    let file = std::fs::File::create(&log_path)
        .with_context(|| format!("creating {}", log_path.display()))?;
    let mut log = std::io::BufWriter::new(file);

    let summary = train(
        &mut store,
        &cfg,
        &labeled,
        &unlabeled,
        &args.schedule,
        &args.weights,
        args.seed,
        TrainOptions {
            log: &mut log,
            checkpoint_dir: Some(&args.out),
            checkpoint_interval: args.checkpoint_interval,
        },
    )?;
    log.flush().context("flushing loss log")?;
    Ok(summary)
}
