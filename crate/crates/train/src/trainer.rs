//! The training loop: batch sampling, phase dispatch, optimizer steps,
//! loss logging, and periodic checkpoints.

use std::io::Write;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use ndarray::ArrayD;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uie_core::Image;
use uie_net::autodiff::{Gradients, Graph};
use uie_net::{bind_parameters, save_checkpoint, Bindings, Mode, NetConfig, ParameterStore};

use crate::config::{LossWeights, Phase, TrainSchedule};
use crate::data::{BatchSample, LabeledPair};
use crate::error::{cfg_err, Result};
use crate::losses::{scalar, supervised_losses, unsupervised_losses};
use crate::optim::AdamW;

/// Column layout of the loss log; one row per iteration, fields that the
/// iteration's phase does not compute stay empty.
pub const LOG_HEADER: &str = "iteration,phase,l_fwd,l_bwd,l_a_sup,l_t,l_a_unsup,l_gw,total";

/// Output plumbing for one training run.
pub struct TrainOptions<'a> {
    pub log: &'a mut dyn Write,
    pub checkpoint_dir: Option<&'a Path>,
    /// Save every this many iterations; 0 saves only the final state.
    pub checkpoint_interval: u64,
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub iterations: u64,
    /// Total-column value of the last logged row.
    pub final_loss: f64,
    pub checkpoints: Vec<PathBuf>,
}

fn validate(
    cfg: &NetConfig,
    labeled: &[LabeledPair],
    unlabeled: &[Image],
    schedule: &TrainSchedule,
    weights: &LossWeights,
) -> Result<()> {
    cfg.validate().map_err(crate::error::TrainError::Net)?;
    schedule.validate()?;
    weights.validate()?;
    if labeled.is_empty() {
        return Err(cfg_err("labeled set is empty"));
    }
    if schedule.batch < 2 {
        return Err(cfg_err("batch must be at least 2 for batch normalization"));
    }
    if schedule.unsup_iterations() > 0 && unlabeled.is_empty() {
        return Err(cfg_err(
            "unlabeled set is empty but the schedule has unsupervised blocks",
        ));
    }
    let s = cfg.input_size;
    for (i, p) in labeled.iter().enumerate() {
        if p.degraded().height() != s || p.degraded().width() != s {
            return Err(cfg_err(format!(
                "labeled pair {i} is {}x{}, expected {s}x{s}",
                p.degraded().height(),
                p.degraded().width()
            )));
        }
    }
    for (i, img) in unlabeled.iter().enumerate() {
        if img.height() != s || img.width() != s {
            return Err(cfg_err(format!(
                "unlabeled image {i} is {}x{}, expected {s}x{s}",
                img.height(),
                img.width()
            )));
        }
    }
    Ok(())
}

fn draw_labeled(
    rng: &mut ChaCha8Rng,
    labeled: &[LabeledPair],
    batch: usize,
) -> Result<BatchSample> {
    let picked: Vec<&LabeledPair> = (0..batch)
        .map(|_| &labeled[rng.gen_range(0..labeled.len())])
        .collect();
    BatchSample::labeled(&picked)
}

fn draw_unlabeled(rng: &mut ChaCha8Rng, unlabeled: &[Image], batch: usize) -> Result<BatchSample> {
    let picked: Vec<&Image> = (0..batch)
        .map(|_| &unlabeled[rng.gen_range(0..unlabeled.len())])
        .collect();
    BatchSample::unlabeled(&picked)
}

fn draw_alpha(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

fn grads_by_name(
    binds: &Bindings,
    grads: &Gradients,
    store: &ParameterStore,
) -> IndexMap<String, ArrayD<f64>> {
    let mut out = IndexMap::new();
    for name in store.trainable_names() {
        if let Some(gv) = grads.get(binds.get(&name)) {
            out.insert(name, gv.clone());
        }
    }
    out
}

/// Runs the full schedule over the given datasets, mutating `store` in
/// place (it is left in train mode). Reproducible bit-for-bit from `seed`:
/// one seeded stream drives batch sampling and the re-degradation factor.
#[allow(clippy::too_many_arguments)]
pub fn train(
    store: &mut ParameterStore,
    cfg: &NetConfig,
    labeled: &[LabeledPair],
    unlabeled: &[Image],
    schedule: &TrainSchedule,
    weights: &LossWeights,
    seed: u64,
    opts: TrainOptions,
) -> Result<TrainSummary> {
    validate(cfg, labeled, unlabeled, schedule, weights)?;
    if let Some(dir) = opts.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut opt = AdamW::new(schedule.lr);
    store.set_mode(Mode::Train);
    writeln!(opts.log, "{LOG_HEADER}")?;

    let mut checkpoints = Vec::new();
    let mut final_loss = f64::NAN;
    for iter in 0..schedule.total_iters {
        let phase = schedule.phase(iter);
        let mut g = Graph::new();
        let binds = bind_parameters(&mut g, store);
        let (row, root) = match phase {
            Phase::Warmup | Phase::Sup => {
                let sample = draw_labeled(&mut rng, labeled, schedule.batch)?;
                let parts = supervised_losses(&mut g, &binds, store, cfg, weights, &sample)?;
                let total = scalar(&g, parts.total);
                final_loss = total;
                let row = format!(
                    "{},{},{},{},{},,,,{}",
                    iter + 1,
                    phase.label(),
                    scalar(&g, parts.l_fwd),
                    scalar(&g, parts.l_bwd),
                    scalar(&g, parts.l_a_sup),
                    total,
                );
                (row, parts.total)
            }
            Phase::Unsup => {
                let sample = draw_unlabeled(&mut rng, unlabeled, schedule.batch)?;
                let alpha = draw_alpha(&mut rng, schedule.alpha_range);
                let (parts, _i2) =
                    unsupervised_losses(&mut g, &binds, store, cfg, weights, sample.degraded(), alpha)?;
                // interleaved blocks keep the semi-supervised weighting:
                // an unsupervised step minimizes lambda_unsup * L_unsup
                let root = g.mul_scalar(parts.total, weights.lambda_unsup);
                let total = scalar(&g, root);
                final_loss = total;
                let row = format!(
                    "{},{},,,,{},{},{},{}",
                    iter + 1,
                    phase.label(),
                    scalar(&g, parts.l_t),
                    scalar(&g, parts.l_a_unsup),
                    scalar(&g, parts.l_gw),
                    total,
                );
                (row, root)
            }
        };
        let grads = g.backward(root);
        let named = grads_by_name(&binds, &grads, store);
        opt.step(store, &named);
        writeln!(opts.log, "{row}")?;

        let done = iter + 1;
        if opts.checkpoint_interval > 0 && done % opts.checkpoint_interval == 0 {
            if let Some(dir) = opts.checkpoint_dir {
                let path = dir.join(format!("model-{done:06}.ckpt"));
                save_checkpoint(&path, store, cfg, done)?;
                checkpoints.push(path);
            }
        }
    }

    if let Some(dir) = opts.checkpoint_dir {
        let path = dir.join("model-final.ckpt");
        save_checkpoint(&path, store, cfg, schedule.total_iters)?;
        checkpoints.push(path);
    }
    opts.log.flush()?;
    Ok(TrainSummary {
        iterations: schedule.total_iters,
        final_loss,
        checkpoints,
    })
}
