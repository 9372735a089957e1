//! The train command end to end: log shape, checkpoints, determinism,
//! and resuming.

mod common;

use std::fs;
use std::path::Path;

use common::{put, rand_image};
use tempfile::tempdir;
use uie_cli::{run_train, NetPreset, TrainArgs, LOSS_LOG_FILE};
use uie_net::{infer_single, load_checkpoint};
use uie_train::{LossWeights, TrainSchedule, LOG_HEADER};

fn build_dataset(root: &Path) {
    for i in 0..4 {
        let raw = rand_image(200 + i, 16, 16);
        let reference = rand_image(300 + i, 16, 16);
        put(&root.join(format!("raw/l{i}.png")), &raw);
        put(&root.join(format!("reference/l{i}.png")), &reference);
        put(&root.join(format!("raw/u{i}.png")), &rand_image(400 + i, 16, 16));
    }
}

fn smoke_args(data: &Path, out: &Path) -> TrainArgs {
    TrainArgs {
        data: data.to_path_buf(),
        unlabeled: None,
        out: out.to_path_buf(),
        net: NetPreset::Tiny,
        init_from: None,
        schedule: TrainSchedule {
            warmup_iters: 6,
            total_iters: 16,
            sup_block: 3,
            unsup_block: 2,
            lr: 1e-3,
            batch: 2,
            alpha_range: (0.5, 0.9),
        },
        weights: LossWeights::default(),
        checkpoint_interval: 0,
        seed: 3,
    }
}

#[test]
fn train_runs_logs_and_checkpoints_deterministically() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("data");
    build_dataset(&data);

    let out1 = dir.path().join("run1");
    let summary = run_train(&smoke_args(&data, &out1)).unwrap();
    assert_eq!(summary.iterations, 16);
    assert!(summary.final_loss.is_finite());
    assert_eq!(summary.checkpoints, vec![out1.join("model-final.ckpt")]);

    let log = fs::read_to_string(out1.join(LOSS_LOG_FILE)).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], LOG_HEADER);
    assert_eq!(lines.len(), 17, "header plus one row per iteration");
    assert!(lines[1].starts_with("1,warmup,"));
    // 6 warmup iterations, then supervised/unsupervised blocks of 3 and 2
    assert!(lines[7].starts_with("7,sup,"));
    assert!(lines[10].starts_with("10,unsup,"));
    assert!(lines[12].starts_with("12,sup,"));

    let (mut store, cfg, iteration) = load_checkpoint(&out1.join("model-final.ckpt")).unwrap();
    assert_eq!(iteration, 16);
    assert_eq!(cfg.input_size, 16, "tiny preset architecture restored");

    // an identical second run reproduces the log and the weights exactly
    let out2 = dir.path().join("run2");
    run_train(&smoke_args(&data, &out2)).unwrap();
    assert_eq!(
        log,
        fs::read_to_string(out2.join(LOSS_LOG_FILE)).unwrap(),
        "loss logs must be byte-identical"
    );
    assert_eq!(
        fs::read(out1.join("model-final.ckpt")).unwrap(),
        fs::read(out2.join("model-final.ckpt")).unwrap(),
        "checkpoints must be byte-identical"
    );

    // loaded weights drive a deterministic forward pass
    let probe = rand_image(500, 16, 16);
    let first = infer_single(&mut store, &cfg, &probe).unwrap();
    let second = infer_single(&mut store, &cfg, &probe).unwrap();
    assert_eq!(first.t_hat.data(), second.t_hat.data());
    assert_eq!(first.a_hat.rgb(), second.a_hat.rgb());
}

#[test]
fn interval_checkpoints_and_resume() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("data");
    build_dataset(&data);

    let out = dir.path().join("run");
    let mut args = smoke_args(&data, &out);
    args.schedule.total_iters = 10;
    args.schedule.warmup_iters = 10;
    args.checkpoint_interval = 4;
    let summary = run_train(&args).unwrap();
    let names: Vec<String> = summary
        .checkpoints
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["model-000004.ckpt", "model-000008.ckpt", "model-final.ckpt"]);

    // resume: the checkpoint's architecture wins over the preset flag
    let out2 = dir.path().join("resumed");
    let mut resumed = smoke_args(&data, &out2);
    resumed.net = NetPreset::Toy;
    resumed.init_from = Some(out.join("model-final.ckpt"));
    resumed.schedule.total_iters = 2;
    resumed.schedule.warmup_iters = 2;
    let summary = run_train(&resumed).unwrap();
    assert_eq!(summary.iterations, 2);
    let (_, cfg, _) = load_checkpoint(&out2.join("model-final.ckpt")).unwrap();
    assert_eq!(cfg.input_size, 16, "resumed run keeps the tiny architecture");
}

#[test]
fn training_without_labels_is_rejected_upfront() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("data");
    for i in 0..3 {
        put(&data.join(format!("raw/u{i}.png")), &rand_image(600 + i, 16, 16));
    }
    let out = dir.path().join("out");
    let err = run_train(&smoke_args(&data, &out)).unwrap_err();
    assert!(format!("{err:#}").contains("labeled"), "{err:#}");
}
