use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use uie_net::load_checkpoint;
use uie_priors::DcpParams;
use uie_train::{LossWeights, TrainSchedule};

use uie_cli::config::{pick, pick_opt, FileConfig, DEFAULT_RETINEX_SCALES};
use uie_cli::{
    run_enhance, run_estimate, run_eval, run_ingest_check, run_synth, run_train, EnhanceArgs,
    EstimateArgs, EvalArgs, IngestArgs, Method, MethodCtx, NetPreset, SynthArgs, TrainArgs,
};

#[derive(Parser)]
#[command(name = "uie", version, about = "Underwater image enhancement toolkit")]
struct Cli {
    /// TOML config file; any flag overrides its matching key.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for anything stochastic (training order, synthesis jitter).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enhance a dataset with one method and write a metric report.
    Enhance(EnhanceCli),
    /// Write transmission and ambient-light estimates as images.
    Estimate(EstimateCli),
    /// Degrade clean images through the formation model into a dataset.
    Synth(SynthCli),
    /// Train the two-stream network.
    Train(TrainCli),
    /// Compute metrics over already-enhanced images.
    Eval(EvalCli),
    /// Validate a dataset root and optionally write its manifest.
    IngestCheck(IngestCli),
}

#[derive(Args)]
struct MethodFlags {
    #[arg(long, value_enum)]
    method: Method,
    /// Checkpoint for the network method.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Haze retention factor for dcp/udcp.
    #[arg(long)]
    omega: Option<f64>,
    /// Dark-channel window for dcp/udcp.
    #[arg(long)]
    patch: Option<usize>,
    /// Transmission floor for dcp/udcp.
    #[arg(long)]
    t_floor: Option<f64>,
}

#[derive(Args)]
struct EnhanceCli {
    /// Dataset root or manifest file.
    #[arg(long)]
    data: PathBuf,
    /// Output directory for enhanced images (and the default report).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    method: MethodFlags,
    /// Report CSV path; defaults to <out>/report.csv.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Scene distance encoded by a full-white depth pixel.
    #[arg(long)]
    depth_scale: Option<f64>,
}

#[derive(Args)]
struct EstimateCli {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    method: MethodFlags,
}

#[derive(Args)]
struct SynthCli {
    /// Directory of clean images.
    #[arg(long)]
    clean: PathBuf,
    /// Directory of depth maps pairing with the clean images by stem.
    #[arg(long)]
    depth: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Attenuation per channel, e.g. --beta 2.0,0.8,0.6
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Ambient light per channel, e.g. --ambient 0.45,0.7,0.8
    #[arg(long, value_delimiter = ',')]
    ambient: Option<Vec<f64>>,
    /// Relative per-image perturbation of beta/ambient in [0, 1).
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    depth_scale: Option<f64>,
}

#[derive(Args)]
struct TrainCli {
    /// Dataset root or manifest; labeled entries feed supervision.
    #[arg(long)]
    data: PathBuf,
    /// Extra dataset whose images all join the unlabeled pool.
    #[arg(long)]
    unlabeled: Option<PathBuf>,
    /// Output directory for checkpoints and the loss log.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    net: Option<NetPreset>,
    /// Resume from this checkpoint.
    #[arg(long)]
    init_from: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    warmup: Option<u64>,
    #[arg(long)]
    sup_block: Option<u64>,
    #[arg(long)]
    unsup_block: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    alpha_lo: Option<f64>,
    #[arg(long)]
    alpha_hi: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    lambda3: Option<f64>,
    #[arg(long)]
    lambda_unsup: Option<f64>,
    /// Checkpoint every N iterations (0 = only the final one).
    #[arg(long)]
    checkpoint_interval: Option<u64>,
}

#[derive(Args)]
struct EvalCli {
    #[arg(long)]
    enhanced: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    depth: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    depth_scale: Option<f64>,
}

#[derive(Args)]
struct IngestCli {
    root: PathBuf,
    /// Also write the manifest here.
    #[arg(long)]
    write: Option<PathBuf>,
}

fn check_dcp(params: &DcpParams) -> Result<()> {
    if !(params.omega > 0.0 && params.omega <= 1.0) {
        bail!("omega must lie in (0, 1], got {}", params.omega);
    }
    if params.patch == 0 {
        bail!("patch must be at least 1");
    }
    if !(params.t_floor > 0.0 && params.t_floor < 1.0) {
        bail!("t-floor must lie in (0, 1), got {}", params.t_floor);
    }
    if !(params.top_frac > 0.0 && params.top_frac <= 1.0) {
        bail!("top_frac must lie in (0, 1], got {}", params.top_frac);
    }
    if !(params.guided_eps > 0.0) {
        bail!("guided_eps must be positive, got {}", params.guided_eps);
    }
    Ok(())
}

/// Parameters are checked here, before any output file is touched.
fn method_ctx(file: &FileConfig, flags: &MethodFlags) -> Result<MethodCtx> {
    let apply = |mut p: DcpParams| -> DcpParams {
        if let Some(v) = flags.omega {
            p.omega = v;
        }
        if let Some(v) = flags.patch {
            p.patch = v;
        }
        if let Some(v) = flags.t_floor {
            p.t_floor = v;
        }
        p
    };
    let dcp = apply(file.dcp.to_params());
    let udcp = apply(file.udcp.to_params());
    check_dcp(&dcp)?;
    check_dcp(&udcp)?;

    let he_bins = file.he.bins.unwrap_or(256);
    if he_bins < 2 {
        bail!("he bins must be at least 2, got {he_bins}");
    }
    let retinex_scales = file
        .retinex
        .scales
        .clone()
        .unwrap_or_else(|| DEFAULT_RETINEX_SCALES.to_vec());
    if retinex_scales.is_empty() || retinex_scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        bail!("retinex scales must be positive, got {retinex_scales:?}");
    }

    let checkpoint = pick_opt(flags.checkpoint.clone(), file.pauienet.checkpoint.clone());
    let net = match checkpoint {
        Some(path) => {
            let (store, cfg, _) =
                load_checkpoint(&path).with_context(|| format!("loading {}", path.display()))?;
            Some((store, cfg))
        }
        None => None,
    };
    Ok(MethodCtx {
        dcp,
        udcp,
        he_bins,
        retinex_scales,
        net,
    })
}

fn triple(name: &str, v: Option<Vec<f64>>, file: Option<[f64; 3]>, default: [f64; 3]) -> Result<[f64; 3]> {
    match v {
        Some(v) => <[f64; 3]>::try_from(v).map_err(|v| anyhow::anyhow!("--{name} needs 3 values, got {}", v.len())),
        None => Ok(file.unwrap_or(default)),
    }
}

fn run(cli: Cli) -> Result<usize> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = pick(cli.seed, file.seed, 0);

    match cli.cmd {
        Cmd::Enhance(c) => {
            let mut ctx = method_ctx(&file, &c.method)?;
            run_enhance(
                &EnhanceArgs {
                    data: c.data,
                    out: c.out,
                    method: c.method.method,
                    report: c.report,
                    depth_scale: pick(c.depth_scale, file.depth_scale, 1.0),
                },
                &mut ctx,
            )
        }
        Cmd::Estimate(c) => {
            let mut ctx = method_ctx(&file, &c.method)?;
            run_estimate(
                &EstimateArgs {
                    data: c.data,
                    out: c.out,
                    method: c.method.method,
                },
                &mut ctx,
            )
        }
        Cmd::Synth(c) => {
            let args = SynthArgs {
                clean: c.clean,
                depth: c.depth,
                out: c.out,
                beta: triple("beta", c.beta, file.synth.beta, [2.0, 0.8, 0.6])?,
                ambient: triple("ambient", c.ambient, file.synth.ambient, [0.45, 0.7, 0.8])?,
                jitter: pick(c.jitter, file.synth.jitter, 0.0),
                depth_scale: pick(c.depth_scale, file.depth_scale, 1.0),
                seed,
            };
            let written = run_synth(&args)?;
            println!("wrote {written} synthetic images to {}", args.out.display());
            Ok(0)
        }
        Cmd::Train(c) => {
            let t = &file.train;
            let d = TrainSchedule::default();
            let w = LossWeights::default();
            let net = match pick_opt(c.net, t.net.as_deref().map(parse_preset).transpose()?) {
                Some(p) => p,
                None => NetPreset::Full,
            };
            let args = TrainArgs {
                data: c.data,
                unlabeled: c.unlabeled,
                out: c.out,
                net,
                init_from: c.init_from,
                schedule: TrainSchedule {
                    warmup_iters: pick(c.warmup, t.warmup, d.warmup_iters),
                    total_iters: pick(c.iterations, t.iterations, d.total_iters),
                    sup_block: pick(c.sup_block, t.sup_block, d.sup_block),
                    unsup_block: pick(c.unsup_block, t.unsup_block, d.unsup_block),
                    lr: pick(c.lr, t.lr, d.lr),
                    batch: pick(c.batch, t.batch, d.batch),
                    alpha_range: (
                        pick(c.alpha_lo, t.alpha_lo, d.alpha_range.0),
                        pick(c.alpha_hi, t.alpha_hi, d.alpha_range.1),
                    ),
                },
                weights: LossWeights {
                    lambda1: pick(c.lambda1, t.lambda1, w.lambda1),
                    lambda2: pick(c.lambda2, t.lambda2, w.lambda2),
                    lambda3: pick(c.lambda3, t.lambda3, w.lambda3),
                    lambda_unsup: pick(c.lambda_unsup, t.lambda_unsup, w.lambda_unsup),
                },
                checkpoint_interval: pick(c.checkpoint_interval, t.checkpoint_interval, 0),
                seed,
            };
            let summary = run_train(&args)?;
            println!(
                "trained {} iterations, final loss {:.6}, {} checkpoint(s) in {}",
                summary.iterations,
                summary.final_loss,
                summary.checkpoints.len(),
                args.out.display()
            );
            Ok(0)
        }
        Cmd::Eval(c) => run_eval(&EvalArgs {
            enhanced: c.enhanced,
            reference: c.reference,
            depth: c.depth,
            out: c.out,
            depth_scale: pick(c.depth_scale, file.depth_scale, 1.0),
        }),
        Cmd::IngestCheck(c) => run_ingest_check(&IngestArgs {
            root: c.root,
            write: c.write,
        }),
    }
}

fn parse_preset(s: &str) -> Result<NetPreset> {
    NetPreset::from_str(s, true).map_err(|e| anyhow::anyhow!("net preset {s:?}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} item(s) failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
