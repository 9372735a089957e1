//! `enhance`: run one method over a dataset, write the enhanced PNGs, and
//! report metrics. A failing image becomes an error row; the run keeps
//! going and the exit code reports that something was skipped.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use uie_metrics::{angular_error_deg, pcc_transmission, psnr, ssim, uciqe, uiqm, Channel, MetricReport};

use crate::io::{load_depth, load_image, save_image};
use crate::manifest::{load_or_ingest, DatasetManifest, ManifestEntry};
use crate::methods::{enhance_one, Method, MethodCtx};
use crate::report::{write_report, ReportRow};

pub struct EnhanceArgs {
    pub data: PathBuf,
    pub out: PathBuf,
    pub method: Method,
    /// Defaults to `<out>/report.csv`.
    pub report: Option<PathBuf>,
    pub depth_scale: f64,
}

fn process_entry(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
    ctx: &mut MethodCtx,
    method: Method,
    out_dir: &Path,
    depth_scale: f64,
) -> Result<MetricReport> {
    let degraded = load_image(&manifest.resolve(&entry.degraded))?;
    let outcome = enhance_one(ctx, method, &degraded)?;
    save_image(&out_dir.join(format!("{}.png", entry.id)), &outcome.enhanced)?;

    let mut m = MetricReport::new(&entry.id);
    m.uiqm = Some(uiqm(&outcome.enhanced)?);
    m.uciqe = Some(uciqe(&outcome.enhanced)?);
    if let Some(rel) = &entry.reference {
        let reference = load_image(&manifest.resolve(rel))?;
        m.psnr = Some(psnr(&outcome.enhanced, &reference)?);
        m.ssim = Some(ssim(&outcome.enhanced, &reference)?);
        m.angular_error_deg = Some(angular_error_deg(&outcome.enhanced, &reference)?);
    }
    if let (Some(rel), Some(t)) = (&entry.depth, &outcome.t) {
        let depth = load_depth(&manifest.resolve(rel), depth_scale)?;
        // e.g. constant depth has no defined correlation; that does not
        // invalidate the enhanced image
        match pcc_transmission(t, &depth, Channel::Red) {
            Ok(v) => m.pcc = Some(v),
            Err(e) => eprintln!("{}: pcc skipped: {e}", entry.id),
        }
    }
    Ok(m)
}

/// Returns the number of per-image failures.
pub fn run_enhance(args: &EnhanceArgs, ctx: &mut MethodCtx) -> Result<usize> {
    if args.method == Method::Pauienet && ctx.net.is_none() {
        anyhow::bail!("method pauienet requires --checkpoint");
    }
    let manifest = load_or_ingest(&args.data)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let mut rows = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        match process_entry(&manifest, entry, ctx, args.method, &args.out, args.depth_scale) {
            Ok(m) => rows.push(ReportRow::ok(m)),
            Err(e) => rows.push(ReportRow::failed(&entry.id, format!("{e:#}"))),
        }
    }

    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out.join("report.csv"));
    write_report(&report_path, &rows)?;
    Ok(rows.iter().filter(|r| r.error.is_some()).count())
}
