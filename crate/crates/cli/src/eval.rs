//! `eval`: standalone metric computation over an enhanced directory and a
//! reference directory, paired by stem. With a depth directory, rows gain
//! transmission/depth correlation wherever the enhanced directory also
//! holds an `<id>_t.png` map (as written by `estimate`). Unmatched files
//! become error rows; the run continues.

use std::path::PathBuf;

use anyhow::{Context, Result};
use ndarray::Array3;
use uie_core::TransmissionMaps;
use uie_metrics::{angular_error_deg, pcc_transmission, psnr, ssim, uciqe, uiqm, Channel, MetricReport};

use crate::io::{load_depth, load_image};
use crate::manifest::scan;
use crate::report::{write_report, ReportRow};

pub struct EvalArgs {
    pub enhanced: PathBuf,
    pub reference: PathBuf,
    pub depth: Option<PathBuf>,
    pub out: PathBuf,
    pub depth_scale: f64,
}

/// An 8-bit transmission visualization read back as maps; zero pixels are
/// lifted to half a quantization step since transmission must stay
/// positive.
fn tmap_from_file(path: &std::path::Path) -> Result<TransmissionMaps> {
    let img = load_image(path)?;
    let lifted: Array3<f64> = img.data().mapv(|v| v.max(0.5 / 255.0));
    TransmissionMaps::new(lifted).context("interpreting transmission image")
}

/// Returns the number of error rows.
pub fn run_eval(args: &EvalArgs) -> Result<usize> {
    let mut issues = Vec::new();
    let enhanced = scan(&args.enhanced, &mut issues)?;
    let mut references = scan(&args.reference, &mut issues)?;
    let depths = match &args.depth {
        Some(dir) => scan(dir, &mut issues)?,
        None => Default::default(),
    };
    for issue in &issues {
        eprintln!("warning: {issue}");
    }

    let mut rows = Vec::new();
    for (stem, path) in &enhanced {
        // side outputs of `estimate` are not images under evaluation
        if stem.ends_with("_t") || stem.ends_with("_a") {
            continue;
        }
        let Some(ref_path) = references.remove(stem) else {
            rows.push(ReportRow::failed(stem, "no reference counterpart"));
            continue;
        };
        let row = (|| -> Result<MetricReport> {
            let img = load_image(path)?;
            let reference = load_image(&ref_path)?;
            let mut m = MetricReport::new(stem);
            m.psnr = Some(psnr(&img, &reference)?);
            m.ssim = Some(ssim(&img, &reference)?);
            m.angular_error_deg = Some(angular_error_deg(&img, &reference)?);
            m.uiqm = Some(uiqm(&img)?);
            m.uciqe = Some(uciqe(&img)?);
            if let Some(depth_path) = depths.get(stem) {
                if let Some(t_path) = enhanced.get(&format!("{stem}_t")) {
                    let t = tmap_from_file(t_path)?;
                    let d = load_depth(depth_path, args.depth_scale)?;
                    match pcc_transmission(&t, &d, Channel::Red) {
                        Ok(v) => m.pcc = Some(v),
                        Err(e) => eprintln!("{stem}: pcc skipped: {e}"),
                    }
                }
            }
            Ok(m)
        })();
        match row {
            Ok(m) => rows.push(ReportRow::ok(m)),
            Err(e) => rows.push(ReportRow::failed(stem, format!("{e:#}"))),
        }
    }
    for (stem, _) in references {
        rows.push(ReportRow::failed(&stem, "no enhanced counterpart"));
    }

    write_report(&args.out, &rows)?;
    Ok(rows.iter().filter(|r| r.error.is_some()).count())
}
