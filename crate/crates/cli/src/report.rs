//! Report CSV: the metric columns plus an `error` column so per-image
//! failures land in the same file as the survivors. The header is
//! identical for every method; inapplicable cells stay empty. A final
//! `mean` row averages each column over the rows that populate it.

use std::path::Path;

use anyhow::{Context, Result};
use uie_metrics::{mean_report, MetricReport};

pub const REPORT_COLUMNS: [&str; 8] = [
    "image_id",
    "psnr",
    "ssim",
    "uiqm",
    "uciqe",
    "pcc",
    "angular_error_deg",
    "error",
];

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub metrics: MetricReport,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn ok(metrics: MetricReport) -> Self {
        ReportRow { metrics, error: None }
    }

    pub fn failed(image_id: impl Into<String>, error: impl Into<String>) -> Self {
        ReportRow {
            metrics: MetricReport::new(image_id),
            error: Some(error.into()),
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn record(m: &MetricReport, error: &str) -> [String; 8] {
    [
        m.image_id.clone(),
        cell(m.psnr),
        cell(m.ssim),
        cell(m.uiqm),
        cell(m.uciqe),
        cell(m.pcc),
        cell(m.angular_error_deg),
        error.to_string(),
    ]
}

pub fn write_report(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(REPORT_COLUMNS)?;
    for row in rows {
        w.write_record(record(&row.metrics, row.error.as_deref().unwrap_or("")))?;
    }
    let metrics: Vec<MetricReport> = rows.iter().map(|r| r.metrics.clone()).collect();
    w.write_record(record(&mean_report(&metrics), ""))?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}
