/// One evaluation row. Metrics that don't apply to a given method or
/// image (no reference, no depth, ...) stay `None` and serialise as empty
/// CSV cells rather than as a magic number.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    pub image_id: String,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub uiqm: Option<f64>,
    pub uciqe: Option<f64>,
    pub pcc: Option<f64>,
    pub angular_error_deg: Option<f64>,
}

pub const CSV_HEADER: &str = "image_id,psnr,ssim,uiqm,uciqe,pcc,angular_error_deg";

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => String::new(),
    }
}

impl MetricReport {
    pub fn new(image_id: impl Into<String>) -> Self {
        MetricReport {
            image_id: image_id.into(),
            ..Default::default()
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.image_id,
            cell(self.psnr),
            cell(self.ssim),
            cell(self.uiqm),
            cell(self.uciqe),
            cell(self.pcc),
            cell(self.angular_error_deg),
        )
    }

    fn fields(&self) -> [Option<f64>; 6] {
        [
            self.psnr,
            self.ssim,
            self.uiqm,
            self.uciqe,
            self.pcc,
            self.angular_error_deg,
        ]
    }
}

/// Column-wise mean over the rows where the metric is present. Columns
/// absent from every row stay empty in the mean row as well.
pub fn mean_report(rows: &[MetricReport]) -> MetricReport {
    let mut sums = [0.0f64; 6];
    let mut counts = [0usize; 6];
    for row in rows {
        for (k, v) in row.fields().into_iter().enumerate() {
            if let Some(x) = v {
                sums[k] += x;
                counts[k] += 1;
            }
        }
    }
    let at = |k: usize| (counts[k] > 0).then(|| sums[k] / counts[k] as f64);
    MetricReport {
        image_id: "mean".into(),
        psnr: at(0),
        ssim: at(1),
        uiqm: at(2),
        uciqe: at(3),
        pcc: at(4),
        angular_error_deg: at(5),
    }
}
