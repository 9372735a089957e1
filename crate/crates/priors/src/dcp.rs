use ndarray::{Array2, Array3};
use uie_core::{AmbientLight, Image, TransmissionMaps, DEFAULT_T_FLOOR};

use crate::dark::dark_channel_raw;
use crate::error::{param, Result};
use crate::guided::guided_filter;

#[derive(Debug, Clone, PartialEq)]
pub struct DcpParams {
    pub patch: usize,
    pub omega: f64,
    /// Fraction of pixels (ranked by dark channel, brightest first) whose
    /// mean color becomes the ambient estimate.
    pub top_frac: f64,
    pub guided_radius: usize,
    pub guided_eps: f64,
    pub t_floor: f64,
}

impl Default for DcpParams {
    fn default() -> Self {
        // standard dehazing-literature values
        DcpParams {
            patch: 15,
            omega: 0.95,
            top_frac: 0.001,
            guided_radius: 40,
            guided_eps: 1e-3,
            t_floor: DEFAULT_T_FLOOR,
        }
    }
}

impl DcpParams {
    fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(param("omega", format!("must be in (0, 1], got {}", self.omega)));
        }
        if !(self.top_frac > 0.0 && self.top_frac <= 1.0) {
            return Err(param(
                "top_frac",
                format!("must be in (0, 1], got {}", self.top_frac),
            ));
        }
        if !(self.t_floor > 0.0 && self.t_floor < 1.0) {
            return Err(param(
                "t_floor",
                format!("must be in (0, 1), got {}", self.t_floor),
            ));
        }
        if !(self.guided_eps > 0.0) {
            return Err(param(
                "guided_eps",
                format!("must be positive, got {}", self.guided_eps),
            ));
        }
        Ok(())
    }
}

/// Transmission and ambient light recovered by a prior, plus anything
/// the estimator wants to warn about (e.g. a degenerate ambient color).
#[derive(Debug, Clone)]
pub struct PriorEstimate {
    pub t: TransmissionMaps,
    pub a: AmbientLight,
    pub method: String,
    pub flags: Vec<String>,
}

/// Classical dark-channel-prior estimate: ambient light from the haziest
/// pixels, transmission from the dark channel of the A-normalized image,
/// refined with a guided filter so the map follows image edges.
pub fn dcp_estimate(img: &Image, params: &DcpParams) -> Result<PriorEstimate> {
    estimate(img, params, &[0, 1, 2], "dcp")
}

/// Underwater variant: identical pipeline, but the dark channel ignores
/// the red channel, which underwater attenuation empties regardless of
/// scene content.
pub fn udcp_estimate(img: &Image, params: &DcpParams) -> Result<PriorEstimate> {
    estimate(img, params, &[1, 2], "udcp")
}

fn estimate(
    img: &Image,
    params: &DcpParams,
    channels: &[usize],
    method: &str,
) -> Result<PriorEstimate> {
    params.validate()?;
    let mut flags = Vec::new();

    let dc = dark_channel_raw(img.data(), params.patch, channels)?;
    let a = estimate_ambient(img, &dc, params.top_frac, &mut flags);

    // dark channel of I / A, reusing the channel subset
    let d = img.data();
    let (h, w, _) = d.dim();
    let normalized = Array3::from_shape_fn((h, w, 3), |(i, j, c)| d[(i, j, c)] / a[c]);
    let dc_norm = dark_channel_raw(&normalized, params.patch, channels)?;

    let raw_t = dc_norm.mapv(|v| (1.0 - params.omega * v).clamp(params.t_floor, 1.0));

    let guide = Array2::from_shape_fn((h, w), |(i, j)| {
        (d[(i, j, 0)] + d[(i, j, 1)] + d[(i, j, 2)]) / 3.0
    });
    let refined = guided_filter(&guide, &raw_t, params.guided_radius, params.guided_eps);
    let clamped = refined.mapv(|v| v.clamp(params.t_floor, 1.0));

    let t = TransmissionMaps::new(Array3::from_shape_fn((h, w, 3), |(i, j, _)| clamped[(i, j)]))?;
    Ok(PriorEstimate {
        t,
        a: AmbientLight::new(a)?,
        method: method.to_string(),
        flags,
    })
}

fn estimate_ambient(
    img: &Image,
    dc: &Array2<f64>,
    top_frac: f64,
    flags: &mut Vec<String>,
) -> [f64; 3] {
    let (h, w) = dc.dim();
    let n = h * w;
    let take = ((top_frac * n as f64).ceil() as usize).clamp(1, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        let dp = dc[(p / w, p % w)];
        let dq = dc[(q / w, q % w)];
        dq.partial_cmp(&dp).unwrap().then(p.cmp(&q))
    });

    let d = img.data();
    let mut a = [0.0f64; 3];
    for &p in &order[..take] {
        for (c, acc) in a.iter_mut().enumerate() {
            *acc += d[(p / w, p % w, c)];
        }
    }
    for (c, acc) in a.iter_mut().enumerate() {
        *acc /= take as f64;
        if *acc == 0.0 {
            *acc = 1e-6;
            flags.push(format!("ambient channel {c} was zero; capped to 1e-6"));
        }
    }
    a
}
