use uie_core::{DepthMap, TransmissionMaps};

use crate::error::{MetricError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Red,
    Green,
    Blue,
}

impl Channel {
    pub fn index(self) -> usize {
        match self {
            Channel::Red => 0,
            Channel::Green => 1,
            Channel::Blue => 2,
        }
    }
}

/// Pearson correlation between -ln(t) on one channel and scene depth.
///
/// Under exponential attenuation -ln(t) is proportional to depth, so a
/// transmission estimate that captures scene structure scores near 1.
/// Either side being constant makes the correlation undefined and is
/// reported as an error rather than as 0.
pub fn pcc_transmission(
    t: &TransmissionMaps,
    depth: &DepthMap,
    channel: Channel,
) -> Result<f64> {
    let td = t.data();
    let dd = depth.data();
    if (td.dim().0, td.dim().1) != dd.dim() {
        return Err(MetricError::DimensionMismatch(
            td.shape().to_vec(),
            dd.shape().to_vec(),
        ));
    }
    let c = channel.index();
    let xs: Vec<f64> = td.slice(ndarray::s![.., .., c]).iter().map(|&v| -v.ln()).collect();
    let ys: Vec<f64> = dd.iter().copied().collect();
    pearson(&xs, &ys)
}

fn is_constant(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    assert_eq!(xs.len(), ys.len());
    // check constancy on the raw values: mean subtraction leaves rounding
    // residue that would otherwise masquerade as tiny variance
    if is_constant(xs) || is_constant(ys) {
        return Err(MetricError::UndefinedCorrelation(
            "one of the series is constant".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::UndefinedCorrelation(
            "one of the series is constant".into(),
        ));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}
