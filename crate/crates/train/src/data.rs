//! Sample carriers: labeled pairs and stacked minibatches.

use ndarray::{ArrayD, IxDyn};
use uie_core::Image;

use crate::error::{dim_err, Result};

/// A degraded image with its clean reference, shape-matched at construction.
#[derive(Debug, Clone)]
pub struct LabeledPair {
    degraded: Image,
    reference: Image,
}

impl LabeledPair {
    pub fn new(degraded: Image, reference: Image) -> Result<Self> {
        if degraded.height() != reference.height() || degraded.width() != reference.width() {
            return Err(dim_err(
                format!("{}x{}", degraded.height(), degraded.width()),
                format!("{}x{}", reference.height(), reference.width()),
            ));
        }
        Ok(Self { degraded, reference })
    }

    pub fn degraded(&self) -> &Image {
        &self.degraded
    }

    pub fn reference(&self) -> &Image {
        &self.reference
    }
}

fn stack(images: &[&Image]) -> Result<ArrayD<f64>> {
    let first = images.first().ok_or_else(|| dim_err("batch >= 1", "0"))?;
    let (h, w) = (first.height(), first.width());
    let mut out = ArrayD::zeros(IxDyn(&[images.len(), 3, h, w]));
    for (bi, img) in images.iter().enumerate() {
        if img.height() != h || img.width() != w {
            return Err(dim_err(
                format!("{h}x{w}"),
                format!("{}x{}", img.height(), img.width()),
            ));
        }
        let d = img.data();
        for i in 0..h {
            for j in 0..w {
                for c in 0..3 {
                    out[[bi, c, i, j]] = d[(i, j, c)];
                }
            }
        }
    }
    Ok(out)
}

/// One minibatch in network layout: a `(B, 3, H, W)` degraded tensor and,
/// for labeled batches only, a matching reference tensor. The unsupervised
/// path takes the degraded tensor alone, so it can never see a reference.
#[derive(Debug, Clone)]
pub struct BatchSample {
    degraded: ArrayD<f64>,
    reference: Option<ArrayD<f64>>,
}

impl BatchSample {
    pub fn labeled(pairs: &[&LabeledPair]) -> Result<Self> {
        let degraded: Vec<&Image> = pairs.iter().map(|p| p.degraded()).collect();
        let reference: Vec<&Image> = pairs.iter().map(|p| p.reference()).collect();
        Ok(Self {
            degraded: stack(&degraded)?,
            reference: Some(stack(&reference)?),
        })
    }

    pub fn unlabeled(images: &[&Image]) -> Result<Self> {
        Ok(Self {
            degraded: stack(images)?,
            reference: None,
        })
    }

    /// Wraps already-stacked `(B, 3, H, W)` tensors.
    pub fn from_arrays(degraded: ArrayD<f64>, reference: Option<ArrayD<f64>>) -> Result<Self> {
        let s = degraded.shape();
        if s.len() != 4 || s[1] != 3 || s[0] == 0 {
            return Err(dim_err("(B, 3, H, W) with B >= 1", format!("{s:?}")));
        }
        if let Some(r) = &reference {
            if r.shape() != s {
                return Err(dim_err(format!("{s:?}"), format!("{:?}", r.shape())));
            }
        }
        Ok(Self { degraded, reference })
    }

    pub fn degraded(&self) -> &ArrayD<f64> {
        &self.degraded
    }

    pub fn reference(&self) -> Option<&ArrayD<f64>> {
        self.reference.as_ref()
    }

    pub fn is_labeled(&self) -> bool {
        self.reference.is_some()
    }

    pub fn batch_len(&self) -> usize {
        self.degraded.shape()[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(h: usize, w: usize, v: f64) -> Image {
        Image::constant(h, w, [v, v, v]).unwrap()
    }

    #[test]
    fn labeled_pairs_must_match_shapes() {
        assert!(LabeledPair::new(img(4, 4, 0.2), img(4, 4, 0.8)).is_ok());
        assert!(LabeledPair::new(img(4, 4, 0.2), img(4, 5, 0.8)).is_err());
    }

    #[test]
    fn batches_stack_in_network_layout() {
        let p1 = LabeledPair::new(img(2, 3, 0.25), img(2, 3, 0.75)).unwrap();
        let p2 = LabeledPair::new(img(2, 3, 0.5), img(2, 3, 1.0)).unwrap();
        let b = BatchSample::labeled(&[&p1, &p2]).unwrap();
        assert!(b.is_labeled());
        assert_eq!(b.batch_len(), 2);
        assert_eq!(b.degraded().shape(), &[2, 3, 2, 3]);
        assert_eq!(b.degraded()[[0, 0, 0, 0]], 0.25);
        assert_eq!(b.degraded()[[1, 2, 1, 2]], 0.5);
        assert_eq!(b.reference().unwrap()[[1, 1, 0, 0]], 1.0);

        let u = BatchSample::unlabeled(&[p1.degraded()]).unwrap();
        assert!(!u.is_labeled());
        assert!(u.reference().is_none());

        assert!(BatchSample::unlabeled(&[]).is_err());
        let odd = img(3, 3, 0.1);
        assert!(BatchSample::unlabeled(&[p1.degraded(), &odd]).is_err());
    }
}
