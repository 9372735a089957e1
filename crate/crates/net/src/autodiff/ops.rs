//! Elementwise ops, reductions, broadcasts, and shape plumbing.
//!
//! Shape agreement between op arguments is a programming error, not a
//! runtime condition, so these assert rather than return Results; the
//! model layer validates user-facing dimensions before building graphs.

use ndarray::{ArrayD, Axis, IxDyn};

use super::graph::{Graph, Tensor};

impl Graph {
    pub fn add(&mut self, a: Tensor, b: Tensor) -> Tensor {
        let v = {
            let (pa, pb) = (self.value(a), self.value(b));
            assert_eq!(pa.shape(), pb.shape(), "add shapes");
            pa + pb
        };
        self.push(v, vec![a, b], Box::new(|ctx| {
            vec![Some(ctx.grad.clone()), Some(ctx.grad.clone())]
        }))
    }

    pub fn sub(&mut self, a: Tensor, b: Tensor) -> Tensor {
        let v = {
            let (pa, pb) = (self.value(a), self.value(b));
            assert_eq!(pa.shape(), pb.shape(), "sub shapes");
            pa - pb
        };
        self.push(v, vec![a, b], Box::new(|ctx| {
            vec![Some(ctx.grad.clone()), Some(ctx.grad.mapv(|g| -g))]
        }))
    }

    pub fn mul(&mut self, a: Tensor, b: Tensor) -> Tensor {
        let v = {
            let (pa, pb) = (self.value(a), self.value(b));
            assert_eq!(pa.shape(), pb.shape(), "mul shapes");
            pa * pb
        };
        self.push(v, vec![a, b], Box::new(|ctx| {
            vec![
                Some(ctx.grad * ctx.parents[1]),
                Some(ctx.grad * ctx.parents[0]),
            ]
        }))
    }

    pub fn div(&mut self, a: Tensor, b: Tensor) -> Tensor {
        let v = {
            let (pa, pb) = (self.value(a), self.value(b));
            assert_eq!(pa.shape(), pb.shape(), "div shapes");
            pa / pb
        };
        self.push(v, vec![a, b], Box::new(|ctx| {
            let db = ctx.needs[1].then(|| {
                let mut d = ctx.grad * ctx.parents[0];
                d.zip_mut_with(ctx.parents[1], |g, &b| *g = -*g / (b * b));
                d
            });
            vec![Some(ctx.grad / ctx.parents[1]), db]
        }))
    }

    /// y = k*x + c
    pub fn scalar_affine(&mut self, x: Tensor, k: f64, c: f64) -> Tensor {
        let v = self.value(x).mapv(|e| k * e + c);
        self.push(v, vec![x], Box::new(move |ctx| {
            vec![Some(ctx.grad.mapv(|g| g * k))]
        }))
    }

    pub fn add_scalar(&mut self, x: Tensor, c: f64) -> Tensor {
        self.scalar_affine(x, 1.0, c)
    }

    pub fn mul_scalar(&mut self, x: Tensor, k: f64) -> Tensor {
        self.scalar_affine(x, k, 0.0)
    }

    pub fn sigmoid(&mut self, x: Tensor) -> Tensor {
        let v = self.value(x).mapv(|e| 1.0 / (1.0 + (-e).exp()));
        self.push(v, vec![x], Box::new(|ctx| {
            let mut d = ctx.grad.clone();
            d.zip_mut_with(ctx.value, |g, &y| *g *= y * (1.0 - y));
            vec![Some(d)]
        }))
    }

    pub fn relu(&mut self, x: Tensor) -> Tensor {
        let v = self.value(x).mapv(|e| e.max(0.0));
        self.push(v, vec![x], Box::new(|ctx| {
            let mut d = ctx.grad.clone();
            d.zip_mut_with(ctx.parents[0], |g, &x| {
                if x <= 0.0 {
                    *g = 0.0;
                }
            });
            vec![Some(d)]
        }))
    }

    /// tanh-approximation GELU; smooth, so finite differences agree with
    /// the analytic derivative everywhere.
    pub fn gelu(&mut self, x: Tensor) -> Tensor {
        const K: f64 = 0.7978845608028654; // sqrt(2/pi)
        const C: f64 = 0.044715;
        let v = self
            .value(x)
            .mapv(|e| 0.5 * e * (1.0 + (K * (e + C * e * e * e)).tanh()));
        self.push(v, vec![x], Box::new(|ctx| {
            let mut d = ctx.grad.clone();
            d.zip_mut_with(ctx.parents[0], |g, &x| {
                let inner = K * (x + C * x * x * x);
                let t = inner.tanh();
                let sech2 = 1.0 - t * t;
                *g *= 0.5 * (1.0 + t) + 0.5 * x * sech2 * K * (1.0 + 3.0 * C * x * x);
            });
            vec![Some(d)]
        }))
    }

    /// max(x, lo); the gradient passes wherever x is not clamped.
    pub fn clamp_min(&mut self, x: Tensor, lo: f64) -> Tensor {
        let v = self.value(x).mapv(|e| e.max(lo));
        self.push(v, vec![x], Box::new(move |ctx| {
            let mut d = ctx.grad.clone();
            d.zip_mut_with(ctx.parents[0], |g, &x| {
                if x < lo {
                    *g = 0.0;
                }
            });
            vec![Some(d)]
        }))
    }

    pub fn mean_all(&mut self, x: Tensor) -> Tensor {
        let n = self.value(x).len() as f64;
        let m = self.value(x).iter().sum::<f64>() / n;
        let v = ArrayD::from_elem(IxDyn(&[]), m);
        self.push(v, vec![x], Box::new(move |ctx| {
            let g = ctx.grad[IxDyn(&[])] / n;
            vec![Some(ArrayD::from_elem(ctx.parents[0].raw_dim(), g))]
        }))
    }

    pub fn sum_all(&mut self, x: Tensor) -> Tensor {
        let s = self.value(x).iter().sum::<f64>();
        let v = ArrayD::from_elem(IxDyn(&[]), s);
        self.push(v, vec![x], Box::new(|ctx| {
            let g = ctx.grad[IxDyn(&[])];
            vec![Some(ArrayD::from_elem(ctx.parents[0].raw_dim(), g))]
        }))
    }

    /// (B, C, H, W) -> (C,): mean over batch and spatial positions.
    pub fn channel_mean(&mut self, x: Tensor) -> Tensor {
        let xv = self.value(x);
        assert_eq!(xv.ndim(), 4, "channel_mean wants NCHW");
        let (b, c, h, w) = dims4(xv);
        let denom = (b * h * w) as f64;
        let mut v = ArrayD::zeros(IxDyn(&[c]));
        for bi in 0..b {
            for ci in 0..c {
                for hi in 0..h {
                    for wi in 0..w {
                        v[IxDyn(&[ci])] += xv[IxDyn(&[bi, ci, hi, wi])];
                    }
                }
            }
        }
        v.mapv_inplace(|e| e / denom);
        self.push(v, vec![x], Box::new(move |ctx| {
            let mut d = ArrayD::zeros(ctx.parents[0].raw_dim());
            for bi in 0..b {
                for ci in 0..c {
                    let g = ctx.grad[IxDyn(&[ci])] / denom;
                    for hi in 0..h {
                        for wi in 0..w {
                            d[IxDyn(&[bi, ci, hi, wi])] = g;
                        }
                    }
                }
            }
            vec![Some(d)]
        }))
    }

    /// (B, C) -> (B, C, H, W), repeating over space.
    pub fn broadcast_spatial(&mut self, x: Tensor, h: usize, w: usize) -> Tensor {
        let xv = self.value(x);
        assert_eq!(xv.ndim(), 2, "broadcast_spatial wants (B, C)");
        let (b, c) = (xv.shape()[0], xv.shape()[1]);
        let mut v = ArrayD::zeros(IxDyn(&[b, c, h, w]));
        for bi in 0..b {
            for ci in 0..c {
                let e = xv[IxDyn(&[bi, ci])];
                for hi in 0..h {
                    for wi in 0..w {
                        v[IxDyn(&[bi, ci, hi, wi])] = e;
                    }
                }
            }
        }
        self.push(v, vec![x], Box::new(|ctx| {
            let s = ctx.grad.sum_axis(Axis(3)).sum_axis(Axis(2));
            vec![Some(s.into_dyn())]
        }))
    }

    /// Prepend a batch axis of size `b`, repeating the value. Used for
    /// positional embeddings and the learned Ambient token.
    pub fn broadcast_batch(&mut self, x: Tensor, b: usize) -> Tensor {
        let xv = self.value(x);
        let mut shape = vec![b];
        shape.extend_from_slice(xv.shape());
        let mut v = ArrayD::zeros(IxDyn(&shape));
        for bi in 0..b {
            v.index_axis_mut(Axis(0), bi).assign(xv);
        }
        self.push(v, vec![x], Box::new(|ctx| {
            vec![Some(ctx.grad.sum_axis(Axis(0)))]
        }))
    }

    pub fn reshape(&mut self, x: Tensor, shape: &[usize]) -> Tensor {
        let v = to_standard(self.value(x).clone())
            .into_shape_with_order(IxDyn(shape))
            .expect("reshape size mismatch");
        self.push(v, vec![x], Box::new(|ctx| {
            let d = to_standard(ctx.grad.clone())
                .into_shape_with_order(ctx.parents[0].raw_dim())
                .expect("reshape backward");
            vec![Some(d)]
        }))
    }

    pub fn permute(&mut self, x: Tensor, axes: &[usize]) -> Tensor {
        let axes_v = axes.to_vec();
        let v = self
            .value(x)
            .clone()
            .permuted_axes(IxDyn(&axes_v))
            .as_standard_layout()
            .to_owned();
        self.push(v, vec![x], Box::new(move |ctx| {
            let mut inverse = vec![0usize; axes_v.len()];
            for (i, &a) in axes_v.iter().enumerate() {
                inverse[a] = i;
            }
            let d = ctx
                .grad
                .clone()
                .permuted_axes(IxDyn(&inverse))
                .as_standard_layout()
                .to_owned();
            vec![Some(d)]
        }))
    }

    pub fn concat(&mut self, parts: &[Tensor], axis: usize) -> Tensor {
        assert!(!parts.is_empty());
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        // concatenate can hand back a non-standard layout; normalize so
        // later reshapes see contiguous memory.
        let v = to_standard(ndarray::concatenate(Axis(axis), &views).expect("concat shapes"));
        let sizes: Vec<usize> = parts.iter().map(|&p| self.value(p).shape()[axis]).collect();
        self.push(v, parts.to_vec(), Box::new(move |ctx| {
            let mut out = Vec::with_capacity(sizes.len());
            let mut start = 0;
            for &sz in &sizes {
                let slice = ctx
                    .grad
                    .slice_axis(Axis(axis), ndarray::Slice::from(start..start + sz))
                    .to_owned();
                out.push(Some(slice));
                start += sz;
            }
            out
        }))
    }

    pub fn slice_axis(&mut self, x: Tensor, axis: usize, start: usize, end: usize) -> Tensor {
        let v = self
            .value(x)
            .slice_axis(Axis(axis), ndarray::Slice::from(start..end))
            .to_owned();
        self.push(v, vec![x], Box::new(move |ctx| {
            let mut d = ArrayD::zeros(ctx.parents[0].raw_dim());
            d.slice_axis_mut(Axis(axis), ndarray::Slice::from(start..end))
                .assign(ctx.grad);
            vec![Some(d)]
        }))
    }
}

pub(crate) fn dims4(a: &ArrayD<f64>) -> (usize, usize, usize, usize) {
    let s = a.shape();
    assert_eq!(s.len(), 4);
    (s[0], s[1], s[2], s[3])
}

pub(crate) fn to_standard(a: ArrayD<f64>) -> ArrayD<f64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().to_owned()
    }
}
