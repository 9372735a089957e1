//! Spatial ops: convolution (im2col + GEMM), pooling, resize, batch norm.

use ndarray::{Array2, ArrayD, Axis, IxDyn};

use super::graph::{Graph, Tensor};
use super::ops::dims4;

const BN_EPS: f64 = 1e-5;

/// Unfold NCHW input into (B*H*W, Cin*k*k) patch rows for a stride-1
/// convolution with symmetric zero padding.
fn im2col(x: &ArrayD<f64>, kh: usize, kw: usize, pad: usize) -> Array2<f64> {
    let (b, c, h, w) = dims4(x);
    let mut cols = Array2::zeros((b * h * w, c * kh * kw));
    for bi in 0..b {
        for ho in 0..h {
            for wo in 0..w {
                let r = (bi * h + ho) * w + wo;
                for ci in 0..c {
                    for ki in 0..kh {
                        let hi = (ho + ki).wrapping_sub(pad);
                        if hi >= h {
                            continue;
                        }
                        for kj in 0..kw {
                            let wi = (wo + kj).wrapping_sub(pad);
                            if wi >= w {
                                continue;
                            }
                            cols[(r, (ci * kh + ki) * kw + kj)] =
                                x[IxDyn(&[bi, ci, hi, wi])];
                        }
                    }
                }
            }
        }
    }
    cols
}

fn col2im(dcols: &Array2<f64>, shape: &[usize], kh: usize, kw: usize, pad: usize) -> ArrayD<f64> {
    let (b, c, h, w) = (shape[0], shape[1], shape[2], shape[3]);
    let mut dx = ArrayD::zeros(IxDyn(shape));
    for bi in 0..b {
        for ho in 0..h {
            for wo in 0..w {
                let r = (bi * h + ho) * w + wo;
                for ci in 0..c {
                    for ki in 0..kh {
                        let hi = (ho + ki).wrapping_sub(pad);
                        if hi >= h {
                            continue;
                        }
                        for kj in 0..kw {
                            let wi = (wo + kj).wrapping_sub(pad);
                            if wi >= w {
                                continue;
                            }
                            dx[IxDyn(&[bi, ci, hi, wi])] += dcols[(r, (ci * kh + ki) * kw + kj)];
                        }
                    }
                }
            }
        }
    }
    dx
}

impl Graph {
    /// Stride-1 convolution, `pad = k/2` gives same-size output. Weights
    /// are (Cout, Cin, kh, kw); patch rows are rebuilt during backward
    /// instead of cached, trading a little compute for memory.
    pub fn conv2d(&mut self, x: Tensor, w: Tensor, b: Tensor, pad: usize) -> Tensor {
        let v = {
            let xv = self.value(x);
            let wv = self.value(w);
            let bv = self.value(b);
            let (nb, cin, h, wd) = dims4(xv);
            let ws = wv.shape();
            let (cout, kh, kw) = (ws[0], ws[2], ws[3]);
            assert_eq!(ws[1], cin, "conv2d channel mismatch");
            assert_eq!(bv.len(), cout, "conv2d bias width");
            let cols = im2col(xv, kh, kw, pad);
            let w_mat = wv
                .view()
                .into_shape_with_order((cout, cin * kh * kw))
                .unwrap();
            let out_mat = cols.dot(&w_mat.t()); // (B*H*W, Cout)
            let mut out = ArrayD::zeros(IxDyn(&[nb, cout, h, wd]));
            for bi in 0..nb {
                for ho in 0..h {
                    for wo in 0..wd {
                        let r = (bi * h + ho) * wd + wo;
                        for co in 0..cout {
                            out[IxDyn(&[bi, co, ho, wo])] = out_mat[(r, co)] + bv[IxDyn(&[co])];
                        }
                    }
                }
            }
            out
        };
        self.push(v, vec![x, w, b], Box::new(move |ctx| {
            let xv = ctx.parents[0];
            let wv = ctx.parents[1];
            let (nb, cin, h, wd) = dims4(xv);
            let ws = wv.shape();
            let (cout, kh, kw) = (ws[0], ws[2], ws[3]);
            let mut g_mat = Array2::zeros((nb * h * wd, cout));
            for bi in 0..nb {
                for ho in 0..h {
                    for wo in 0..wd {
                        let r = (bi * h + ho) * wd + wo;
                        for co in 0..cout {
                            g_mat[(r, co)] = ctx.grad[IxDyn(&[bi, co, ho, wo])];
                        }
                    }
                }
            }
            let w_mat = wv
                .view()
                .into_shape_with_order((cout, cin * kh * kw))
                .unwrap();
            let dx = ctx.needs[0].then(|| {
                let dcols = g_mat.dot(&w_mat);
                col2im(&dcols, xv.shape(), kh, kw, pad)
            });
            let dw = ctx.needs[1].then(|| {
                let cols = im2col(xv, kh, kw, pad);
                let dwm = g_mat.t().dot(&cols); // (Cout, Cin*kh*kw)
                dwm.into_shape_with_order(IxDyn(&[cout, cin, kh, kw]))
                    .unwrap()
            });
            let db = ctx.needs[2].then(|| g_mat.sum_axis(Axis(0)).into_dyn());
            vec![dx, dw, db]
        }))
    }

    /// 2x2 max pooling with stride 2; spatial dims must be even.
    pub fn maxpool2x2(&mut self, x: Tensor) -> Tensor {
        let (v, argmax) = {
            let xv = self.value(x);
            let (b, c, h, w) = dims4(xv);
            assert!(h % 2 == 0 && w % 2 == 0, "maxpool2x2 needs even dims");
            let (oh, ow) = (h / 2, w / 2);
            let mut out = ArrayD::zeros(IxDyn(&[b, c, oh, ow]));
            let mut arg = vec![0u8; b * c * oh * ow];
            let mut pos = 0usize;
            for bi in 0..b {
                for ci in 0..c {
                    for ho in 0..oh {
                        for wo in 0..ow {
                            let mut best = f64::NEG_INFINITY;
                            let mut which = 0u8;
                            for (k, (dy, dx)) in
                                [(0, 0), (0, 1), (1, 0), (1, 1)].iter().enumerate()
                            {
                                let val = xv[IxDyn(&[bi, ci, 2 * ho + dy, 2 * wo + dx])];
                                if val > best {
                                    best = val;
                                    which = k as u8;
                                }
                            }
                            out[IxDyn(&[bi, ci, ho, wo])] = best;
                            arg[pos] = which;
                            pos += 1;
                        }
                    }
                }
            }
            (out, arg)
        };
        self.push(v, vec![x], Box::new(move |ctx| {
            let (b, c, h, w) = dims4(ctx.parents[0]);
            let (oh, ow) = (h / 2, w / 2);
            let mut d = ArrayD::zeros(ctx.parents[0].raw_dim());
            let mut pos = 0usize;
            for bi in 0..b {
                for ci in 0..c {
                    for ho in 0..oh {
                        for wo in 0..ow {
                            let k = argmax[pos] as usize;
                            pos += 1;
                            let (dy, dx) = (k / 2, k % 2);
                            d[IxDyn(&[bi, ci, 2 * ho + dy, 2 * wo + dx])] +=
                                ctx.grad[IxDyn(&[bi, ci, ho, wo])];
                        }
                    }
                }
            }
            vec![Some(d)]
        }))
    }

    /// Non-overlapping k x k average pooling; dims must divide evenly.
    pub fn avgpool(&mut self, x: Tensor, k: usize) -> Tensor {
        let v = {
            let xv = self.value(x);
            let (b, c, h, w) = dims4(xv);
            assert!(h % k == 0 && w % k == 0, "avgpool window must tile input");
            let (oh, ow) = (h / k, w / k);
            let scale = 1.0 / (k * k) as f64;
            let mut out = ArrayD::zeros(IxDyn(&[b, c, oh, ow]));
            for bi in 0..b {
                for ci in 0..c {
                    for ho in 0..oh {
                        for wo in 0..ow {
                            let mut s = 0.0;
                            for dy in 0..k {
                                for dx in 0..k {
                                    s += xv[IxDyn(&[bi, ci, k * ho + dy, k * wo + dx])];
                                }
                            }
                            out[IxDyn(&[bi, ci, ho, wo])] = s * scale;
                        }
                    }
                }
            }
            out
        };
        self.push(v, vec![x], Box::new(move |ctx| {
            let (b, c, h, w) = dims4(ctx.parents[0]);
            let (oh, ow) = (h / k, w / k);
            let scale = 1.0 / (k * k) as f64;
            let mut d = ArrayD::zeros(ctx.parents[0].raw_dim());
            for bi in 0..b {
                for ci in 0..c {
                    for ho in 0..oh {
                        for wo in 0..ow {
                            let g = ctx.grad[IxDyn(&[bi, ci, ho, wo])] * scale;
                            for dy in 0..k {
                                for dx in 0..k {
                                    d[IxDyn(&[bi, ci, k * ho + dy, k * wo + dx])] += g;
                                }
                            }
                        }
                    }
                }
            }
            vec![Some(d)]
        }))
    }

    /// (B, C, H, W) -> (B, C) spatial mean.
    pub fn global_avg_pool(&mut self, x: Tensor) -> Tensor {
        let v = {
            let xv = self.value(x);
            let (b, c, h, w) = dims4(xv);
            let scale = 1.0 / (h * w) as f64;
            let mut out = ArrayD::zeros(IxDyn(&[b, c]));
            for bi in 0..b {
                for ci in 0..c {
                    let mut s = 0.0;
                    for hi in 0..h {
                        for wi in 0..w {
                            s += xv[IxDyn(&[bi, ci, hi, wi])];
                        }
                    }
                    out[IxDyn(&[bi, ci])] = s * scale;
                }
            }
            out
        };
        self.push(v, vec![x], Box::new(|ctx| {
            let (b, c, h, w) = dims4(ctx.parents[0]);
            let scale = 1.0 / (h * w) as f64;
            let mut d = ArrayD::zeros(ctx.parents[0].raw_dim());
            for bi in 0..b {
                for ci in 0..c {
                    let g = ctx.grad[IxDyn(&[bi, ci])] * scale;
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

    /// Bilinear resize with half-pixel centers, matching the rest of the
    /// toolkit's resampling convention.
    pub fn bilinear_resize(&mut self, x: Tensor, oh: usize, ow: usize) -> Tensor {
        fn taps(o: usize, out_len: usize, in_len: usize) -> (usize, usize, f64) {
            let src = (o as f64 + 0.5) * in_len as f64 / out_len as f64 - 0.5;
            let src = src.clamp(0.0, (in_len - 1) as f64);
            let i0 = src.floor() as usize;
            let i1 = (i0 + 1).min(in_len - 1);
            (i0, i1, src - i0 as f64)
        }
        let v = {
            let xv = self.value(x);
            let (b, c, h, w) = dims4(xv);
            let mut out = ArrayD::zeros(IxDyn(&[b, c, oh, ow]));
            for ho in 0..oh {
                let (y0, y1, fy) = taps(ho, oh, h);
                for wo in 0..ow {
                    let (x0, x1, fx) = taps(wo, ow, w);
                    for bi in 0..b {
                        for ci in 0..c {
                            let a = xv[IxDyn(&[bi, ci, y0, x0])];
                            let bb = xv[IxDyn(&[bi, ci, y0, x1])];
                            let cc = xv[IxDyn(&[bi, ci, y1, x0])];
                            let dd = xv[IxDyn(&[bi, ci, y1, x1])];
                            let top = a + (bb - a) * fx;
                            let bot = cc + (dd - cc) * fx;
                            out[IxDyn(&[bi, ci, ho, wo])] = top + (bot - top) * fy;
                        }
                    }
                }
            }
            out
        };
        self.push(v, vec![x], Box::new(move |ctx| {
            let (b, c, h, w) = dims4(ctx.parents[0]);
            let mut d = ArrayD::zeros(ctx.parents[0].raw_dim());
            for ho in 0..oh {
                let (y0, y1, fy) = taps(ho, oh, h);
                for wo in 0..ow {
                    let (x0, x1, fx) = taps(wo, ow, w);
                    let w00 = (1.0 - fy) * (1.0 - fx);
                    let w01 = (1.0 - fy) * fx;
                    let w10 = fy * (1.0 - fx);
                    let w11 = fy * fx;
                    for bi in 0..b {
                        for ci in 0..c {
                            let g = ctx.grad[IxDyn(&[bi, ci, ho, wo])];
                            d[IxDyn(&[bi, ci, y0, x0])] += g * w00;
                            d[IxDyn(&[bi, ci, y0, x1])] += g * w01;
                            d[IxDyn(&[bi, ci, y1, x0])] += g * w10;
                            d[IxDyn(&[bi, ci, y1, x1])] += g * w11;
                        }
                    }
                }
            }
            vec![Some(d)]
        }))
    }

    /// Multiply one channel of an NCHW tensor by a per-sample (B,) scalar.
    pub fn scale_channel(&mut self, x: Tensor, s: Tensor, channel: usize) -> Tensor {
        let v = {
            let xv = self.value(x);
            let sv = self.value(s);
            let (b, c, h, w) = dims4(xv);
            assert!(channel < c);
            assert_eq!(sv.shape(), [b], "scale vector must be (B,)");
            let mut out = xv.clone();
            for bi in 0..b {
                let k = sv[IxDyn(&[bi])];
                for hi in 0..h {
                    for wi in 0..w {
                        out[IxDyn(&[bi, channel, hi, wi])] *= k;
                    }
                }
            }
            out
        };
        self.push(v, vec![x, s], Box::new(move |ctx| {
            let xv = ctx.parents[0];
            let sv = ctx.parents[1];
            let (b, _, h, w) = dims4(xv);
            let dx = ctx.needs[0].then(|| {
                let mut d = ctx.grad.clone();
                for bi in 0..b {
                    let k = sv[IxDyn(&[bi])];
                    for hi in 0..h {
                        for wi in 0..w {
                            d[IxDyn(&[bi, channel, hi, wi])] *= k;
                        }
                    }
                }
                d
            });
            let ds = ctx.needs[1].then(|| {
                let mut d = ArrayD::zeros(IxDyn(&[b]));
                for bi in 0..b {
                    let mut acc = 0.0;
                    for hi in 0..h {
                        for wi in 0..w {
                            acc += ctx.grad[IxDyn(&[bi, channel, hi, wi])]
                                * xv[IxDyn(&[bi, channel, hi, wi])];
                        }
                    }
                    d[IxDyn(&[bi])] = acc;
                }
                d
            });
            vec![dx, ds]
        }))
    }

    /// Batch norm in training mode: normalizes with batch statistics and
    /// reports the per-channel mean and biased variance so the caller can
    /// maintain running estimates outside the graph.
    pub fn batch_norm_train(
        &mut self,
        x: Tensor,
        gamma: Tensor,
        beta: Tensor,
    ) -> (Tensor, Vec<f64>, Vec<f64>) {
        let (v, mean, var) = {
            let xv = self.value(x);
            let gv = self.value(gamma);
            let bv = self.value(beta);
            let (b, c, h, w) = dims4(xv);
            assert_eq!(gv.len(), c);
            assert_eq!(bv.len(), c);
            let n = (b * h * w) as f64;
            let mut mean = vec![0.0; c];
            let mut var = vec![0.0; c];
            for ci in 0..c {
                let mut s = 0.0;
                for bi in 0..b {
                    for hi in 0..h {
                        for wi in 0..w {
                            s += xv[IxDyn(&[bi, ci, hi, wi])];
                        }
                    }
                }
                mean[ci] = s / n;
                let mut q = 0.0;
                for bi in 0..b {
                    for hi in 0..h {
                        for wi in 0..w {
                            let d = xv[IxDyn(&[bi, ci, hi, wi])] - mean[ci];
                            q += d * d;
                        }
                    }
                }
                var[ci] = q / n;
            }
            let mut out = xv.clone();
            for ci in 0..c {
                let inv = 1.0 / (var[ci] + BN_EPS).sqrt();
                let (g, be) = (gv[IxDyn(&[ci])], bv[IxDyn(&[ci])]);
                let mu = mean[ci];
                for bi in 0..b {
                    for hi in 0..h {
                        for wi in 0..w {
                            let e = &mut out[IxDyn(&[bi, ci, hi, wi])];
                            *e = (*e - mu) * inv * g + be;
                        }
                    }
                }
            }
            (out, mean, var)
        };
        let (mean_c, var_c) = (mean.clone(), var.clone());
        let t = self.push(v, vec![x, gamma, beta], Box::new(move |ctx| {
            let xv = ctx.parents[0];
            let gv = ctx.parents[1];
            let (b, c, h, w) = dims4(xv);
            let n = (b * h * w) as f64;
            let mut dx = ctx.needs[0].then(|| ArrayD::zeros(xv.raw_dim()));
            let mut dg = ctx.needs[1].then(|| ArrayD::zeros(IxDyn(&[c])));
            let mut db = ctx.needs[2].then(|| ArrayD::zeros(IxDyn(&[c])));
            for ci in 0..c {
                let mu = mean_c[ci];
                let inv = 1.0 / (var_c[ci] + BN_EPS).sqrt();
                let mut sum_g = 0.0;
                let mut sum_g_xhat = 0.0;
                for bi in 0..b {
                    for hi in 0..h {
                        for wi in 0..w {
                            let g = ctx.grad[IxDyn(&[bi, ci, hi, wi])];
                            let xhat = (xv[IxDyn(&[bi, ci, hi, wi])] - mu) * inv;
                            sum_g += g;
                            sum_g_xhat += g * xhat;
                        }
                    }
                }
                if let Some(dg) = dg.as_mut() {
                    dg[IxDyn(&[ci])] = sum_g_xhat;
                }
                if let Some(db) = db.as_mut() {
                    db[IxDyn(&[ci])] = sum_g;
                }
                if let Some(dx) = dx.as_mut() {
                    let gam = gv[IxDyn(&[ci])];
                    for bi in 0..b {
                        for hi in 0..h {
                            for wi in 0..w {
                                let g = ctx.grad[IxDyn(&[bi, ci, hi, wi])];
                                let xhat = (xv[IxDyn(&[bi, ci, hi, wi])] - mu) * inv;
                                dx[IxDyn(&[bi, ci, hi, wi])] = gam * inv / n
                                    * (n * g - sum_g - xhat * sum_g_xhat);
                            }
                        }
                    }
                }
            }
            vec![dx, dg, db]
        }));
        (t, mean, var)
    }

    /// Batch norm in eval mode: a per-channel affine transform using the
    /// stored running statistics.
    pub fn batch_norm_eval(
        &mut self,
        x: Tensor,
        gamma: Tensor,
        beta: Tensor,
        running_mean: &[f64],
        running_var: &[f64],
    ) -> Tensor {
        let (mean, var) = (running_mean.to_vec(), running_var.to_vec());
        let v = {
            let xv = self.value(x);
            let gv = self.value(gamma);
            let bv = self.value(beta);
            let (b, c, h, w) = dims4(xv);
            assert_eq!(mean.len(), c);
            assert_eq!(var.len(), c);
            let mut out = xv.clone();
            for ci in 0..c {
                let inv = 1.0 / (var[ci] + BN_EPS).sqrt();
                let (g, be) = (gv[IxDyn(&[ci])], bv[IxDyn(&[ci])]);
                for bi in 0..b {
                    for hi in 0..h {
                        for wi in 0..w {
                            let e = &mut out[IxDyn(&[bi, ci, hi, wi])];
                            *e = (*e - mean[ci]) * inv * g + be;
                        }
                    }
                }
            }
            out
        };
        self.push(v, vec![x, gamma, beta], Box::new(move |ctx| {
            let xv = ctx.parents[0];
            let gv = ctx.parents[1];
            let (b, c, h, w) = dims4(xv);
            let mut dx = ctx.needs[0].then(|| ArrayD::zeros(xv.raw_dim()));
            let mut dg = ctx.needs[1].then(|| ArrayD::zeros(IxDyn(&[c])));
            let mut db = ctx.needs[2].then(|| ArrayD::zeros(IxDyn(&[c])));
            for ci in 0..c {
                let inv = 1.0 / (var[ci] + BN_EPS).sqrt();
                let gam = gv[IxDyn(&[ci])];
                for bi in 0..b {
                    for hi in 0..h {
                        for wi in 0..w {
                            let g = ctx.grad[IxDyn(&[bi, ci, hi, wi])];
                            if let Some(dx) = dx.as_mut() {
                                dx[IxDyn(&[bi, ci, hi, wi])] = g * gam * inv;
                            }
                            if let Some(dg) = dg.as_mut() {
                                dg[IxDyn(&[ci])] +=
                                    g * (xv[IxDyn(&[bi, ci, hi, wi])] - mean[ci]) * inv;
                            }
                            if let Some(db) = db.as_mut() {
                                db[IxDyn(&[ci])] += g;
                            }
                        }
                    }
                }
            }
            vec![dx, dg, db]
        }))
    }
}
