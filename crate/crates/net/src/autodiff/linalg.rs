//! Dense algebra: matmul, batched matmul, bias, layer norm, softmax.

use ndarray::{ArrayD, Axis, Ix2, Ix3, IxDyn};

use super::graph::{Graph, Tensor};

const LN_EPS: f64 = 1e-5;

impl Graph {
    /// (M, K) x (K, N) -> (M, N)
    pub fn matmul(&mut self, a: Tensor, b: Tensor) -> Tensor {
        let v = {
            let av = self.value(a).view().into_dimensionality::<Ix2>().unwrap();
            let bv = self.value(b).view().into_dimensionality::<Ix2>().unwrap();
            assert_eq!(av.shape()[1], bv.shape()[0], "matmul inner dims");
            av.dot(&bv).into_dyn()
        };
        self.push(v, vec![a, b], Box::new(|ctx| {
            let g = ctx.grad.view().into_dimensionality::<Ix2>().unwrap();
            let av = ctx.parents[0].view().into_dimensionality::<Ix2>().unwrap();
            let bv = ctx.parents[1].view().into_dimensionality::<Ix2>().unwrap();
            let da = ctx.needs[0].then(|| g.dot(&bv.t()).into_dyn());
            let db = ctx.needs[1].then(|| av.t().dot(&g).into_dyn());
            vec![da, db]
        }))
    }

    /// (B, M, K) x (B, K, N) -> (B, M, N)
    pub fn bmm(&mut self, a: Tensor, b: Tensor) -> Tensor {
        let v = {
            let av = self.value(a).view().into_dimensionality::<Ix3>().unwrap();
            let bv = self.value(b).view().into_dimensionality::<Ix3>().unwrap();
            assert_eq!(av.shape()[0], bv.shape()[0], "bmm batch");
            assert_eq!(av.shape()[2], bv.shape()[1], "bmm inner dims");
            let (nb, m, n) = (av.shape()[0], av.shape()[1], bv.shape()[2]);
            let mut out = ArrayD::zeros(IxDyn(&[nb, m, n]));
            for i in 0..nb {
                let prod = av.index_axis(Axis(0), i).dot(&bv.index_axis(Axis(0), i));
                out.index_axis_mut(Axis(0), i)
                    .assign(&prod.into_dyn());
            }
            out
        };
        self.push(v, vec![a, b], Box::new(|ctx| {
            let g = ctx.grad.view().into_dimensionality::<Ix3>().unwrap();
            let av = ctx.parents[0].view().into_dimensionality::<Ix3>().unwrap();
            let bv = ctx.parents[1].view().into_dimensionality::<Ix3>().unwrap();
            let nb = av.shape()[0];
            let da = ctx.needs[0].then(|| {
                let mut d = ArrayD::zeros(ctx.parents[0].raw_dim());
                for i in 0..nb {
                    let p = g.index_axis(Axis(0), i).dot(&bv.index_axis(Axis(0), i).t());
                    d.index_axis_mut(Axis(0), i).assign(&p.into_dyn());
                }
                d
            });
            let db = ctx.needs[1].then(|| {
                let mut d = ArrayD::zeros(ctx.parents[1].raw_dim());
                for i in 0..nb {
                    let p = av.index_axis(Axis(0), i).t().dot(&g.index_axis(Axis(0), i));
                    d.index_axis_mut(Axis(0), i).assign(&p.into_dyn());
                }
                d
            });
            vec![da, db]
        }))
    }

    /// Add a (F,) bias to every lane along the last axis.
    pub fn add_bias_rows(&mut self, x: Tensor, bias: Tensor) -> Tensor {
        let v = {
            let xv = self.value(x);
            let bv = self.value(bias);
            assert_eq!(bv.ndim(), 1, "bias must be rank 1");
            assert_eq!(
                xv.shape().last(),
                bv.shape().first(),
                "bias width vs last axis"
            );
            let b1 = bv.view().into_dimensionality::<ndarray::Ix1>().unwrap();
            let mut out = xv.clone();
            for mut row in out.rows_mut() {
                row += &b1;
            }
            out
        };
        self.push(v, vec![x, bias], Box::new(|ctx| {
            let db = ctx.needs[1].then(|| {
                let mut d = ctx.grad.clone();
                while d.ndim() > 1 {
                    d = d.sum_axis(Axis(0));
                }
                d
            });
            vec![Some(ctx.grad.clone()), db]
        }))
    }

    /// x @ w + b where x is (..., IN) and w is (IN, OUT).
    pub fn linear(&mut self, x: Tensor, w: Tensor, b: Tensor) -> Tensor {
        let xshape = self.value(x).shape().to_vec();
        let (input, output) = {
            let ws = self.value(w).shape();
            (ws[0], ws[1])
        };
        assert_eq!(*xshape.last().unwrap(), input, "linear input width");
        let rows: usize = xshape[..xshape.len() - 1].iter().product();
        let flat = self.reshape(x, &[rows, input]);
        let prod = self.matmul(flat, w);
        let mut out_shape = xshape[..xshape.len() - 1].to_vec();
        out_shape.push(output);
        let shaped = self.reshape(prod, &out_shape);
        self.add_bias_rows(shaped, b)
    }

    /// Layer norm over the last axis with learned scale and shift.
    pub fn layer_norm(&mut self, x: Tensor, gamma: Tensor, beta: Tensor) -> Tensor {
        let v = {
            let xv = self.value(x);
            let gv = self.value(gamma).view().into_dimensionality::<ndarray::Ix1>().unwrap();
            let bv = self.value(beta).view().into_dimensionality::<ndarray::Ix1>().unwrap();
            let d = *xv.shape().last().unwrap();
            assert_eq!(gv.len(), d);
            assert_eq!(bv.len(), d);
            let mut out = xv.clone();
            for mut row in out.rows_mut() {
                let mu = row.mean().unwrap();
                let var = row.mapv(|e| (e - mu) * (e - mu)).mean().unwrap();
                let inv = 1.0 / (var + LN_EPS).sqrt();
                for i in 0..d {
                    row[i] = (row[i] - mu) * inv * gv[i] + bv[i];
                }
            }
            out
        };
        self.push(v, vec![x, gamma, beta], Box::new(|ctx| {
            let xv = ctx.parents[0];
            let gv = ctx.parents[1].view().into_dimensionality::<ndarray::Ix1>().unwrap();
            let d = *xv.shape().last().unwrap();
            let dn = d as f64;
            let mut dx = ctx.needs[0].then(|| ArrayD::zeros(xv.raw_dim()));
            let mut dg = ctx.needs[1].then(|| ArrayD::zeros(IxDyn(&[d])));
            let mut db = ctx.needs[2].then(|| ArrayD::zeros(IxDyn(&[d])));
            let x_rows: Vec<_> = xv.rows().into_iter().collect();
            let g_rows: Vec<_> = ctx.grad.rows().into_iter().collect();
            for (r, (xr, gr)) in x_rows.iter().zip(&g_rows).enumerate() {
                let mu = xr.mean().unwrap();
                let var = xr.mapv(|e| (e - mu) * (e - mu)).mean().unwrap();
                let inv = 1.0 / (var + LN_EPS).sqrt();
                let xhat: Vec<f64> = xr.iter().map(|&e| (e - mu) * inv).collect();
                if let Some(dg) = dg.as_mut() {
                    for i in 0..d {
                        dg[IxDyn(&[i])] += gr[i] * xhat[i];
                    }
                }
                if let Some(db) = db.as_mut() {
                    for i in 0..d {
                        db[IxDyn(&[i])] += gr[i];
                    }
                }
                if let Some(dx) = dx.as_mut() {
                    let gy: Vec<f64> = (0..d).map(|i| gr[i] * gv[i]).collect();
                    let mean_gy = gy.iter().sum::<f64>() / dn;
                    let mean_gy_xhat =
                        gy.iter().zip(&xhat).map(|(a, b)| a * b).sum::<f64>() / dn;
                    let mut lane = dx.rows_mut().into_iter().nth(r).unwrap();
                    for i in 0..d {
                        lane[i] = inv * (gy[i] - mean_gy - xhat[i] * mean_gy_xhat);
                    }
                }
            }
            vec![dx, dg, db]
        }))
    }

    /// Softmax over the last axis.
    pub fn softmax_last(&mut self, x: Tensor) -> Tensor {
        let v = {
            let mut out = self.value(x).clone();
            for mut row in out.rows_mut() {
                let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                row.mapv_inplace(|e| (e - mx).exp());
                let s = row.sum();
                row.mapv_inplace(|e| e / s);
            }
            out
        };
        self.push(v, vec![x], Box::new(|ctx| {
            let mut d = ctx.grad.clone();
            let y_rows: Vec<_> = ctx.value.rows().into_iter().collect();
            for (mut gr, yr) in d.rows_mut().into_iter().zip(y_rows) {
                let dot: f64 = gr.iter().zip(yr.iter()).map(|(a, b)| a * b).sum();
                for (g, &y) in gr.iter_mut().zip(yr.iter()) {
                    *g = y * (*g - dot);
                }
            }
            vec![Some(d)]
        }))
    }
}
