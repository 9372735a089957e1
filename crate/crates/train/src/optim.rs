//! Adam with decoupled weight decay.

use indexmap::IndexMap;
use ndarray::ArrayD;
use uie_net::ParameterStore;

/// Moment estimates are kept per parameter name; missing gradients count
/// as zero, so decay still applies to parameters a loss never touched.
pub struct AdamW {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    steps: u64,
    m: IndexMap<String, ArrayD<f64>>,
    v: IndexMap<String, ArrayD<f64>>,
}

impl AdamW {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
            steps: 0,
            m: IndexMap::new(),
            v: IndexMap::new(),
        }
    }

    pub fn with_weight_decay(mut self, weight_decay: f64) -> Self {
        self.weight_decay = weight_decay;
        self
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One update over every trainable parameter in the store.
    pub fn step(&mut self, store: &mut ParameterStore, grads: &IndexMap<String, ArrayD<f64>>) {
        self.steps += 1;
        let (lr, b1, b2, eps, wd) = (self.lr, self.beta1, self.beta2, self.eps, self.weight_decay);
        let c1 = 1.0 - b1.powi(self.steps as i32);
        let c2 = 1.0 - b2.powi(self.steps as i32);
        for name in store.trainable_names() {
            let mut p = store.get(&name).clone();
            let zeros;
            let grad: &ArrayD<f64> = match grads.get(&name) {
                Some(gv) => gv,
                None => {
                    zeros = ArrayD::zeros(p.raw_dim());
                    &zeros
                }
            };
            let m = self
                .m
                .entry(name.clone())
                .or_insert_with(|| ArrayD::zeros(p.raw_dim()));
            ndarray::Zip::from(&mut *m)
                .and(grad)
                .for_each(|m, &g| *m = b1 * *m + (1.0 - b1) * g);
            let v = self
                .v
                .entry(name.clone())
                .or_insert_with(|| ArrayD::zeros(p.raw_dim()));
            ndarray::Zip::from(&mut *v)
                .and(grad)
                .for_each(|v, &g| *v = b2 * *v + (1.0 - b2) * g * g);

            let (m, v) = (&self.m[&name], &self.v[&name]);
            ndarray::Zip::from(&mut p)
                .and(m)
                .and(v)
                .for_each(|p, &m, &v| {
                    let m_hat = m / c1;
                    let v_hat = v / c2;
                    *p -= lr * wd * *p + lr * m_hat / (v_hat.sqrt() + eps);
                });
            store.set(&name, p).expect("optimizer preserves shapes");
        }
    }
}
