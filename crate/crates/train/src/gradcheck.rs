//! Finite-difference verification of the training objectives.
//!
//! Central differences are taken at h = 1e-4 first; a coordinate that
//! misses there is retried at h = 1e-5 and then 1e-6 and must pass once.
//! ReLU and max-pool kinks that fall inside the wider bracket pull the
//! difference quotient off the tangent even when the tape is exact, and
//! the enhancement's division by the floored transmission amplifies the
//! floor's own kink roughly twentyfold, so a handful of coordinates need
//! the narrowest bracket. A genuinely wrong gradient fails at every step
//! size: at h = 1e-6 the quotient's cancellation noise is ~1e-10, far
//! below the acceptance tolerance. The unsupervised objective is
//! evaluated at a frozen `I2`: the re-degraded image is data to the tape,
//! so that frozen evaluation is precisely the function it differentiates.

use indexmap::IndexMap;
use ndarray::{ArrayD, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uie_net::autodiff::{Graph, Tensor};
use uie_net::{bind_parameters, Bindings, Mode, NetConfig, ParameterStore};

use crate::config::LossWeights;
use crate::data::BatchSample;
use crate::error::Result;
use crate::losses::{
    combine_semi, scalar, supervised_losses, unsupervised_losses, unsupervised_losses_fixed,
};

const REL_TOL: f64 = 1e-3;
const ABS_TOL: f64 = 1e-9;

/// Which objective to differentiate: one of the six individual terms or a
/// weighted combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Fwd,
    Bwd,
    ASup,
    T,
    AUnsup,
    GrayWorld,
    Supervised,
    Unsupervised,
    SemiSupervised,
}

impl LossKind {
    pub const ALL: [LossKind; 9] = [
        LossKind::Fwd,
        LossKind::Bwd,
        LossKind::ASup,
        LossKind::T,
        LossKind::AUnsup,
        LossKind::GrayWorld,
        LossKind::Supervised,
        LossKind::Unsupervised,
        LossKind::SemiSupervised,
    ];

    pub fn label(self) -> &'static str {
        match self {
            LossKind::Fwd => "l_fwd",
            LossKind::Bwd => "l_bwd",
            LossKind::ASup => "l_a_sup",
            LossKind::T => "l_t",
            LossKind::AUnsup => "l_a_unsup",
            LossKind::GrayWorld => "l_gw",
            LossKind::Supervised => "supervised",
            LossKind::Unsupervised => "unsupervised",
            LossKind::SemiSupervised => "semi-supervised",
        }
    }
}

/// Outcome over all sampled coordinates. `max_rel_err` is taken over
/// coordinates whose magnitude supports a meaningful ratio; near-zero
/// pairs are judged by the absolute tolerance instead.
#[derive(Debug)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_err: f64,
    pub worst: String,
    pub failures: Vec<String>,
}

struct Fixture {
    cfg: NetConfig,
    weights: LossWeights,
    sample: BatchSample,
    i1: ArrayD<f64>,
    i2: ArrayD<f64>,
    alpha: f64,
}

fn rand_batch(rng: &mut ChaCha8Rng, b: usize, s: usize) -> ArrayD<f64> {
    let mut out = ArrayD::zeros(IxDyn(&[b, 3, s, s]));
    for v in out.iter_mut() {
        *v = 0.02 + 0.96 * rng.gen::<f64>();
    }
    out
}

fn build_total(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    fx: &Fixture,
    kind: LossKind,
) -> Result<Tensor> {
    use LossKind::*;
    match kind {
        Fwd | Bwd | ASup | Supervised => {
            let p = supervised_losses(g, binds, store, &fx.cfg, &fx.weights, &fx.sample)?;
            Ok(match kind {
                Fwd => p.l_fwd,
                Bwd => p.l_bwd,
                ASup => p.l_a_sup,
                _ => p.total,
            })
        }
        T | AUnsup | GrayWorld | Unsupervised => {
            let p = unsupervised_losses_fixed(
                g, binds, store, &fx.cfg, &fx.weights, &fx.i1, &fx.i2, fx.alpha,
            )?;
            Ok(match kind {
                T => p.l_t,
                AUnsup => p.l_a_unsup,
                GrayWorld => p.l_gw,
                _ => p.total,
            })
        }
        SemiSupervised => {
            let sup = supervised_losses(g, binds, store, &fx.cfg, &fx.weights, &fx.sample)?;
            let unsup = unsupervised_losses_fixed(
                g, binds, store, &fx.cfg, &fx.weights, &fx.i1, &fx.i2, fx.alpha,
            )?;
            Ok(combine_semi(g, &fx.weights, sup.total, unsup.total))
        }
    }
}

fn eval_loss(store: &ParameterStore, fx: &Fixture, kind: LossKind) -> Result<f64> {
    let mut st = store.clone();
    let mut g = Graph::new();
    let binds = bind_parameters(&mut g, &st);
    let total = build_total(&mut g, &binds, &mut st, fx, kind)?;
    Ok(scalar(&g, total))
}

fn central(
    store: &ParameterStore,
    fx: &Fixture,
    kind: LossKind,
    name: &str,
    idx: usize,
    h: f64,
) -> Result<f64> {
    let perturbed = |delta: f64| -> Result<f64> {
        let mut st = store.clone();
        let mut val = st.get(name).clone();
        val.as_slice_mut().expect("standard layout")[idx] += delta;
        st.set(name, val).map_err(crate::error::TrainError::Net)?;
        eval_loss(&st, fx, kind)
    };
    Ok((perturbed(h)? - perturbed(-h)?) / (2.0 * h))
}

/// Compares analytic gradients of the chosen objective against central
/// finite differences at `coords` randomly sampled parameter coordinates
/// of a batch-2 random problem on `cfg`.
pub fn check_gradients(
    cfg: &NetConfig,
    kind: LossKind,
    coords: usize,
    seed: u64,
) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParameterStore::init(cfg, seed)?;
    store.set_mode(Mode::Train);

    let s = cfg.input_size;
    let degraded = rand_batch(&mut rng, 2, s);
    let reference = rand_batch(&mut rng, 2, s);
    let i1 = rand_batch(&mut rng, 2, s);
    let alpha = 0.5 + 0.4 * rng.gen::<f64>();
    let weights = LossWeights::default();

    // freeze I2 at the base parameters
    let i2 = {
        let mut st = store.clone();
        let mut g = Graph::new();
        let binds = bind_parameters(&mut g, &st);
        let (_, i2) = unsupervised_losses(&mut g, &binds, &mut st, cfg, &weights, &i1, alpha)?;
        i2
    };
    let fx = Fixture {
        cfg: cfg.clone(),
        weights,
        sample: BatchSample::from_arrays(degraded, Some(reference))?,
        i1,
        i2,
        alpha,
    };

    // analytic gradients, once
    let analytic: IndexMap<String, ArrayD<f64>> = {
        let mut st = store.clone();
        let mut g = Graph::new();
        let binds = bind_parameters(&mut g, &st);
        let total = build_total(&mut g, &binds, &mut st, &fx, kind)?;
        let grads = g.backward(total);
        let mut out = IndexMap::new();
        for name in store.trainable_names() {
            if let Some(gv) = grads.get(binds.get(&name)) {
                out.insert(name, gv.clone());
            }
        }
        out
    };

    let names = store.trainable_names();
    let mut report = GradCheckReport {
        checked: 0,
        max_rel_err: 0.0,
        worst: String::new(),
        failures: Vec::new(),
    };
    let tol = |a: f64, f: f64| REL_TOL * a.abs().max(f.abs()) + ABS_TOL;
    for _ in 0..coords {
        let name = &names[rng.gen_range(0..names.len())];
        let len = store.get(name).len();
        let idx = rng.gen_range(0..len);
        let a = analytic
            .get(name)
            .map(|arr| arr.as_slice().expect("standard layout")[idx])
            .unwrap_or(0.0);

        let mut fd = central(&store, &fx, kind, name, idx, 1e-4)?;
        let mut ok = (a - fd).abs() <= tol(a, fd);
        for h in [1e-5, 1e-6] {
            if ok {
                break;
            }
            fd = central(&store, &fx, kind, name, idx, h)?;
            ok = (a - fd).abs() <= tol(a, fd);
        }
        report.checked += 1;
        let label = format!("{name}[{idx}]");
        if !ok {
            report
                .failures
                .push(format!("{label}: analytic {a:.6e} vs fd {fd:.6e}"));
            continue;
        }
        let denom = a.abs().max(fd.abs());
        if denom > 1e-6 {
            let rel = (a - fd).abs() / denom;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst = label;
            }
        }
    }
    Ok(report)
}
