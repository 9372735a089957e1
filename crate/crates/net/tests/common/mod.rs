//! Shared fixtures for the network integration tests.
#![allow(dead_code)] // each test binary uses a different subset

use std::collections::HashMap;

use ndarray::{ArrayD, IxDyn};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uie_net::autodiff::Graph;
use uie_net::{bind_parameters, net_forward, Mode, NetConfig, ParameterStore};

/// Uniform [0, 1] batch values, deterministic in the seed.
pub fn rand_batch(shape: &[usize], seed: u64) -> ArrayD<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    ArrayD::from_shape_vec(IxDyn(shape), data).unwrap()
}

#[derive(Clone, Copy)]
pub enum Target {
    TMaps,
    Ambient,
    Both,
}

/// Train-mode scalar loss (a plain mean of the chosen outputs) on a
/// cloned store, so repeated evaluations never interact via BN stats.
pub fn loss_value(
    store: &ParameterStore,
    cfg: &NetConfig,
    batch: &ArrayD<f64>,
    target: Target,
) -> f64 {
    let mut s = store.clone();
    s.set_mode(Mode::Train);
    let mut g = Graph::new();
    let binds = bind_parameters(&mut g, &s);
    let input = g.leaf(batch.clone(), false);
    let out = net_forward(&mut g, &binds, &mut s, cfg, input).unwrap();
    let loss = build_loss(&mut g, &out, target);
    g.value(loss)[IxDyn(&[])]
}

fn build_loss(
    g: &mut Graph,
    out: &uie_net::ForwardPass,
    target: Target,
) -> uie_net::autodiff::Tensor {
    match target {
        Target::TMaps => g.mean_all(out.t_hat),
        Target::Ambient => g.mean_all(out.a_hat),
        Target::Both => {
            let t = g.mean_all(out.t_hat);
            let a = g.mean_all(out.a_hat);
            g.add(t, a)
        }
    }
}

/// Analytic parameter gradients of the same loss, keyed by name.
pub fn loss_grads(
    store: &ParameterStore,
    cfg: &NetConfig,
    batch: &ArrayD<f64>,
    target: Target,
) -> HashMap<String, ArrayD<f64>> {
    let mut s = store.clone();
    s.set_mode(Mode::Train);
    let mut g = Graph::new();
    let binds = bind_parameters(&mut g, &s);
    let input = g.leaf(batch.clone(), false);
    let out = net_forward(&mut g, &binds, &mut s, cfg, input).unwrap();
    let loss = build_loss(&mut g, &out, target);
    let grads = g.backward(loss);
    binds
        .iter()
        .filter_map(|(name, t)| grads.get(t).map(|a| (name.to_string(), a.clone())))
        .collect()
}

/// Central finite difference of the loss w.r.t. one parameter coordinate.
pub fn fd_param(
    store: &ParameterStore,
    cfg: &NetConfig,
    batch: &ArrayD<f64>,
    target: Target,
    name: &str,
    flat: usize,
    h: f64,
) -> f64 {
    let perturbed = |delta: f64| {
        let mut s = store.clone();
        let mut v = s.get(name).clone();
        v.as_slice_mut().unwrap()[flat] += delta;
        s.set(name, v).unwrap();
        loss_value(&s, cfg, batch, target)
    };
    (perturbed(h) - perturbed(-h)) / (2.0 * h)
}

/// Asserts that the analytic gradient at one coordinate is confirmed by
/// central finite differences.
///
/// The primary step is h = 1e-4. ReLU and max-pool kinks that fall
/// inside the +/-h bracket pull the difference quotient off the tangent
/// even when the gradient is exact, so a coordinate that misses at the
/// primary step must pass again at h = 1e-5, where the bracket is ten
/// times tighter; a genuinely wrong gradient fails at every step size.
pub fn assert_coordinate_matches(
    store: &ParameterStore,
    cfg: &NetConfig,
    batch: &ArrayD<f64>,
    target: Target,
    name: &str,
    flat: usize,
    analytic: f64,
) {
    let tol = |a: f64, f: f64| 1e-3 * a.abs().max(f.abs()) + 1e-9;
    let fd = fd_param(store, cfg, batch, target, name, flat, 1e-4);
    if (analytic - fd).abs() <= tol(analytic, fd) {
        return;
    }
    let fd_fine = fd_param(store, cfg, batch, target, name, flat, 1e-5);
    assert!(
        (analytic - fd_fine).abs() <= tol(analytic, fd_fine),
        "{name}[{flat}]: analytic {analytic} vs finite differences {fd} (h=1e-4), {fd_fine} (h=1e-5)"
    );
}

/// Asserts analytic vs finite-difference agreement at `checks` sampled
/// coordinates of each named parameter. Returns how many coordinates
/// were compared.
pub fn assert_grads_match(
    store: &ParameterStore,
    cfg: &NetConfig,
    batch: &ArrayD<f64>,
    target: Target,
    names: &[&str],
    checks_per_param: usize,
) -> usize {
    let grads = loss_grads(store, cfg, batch, target);
    let mut rng = ChaCha8Rng::seed_from_u64(0xfd);
    let mut compared = 0;
    for &name in names {
        let ga = grads
            .get(name)
            .unwrap_or_else(|| panic!("no gradient for {name}"));
        let len = ga.len();
        for _ in 0..checks_per_param.min(len) {
            let flat = rng.gen_range(0..len);
            let a = ga.as_slice().unwrap()[flat];
            assert_coordinate_matches(store, cfg, batch, target, name, flat, a);
            compared += 1;
        }
    }
    compared
}
