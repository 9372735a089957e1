//! Named parameter storage, shape inventory, and initialization.

use indexmap::IndexMap;
use ndarray::{ArrayD, IxDyn};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::NetConfig;
use crate::error::NetError;

pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Trainable,
    /// Batch-norm running statistics: saved and loaded, never optimized.
    Buffer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy)]
enum Init {
    /// Uniform in +/- sqrt(6 / fan_in).
    KaimingUniform { fan_in: usize },
    /// Normal(0, 0.02), resampled outside two standard deviations.
    TruncNormal,
    Zeros,
    Ones,
}

#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub shape: Vec<usize>,
    init: Init,
}

fn spec(name: String, kind: ParamKind, shape: Vec<usize>, init: Init) -> ParamSpec {
    ParamSpec { name, kind, shape, init }
}

fn push_conv(
    out: &mut Vec<ParamSpec>,
    prefix: &str,
    cout: usize,
    cin: usize,
    k: usize,
    init: Init,
) {
    out.push(spec(
        format!("{prefix}.weight"),
        ParamKind::Trainable,
        vec![cout, cin, k, k],
        init,
    ));
    out.push(spec(
        format!("{prefix}.bias"),
        ParamKind::Trainable,
        vec![cout],
        Init::Zeros,
    ));
}

fn push_bn(out: &mut Vec<ParamSpec>, prefix: &str, c: usize) {
    out.push(spec(format!("{prefix}.gamma"), ParamKind::Trainable, vec![c], Init::Ones));
    out.push(spec(format!("{prefix}.beta"), ParamKind::Trainable, vec![c], Init::Zeros));
    out.push(spec(
        format!("{prefix}.running_mean"),
        ParamKind::Buffer,
        vec![c],
        Init::Zeros,
    ));
    out.push(spec(
        format!("{prefix}.running_var"),
        ParamKind::Buffer,
        vec![c],
        Init::Ones,
    ));
}

fn push_linear(out: &mut Vec<ParamSpec>, prefix: &str, fan_in: usize, fan_out: usize, init: Init) {
    out.push(spec(
        format!("{prefix}.weight"),
        ParamKind::Trainable,
        vec![fan_in, fan_out],
        init,
    ));
    out.push(spec(
        format!("{prefix}.bias"),
        ParamKind::Trainable,
        vec![fan_out],
        Init::Zeros,
    ));
}

/// Double conv-BN block used by both encoder and decoder stages.
fn push_double_conv(out: &mut Vec<ParamSpec>, prefix: &str, cin: usize, cout: usize) {
    push_conv(out, &format!("{prefix}.conv1"), cout, cin, 3, Init::KaimingUniform { fan_in: cin * 9 });
    push_bn(out, &format!("{prefix}.bn1"), cout);
    push_conv(out, &format!("{prefix}.conv2"), cout, cout, 3, Init::KaimingUniform { fan_in: cout * 9 });
    push_bn(out, &format!("{prefix}.bn2"), cout);
}

/// Full parameter inventory for a config, in forward order. This order
/// is also the initialization sampling order and the checkpoint layout.
pub fn parameter_specs(cfg: &NetConfig) -> Vec<ParamSpec> {
    let enc = cfg.enc_filters();
    let dec = cfg.dec_filters();
    let d = cfg.token_dim;
    let mut out = Vec::new();

    push_conv(&mut out, "rct.conv", cfg.rct_filters, 3, 3, Init::KaimingUniform { fan_in: 27 });
    // The tuner's fully-connected layer follows its convolution, so it
    // shares the fan-in-uniform init family.
    push_linear(&mut out, "rct.fc", cfg.rct_filters, 1, Init::KaimingUniform { fan_in: cfg.rct_filters });

    for k in 1..=5usize {
        let cin = if k == 1 { 3 } else { enc[k - 2] };
        push_double_conv(&mut out, &format!("enc{k}"), cin, enc[k - 1]);
    }

    push_linear(&mut out, "astream.proj", enc[0], d, Init::TruncNormal);
    let n_spatial = cfg.grid() * cfg.grid();
    out.push(spec("astream.pos".into(), ParamKind::Trainable, vec![n_spatial, d], Init::TruncNormal));
    out.push(spec("astream.ambient".into(), ParamKind::Trainable, vec![1, d], Init::TruncNormal));

    for b in 1..=cfg.transformer_blocks {
        let p = format!("trans{b}");
        out.push(spec(format!("{p}.ln1.gamma"), ParamKind::Trainable, vec![d], Init::Ones));
        out.push(spec(format!("{p}.ln1.beta"), ParamKind::Trainable, vec![d], Init::Zeros));
        for proj in ["wq", "wk", "wv", "wo"] {
            push_linear(&mut out, &format!("{p}.attn.{proj}"), d, d, Init::TruncNormal);
        }
        out.push(spec(format!("{p}.ln2.gamma"), ParamKind::Trainable, vec![d], Init::Ones));
        out.push(spec(format!("{p}.ln2.beta"), ParamKind::Trainable, vec![d], Init::Zeros));
        push_linear(&mut out, &format!("{p}.mlp.fc1"), d, 4 * d, Init::TruncNormal);
        push_linear(&mut out, &format!("{p}.mlp.fc2"), 4 * d, d, Init::TruncNormal);
    }

    for &level in &cfg.rcm_levels {
        let c = enc[level - 1] + d;
        // Zero init makes every exchange start as an exact identity.
        push_conv(&mut out, &format!("rcm{level}.conv"), c, c, 1, Init::Zeros);
    }

    for j in 1..=4usize {
        let up = if j == 1 { enc[4] } else { dec[j - 2] };
        let skip = enc[4 - j];
        push_double_conv(&mut out, &format!("dec{j}"), up + skip, dec[j - 1]);
    }

    push_conv(&mut out, "thead", 3, dec[3], 1, Init::KaimingUniform { fan_in: dec[3] });
    push_linear(&mut out, "ahead", d, 3, Init::TruncNormal);

    out
}

#[derive(Debug, Clone)]
pub struct Param {
    pub kind: ParamKind,
    pub value: ArrayD<f64>,
}

/// All learnable state of the network plus the explicit train/eval flag.
///
/// Single writer during training; clone for concurrent eval snapshots.
#[derive(Debug, Clone)]
pub struct ParameterStore {
    params: IndexMap<String, Param>,
    mode: Mode,
}

fn sample(init: Init, shape: &[usize], rng: &mut ChaCha8Rng) -> ArrayD<f64> {
    let n: usize = shape.iter().product();
    let data: Vec<f64> = match init {
        Init::Zeros => vec![0.0; n],
        Init::Ones => vec![1.0; n],
        Init::KaimingUniform { fan_in } => {
            let bound = (6.0 / fan_in as f64).sqrt();
            (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
        }
        Init::TruncNormal => (0..n)
            .map(|_| loop {
                let z: f64 = rng.sample(StandardNormal);
                if z.abs() <= 2.0 {
                    break z * 0.02;
                }
            })
            .collect(),
    };
    ArrayD::from_shape_vec(IxDyn(shape), data).unwrap()
}

impl ParameterStore {
    /// Builds and initializes every parameter for `cfg`, deterministically
    /// in `seed`.
    pub fn init(cfg: &NetConfig, seed: u64) -> Result<Self, NetError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = IndexMap::new();
        for s in parameter_specs(cfg) {
            let value = sample(s.init, &s.shape, &mut rng);
            params.insert(s.name, Param { kind: s.kind, value });
        }
        Ok(ParameterStore { params, mode: Mode::Train })
    }

    /// Rebuilds a store from externally supplied values (checkpoint load).
    pub(crate) fn from_parts(params: IndexMap<String, Param>, mode: Mode) -> Self {
        ParameterStore { params, mode }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    /// Panics on unknown names: parameter names are fixed at construction,
    /// so a miss is a bug, not an input condition.
    pub fn get(&self, name: &str) -> &ArrayD<f64> {
        &self
            .params
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
            .value
    }

    pub fn lookup(&self, name: &str) -> Option<&Param> {
        self.params.get(name)
    }

    pub fn set(&mut self, name: &str, value: ArrayD<f64>) -> Result<(), NetError> {
        let p = self
            .params
            .get_mut(name)
            .ok_or_else(|| NetError::UnknownParameter(name.into()))?;
        if p.value.shape() != value.shape() {
            return Err(NetError::DimensionMismatch {
                expected: format!("{:?}", p.value.shape()),
                got: format!("{:?}", value.shape()),
            });
        }
        p.value = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn trainable_names(&self) -> Vec<String> {
        self.params
            .iter()
            .filter(|(_, p)| p.kind == ParamKind::Trainable)
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Number of trainable scalars.
    pub fn param_count(&self) -> usize {
        self.params
            .values()
            .filter(|p| p.kind == ParamKind::Trainable)
            .map(|p| p.value.len())
            .sum()
    }

    /// Exponential-moving-average update of one BN layer's statistics.
    /// `var` is the biased batch variance over `n` values.
    pub fn update_bn_stats(&mut self, prefix: &str, mean: &[f64], var: &[f64], n: usize) {
        let correction = if n > 1 { n as f64 / (n - 1) as f64 } else { 1.0 };
        let rm = self
            .params
            .get_mut(&format!("{prefix}.running_mean"))
            .unwrap_or_else(|| panic!("no running stats for {prefix}"));
        for (r, &m) in rm.value.iter_mut().zip(mean) {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * m;
        }
        let rv = self.params.get_mut(&format!("{prefix}.running_var")).unwrap();
        for (r, &v) in rv.value.iter_mut().zip(var) {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * v * correction;
        }
    }

    /// Cloned running statistics for eval-mode normalization.
    pub fn bn_stats(&self, prefix: &str) -> (Vec<f64>, Vec<f64>) {
        let rm = self.get(&format!("{prefix}.running_mean"));
        let rv = self.get(&format!("{prefix}.running_var"));
        (rm.iter().copied().collect(), rv.iter().copied().collect())
    }
}
