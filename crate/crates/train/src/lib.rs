//! Semi-supervised training for the degradation-parameter estimator.
//!
//! The supervised objective combines forward enhancement against the
//! reference, backward re-degradation against the input, and ambient
//! supervision against a heavily blurred input. The unsupervised objective
//! re-degrades an unlabeled image with its own ambient estimate and asks
//! the network for consistent transmissions (scaled by the mixing factor)
//! and ambients across the pair, plus a gray-world constraint on the
//! enhancement. A supervised warm-up precedes a fixed sup/unsup interleave,
//! optimized with decoupled-weight-decay Adam, fully seeded.

mod config;
mod data;
mod error;
mod gradcheck;
mod losses;
mod optim;
mod trainer;

pub use config::{LossWeights, Phase, TrainSchedule};
pub use data::{BatchSample, LabeledPair};
pub use error::{Result, TrainError};
pub use gradcheck::{check_gradients, GradCheckReport, LossKind};
pub use losses::{
    blur_target, combine_semi, combine_sup, combine_unsup, degrade_on_graph, enhance_on_graph,
    gray_world_loss, mse, scalar, supervised_losses, unsup_pair, unsupervised_losses,
    unsupervised_losses_fixed, SupParts, UnsupParts, BLUR_TRUNCATE,
};
pub use optim::AdamW;
pub use trainer::{train, TrainOptions, TrainSummary, LOG_HEADER};
