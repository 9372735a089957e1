use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::NetError;

/// Architecture hyperparameters. Serialized into checkpoints so a saved
/// model carries everything needed to rebuild its parameter shapes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Square input resolution; positional embeddings are sized for it.
    pub input_size: usize,
    /// Filters in the red-channel tuner's convolution.
    pub rct_filters: usize,
    /// Five encoder widths followed by four decoder widths.
    pub enc_dec_filters: [usize; 9],
    /// Width of every transformer token.
    pub token_dim: usize,
    /// Attention heads; must divide `token_dim`.
    pub heads: usize,
    /// Transformer depth in the ambient stream.
    pub transformer_blocks: usize,
    /// Patch window for pooling encoder features into tokens.
    pub patch_stride: usize,
    /// Encoder levels (2..=5) that exchange features with the ambient
    /// stream; level k pairs with transformer block k-1.
    pub rcm_levels: BTreeSet<usize>,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            input_size: 256,
            rct_filters: 16,
            enc_dec_filters: [64, 128, 256, 512, 512, 256, 128, 64, 64],
            token_dim: 384,
            heads: 6,
            transformer_blocks: 5,
            patch_stride: 16,
            rcm_levels: [2, 3, 4, 5].into_iter().collect(),
        }
    }
}

impl NetConfig {
    /// A small config for fast integration tests.
    pub fn toy() -> Self {
        NetConfig {
            input_size: 32,
            rct_filters: 4,
            enc_dec_filters: [4, 8, 16, 32, 32, 16, 8, 4, 4],
            token_dim: 32,
            heads: 2,
            transformer_blocks: 5,
            patch_stride: 16,
            rcm_levels: [2, 3, 4, 5].into_iter().collect(),
        }
    }

    /// The smallest legal config; used for finite-difference gradient
    /// checks where every forward pass counts.
    pub fn tiny() -> Self {
        NetConfig {
            input_size: 16,
            rct_filters: 4,
            enc_dec_filters: [4, 8, 8, 8, 8, 8, 8, 4, 4],
            token_dim: 8,
            heads: 2,
            transformer_blocks: 5,
            patch_stride: 16,
            rcm_levels: [2, 3, 4, 5].into_iter().collect(),
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let bad = |m: String| Err(NetError::InvalidConfig(m));
        if self.input_size == 0 || self.input_size % self.patch_stride != 0 {
            return bad(format!(
                "input_size {} must be a positive multiple of patch_stride {}",
                self.input_size, self.patch_stride
            ));
        }
        if self.input_size % 16 != 0 {
            return bad(format!(
                "input_size {} must be divisible by 16 (four 2x2 poolings)",
                self.input_size
            ));
        }
        if self.token_dim == 0 || self.heads == 0 || self.token_dim % self.heads != 0 {
            return bad(format!(
                "token_dim {} must be a positive multiple of heads {}",
                self.token_dim, self.heads
            ));
        }
        if self.rct_filters == 0 || self.transformer_blocks == 0 || self.patch_stride == 0 {
            return bad("all counts must be >= 1".into());
        }
        if self.enc_dec_filters.iter().any(|&f| f == 0) {
            return bad("all filter counts must be >= 1".into());
        }
        for &level in &self.rcm_levels {
            if !(2..=5).contains(&level) {
                return bad(format!("rcm level {level} outside 2..=5"));
            }
            if self.transformer_blocks < level - 1 {
                return bad(format!(
                    "rcm level {level} needs at least {} transformer blocks",
                    level - 1
                ));
            }
        }
        Ok(())
    }

    pub fn enc_filters(&self) -> [usize; 5] {
        let f = &self.enc_dec_filters;
        [f[0], f[1], f[2], f[3], f[4]]
    }

    pub fn dec_filters(&self) -> [usize; 4] {
        let f = &self.enc_dec_filters;
        [f[5], f[6], f[7], f[8]]
    }

    /// Token grid side length: input_size / patch_stride.
    pub fn grid(&self) -> usize {
        self.input_size / self.patch_stride
    }

    /// Spatial tokens plus the Ambient token.
    pub fn token_count(&self) -> usize {
        self.grid() * self.grid() + 1
    }

    /// Spatial side of encoder level k (1-based).
    pub fn enc_size(&self, level: usize) -> usize {
        self.input_size >> (level - 1)
    }
}
