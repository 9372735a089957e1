//! Loss weighting and the warm-up/interleave schedule.

use serde::{Deserialize, Serialize};

use crate::error::{cfg_err, Result};

/// Weights combining the individual loss terms.
///
/// `lambda1` scales the backward-degradation loss and `lambda2` the
/// ambient supervision inside the supervised objective; `lambda3` scales
/// the gray-world term inside the unsupervised objective; `lambda_unsup`
/// scales the whole unsupervised objective against the supervised one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda_unsup: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda1: 0.001,
            lambda2: 0.005,
            lambda3: 10.0,
            lambda_unsup: 0.001,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
            ("lambda_unsup", self.lambda_unsup),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(cfg_err(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// What a given iteration optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Warmup,
    Sup,
    Unsup,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Warmup => "warmup",
            Phase::Sup => "sup",
            Phase::Unsup => "unsup",
        }
    }
}

/// Iteration plan: a supervised warm-up, then blocks of `sup_block`
/// supervised iterations alternating with `unsup_block` unsupervised ones
/// until `total_iters`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    pub warmup_iters: u64,
    pub total_iters: u64,
    pub sup_block: u64,
    pub unsup_block: u64,
    pub lr: f64,
    pub batch: usize,
    /// Closed interval the re-degradation factor is drawn from.
    pub alpha_range: (f64, f64),
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            warmup_iters: 3000,
            total_iters: 150_000,
            sup_block: 120,
            unsup_block: 30,
            lr: 1e-4,
            batch: 6,
            alpha_range: (0.5, 0.9),
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("warmup_iters", self.warmup_iters),
            ("total_iters", self.total_iters),
            ("sup_block", self.sup_block),
            ("unsup_block", self.unsup_block),
            ("batch", self.batch as u64),
        ] {
            if v < 1 {
                return Err(cfg_err(format!("{name} must be at least 1")));
            }
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(cfg_err(format!(
                "lr must be finite and nonnegative, got {}",
                self.lr
            )));
        }
        let (lo, hi) = self.alpha_range;
        if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
            return Err(cfg_err(format!(
                "alpha_range must satisfy 0 < lo <= hi < 1, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// Phase of the 0-based iteration `iter`.
    pub fn phase(&self, iter: u64) -> Phase {
        if iter < self.warmup_iters {
            return Phase::Warmup;
        }
        let k = (iter - self.warmup_iters) % (self.sup_block + self.unsup_block);
        if k < self.sup_block {
            Phase::Sup
        } else {
            Phase::Unsup
        }
    }

    /// Number of unsupervised iterations in the whole run (closed form).
    pub fn unsup_iterations(&self) -> u64 {
        if self.total_iters <= self.warmup_iters {
            return 0;
        }
        let remaining = self.total_iters - self.warmup_iters;
        let cycle = self.sup_block + self.unsup_block;
        let tail = remaining % cycle;
        (remaining / cycle) * self.unsup_block + tail.saturating_sub(self.sup_block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_interleave_gives_1200_sup_and_300_unsup_per_1500() {
        let s = TrainSchedule::default();
        let (mut sup, mut unsup) = (0u64, 0u64);
        for iter in s.warmup_iters..s.warmup_iters + 1500 {
            match s.phase(iter) {
                Phase::Sup => sup += 1,
                Phase::Unsup => unsup += 1,
                Phase::Warmup => panic!("warmup past warmup_iters"),
            }
        }
        assert_eq!((sup, unsup), (1200, 300));

        // block boundaries land exactly where the 120/30 pattern says
        assert_eq!(s.phase(2999), Phase::Warmup);
        assert_eq!(s.phase(3000), Phase::Sup);
        assert_eq!(s.phase(3119), Phase::Sup);
        assert_eq!(s.phase(3120), Phase::Unsup);
        assert_eq!(s.phase(3149), Phase::Unsup);
        assert_eq!(s.phase(3150), Phase::Sup);
    }

    #[test]
    fn unsup_iteration_count_matches_simulation() {
        for (total, warmup, sup_b, unsup_b) in [
            (4500u64, 3000u64, 120u64, 30u64),
            (3050, 3000, 120, 30),   // tail ends inside the first sup block
            (3130, 3000, 120, 30),   // tail ends inside the first unsup block
            (2000, 3000, 120, 30),   // never leaves warmup
            (100, 10, 5, 5),
            (163, 10, 7, 3),
        ] {
            let s = TrainSchedule {
                warmup_iters: warmup,
                total_iters: total,
                sup_block: sup_b,
                unsup_block: unsup_b,
                ..TrainSchedule::default()
            };
            let simulated = (0..total).filter(|&i| s.phase(i) == Phase::Unsup).count() as u64;
            assert_eq!(s.unsup_iterations(), simulated, "{s:?}");
        }
    }

    #[test]
    fn invalid_weights_and_schedules_are_rejected() {
        assert!(LossWeights::default().validate().is_ok());
        let mut w = LossWeights::default();
        w.lambda3 = -1.0;
        assert!(w.validate().is_err());
        w.lambda3 = f64::NAN;
        assert!(w.validate().is_err());

        assert!(TrainSchedule::default().validate().is_ok());
        let mut s = TrainSchedule::default();
        s.sup_block = 0;
        assert!(s.validate().is_err());
        s = TrainSchedule::default();
        s.alpha_range = (0.0, 0.9);
        assert!(s.validate().is_err());
        s.alpha_range = (0.5, 1.0);
        assert!(s.validate().is_err());
        s.alpha_range = (0.8, 0.5);
        assert!(s.validate().is_err());
        s.alpha_range = (0.7, 0.7);
        assert!(s.validate().is_ok());
    }
}
