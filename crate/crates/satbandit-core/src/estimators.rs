//! Transcript-side estimators for the hard-instance families.
//!
//! Estimation happens per block: a [`BlockView`] restricts a transcript to
//! one block of a hard instance and exposes the counters and scans used to
//! recover the block's latent index from the actions and rewards alone.
//! Arm indices follow the instance convention: arm 0 is the off-window /
//! post-change satisficing arm, arm 1 the in-window / pre-change one.

use alloc::format;

use crate::env::{Arm, Transcript};
use crate::error::{Error, Result};
use crate::instances::InstanceParams;

/// A transcript restricted to one block of a hard instance.
#[derive(Debug, Clone)]
pub struct BlockView<'a> {
    /// Block index, 0-based.
    pub index: usize,
    /// Absolute 1-based round of the block's first slot.
    pub start: usize,
    /// Actions on the block's rounds.
    pub actions: &'a [Arm],
    /// Rewards on the block's rounds.
    pub rewards: &'a [f64],
    /// Number of candidate positions `n`.
    pub num_candidates: usize,
    /// Window length `l`.
    pub window_len: usize,
    /// Sample split `r` (single-switch only).
    pub split: Option<usize>,
}

impl<'a> BlockView<'a> {
    /// Slices `block` (0-based) out of a transcript generated on `params`.
    pub fn new(transcript: &'a Transcript, params: &InstanceParams, block: usize) -> Result<Self> {
        if block >= params.num_blocks {
            return Err(Error::Range(format!(
                "block {block} outside [0, {})",
                params.num_blocks
            )));
        }
        let m = params.block_len;
        let lo = block * m;
        let hi = lo + m;
        if transcript.actions.len() < hi || transcript.rewards.len() < hi {
            return Err(Error::Contract(format!(
                "transcript shorter than block {block} (need {hi} rounds)"
            )));
        }
        Ok(Self {
            index: block,
            start: lo + 1,
            actions: &transcript.actions[lo..hi],
            rewards: &transcript.rewards[lo..hi],
            num_candidates: params.num_candidates,
            window_len: params.window_len,
            split: params.split,
        })
    }

    /// Candidate within-block positions, ascending.
    pub fn candidates(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_candidates).map(|i| 2 + i * self.window_len)
    }

    /// Number of pulls of `arm` inside the window `[tau, tau + l - 1]`
    /// (within-block times).
    pub fn window_pull_count(&self, tau: usize, arm: Arm) -> usize {
        let lo = tau - 1;
        let hi = lo + self.window_len;
        self.actions[lo..hi].iter().filter(|&&a| a == arm).count()
    }

    /// Swap-window estimator: the candidate whose window holds the most
    /// arm-1 pulls, ties broken to the lowest candidate.
    ///
    /// Whenever the block's wrong-pull count is at most `l / 4`, this
    /// recovers the true latent index: the true window then retains at least
    /// `3l/4` arm-1 pulls while every other window has at most `l / 4`.
    pub fn argmax_estimator(&self) -> usize {
        let mut best_tau = 2;
        let mut best_count = usize::MIN;
        for tau in self.candidates() {
            let count = self.window_pull_count(tau, 1);
            if count > best_count {
                best_count = count;
                best_tau = tau;
            }
        }
        best_tau
    }

    fn split_or_panic(&self) -> usize {
        self.split
            .expect("estimator needs the sample split r (single-switch blocks only)")
    }

    /// Mean of the first `take` rewards of `arm` inside the window at `tau`,
    /// or `None` if fewer than `take` such pulls exist.
    fn first_rewards_mean(&self, tau: usize, arm: Arm, take: usize) -> Option<f64> {
        let lo = tau - 1;
        let hi = lo + self.window_len;
        let mut sum = 0.0;
        let mut got = 0usize;
        for i in lo..hi {
            if self.actions[i] == arm {
                sum += self.rewards[i];
                got += 1;
                if got == take {
                    return Some(sum / take as f64);
                }
            }
        }
        None
    }

    /// Single-switch detector using arm-0 samples: the smallest candidate
    /// whose window holds at least `r` arm-0 pulls whose first-`r` average
    /// reaches the threshold `s`. `None` counts as an identification error.
    pub fn detect_by_first_arm(&self, s: f64) -> Option<usize> {
        let r = self.split_or_panic();
        for tau in self.candidates() {
            if self.window_pull_count(tau, 0) >= r {
                if let Some(mean) = self.first_rewards_mean(tau, 0, r) {
                    if mean >= s {
                        return Some(tau);
                    }
                }
            }
        }
        None
    }

    /// Single-switch detector using arm-1 samples: the smallest candidate
    /// whose window holds fewer than `r` arm-0 pulls but at least `l - r`
    /// arm-1 pulls whose first-`(l - r)` average is at most the threshold.
    pub fn detect_by_second_arm(&self, s: f64) -> Option<usize> {
        let r = self.split_or_panic();
        let need = self.window_len - r;
        for tau in self.candidates() {
            if self.window_pull_count(tau, 0) < r {
                if let Some(mean) = self.first_rewards_mean(tau, 1, need) {
                    if mean <= s {
                        return Some(tau);
                    }
                }
            }
        }
        None
    }

    /// Coin-mixed detector: the arm-0 detector on heads = false, the arm-1
    /// detector on heads = true. The coin comes from a dedicated stream.
    pub fn detect_mixed(&self, s: f64, coin: bool) -> Option<usize> {
        if coin {
            self.detect_by_second_arm(s)
        } else {
            self.detect_by_first_arm(s)
        }
    }

    /// Per-block information budget for the single-switch family:
    /// `4 delta^2` times the number of wrong pulls, i.e. arm-0 pulls
    /// strictly before the change point plus arm-1 pulls from it onward
    /// (`nu` is the within-block change point).
    pub fn info_budget(&self, nu: usize, delta: f64) -> f64 {
        let switch = nu - 1; // block-local 0-based offset of the change point
        let mut wrong = 0usize;
        for (i, &a) in self.actions.iter().enumerate() {
            if (i < switch && a == 0) || (i >= switch && a == 1) {
                wrong += 1;
            }
        }
        4.0 * delta * delta * wrong as f64
    }
}
