//! Hard-instance families for the lower-bound experiments.
//!
//! Both families are two-armed and block-structured: the horizon splits into
//! `num_blocks` blocks of `m` rounds, and each block hides one latent index
//! `nu` drawn uniformly from the candidate set `{2, 2+l, ..., 2+(n-1)l}` of
//! within-block times. The segment means are `(S+delta, S-delta)` or its
//! swap, so every wrong pull costs exactly `delta` regret.
//!
//! - swap-window: inside each block, arm 1 (index 1) is satisficing exactly
//!   on a hidden length-`l` window starting at `nu`; arm 0 is satisficing
//!   elsewhere.
//! - single-switch: each block has a single change point at `nu`; arm 1 is
//!   satisficing before it, arm 0 from it onward.
//!
//! The `alternating` constructor builds the canonical two-armed class where
//! the satisficing arm swaps at every (equally spaced) change point.

use alloc::{format, vec, vec::Vec};
use rand::Rng;

use crate::env::{BlockGrid, Environment, MeanSchedule, NoiseSpec};
use crate::error::{Error, Result};
use crate::math;

/// Hard-instance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    SwapWindow,
    SingleSwitch,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SwapWindow => "swap-window",
            Family::SingleSwitch => "single-switch",
        }
    }
}

/// Parameters of a generated hard-instance family.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParams {
    pub family: Family,
    /// Horizon `T`.
    pub horizon: usize,
    /// Segment count `L` of every generated instance.
    pub segments: usize,
    /// Gap `delta` to the threshold on both sides.
    pub delta: f64,
    /// Satisficing threshold `S`.
    pub threshold: f64,
    /// Block length `m`.
    pub block_len: usize,
    /// Number of candidate latent positions `n`.
    pub num_candidates: usize,
    /// Window length `l`.
    pub window_len: usize,
    /// Sample-split parameter `r` (single-switch only).
    pub split: Option<usize>,
    /// Number of blocks.
    pub num_blocks: usize,
}

impl InstanceParams {
    /// `i`-th candidate within-block time, `2 + i * l`.
    pub fn candidate(&self, i: usize) -> usize {
        debug_assert!(i < self.num_candidates);
        2 + i * self.window_len
    }

    /// The candidate set, ascending.
    pub fn candidates(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_candidates).map(|i| self.candidate(i))
    }

    /// Whether a within-block time is a member of the candidate set.
    pub fn is_candidate(&self, tau: usize) -> bool {
        tau >= 2
            && (tau - 2).is_multiple_of(self.window_len)
            && (tau - 2) / self.window_len < self.num_candidates
    }

    /// Margin condition that makes the conditional Fano right-hand side at
    /// least 1/2 for the swap-window family:
    /// `4 delta^2 l + ln 2 <= (ln n) / 2`. Small desk-scale instances may
    /// fail it; callers report rather than reject.
    pub fn fano_margin_ok(&self) -> bool {
        4.0 * self.delta * self.delta * self.window_len as f64 + core::f64::consts::LN_2
            <= 0.5 * math::ln(self.num_candidates as f64)
    }

    pub fn block_grid(&self) -> BlockGrid {
        BlockGrid {
            block_len: self.block_len,
            num_blocks: self.num_blocks,
        }
    }

    /// Builds the mean schedule for a latent vector.
    pub fn schedule(&self, nu: &NuVector) -> Result<MeanSchedule> {
        match self.family {
            Family::SwapWindow => swap_window_instance(self, nu),
            Family::SingleSwitch => single_switch_instance(self, nu),
        }
    }

    /// Builds a unit-Gaussian environment carrying block metadata.
    pub fn environment(&self, nu: &NuVector) -> Result<Environment> {
        Ok(
            Environment::new(self.schedule(nu)?, self.threshold, NoiseSpec::UnitGaussian)?
                .with_blocks(self.block_grid()),
        )
    }

    fn validate_nu(&self, nu: &NuVector) -> Result<()> {
        if nu.0.len() != self.num_blocks {
            return Err(Error::Contract(format!(
                "nu has {} components, expected {}",
                nu.0.len(),
                self.num_blocks
            )));
        }
        for &v in &nu.0 {
            if !self.is_candidate(v) {
                return Err(Error::Contract(format!("{v} is not a candidate position")));
            }
        }
        Ok(())
    }
}

/// Per-block latent indices, one candidate position per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuVector(pub Vec<usize>);

/// Largest usable hypothesis count for an information budget `y`: returns
/// `x = ceil(sqrt(y))`, which satisfies `x ln x <= y` and
/// `ln x >= (ln y) / 2` for every `y >= 4`.
pub fn choose_hypothesis_count(y: f64) -> Result<usize> {
    if y.is_nan() || y < 4.0 {
        return Err(Error::Domain(format!("need y >= 4, got {y}")));
    }
    Ok(math::ceil(math::sqrt(y)) as usize)
}

fn check_gap(delta: f64, threshold: f64) -> Result<()> {
    let cap = threshold.min(1.0 - threshold);
    if !(delta > 0.0 && delta <= cap) {
        return Err(Error::Param(format!(
            "delta must lie in (0, min(S, 1-S)] = (0, {cap}] so means stay in [0, 1]; got {delta}"
        )));
    }
    Ok(())
}

/// Parameters for the swap-window family.
///
/// Requires `L` odd with `L >= 3`, `2T/(L-1)` integral, `delta^2 T >= L`,
/// and `0 < delta <= min(S, 1-S)`. The hypothesis count follows the square-root
/// recipe for the budget `16 delta^2 (m - 2)` and is shrunk (recomputing
/// `l`) until `n l <= m - 2`.
pub fn swap_window_params(
    horizon: usize,
    segments: usize,
    delta: f64,
    threshold: f64,
) -> Result<InstanceParams> {
    if segments < 3 || segments.is_multiple_of(2) {
        return Err(Error::Param(format!(
            "swap-window requires odd L >= 3, got L = {segments}"
        )));
    }
    check_gap(delta, threshold)?;
    if !(2 * horizon).is_multiple_of(segments - 1) {
        return Err(Error::Param(format!(
            "swap-window requires 2T/(L-1) integral; T = {horizon}, L = {segments}"
        )));
    }
    if delta * delta * (horizon as f64) < segments as f64 {
        return Err(Error::Param(format!(
            "swap-window requires delta^2 T >= L; delta = {delta}, T = {horizon}, L = {segments}"
        )));
    }
    let m = 2 * horizon / (segments - 1);
    let budget = 16.0 * delta * delta * (m as f64 - 2.0);
    if budget < 4.0 {
        return Err(Error::Param(format!(
            "block length m = {m} leaves information budget {budget} < 4"
        )));
    }
    let window = |n: usize| -> usize {
        if n < 2 {
            1
        } else {
            (math::ceil(math::ln(n as f64) / (16.0 * delta * delta)) as usize).max(1)
        }
    };
    let mut n = choose_hypothesis_count(budget)?;
    let mut l = window(n);
    while n >= 1 && n * l > m - 2 {
        n -= 1;
        l = window(n);
    }
    if n == 0 {
        return Err(Error::Param(format!(
            "no feasible candidate count: block length m = {m} too small for window {l}"
        )));
    }
    Ok(InstanceParams {
        family: Family::SwapWindow,
        horizon,
        segments,
        delta,
        threshold,
        block_len: m,
        num_candidates: n,
        window_len: l,
        split: None,
        num_blocks: (segments - 1) / 2,
    })
}

/// Parameters for the single-switch family.
///
/// Requires `L` even with `L >= 2`, `2T/L` integral, `delta^2 T >= 13 L`,
/// and `0 < delta <= min(S, 1-S)`. The hypothesis count follows the square-root
/// recipe for the budget `(delta^2 / 6)(m - 1)`; `l = ceil(6 ln n / delta^2) + 1`
/// and `r = ceil(l / 2)`, with `n` shrunk until `n l <= m - 1`.
pub fn single_switch_params(
    horizon: usize,
    segments: usize,
    delta: f64,
    threshold: f64,
) -> Result<InstanceParams> {
    if segments < 2 || segments % 2 == 1 {
        return Err(Error::Param(format!(
            "single-switch requires even L >= 2, got L = {segments}"
        )));
    }
    check_gap(delta, threshold)?;
    if !(2 * horizon).is_multiple_of(segments) {
        return Err(Error::Param(format!(
            "single-switch requires 2T/L integral; T = {horizon}, L = {segments}"
        )));
    }
    if delta * delta * (horizon as f64) < 13.0 * segments as f64 {
        return Err(Error::Param(format!(
            "single-switch requires delta^2 T >= 13 L; delta = {delta}, T = {horizon}, L = {segments}"
        )));
    }
    let m = 2 * horizon / segments;
    let budget = delta * delta / 6.0 * (m as f64 - 1.0);
    if budget < 4.0 {
        return Err(Error::Param(format!(
            "block length m = {m} leaves information budget {budget} < 4"
        )));
    }
    let window =
        |n: usize| -> usize { math::ceil(6.0 * math::ln(n as f64) / (delta * delta)) as usize + 1 };
    let mut n = choose_hypothesis_count(budget)?;
    let mut l = window(n);
    while n >= 2 && n * l > m - 1 {
        n -= 1;
        l = window(n);
    }
    if n < 2 || n * l > m - 1 {
        return Err(Error::Param(format!(
            "no feasible candidate count >= 2: block length m = {m}, window {l}"
        )));
    }
    let r = l.div_ceil(2);
    debug_assert!((1..=l).contains(&r) && l >= 2 && l - r >= 1);
    Ok(InstanceParams {
        family: Family::SingleSwitch,
        horizon,
        segments,
        delta,
        threshold,
        block_len: m,
        num_candidates: n,
        window_len: l,
        split: Some(r),
        num_blocks: segments / 2,
    })
}

/// Swap-window schedule: in block `b` (0-based), means are
/// `(S-delta, S+delta)` on the hidden window `[nu_abs, nu_abs + l - 1]` and
/// `(S+delta, S-delta)` elsewhere.
pub fn swap_window_instance(params: &InstanceParams, nu: &NuVector) -> Result<MeanSchedule> {
    if params.family != Family::SwapWindow {
        return Err(Error::Contract("params are not swap-window".into()));
    }
    params.validate_nu(nu)?;
    let (s, d) = (params.threshold, params.delta);
    let off = vec![s + d, s - d];
    let on = vec![s - d, s + d];

    let mut cps = vec![1usize];
    let mut means = vec![off.clone()];
    for (b, &v) in nu.0.iter().enumerate() {
        let start = b * params.block_len + v;
        cps.push(start);
        means.push(on.clone());
        cps.push(start + params.window_len);
        means.push(off.clone());
    }
    cps.push(params.horizon + 1);
    MeanSchedule::from_segments(params.horizon, cps, means)
}

/// Single-switch schedule: block `b` has means `(S-delta, S+delta)` before
/// its change point and `(S+delta, S-delta)` from it onward.
pub fn single_switch_instance(params: &InstanceParams, nu: &NuVector) -> Result<MeanSchedule> {
    if params.family != Family::SingleSwitch {
        return Err(Error::Contract("params are not single-switch".into()));
    }
    params.validate_nu(nu)?;
    let (s, d) = (params.threshold, params.delta);
    let pre = vec![s - d, s + d];
    let post = vec![s + d, s - d];

    let mut cps = vec![1usize];
    let mut means = vec![pre.clone()];
    for (b, &v) in nu.0.iter().enumerate() {
        let block_start = b * params.block_len + 1;
        if b > 0 {
            cps.push(block_start);
            means.push(pre.clone());
        }
        cps.push(block_start + v - 1);
        means.push(post.clone());
    }
    cps.push(params.horizon + 1);
    MeanSchedule::from_segments(params.horizon, cps, means)
}

/// Draws one latent index per block, i.i.d. uniform over the candidate set.
pub fn sample_nu<R: Rng + ?Sized>(params: &InstanceParams, rng: &mut R) -> NuVector {
    let nu = (0..params.num_blocks)
        .map(|_| params.candidate(rng.gen_range(0..params.num_candidates)))
        .collect();
    NuVector(nu)
}

/// Two-armed schedule with `L` equally spaced segments whose satisficing arm
/// alternates: segment `l` has means `(S+delta, S-delta)` for even `l` and
/// the swap for odd `l`.
pub fn alternating_instance(
    horizon: usize,
    segments: usize,
    delta: f64,
    threshold: f64,
) -> Result<MeanSchedule> {
    if segments == 0 || segments > horizon {
        return Err(Error::Param(format!(
            "need 1 <= L <= T, got L = {segments}, T = {horizon}"
        )));
    }
    check_gap(delta, threshold)?;
    let (s, d) = (threshold, delta);
    let cps: Vec<usize> = (0..=segments).map(|l| 1 + l * horizon / segments).collect();
    let means: Vec<Vec<f64>> = (0..segments)
        .map(|l| {
            if l % 2 == 0 {
                vec![s + d, s - d]
            } else {
                vec![s - d, s + d]
            }
        })
        .collect();
    MeanSchedule::from_segments(horizon, cps, means)
}

/// Rounds a horizon down to the nearest value where the family's block
/// length is integral (`(L-1)/2 | T` for swap-window, `(L/2) | T` for
/// single-switch).
pub fn round_horizon_down(horizon: usize, segments: usize, family: Family) -> Result<usize> {
    let half_blocks = match family {
        Family::SwapWindow => {
            if segments < 3 || segments.is_multiple_of(2) {
                return Err(Error::Param("swap-window requires odd L >= 3".into()));
            }
            (segments - 1) / 2
        }
        Family::SingleSwitch => {
            if segments < 2 || segments % 2 == 1 {
                return Err(Error::Param("single-switch requires even L >= 2".into()));
            }
            segments / 2
        }
    };
    let rounded = horizon - horizon % half_blocks;
    if rounded == 0 {
        return Err(Error::Param(format!(
            "horizon {horizon} too small for {} blocks",
            half_blocks
        )));
    }
    Ok(rounded)
}
