//! Dyadic suffix-window statistics and windowed confidence bounds.
//!
//! For a buffer of length `m`, the window set is `{2^k : 2^k <= m}`
//! (including `w = 1`). The windowed lower confidence bound takes the most
//! optimistic `AvgLast(w) - beta(w)` over that set; the upper bound takes
//! the most pessimistic `AvgLast(w) + beta(w)`. Recent windows discount
//! stale samples after a change point, which is what lets the leader policy
//! certify and demote arms without knowing the change points.

use alloc::{boxed::Box, vec::Vec};
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

/// Ordered reward samples for one arm within one epoch. Samples are only
/// appended or the whole buffer reset; suffix sums are maintained via prefix
/// sums so every windowed evaluation is `O(log m)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpochBuffer {
    /// `prefix[i]` is the sum of the first `i` entries; `prefix[0] = 0`.
    prefix: Vec<f64>,
}

impl EpochBuffer {
    pub fn new() -> Self {
        Self { prefix: Vec::new() }
    }

    /// Number of entries `m`.
    pub fn len(&self) -> usize {
        self.prefix.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Appends one sample.
    pub fn push(&mut self, x: f64) {
        if self.prefix.is_empty() {
            self.prefix.push(0.0);
        }
        let last = *self.prefix.last().unwrap();
        self.prefix.push(last + x);
    }

    /// Clears the buffer (start of a new epoch).
    pub fn reset(&mut self) {
        self.prefix.clear();
    }

    /// Average of the most recent `w` entries.
    pub fn avg_last(&self, w: usize) -> Result<f64> {
        let m = self.len();
        if w == 0 || w > m {
            return Err(Error::Contract(alloc::format!(
                "avg_last window {w} outside [1, {m}]"
            )));
        }
        Ok(self.suffix_mean(w))
    }

    #[inline]
    fn suffix_mean(&self, w: usize) -> f64 {
        let m = self.len();
        (self.prefix[m] - self.prefix[m - w]) / w as f64
    }
}

/// Iterator over the dyadic window set `{2^k : 2^k <= m}`; empty for `m = 0`.
pub fn win_set(m: usize) -> WinSet {
    WinSet { next: 1, cap: m }
}

#[derive(Debug, Clone)]
pub struct WinSet {
    next: usize,
    cap: usize,
}

impl Iterator for WinSet {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.next == 0 || self.next > self.cap {
            return None;
        }
        let w = self.next;
        self.next = w.checked_mul(2).unwrap_or(0);
        Some(w)
    }
}

/// Confidence radius `beta(w) = sqrt(2 (4 ln T + ln K) / w)` (natural log).
pub fn beta(w: usize, horizon: usize, num_arms: usize) -> f64 {
    debug_assert!(w >= 1 && horizon >= 2 && num_arms >= 1);
    let two_log_sum = 2.0 * (4.0 * math::ln(horizon as f64) + math::ln(num_arms as f64));
    math::sqrt(two_log_sum / w as f64)
}

/// Smallest `n` in `[1, T]` with `beta(n) <= delta / 2`, or `None` when even
/// `beta(T) > delta / 2`.
pub fn n_delta(horizon: usize, num_arms: usize, delta: f64) -> Option<usize> {
    if beta(horizon, horizon, num_arms) > delta / 2.0 {
        return None;
    }
    // beta is strictly decreasing in n; binary search the threshold.
    let (mut lo, mut hi) = (1usize, horizon);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if beta(mid, horizon, num_arms) <= delta / 2.0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// Confidence radius as a value: the standard `beta` for a given horizon and
/// arm count, or a substitute used by deterministic tests.
#[derive(Clone)]
pub struct RadiusFn {
    kind: RadiusKind,
}

#[derive(Clone)]
enum RadiusKind {
    /// `sqrt(two_log_sum / w)` with radii at dyadic windows precomputed.
    Standard {
        two_log_sum: f64,
        pow2: Box<[f64; 64]>,
    },
    Zero,
    Const(f64),
    Custom(fn(usize) -> f64),
}

impl RadiusFn {
    /// The radius used by the leader policy: `beta(w)` for this horizon/K.
    pub fn standard(horizon: usize, num_arms: usize) -> Self {
        debug_assert!(horizon >= 2 && num_arms >= 1);
        let two_log_sum = 2.0 * (4.0 * math::ln(horizon as f64) + math::ln(num_arms as f64));
        let mut pow2 = [0.0; 64];
        for (k, slot) in pow2.iter_mut().enumerate() {
            *slot = math::sqrt(two_log_sum / (1u64 << k) as f64);
        }
        Self {
            kind: RadiusKind::Standard {
                two_log_sum,
                pow2: Box::new(pow2),
            },
        }
    }

    /// Zero radius: LCB/UCB collapse to suffix averages. Test hook.
    pub fn zero() -> Self {
        Self {
            kind: RadiusKind::Zero,
        }
    }

    /// Constant radius for every window. Test hook.
    pub fn constant(radius: f64) -> Self {
        Self {
            kind: RadiusKind::Const(radius),
        }
    }

    /// Arbitrary substitute radius function. Test hook.
    pub fn custom(f: fn(usize) -> f64) -> Self {
        Self {
            kind: RadiusKind::Custom(f),
        }
    }

    /// Radius at window length `w`.
    pub fn eval(&self, w: usize) -> f64 {
        debug_assert!(w >= 1);
        match &self.kind {
            RadiusKind::Standard { two_log_sum, .. } => math::sqrt(two_log_sum / w as f64),
            RadiusKind::Zero => 0.0,
            RadiusKind::Const(r) => *r,
            RadiusKind::Custom(f) => f(w),
        }
    }

    /// Radius at window length `2^k`; table lookup on the standard radius.
    #[inline]
    fn eval_pow2(&self, k: u32) -> f64 {
        match &self.kind {
            RadiusKind::Standard { pow2, .. } => pow2[k as usize],
            _ => self.eval(1usize << k),
        }
    }
}

impl fmt::Debug for RadiusFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RadiusKind::Standard { two_log_sum, .. } => {
                write!(f, "RadiusFn::Standard(two_log_sum = {two_log_sum})")
            }
            RadiusKind::Zero => write!(f, "RadiusFn::Zero"),
            RadiusKind::Const(r) => write!(f, "RadiusFn::Const({r})"),
            RadiusKind::Custom(_) => write!(f, "RadiusFn::Custom"),
        }
    }
}

/// Windowed lower confidence bound: `max_w AvgLast(w) - radius(w)` over the
/// dyadic window set. Returns negative infinity on an empty buffer.
pub fn lcb_win(buffer: &EpochBuffer, radius: &RadiusFn) -> f64 {
    let m = buffer.len();
    let mut best = f64::NEG_INFINITY;
    let mut w = 1usize;
    let mut k = 0u32;
    while w <= m && w != 0 {
        let v = buffer.suffix_mean(w) - radius.eval_pow2(k);
        if v > best {
            best = v;
        }
        k += 1;
        w = w.checked_mul(2).unwrap_or(0);
    }
    best
}

/// Windowed upper confidence bound: `min_w AvgLast(w) + radius(w)`. Returns
/// positive infinity on an empty buffer.
pub fn ucb_win(buffer: &EpochBuffer, radius: &RadiusFn) -> f64 {
    let m = buffer.len();
    let mut best = f64::INFINITY;
    let mut w = 1usize;
    let mut k = 0u32;
    while w <= m && w != 0 {
        let v = buffer.suffix_mean(w) + radius.eval_pow2(k);
        if v < best {
            best = v;
        }
        k += 1;
        w = w.checked_mul(2).unwrap_or(0);
    }
    best
}
