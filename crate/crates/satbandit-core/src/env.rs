//! Piecewise-stationary environments, reward sampling, and satisficing regret.
//!
//! Times are 1-based: rounds run over `t = 1..=T`. Arms are 0-based indices
//! `0..K`. Mean rewards are constant on segments delimited by change points
//! `1 = T_0 < T_1 < ... < T_L = T + 1`, where segment `l` covers the rounds
//! `[T_l, T_{l+1} - 1]`.

use alloc::{format, vec, vec::Vec};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Arm index, `0..K`.
pub type Arm = usize;

/// Per-arm mean rewards, constant on segments of `[1, T]`.
///
/// Stored segment-wise (change points plus one mean vector per segment), so
/// memory is `O(LK)` rather than `O(TK)`. All means lie in `[0, 1]` and
/// adjacent segments differ in at least one arm's mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanSchedule {
    num_arms: usize,
    horizon: usize,
    /// `1 = T_0 < T_1 < ... < T_L = T + 1`.
    change_points: Vec<usize>,
    /// One length-`K` mean vector per segment.
    segment_means: Vec<Vec<f64>>,
}

impl MeanSchedule {
    /// Builds a schedule from change points (including the sentinels `1` and
    /// `T + 1`) and one mean vector per segment.
    pub fn from_segments(
        horizon: usize,
        change_points: Vec<usize>,
        segment_means: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Param("horizon must be positive".into()));
        }
        if change_points.len() < 2 {
            return Err(Error::Param(
                "change_points must contain at least the sentinels 1 and T+1".into(),
            ));
        }
        if change_points[0] != 1 || *change_points.last().unwrap() != horizon + 1 {
            return Err(Error::Param(format!(
                "change_points must start at 1 and end at T+1 = {}",
                horizon + 1
            )));
        }
        if !change_points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Param(
                "change_points must be strictly increasing".into(),
            ));
        }
        if segment_means.len() != change_points.len() - 1 {
            return Err(Error::Param(format!(
                "expected {} segment mean vectors, got {}",
                change_points.len() - 1,
                segment_means.len()
            )));
        }
        let num_arms = segment_means[0].len();
        if num_arms == 0 {
            return Err(Error::Param("at least one arm is required".into()));
        }
        for (l, means) in segment_means.iter().enumerate() {
            if means.len() != num_arms {
                return Err(Error::Param(format!(
                    "segment {l} has {} means but K = {num_arms}",
                    means.len()
                )));
            }
            if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
                return Err(Error::Param(format!(
                    "segment {l} has a mean outside [0, 1]"
                )));
            }
        }
        for l in 1..segment_means.len() {
            if segment_means[l] == segment_means[l - 1] {
                return Err(Error::Param(format!(
                    "segments {} and {l} have identical means and must be merged",
                    l - 1
                )));
            }
        }
        Ok(Self {
            num_arms,
            horizon,
            change_points,
            segment_means,
        })
    }

    /// Builds a schedule from a dense `T x K` matrix of per-round means.
    /// Intended for tests; production instances are built segment-wise.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Param(
                "dense schedule must have at least one round".into(),
            ));
        }
        let horizon = rows.len();
        let mut change_points = vec![1];
        let mut segment_means = vec![rows[0].clone()];
        for (i, row) in rows.iter().enumerate().skip(1) {
            if row != segment_means.last().unwrap() {
                change_points.push(i + 1);
                segment_means.push(row.clone());
            }
        }
        change_points.push(horizon + 1);
        Self::from_segments(horizon, change_points, segment_means)
    }

    /// Single-segment schedule with the given means on every round.
    pub fn constant(horizon: usize, means: Vec<f64>) -> Result<Self> {
        Self::from_segments(horizon, vec![1, horizon + 1], vec![means])
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of stationary segments `L`.
    pub fn num_segments(&self) -> usize {
        self.segment_means.len()
    }

    /// All change points, including the sentinels `1` and `T + 1`.
    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    /// Interior change points `T_1, ..., T_{L-1}` (empty when stationary).
    pub fn interior_change_points(&self) -> &[usize] {
        &self.change_points[1..self.change_points.len() - 1]
    }

    /// Mean vector of segment `l`.
    pub fn segment_means(&self, segment: usize) -> &[f64] {
        &self.segment_means[segment]
    }

    /// Index of the segment containing round `t`.
    pub fn segment_of(&self, t: usize) -> Result<usize> {
        self.check_time(t)?;
        // partition_point returns the count of change points <= t; the first
        // sentinel is 1 <= t, so the containing segment is that count - 1.
        Ok(self.change_points.partition_point(|&cp| cp <= t) - 1)
    }

    /// Mean rewards `(mu_t(a))_a` at round `t`.
    pub fn means_at(&self, t: usize) -> Result<&[f64]> {
        let l = self.segment_of(t)?;
        Ok(&self.segment_means[l])
    }

    /// Mean reward of `arm` at round `t`.
    pub fn mean(&self, t: usize, arm: Arm) -> Result<f64> {
        self.check_arm(arm)?;
        Ok(self.means_at(t)?[arm])
    }

    /// Number of stationary segments of the restriction to `[s, t]`:
    /// `1` plus the number of rounds `j` in `[s, t-1]` where some arm's mean
    /// changes between `j` and `j + 1`.
    pub fn segment_count(&self, s: usize, t: usize) -> Result<usize> {
        self.check_time(s)?;
        self.check_time(t)?;
        if s > t {
            return Err(Error::Range(format!("need s <= t, got s = {s}, t = {t}")));
        }
        let interior = self.interior_change_points();
        // Count interior change points in (s, t].
        let hi = interior.partition_point(|&cp| cp <= t);
        let lo = interior.partition_point(|&cp| cp <= s);
        Ok(1 + hi - lo)
    }

    fn check_time(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.horizon {
            return Err(Error::Range(format!(
                "round {t} outside [1, {}]",
                self.horizon
            )));
        }
        Ok(())
    }

    fn check_arm(&self, arm: Arm) -> Result<()> {
        if arm >= self.num_arms {
            return Err(Error::Range(format!(
                "arm {arm} outside [0, {})",
                self.num_arms
            )));
        }
        Ok(())
    }
}

/// Observation noise added to the mean reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseSpec {
    /// Independent standard Gaussian noise (1-sub-Gaussian).
    UnitGaussian,
    /// No noise; rewards equal means. For deterministic walkthroughs only,
    /// never for statistical suites.
    Zero,
}

impl NoiseSpec {
    /// Draws one noise sample.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            NoiseSpec::UnitGaussian => rng.sample(StandardNormal),
            NoiseSpec::Zero => 0.0,
        }
    }
}

/// Block layout metadata attached to hard instances so episode runs can
/// record per-block wrong-pull counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockGrid {
    /// Rounds per block (`m`).
    pub block_len: usize,
    /// Number of blocks; blocks tile `[1, num_blocks * block_len]`.
    pub num_blocks: usize,
}

impl BlockGrid {
    /// Block index of round `t`, if `t` falls inside the tiled prefix.
    pub fn block_of(&self, t: usize) -> Option<usize> {
        let idx = (t - 1) / self.block_len;
        (idx < self.num_blocks).then_some(idx)
    }
}

/// A bandit environment: a mean schedule, a satisficing threshold, and a
/// noise model. Immutable once built; safe to share across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    schedule: MeanSchedule,
    threshold: f64,
    noise: NoiseSpec,
    blocks: Option<BlockGrid>,
}

impl Environment {
    pub fn new(schedule: MeanSchedule, threshold: f64, noise: NoiseSpec) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::Param("threshold must be finite".into()));
        }
        Ok(Self {
            schedule,
            threshold,
            noise,
            blocks: None,
        })
    }

    /// Attaches hard-instance block metadata.
    pub fn with_blocks(mut self, blocks: BlockGrid) -> Self {
        self.blocks = Some(blocks);
        self
    }

    pub fn schedule(&self) -> &MeanSchedule {
        &self.schedule
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn noise(&self) -> NoiseSpec {
        self.noise
    }

    pub fn blocks(&self) -> Option<BlockGrid> {
        self.blocks
    }

    pub fn num_arms(&self) -> usize {
        self.schedule.num_arms()
    }

    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    /// Samples the reward of pulling `arm` at round `t`.
    pub fn sample_reward<R: Rng + ?Sized>(&self, t: usize, arm: Arm, rng: &mut R) -> Result<f64> {
        let mean = self.schedule.mean(t, arm)?;
        Ok(mean + self.noise.sample(rng))
    }
}

/// Full interaction record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    /// Arm pulled at each round, `actions[t - 1]` for round `t`.
    pub actions: Vec<Arm>,
    /// Observed rewards, aligned with `actions`.
    pub rewards: Vec<f64>,
    /// Per-block counts of non-satisficing pulls; present only when the
    /// environment carried block metadata.
    pub wrong_pull_counts: Option<Vec<u64>>,
}

/// Which structural assumptions a `(schedule, threshold)` pair satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssumptionFlags {
    /// Every segment has some arm with mean strictly above the threshold.
    pub realizable: bool,
    /// A single arm is strictly satisficing on every segment.
    pub always_realizable: bool,
    /// No arm ever transitions from satisficing to non-satisficing.
    pub no_down_crossing: bool,
}

/// Checks realizability, always-realizability, and no-down-crossing for the
/// given schedule and threshold.
pub fn check_assumptions(schedule: &MeanSchedule, threshold: f64) -> AssumptionFlags {
    let segments = schedule.num_segments();
    let arms = schedule.num_arms();

    let realizable =
        (0..segments).all(|l| schedule.segment_means(l).iter().any(|&m| m > threshold));

    let always_realizable =
        (0..arms).any(|a| (0..segments).all(|l| schedule.segment_means(l)[a] > threshold));

    let no_down_crossing = (0..arms).all(|a| {
        let mut seen_satisficing = false;
        for l in 0..segments {
            let sat = schedule.segment_means(l)[a] >= threshold;
            if seen_satisficing && !sat {
                return false;
            }
            seen_satisficing = seen_satisficing || sat;
        }
        true
    });

    AssumptionFlags {
        realizable,
        always_realizable,
        no_down_crossing,
    }
}

/// Cumulative satisficing regret of an action sequence: the sum over rounds
/// of `(S - mu_t(a_t))_+`. Uses means, never realized rewards.
pub fn satisficing_regret(schedule: &MeanSchedule, threshold: f64, actions: &[Arm]) -> Result<f64> {
    if actions.len() != schedule.horizon() {
        return Err(Error::Contract(format!(
            "actions has length {}, horizon is {}",
            actions.len(),
            schedule.horizon()
        )));
    }
    let mut total = 0.0;
    let cps = schedule.change_points();
    for l in 0..schedule.num_segments() {
        let means = schedule.segment_means(l);
        for t in cps[l]..cps[l + 1] {
            let arm = actions[t - 1];
            if arm >= schedule.num_arms() {
                return Err(Error::Range(format!(
                    "action at round {t} is arm {arm}, K = {}",
                    schedule.num_arms()
                )));
            }
            let shortfall = threshold - means[arm];
            if shortfall > 0.0 {
                total += shortfall;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_segment() -> MeanSchedule {
        // (0.9, 0.1) on t in [1,5], (0.1, 0.9) on t in [6,10].
        MeanSchedule::from_segments(10, vec![1, 6, 11], vec![vec![0.9, 0.1], vec![0.1, 0.9]])
            .unwrap()
    }

    #[test]
    fn segment_count_examples() {
        let s = two_segment();
        assert_eq!(s.segment_count(1, 10).unwrap(), 2);
        assert_eq!(s.segment_count(1, 5).unwrap(), 1);
        assert_eq!(s.segment_count(6, 10).unwrap(), 1);
        assert_eq!(s.segment_count(5, 6).unwrap(), 2);

        let c = MeanSchedule::constant(20, vec![0.7]).unwrap();
        for (a, b) in [(1, 20), (3, 7), (20, 20)] {
            assert_eq!(c.segment_count(a, b).unwrap(), 1);
        }
    }

    #[test]
    fn segment_count_range_errors() {
        let s = two_segment();
        assert!(matches!(s.segment_count(0, 5), Err(Error::Range(_))));
        assert!(matches!(s.segment_count(1, 11), Err(Error::Range(_))));
        assert!(matches!(s.segment_count(7, 3), Err(Error::Range(_))));
    }

    #[test]
    fn means_at_examples() {
        let s = two_segment();
        assert_eq!(s.means_at(5).unwrap(), &[0.9, 0.1]);
        assert_eq!(s.means_at(6).unwrap(), &[0.1, 0.9]);
        assert!(matches!(s.means_at(0), Err(Error::Range(_))));
        assert!(matches!(s.means_at(11), Err(Error::Range(_))));

        let single = MeanSchedule::constant(4, vec![0.7]).unwrap();
        assert_eq!(single.means_at(1).unwrap(), &[0.7]);
    }

    #[test]
    fn dense_constructor_matches_segments() {
        let rows: Vec<Vec<f64>> = (1..=10)
            .map(|t| {
                if t <= 5 {
                    vec![0.9, 0.1]
                } else {
                    vec![0.1, 0.9]
                }
            })
            .collect();
        let dense = MeanSchedule::from_dense(&rows).unwrap();
        assert_eq!(dense, two_segment());
        assert_eq!(dense.num_segments(), 2);
    }

    #[test]
    fn schedule_validation() {
        // Identical adjacent segments rejected.
        let err = MeanSchedule::from_segments(10, vec![1, 6, 11], vec![vec![0.5], vec![0.5]]);
        assert!(matches!(err, Err(Error::Param(_))));
        // Means outside [0, 1] rejected.
        let err = MeanSchedule::constant(5, vec![1.2]);
        assert!(matches!(err, Err(Error::Param(_))));
        // Non-increasing change points rejected.
        let err = MeanSchedule::from_segments(
            10,
            vec![1, 6, 6, 11],
            vec![vec![0.1], vec![0.2], vec![0.3]],
        );
        assert!(matches!(err, Err(Error::Param(_))));
    }

    #[test]
    fn zero_noise_reward_is_mean() {
        let env = Environment::new(two_segment(), 0.5, NoiseSpec::Zero).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(env.sample_reward(1, 0, &mut rng).unwrap(), 0.9);
        assert_eq!(env.sample_reward(6, 0, &mut rng).unwrap(), 0.1);
        assert!(matches!(
            env.sample_reward(1, 2, &mut rng),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn gaussian_reward_replays_seeded_draw() {
        let env = Environment::new(two_segment(), 0.5, NoiseSpec::UnitGaussian).unwrap();
        let r = env
            .sample_reward(1, 0, &mut ChaCha8Rng::seed_from_u64(42))
            .unwrap();
        let noise: f64 = ChaCha8Rng::seed_from_u64(42).sample(StandardNormal);
        assert_eq!(r, 0.9 + noise);
    }

    #[test]
    fn gaussian_reward_law_of_large_numbers() {
        let env = Environment::new(two_segment(), 0.5, NoiseSpec::UnitGaussian).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let sum: f64 = (0..n)
            .map(|_| env.sample_reward(3, 0, &mut rng).unwrap())
            .sum();
        let mean = sum / n as f64;
        assert!(
            (mean - 0.9).abs() < 4.0 / (n as f64).sqrt(),
            "mean = {mean}"
        );
    }

    #[test]
    fn assumption_flags() {
        // Alternating satisficing arm: realizable only.
        let swap = two_segment();
        let f = check_assumptions(&swap, 0.5);
        assert!(f.realizable && !f.always_realizable && !f.no_down_crossing);

        // Up-crossing instance: all three hold.
        let up =
            MeanSchedule::from_segments(10, vec![1, 6, 11], vec![vec![0.8, 0.2], vec![0.8, 0.7]])
                .unwrap();
        let f = check_assumptions(&up, 0.5);
        assert!(f.realizable && f.always_realizable && f.no_down_crossing);

        // Nothing satisficing: only no-down-crossing holds.
        let low = MeanSchedule::constant(10, vec![0.4, 0.4]).unwrap();
        let f = check_assumptions(&low, 0.5);
        assert!(!f.realizable && !f.always_realizable && f.no_down_crossing);
    }

    #[test]
    fn no_down_crossing_is_monotone_under_truncation() {
        // Truncating the horizon preserves the flag.
        let s = MeanSchedule::from_segments(
            12,
            vec![1, 5, 9, 13],
            vec![vec![0.2, 0.8], vec![0.6, 0.8], vec![0.7, 0.8]],
        )
        .unwrap();
        assert!(check_assumptions(&s, 0.5).no_down_crossing);
        // Truncate to [1, 8]: first two segments only.
        let trunc =
            MeanSchedule::from_segments(8, vec![1, 5, 9], vec![vec![0.2, 0.8], vec![0.6, 0.8]])
                .unwrap();
        assert!(check_assumptions(&trunc, 0.5).no_down_crossing);
    }

    #[test]
    fn regret_examples() {
        let s = MeanSchedule::constant(3, vec![0.9, 0.1]).unwrap();
        // Always satisficing: zero regret.
        assert_eq!(satisficing_regret(&s, 0.5, &[0, 0, 0]).unwrap(), 0.0);
        // (2, 2, 1) in 1-based arms = (1, 1, 0) here: 0.4 + 0.4 + 0.
        let r = satisficing_regret(&s, 0.5, &[1, 1, 0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        // Length mismatch is a contract error.
        assert!(matches!(
            satisficing_regret(&s, 0.5, &[0, 0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn regret_additive_over_partition() {
        let s = two_segment();
        let actions: Vec<Arm> = (0..10).map(|i| i % 2).collect();
        let total = satisficing_regret(&s, 0.5, &actions).unwrap();

        // Split at t = 5 / t = 6 and recompute on restrictions.
        let first = MeanSchedule::constant(5, vec![0.9, 0.1]).unwrap();
        let second = MeanSchedule::constant(5, vec![0.1, 0.9]).unwrap();
        let r1 = satisficing_regret(&first, 0.5, &actions[..5]).unwrap();
        let r2 = satisficing_regret(&second, 0.5, &actions[5..]).unwrap();
        assert!((total - (r1 + r2)).abs() < 1e-12);
    }
}
