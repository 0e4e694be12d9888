//! Closed-form information-theoretic and regret-bound evaluators.
//!
//! These are numeric right-hand sides: KL divergences between unit-variance
//! Gaussians, Fano-type identification-error floors, the transcript KL
//! separation of the swap-window family, and the two regret-bound formulas
//! (the per-segment logarithmic bound for the windowed leader policy and
//! the horizon-independent bound under up-crossing-only environments).

use core::f64::consts::LN_2;

use crate::env::{check_assumptions, MeanSchedule};
use crate::error::{Error, Result};
use crate::instances::InstanceParams;
use crate::math;

/// KL divergence between unit-variance Gaussians: `(mu1 - mu2)^2 / 2`.
pub fn gaussian_kl(mu1: f64, mu2: f64) -> f64 {
    let d = mu1 - mu2;
    d * d / 2.0
}

/// Transcript KL between two swap-window instances that differ in one
/// block's window position: `0` when `tau = tau'`, else `4 delta^2 l`
/// (each of the `2l` disagreement rounds contributes `2 delta^2` whichever
/// arm is pulled).
pub fn swap_pairwise_kl(params: &InstanceParams, tau: usize, tau_prime: usize) -> f64 {
    if tau == tau_prime {
        0.0
    } else {
        4.0 * params.delta * params.delta * params.window_len as f64
    }
}

/// Average of `swap_pairwise_kl` over ordered candidate pairs:
/// `4 delta^2 l (n - 1) / n` (the diagonal is zero).
pub fn swap_avg_pairwise_kl(params: &InstanceParams) -> f64 {
    let n = params.num_candidates as f64;
    4.0 * params.delta * params.delta * params.window_len as f64 * (n - 1.0) / n
}

/// Brute-force transcript KL between two schedules of equal shape: the sum
/// over rounds of the per-round reward KL, which must not depend on the arm
/// pulled (as in the constructed families, where disagreeing rounds swap the
/// two means). Errors when a round's KL is action-dependent, since the
/// transcript KL is then policy-dependent and this oracle does not apply.
pub fn schedule_kl(a: &MeanSchedule, b: &MeanSchedule) -> Result<f64> {
    if a.horizon() != b.horizon() || a.num_arms() != b.num_arms() {
        return Err(Error::Contract("schedules must share T and K".into()));
    }
    let mut total = 0.0;
    for t in 1..=a.horizon() {
        let ma = a.means_at(t)?;
        let mb = b.means_at(t)?;
        if ma == mb {
            continue;
        }
        let kl0 = gaussian_kl(ma[0], mb[0]);
        for arm in 1..a.num_arms() {
            if gaussian_kl(ma[arm], mb[arm]) != kl0 {
                return Err(Error::Contract(alloc::format!(
                    "round {t}: per-arm KLs differ, transcript KL is policy-dependent"
                )));
            }
        }
        total += kl0;
    }
    Ok(total)
}

/// Identification-error floor `1 - (info + ln 2) / ln V` for `V` hypotheses
/// under an information bound `info`. May be negative (vacuous); values are
/// returned unclamped so vacuous bounds stay visible.
pub fn fano_rhs(info: f64, hypotheses: usize) -> Result<f64> {
    if hypotheses < 2 {
        return Err(Error::Domain(alloc::format!(
            "need at least 2 hypotheses, got {hypotheses}"
        )));
    }
    if info.is_nan() || info < 0.0 {
        return Err(Error::Domain(alloc::format!(
            "information must be >= 0, got {info}"
        )));
    }
    Ok(1.0 - (info + LN_2) / math::ln(hypotheses as f64))
}

/// Conditional variant fed with the average pairwise KL over the reference
/// and hypothesis pair: `1 - (avg_kl + ln 2) / ln U`.
pub fn conditional_fano_rhs(pairwise_kl_average: f64, hypotheses: usize) -> Result<f64> {
    fano_rhs(pairwise_kl_average, hypotheses)
}

/// Bayesian regret floor of the swap-window family under the uniform prior:
/// `(L - 1) ln n / 256`, valid for every policy.
pub fn swap_bayes_regret_floor(params: &InstanceParams) -> f64 {
    (params.segments as f64 - 1.0) * math::ln(params.num_candidates as f64) / 256.0
}

/// Per-segment logarithmic regret bound for the windowed leader policy:
/// `sum_l sum_{a: mu_{a,l} < S} (1 / gap_{a,l} + gap_{a,l} / best_l^2) ln T`
/// where `gap_{a,l} = S - mu_{a,l}` and `best_l = max_a mu_{a,l} - S`.
/// Requires realizability.
pub fn windowed_regret_bound(
    schedule: &MeanSchedule,
    threshold: f64,
    horizon: usize,
) -> Result<f64> {
    if !check_assumptions(schedule, threshold).realizable {
        return Err(Error::Assumption(
            "some segment has no arm with mean strictly above the threshold".into(),
        ));
    }
    let log_t = math::ln(horizon as f64);
    let mut total = 0.0;
    for l in 0..schedule.num_segments() {
        let means = schedule.segment_means(l);
        let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - threshold;
        for &mu in means {
            if mu < threshold {
                let gap = threshold - mu;
                total += (1.0 / gap + gap / (best * best)) * log_t;
            }
        }
    }
    Ok(total)
}

/// Horizon-independent regret bound for the empirical-mean threshold policy
/// under an always-satisficing arm and no down-crossings:
/// `sum_{a: gap_min(a) > 0} gap_max(a) (1 + 1/gap_min(a)^2 + 1/best^2)`
/// with `best = min_l (mu_{a*,l} - S)` for the best always-satisficing arm.
pub fn constant_regret_bound(schedule: &MeanSchedule, threshold: f64) -> Result<f64> {
    let flags = check_assumptions(schedule, threshold);
    if !flags.always_realizable {
        return Err(Error::Assumption(
            "no arm is strictly satisficing on every segment".into(),
        ));
    }
    if !flags.no_down_crossing {
        return Err(Error::Assumption(
            "some arm transitions from satisficing to non-satisficing".into(),
        ));
    }
    let segments = schedule.num_segments();
    let arms = schedule.num_arms();

    // Best always-satisficing arm: maximal worst-segment margin.
    let best_margin = (0..arms)
        .map(|a| {
            (0..segments)
                .map(|l| schedule.segment_means(l)[a] - threshold)
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    debug_assert!(best_margin > 0.0);

    let mut total = 0.0;
    for a in 0..arms {
        let mut gap_min = f64::INFINITY;
        let mut gap_max: f64 = 0.0;
        for l in 0..segments {
            let gap = threshold - schedule.segment_means(l)[a];
            if gap > 0.0 {
                gap_min = gap_min.min(gap);
                gap_max = gap_max.max(gap);
            }
        }
        if gap_max > 0.0 {
            total +=
                gap_max * (1.0 + 1.0 / (gap_min * gap_min) + 1.0 / (best_margin * best_margin));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{swap_window_instance, swap_window_params, NuVector};
    use alloc::vec;

    #[test]
    fn gaussian_kl_examples() {
        assert!((gaussian_kl(0.8, 0.2) - 0.18).abs() < 1e-15);
        assert_eq!(gaussian_kl(0.37, 0.37), 0.0);
        // The swapped-mean pair contributes 2 delta^2.
        let (s, d) = (0.5, 0.3);
        assert!((gaussian_kl(s + d, s - d) - 2.0 * d * d).abs() < 1e-15);
    }

    #[test]
    fn pairwise_kl_examples() {
        let mut p = swap_window_params(3000, 3, 0.3, 0.5).unwrap();
        // Force l = 10 for the documented value 4 * 0.09 * 10 = 3.6.
        p.window_len = 10;
        p.num_candidates = 5;
        assert_eq!(swap_pairwise_kl(&p, 2, 2), 0.0);
        assert!((swap_pairwise_kl(&p, 2, 12) - 3.6).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_brute_force() {
        let p = swap_window_params(300, 3, 0.45, 0.5).unwrap();
        let taus: alloc::vec::Vec<usize> = p.candidates().collect();
        for &tau in &taus {
            for &tau_p in &taus {
                let a = swap_window_instance(&p, &NuVector(vec![tau])).unwrap();
                let b = swap_window_instance(&p, &NuVector(vec![tau_p])).unwrap();
                let brute = schedule_kl(&a, &b).unwrap();
                let closed = swap_pairwise_kl(&p, tau, tau_p);
                assert!(
                    (brute - closed).abs() <= 1e-12,
                    "tau = {tau}, tau' = {tau_p}: {brute} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn schedule_kl_rejects_asymmetric_disagreement() {
        let a = MeanSchedule::constant(5, vec![0.9, 0.1]).unwrap();
        let b = MeanSchedule::constant(5, vec![0.8, 0.1]).unwrap();
        assert!(matches!(schedule_kl(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn fano_rhs_examples() {
        assert!((fano_rhs(0.0, 2).unwrap() - 0.0).abs() < 1e-15);
        assert!((fano_rhs(LN_2, 8).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        // Large information: negative, unclamped.
        assert!(fano_rhs(100.0, 4).unwrap() < 0.0);
        assert!(matches!(fano_rhs(0.0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn conditional_fano_examples() {
        // Swap family walkthrough: delta = 0.5, l = 2, n = 110.
        let p = swap_window_params(3000, 3, 0.5, 0.5).unwrap();
        let avg = swap_avg_pairwise_kl(&p);
        assert!((avg - 1.981818181818182).abs() < 1e-12);
        let rhs = conditional_fano_rhs(avg, p.num_candidates).unwrap();
        assert!((rhs - 0.4309165969833434).abs() < 1e-10);

        // All-zero KLs with four hypotheses: 1 - ln2/ln4 = 1/2.
        assert!((conditional_fano_rhs(0.0, 4).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fano_rhs_monotonicity() {
        let mut prev = f64::INFINITY;
        for info in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let v = fano_rhs(info, 16).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let mut prev = f64::NEG_INFINITY;
        for v_count in [2usize, 4, 16, 256] {
            let v = fano_rhs(1.0, v_count).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn fano_margin_implies_half() {
        // Whenever the margin condition 4 d^2 l + ln2 <= (ln n)/2 holds, the
        // conditional Fano floor with the exact pairwise KL is >= 1/2.
        let p = swap_window_params(60_000, 3, 0.1, 0.5).unwrap();
        assert!(p.fano_margin_ok());
        let kl = swap_pairwise_kl(&p, 2, 2 + p.window_len);
        let rhs = conditional_fano_rhs(kl, p.num_candidates).unwrap();
        assert!(rhs >= 0.5, "rhs = {rhs}");
    }

    #[test]
    fn windowed_bound_on_gap_class() {
        // Alternating class: each segment has one below-threshold arm with
        // gap = best margin = delta, so the bound is 2 L ln T / delta.
        let sched = crate::instances::alternating_instance(4096, 4, 0.3, 0.5).unwrap();
        let b = windowed_regret_bound(&sched, 0.5, 4096).unwrap();
        let expect = 2.0 * 4.0 * (4096f64).ln() / 0.3;
        assert!((b - expect).abs() < 1e-9);

        // Segment with no below-threshold arm contributes zero.
        let all_good = MeanSchedule::constant(100, vec![0.9, 0.8]).unwrap();
        assert_eq!(windowed_regret_bound(&all_good, 0.5, 100).unwrap(), 0.0);

        // Doubling T adds the gap-sum times ln 2.
        let b2 = windowed_regret_bound(&sched, 0.5, 8192).unwrap();
        let gap_sum = 2.0 * 4.0 / 0.3;
        assert!((b2 - b - gap_sum * LN_2).abs() < 1e-9);

        // Unrealizable schedule is a domain failure.
        let bad = MeanSchedule::constant(10, vec![0.4, 0.3]).unwrap();
        assert!(matches!(
            windowed_regret_bound(&bad, 0.5, 10),
            Err(Error::Assumption(_))
        ));
    }

    #[test]
    fn constant_bound_examples() {
        // Three-arm instance: arm 0 always 0.8; arm 1 steps 0.2 -> 0.7 at
        // T/2; arm 2 constant 0.3. S = 0.5.
        let sched = MeanSchedule::from_segments(
            8,
            vec![1, 5, 9],
            vec![vec![0.8, 0.2, 0.3], vec![0.8, 0.7, 0.3]],
        )
        .unwrap();
        let b = constant_regret_bound(&sched, 0.5).unwrap();
        assert!((b - 14.38888888888889).abs() < 1e-10);

        // Arm never below S contributes zero: with only satisficing arms the
        // bound is zero.
        let good = MeanSchedule::constant(10, vec![0.9, 0.6]).unwrap();
        assert_eq!(constant_regret_bound(&good, 0.5).unwrap(), 0.0);

        // Stationary case (L = 1) reduces to the single-segment form where
        // min and max gaps coincide per arm.
        let stat = MeanSchedule::constant(10, vec![0.9, 0.2]).unwrap();
        let b = constant_regret_bound(&stat, 0.5).unwrap();
        let expect = 0.3 * (1.0 + 1.0 / (0.3 * 0.3) + 1.0 / (0.4 * 0.4));
        assert!((b - expect).abs() < 1e-12);

        // Down-crossing violates the assumptions.
        let down =
            MeanSchedule::from_segments(8, vec![1, 5, 9], vec![vec![0.8, 0.7], vec![0.8, 0.2]])
                .unwrap();
        assert!(matches!(
            constant_regret_bound(&down, 0.5),
            Err(Error::Assumption(_))
        ));
    }

    #[test]
    fn bayes_floor_value() {
        let p = swap_window_params(3000, 3, 0.5, 0.5).unwrap();
        assert!((swap_bayes_regret_floor(&p) - 0.036722502857753254).abs() < 1e-12);
    }
}
