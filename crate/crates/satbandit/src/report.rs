//! Aggregation of replication records into summary tables.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use satbandit_core::bounds::{conditional_fano_rhs, swap_avg_pairwise_kl, swap_bayes_regret_floor};
use satbandit_core::estimators::BlockView;
use satbandit_core::instances::{Family, InstanceParams};
use satbandit_core::policies::run_episode;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::runner::{resolve_points, PointInstance, RegretRecord, ResolvedPoint};
use crate::seed::derive_seed;

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One `(policy, grid point)` aggregate.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub policy: String,
    pub family: String,
    pub horizon: usize,
    pub segments: usize,
    pub delta: f64,
    pub threshold: f64,
    pub replications: usize,
    pub mean_regret: f64,
    pub std_err: f64,
    /// `mean_regret / (L ln T)`.
    pub normalized: f64,
}

/// Scaling summary: per-point aggregates plus, per policy, the max/min ratio
/// of the normalized statistic across its grid points.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub spread: Vec<(String, f64)>,
}

/// Groups records (already sorted by point and policy) and normalizes mean
/// regret by `L ln T`. A normalized spread above 4 is flagged as non-flat.
pub fn scaling_report(records: &[RegretRecord]) -> ScalingReport {
    let mut rows: Vec<ScalingRow> = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let head = &records[i];
        let mut values = Vec::new();
        let mut j = i;
        while j < records.len() {
            let r = &records[j];
            let same = r.policy == head.policy
                && r.family == head.family
                && r.horizon == head.horizon
                && r.segments == head.segments
                && r.delta == head.delta
                && r.threshold == head.threshold;
            if !same {
                break;
            }
            values.push(r.regret);
            j += 1;
        }
        let (mean, se) = mean_and_stderr(&values);
        let norm = mean / (head.segments as f64 * (head.horizon as f64).ln());
        rows.push(ScalingRow {
            policy: head.policy.clone(),
            family: head.family.clone(),
            horizon: head.horizon,
            segments: head.segments,
            delta: head.delta,
            threshold: head.threshold,
            replications: values.len(),
            mean_regret: mean,
            std_err: se,
            normalized: norm,
        });
        i = j;
    }

    let mut spread = Vec::new();
    let mut policies: Vec<String> = rows.iter().map(|r| r.policy.clone()).collect();
    policies.dedup();
    for policy in policies {
        let norms: Vec<f64> = rows
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| r.normalized)
            .collect();
        let max = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        spread.push((policy, max / min));
    }
    ScalingReport { rows, spread }
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<14} {:>8} {:>4} {:>6} {:>5} {:>5} {:>12} {:>10} {:>12}",
            "policy", "T", "L", "delta", "S", "reps", "mean_regret", "std_err", "regret/LlnT"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<14} {:>8} {:>4} {:>6} {:>5} {:>5} {:>12.3} {:>10.3} {:>12.4}",
                r.policy,
                r.horizon,
                r.segments,
                r.delta,
                r.threshold,
                r.replications,
                r.mean_regret,
                r.std_err,
                r.normalized
            )?;
        }
        for (policy, ratio) in &self.spread {
            writeln!(
                f,
                "normalized spread for {policy}: {ratio:.3}{}",
                if *ratio >= 4.0 {
                    "  (non-flat: exceeds factor 4)"
                } else {
                    ""
                }
            )?;
        }
        Ok(())
    }
}

/// Bayesian-regret comparison of one policy against the swap-window floor.
#[derive(Debug, Clone)]
pub struct LowerBoundRow {
    pub policy: String,
    pub horizon: usize,
    pub segments: usize,
    pub delta: f64,
    pub threshold: f64,
    pub replications: usize,
    pub mean_regret: f64,
    pub std_err: f64,
    /// `(L - 1) ln n / 256` for the point's candidate count `n`.
    pub floor: f64,
    /// `mean + 3 se >= floor`.
    pub pass: bool,
}

/// Per-policy Bayesian mean regret vs. the identification floor. Records
/// must come from a swap-window run.
pub fn lowerbound_report(
    cfg: &ExperimentConfig,
    records: &[RegretRecord],
) -> Result<Vec<LowerBoundRow>, HarnessError> {
    let points = resolve_points(cfg)?;
    let scaling = scaling_report(records);
    let mut rows = Vec::new();
    for r in &scaling.rows {
        let point = points
            .iter()
            .find(|p| {
                p.point.horizon == r.horizon
                    && p.point.segments == r.segments
                    && p.point.delta == r.delta
                    && p.point.threshold == r.threshold
            })
            .ok_or_else(|| HarnessError::Config(format!("no resolved point for row {r:?}")))?;
        let params = match &point.instance {
            PointInstance::Hard(params) if params.family == Family::SwapWindow => params,
            _ => {
                return Err(HarnessError::Config(
                    "the lower-bound experiment needs the swap-window family".into(),
                ))
            }
        };
        let floor = swap_bayes_regret_floor(params);
        rows.push(LowerBoundRow {
            policy: r.policy.clone(),
            horizon: r.horizon,
            segments: r.segments,
            delta: r.delta,
            threshold: r.threshold,
            replications: r.replications,
            mean_regret: r.mean_regret,
            std_err: r.std_err,
            floor,
            pass: r.mean_regret + 3.0 * r.std_err >= floor,
        });
    }
    Ok(rows)
}

/// Renders lower-bound rows as a table.
pub fn format_lowerbound(rows: &[LowerBoundRow]) -> String {
    let mut out = format!(
        "{:<14} {:>8} {:>4} {:>6} {:>5} {:>12} {:>10} {:>10} {:>6}\n",
        "policy", "T", "L", "delta", "S", "mean_regret", "std_err", "floor", "pass"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<14} {:>8} {:>4} {:>6} {:>5} {:>12.4} {:>10.4} {:>10.4} {:>6}\n",
            r.policy,
            r.horizon,
            r.segments,
            r.delta,
            r.threshold,
            r.mean_regret,
            r.std_err,
            r.floor,
            r.pass
        ));
    }
    out
}

/// Monte-Carlo error rate of one estimator under one policy and grid point.
#[derive(Debug, Clone)]
pub struct EstimatorRow {
    pub estimator: &'static str,
    pub policy: String,
    pub family: String,
    pub horizon: usize,
    pub segments: usize,
    pub delta: f64,
    pub threshold: f64,
    /// Number of estimated blocks.
    pub trials: u64,
    pub errors: u64,
    pub rate: f64,
    /// Analytic comparison value.
    pub bound: f64,
    /// `error-cap`: rate must stay below bound (+3 sigma);
    /// `error-floor`: rate must stay above bound (-3 sigma).
    pub bound_kind: &'static str,
    pub within: bool,
}

/// Estimator verification report.
#[derive(Debug, Clone)]
pub struct EstimatorReport {
    pub rows: Vec<EstimatorRow>,
    /// Blocks where the wrong-pull premise held (swap-window runs).
    pub implication_premise_blocks: u64,
    /// Premise-satisfying blocks where the argmax estimator missed; the
    /// deterministic implication says this must be zero.
    pub implication_violations: u64,
}

fn binom_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Runs the configured policies on a hard family and scores the estimators
/// block by block.
///
/// - swap-window: the argmax estimator's error rate is compared against the
///   conditional identification floor, and the deterministic implication
///   (wrong pulls <= l/4 forces a correct estimate) is counted.
/// - single-switch: the two scan estimators are compared against their
///   tail caps `P(N_nu < r) + n exp(-r delta^2 / 2)` (symmetrically for the
///   second arm), measuring the pull-count term empirically; the coin-mixed
///   estimator is compared against the 3/4 cap.
pub fn estimator_report(cfg: &ExperimentConfig) -> Result<EstimatorReport, HarnessError> {
    let points = resolve_points(cfg)?;
    let mut rows = Vec::new();
    let mut premise_blocks = 0u64;
    let mut violations = 0u64;

    for point in &points {
        let params = match &point.instance {
            PointInstance::Hard(params) => params,
            PointInstance::Fixed(_) => {
                return Err(HarnessError::Config(
                    "the estimators experiment needs a hard instance family".into(),
                ))
            }
        };
        for policy in &cfg.policies {
            let stats = collect_block_stats(cfg, point, params, &policy.id())?;
            premise_blocks += stats.premise_blocks;
            violations += stats.implication_violations;
            let trials = stats.blocks;
            match params.family {
                Family::SwapWindow => {
                    let floor =
                        conditional_fano_rhs(swap_avg_pairwise_kl(params), params.num_candidates)
                            .map_err(HarnessError::Core)?;
                    let rate = stats.argmax_errors as f64 / trials as f64;
                    rows.push(EstimatorRow {
                        estimator: "argmax",
                        policy: policy.id(),
                        family: point.family.clone(),
                        horizon: point.point.horizon,
                        segments: point.point.segments,
                        delta: point.point.delta,
                        threshold: point.point.threshold,
                        trials,
                        errors: stats.argmax_errors,
                        rate,
                        bound: floor,
                        bound_kind: "error-floor",
                        within: rate + 3.0 * binom_sigma(rate, trials) >= floor,
                    });
                }
                Family::SingleSwitch => {
                    let n = params.num_candidates as f64;
                    let d2 = params.delta * params.delta;
                    let r = params.split.expect("single-switch params carry r") as f64;
                    let l = params.window_len as f64;
                    let p_short = stats.true_window_short as f64 / trials as f64;
                    let p_rich = 1.0 - p_short;

                    let caps = [
                        (
                            "scan-first-arm",
                            stats.first_errors,
                            p_short + n * (-r * d2 / 2.0).exp(),
                        ),
                        (
                            "scan-second-arm",
                            stats.second_errors,
                            p_rich + n * (-(l - r) * d2 / 2.0).exp(),
                        ),
                        ("coin-mixed", stats.mixed_errors, 0.75),
                    ];
                    for (name, errors, cap) in caps {
                        let rate = errors as f64 / trials as f64;
                        rows.push(EstimatorRow {
                            estimator: name,
                            policy: policy.id(),
                            family: point.family.clone(),
                            horizon: point.point.horizon,
                            segments: point.point.segments,
                            delta: point.point.delta,
                            threshold: point.point.threshold,
                            trials,
                            errors,
                            rate,
                            bound: cap,
                            bound_kind: "error-cap",
                            within: rate <= cap + 3.0 * binom_sigma(cap, trials),
                        });
                    }
                }
            }
        }
    }
    Ok(EstimatorReport {
        rows,
        implication_premise_blocks: premise_blocks,
        implication_violations: violations,
    })
}

#[derive(Debug, Default, Clone)]
struct BlockStats {
    blocks: u64,
    argmax_errors: u64,
    first_errors: u64,
    second_errors: u64,
    mixed_errors: u64,
    /// Blocks whose true window held fewer than `r` arm-0 pulls.
    true_window_short: u64,
    premise_blocks: u64,
    implication_violations: u64,
}

fn collect_block_stats(
    cfg: &ExperimentConfig,
    point: &ResolvedPoint,
    params: &InstanceParams,
    policy_id: &str,
) -> Result<BlockStats, HarnessError> {
    let spec = cfg
        .policies
        .iter()
        .find(|p| p.id() == policy_id)
        .expect("policy id comes from the config");

    let reps: Vec<u64> = (0..cfg.replications as u64).collect();
    let stats: Result<Vec<BlockStats>, HarnessError> = {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            reps.par_iter()
                .map(|&rep| {
                    let mut local = BlockStats::default();
                    let nu_seed = derive_seed(cfg.master_seed, &format!("nu/{}", point.id), rep);
                    let noise_seed = derive_seed(
                        cfg.master_seed,
                        &format!("noise/{}/{policy_id}", point.id),
                        rep,
                    );
                    let policy_seed = derive_seed(
                        cfg.master_seed,
                        &format!("policy/{}/{policy_id}", point.id),
                        rep,
                    );
                    let coin_seed = derive_seed(
                        cfg.master_seed,
                        &format!("coin/{}/{policy_id}", point.id),
                        rep,
                    );

                    let mut nu_rng = ChaCha8Rng::seed_from_u64(nu_seed);
                    let nu = satbandit_core::instances::sample_nu(params, &mut nu_rng);
                    let env = params.environment(&nu)?;
                    let mut policy = spec.build(&env, policy_seed)?;
                    let out = run_episode(
                        &env,
                        &mut *policy,
                        &mut ChaCha8Rng::seed_from_u64(noise_seed),
                    );
                    let mut coin_rng = ChaCha8Rng::seed_from_u64(coin_seed);

                    let wrong = out
                        .transcript
                        .wrong_pull_counts
                        .as_ref()
                        .expect("hard instances carry block counters")
                        .clone();
                    for (block, &wrong_pulls) in wrong.iter().enumerate() {
                        let view = BlockView::new(&out.transcript, params, block)
                            .map_err(HarnessError::Core)?;
                        let truth = nu.0[block];
                        local.blocks += 1;
                        match params.family {
                            Family::SwapWindow => {
                                let est = view.argmax_estimator();
                                if est != truth {
                                    local.argmax_errors += 1;
                                }
                                if 4 * wrong_pulls as usize <= params.window_len {
                                    local.premise_blocks += 1;
                                    if est != truth {
                                        local.implication_violations += 1;
                                    }
                                }
                            }
                            Family::SingleSwitch => {
                                let s = params.threshold;
                                let r = params.split.expect("single-switch carries r");
                                if view.window_pull_count(truth, 0) < r {
                                    local.true_window_short += 1;
                                }
                                if view.detect_by_first_arm(s) != Some(truth) {
                                    local.first_errors += 1;
                                }
                                if view.detect_by_second_arm(s) != Some(truth) {
                                    local.second_errors += 1;
                                }
                                let coin: bool = coin_rng.gen();
                                if view.detect_mixed(s, coin) != Some(truth) {
                                    local.mixed_errors += 1;
                                }
                            }
                        }
                    }
                    Ok(local)
                })
                .collect()
        })
    };

    let mut total = BlockStats::default();
    for s in stats? {
        total.blocks += s.blocks;
        total.argmax_errors += s.argmax_errors;
        total.first_errors += s.first_errors;
        total.second_errors += s.second_errors;
        total.mixed_errors += s.mixed_errors;
        total.true_window_short += s.true_window_short;
        total.premise_blocks += s.premise_blocks;
        total.implication_violations += s.implication_violations;
    }
    Ok(total)
}

/// Renders the estimator report as a table.
pub fn format_estimator_report(report: &EstimatorReport) -> String {
    let mut out = format!(
        "{:<16} {:<14} {:>8} {:>4} {:>6} {:>8} {:>8} {:>8} {:>10} {:<12} {:>6}\n",
        "estimator",
        "policy",
        "T",
        "L",
        "delta",
        "trials",
        "errors",
        "rate",
        "bound",
        "kind",
        "within"
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{:<16} {:<14} {:>8} {:>4} {:>6} {:>8} {:>8} {:>8.4} {:>10.4} {:<12} {:>6}\n",
            r.estimator,
            r.policy,
            r.horizon,
            r.segments,
            r.delta,
            r.trials,
            r.errors,
            r.rate,
            r.bound,
            r.bound_kind,
            r.within
        ));
    }
    out.push_str(&format!(
        "deterministic implication: {} premise blocks, {} violations\n",
        report.implication_premise_blocks, report.implication_violations
    ));
    out
}
