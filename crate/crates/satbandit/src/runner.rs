//! Experiment execution: grid expansion, seeded parallel replication, and
//! CSV emission.
//!
//! Replications are embarrassingly parallel. Every replication derives its
//! own streams (instance draw, policy randomness, observation noise) from
//! the master seed via [`crate::seed::derive_seed`], so records depend only
//! on the configuration — never on thread count or execution order. Records
//! are emitted sorted by (grid point, policy, replication).

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use satbandit_core::env::{Environment, MeanSchedule, NoiseSpec};
use satbandit_core::instances::{
    alternating_instance, sample_nu, single_switch_params, swap_window_params, InstanceParams,
};
use satbandit_core::policies::{run_episode, PolicySpec};

use crate::config::{ExperimentConfig, GridPoint, InstanceFamily, InstanceSpec};
use crate::error::HarnessError;
use crate::seed::derive_seed;

/// One replication's outcome, also the CSV row shape. Columns are fixed in
/// this order with `.` decimal separators:
/// `experiment_id,policy,family,T,L,K,delta,S,replication,seed,regret,wrong_pulls,runtime_ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretRecord {
    pub experiment_id: String,
    pub policy: String,
    pub family: String,
    pub horizon: usize,
    pub segments: usize,
    pub num_arms: usize,
    pub delta: f64,
    pub threshold: f64,
    pub replication: usize,
    pub seed: u64,
    pub regret: f64,
    pub wrong_pulls: u64,
    /// Reserved; always 0 so output stays byte-deterministic. Wall-clock
    /// timings go to the stderr log instead.
    pub runtime_ms: u64,
}

pub const CSV_HEADER: &str =
    "experiment_id,policy,family,T,L,K,delta,S,replication,seed,regret,wrong_pulls,runtime_ms";

impl RegretRecord {
    pub fn write_csv_row<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment_id,
            self.policy,
            self.family,
            self.horizon,
            self.segments,
            self.num_arms,
            self.delta,
            self.threshold,
            self.replication,
            self.seed,
            self.regret,
            self.wrong_pulls,
            self.runtime_ms
        )
    }
}

/// Writes the fixed header plus one row per record.
pub fn write_csv<W: Write>(records: &[RegretRecord], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        r.write_csv_row(w)?;
    }
    Ok(())
}

/// A grid point resolved into something runnable.
#[derive(Debug, Clone)]
pub struct ResolvedPoint {
    pub point: GridPoint,
    pub family: String,
    pub num_arms: usize,
    /// Stable id used in stream labels and logs.
    pub id: String,
    pub instance: PointInstance,
}

#[derive(Debug, Clone)]
pub enum PointInstance {
    /// One fixed schedule shared by all replications.
    Fixed(MeanSchedule),
    /// A hard family: each replication draws its own latent vector.
    Hard(InstanceParams),
}

impl ResolvedPoint {
    /// Environment for one replication. Hard families consume the
    /// replication's instance stream; fixed schedules ignore it.
    pub fn environment(&self, nu_seed: u64) -> Result<Environment, HarnessError> {
        match &self.instance {
            PointInstance::Fixed(schedule) => Ok(Environment::new(
                schedule.clone(),
                self.point.threshold,
                NoiseSpec::UnitGaussian,
            )?),
            PointInstance::Hard(params) => {
                let mut rng = ChaCha8Rng::seed_from_u64(nu_seed);
                let nu = sample_nu(params, &mut rng);
                Ok(params.environment(&nu)?)
            }
        }
    }
}

/// Expands the config's grid into runnable points, skipping infeasible ones
/// with a logged parameter error. Fails when nothing is feasible.
pub fn resolve_points(cfg: &ExperimentConfig) -> Result<Vec<ResolvedPoint>, HarnessError> {
    let mut out = Vec::new();
    match &cfg.instance {
        InstanceSpec::ScheduleFile(path) => {
            let (schedule, threshold) = crate::config::load_schedule(path)?;
            let point = GridPoint {
                horizon: schedule.horizon(),
                segments: schedule.num_segments(),
                delta: 0.0,
                threshold,
            };
            out.push(ResolvedPoint {
                point,
                family: "schedule".into(),
                num_arms: schedule.num_arms(),
                id: format!("schedule:{}", path.display()),
                instance: PointInstance::Fixed(schedule),
            });
        }
        InstanceSpec::Family(family) => {
            for point in cfg.grid.points() {
                let id = format!(
                    "{}:T={},L={},delta={},S={}",
                    family.name(),
                    point.horizon,
                    point.segments,
                    point.delta,
                    point.threshold
                );
                let built: Result<PointInstance, satbandit_core::Error> = match family {
                    InstanceFamily::Alternating => alternating_instance(
                        point.horizon,
                        point.segments,
                        point.delta,
                        point.threshold,
                    )
                    .map(PointInstance::Fixed),
                    InstanceFamily::SwapWindow => swap_window_params(
                        point.horizon,
                        point.segments,
                        point.delta,
                        point.threshold,
                    )
                    .map(PointInstance::Hard),
                    InstanceFamily::SingleSwitch => single_switch_params(
                        point.horizon,
                        point.segments,
                        point.delta,
                        point.threshold,
                    )
                    .map(PointInstance::Hard),
                };
                match built {
                    Ok(instance) => out.push(ResolvedPoint {
                        point,
                        family: family.name().into(),
                        num_arms: 2,
                        id,
                        instance,
                    }),
                    Err(e) => log::warn!("skipping infeasible grid point {id}: {e}"),
                }
            }
        }
    }
    if out.is_empty() {
        return Err(HarnessError::Config(
            "no feasible grid point (see logged parameter errors)".into(),
        ));
    }
    Ok(out)
}

/// Runs every (grid point, policy, replication) job and returns the records
/// sorted by that triple, independent of the parallelism degree.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RegretRecord>, HarnessError> {
    let points = resolve_points(cfg)?;
    run_on_points(cfg, &points)
}

/// Like [`run_experiment`] for already-resolved points.
pub fn run_on_points(
    cfg: &ExperimentConfig,
    points: &[ResolvedPoint],
) -> Result<Vec<RegretRecord>, HarnessError> {
    let experiment_id = format!("{}-{:016x}", cfg.kind.name(), cfg.master_seed);

    struct Job<'a> {
        point: &'a ResolvedPoint,
        policy: &'a PolicySpec,
        replication: usize,
    }

    let mut jobs = Vec::with_capacity(points.len() * cfg.policies.len() * cfg.replications);
    for point in points {
        for policy in &cfg.policies {
            for replication in 0..cfg.replications {
                jobs.push(Job {
                    point,
                    policy,
                    replication,
                });
            }
        }
    }

    let run_job = |job: &Job| -> Result<RegretRecord, HarnessError> {
        let pid = job.policy.id();
        let rep = job.replication as u64;
        // The instance stream is shared across policies so every policy
        // faces the same drawn instances.
        let nu_seed = derive_seed(cfg.master_seed, &format!("nu/{}", job.point.id), rep);
        let noise_seed = derive_seed(
            cfg.master_seed,
            &format!("noise/{}/{pid}", job.point.id),
            rep,
        );
        let policy_seed = derive_seed(
            cfg.master_seed,
            &format!("policy/{}/{pid}", job.point.id),
            rep,
        );

        let env = job.point.environment(nu_seed)?;
        let mut policy = job.policy.build(&env, policy_seed)?;
        let mut noise_rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let out = run_episode(&env, &mut *policy, &mut noise_rng);

        if matches!(job.point.instance, PointInstance::Hard(_)) {
            // On hard instances every wrong pull costs exactly delta.
            let expected = job.point.point.delta * out.wrong_pulls as f64;
            let err = (out.regret - expected).abs();
            assert!(
                err <= 1e-9 * (1.0 + expected.abs()),
                "regret {} != delta * wrong_pulls {} on {}",
                out.regret,
                expected,
                job.point.id
            );
        }

        Ok(RegretRecord {
            experiment_id: experiment_id.clone(),
            policy: pid,
            family: job.point.family.clone(),
            horizon: job.point.point.horizon,
            segments: job.point.point.segments,
            num_arms: job.point.num_arms,
            delta: job.point.point.delta,
            threshold: job.point.point.threshold,
            replication: job.replication,
            seed: noise_seed,
            regret: out.regret,
            wrong_pulls: out.wrong_pulls,
            runtime_ms: 0,
        })
    };

    let results: Result<Vec<RegretRecord>, HarnessError> = if cfg.threads == 1 {
        jobs.iter().map(run_job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
        // Indexed parallel collect preserves job order, so the output is
        // already sorted by (grid point, policy, replication).
        pool.install(|| jobs.par_iter().map(run_job).collect())
    };
    let records = results?;
    log::info!(
        "{}: {} records ({} points x {} policies x {} replications)",
        experiment_id,
        records.len(),
        points.len(),
        cfg.policies.len(),
        cfg.replications
    );
    Ok(records)
}
