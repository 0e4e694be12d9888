//! Experiment configuration: TOML files, CLI overrides, and grid expansion.
//!
//! A config file is TOML with top-level keys `experiment`, `seed`,
//! `replications`, `out`, `policies`, `family` (or `schedule`), `threads`,
//! and a `[grid]` table with lists `T`, `L`, `delta`, `S`. The same grid can
//! be given on the command line as `"T=4096,16384;L=1,2;delta=0.3;S=0.5"`.
//! Every field given on the command line overrides the file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use satbandit_core::env::MeanSchedule;
use satbandit_core::policies::PolicySpec;

use crate::error::HarnessError;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Run policies on instances and emit one record per replication.
    Simulate,
    /// Simulate over a `(T, L)` grid and summarize regret scaling.
    Scaling,
    /// Bayesian regret of every configured policy on a hard family,
    /// compared against the identification floor.
    LowerBound,
    /// Monte-Carlo error rates of the change-point estimators against
    /// their analytic caps.
    Estimators,
    /// Run the built-in invariant suite.
    SelfCheck,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "simulate" => Ok(Self::Simulate),
            "scaling" => Ok(Self::Scaling),
            "lowerbound" => Ok(Self::LowerBound),
            "estimators" => Ok(Self::Estimators),
            "selfcheck" => Ok(Self::SelfCheck),
            _ => Err(HarnessError::Config(format!(
                "unknown experiment kind {s:?}"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Scaling => "scaling",
            Self::LowerBound => "lowerbound",
            Self::Estimators => "estimators",
            Self::SelfCheck => "selfcheck",
        }
    }
}

/// Generated instance family selectable from the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFamily {
    /// Two-armed blocks hiding one satisficing window per block.
    SwapWindow,
    /// Two-armed blocks with one hidden change point per block.
    SingleSwitch,
    /// Equally spaced segments whose satisficing arm alternates.
    Alternating,
}

impl InstanceFamily {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "swap-window" => Ok(Self::SwapWindow),
            "single-switch" => Ok(Self::SingleSwitch),
            "alternating" => Ok(Self::Alternating),
            _ => Err(HarnessError::Config(format!(
                "unknown instance family {s:?}"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::SwapWindow => "swap-window",
            Self::SingleSwitch => "single-switch",
            Self::Alternating => "alternating",
        }
    }
}

/// One `(T, L, delta, S)` grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub horizon: usize,
    pub segments: usize,
    pub delta: f64,
    pub threshold: f64,
}

/// Cartesian grid over `(T, L, delta, S)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    pub horizons: Vec<usize>,
    pub segments: Vec<usize>,
    pub deltas: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl Grid {
    /// Parses the CLI form `"T=4096,16384;L=1,2;delta=0.3;S=0.5"`.
    pub fn parse(spec: &str) -> Result<Self, HarnessError> {
        let mut grid = Grid::default();
        for part in spec.split(';').filter(|p| !p.is_empty()) {
            let (key, values) = part.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("grid part {part:?} is not key=value"))
            })?;
            let values = values.trim();
            match key.trim() {
                "T" => grid.horizons = parse_list(values, key)?,
                "L" => grid.segments = parse_list(values, key)?,
                "delta" => grid.deltas = parse_list(values, key)?,
                "S" => grid.thresholds = parse_list(values, key)?,
                other => {
                    return Err(HarnessError::Config(format!(
                        "unknown grid key {other:?} (expected T, L, delta, S)"
                    )))
                }
            }
        }
        Ok(grid)
    }

    pub fn is_empty(&self) -> bool {
        self.horizons.is_empty()
            && self.segments.is_empty()
            && self.deltas.is_empty()
            && self.thresholds.is_empty()
    }

    fn validate(&self) -> Result<(), HarnessError> {
        for (name, empty) in [
            ("T", self.horizons.is_empty()),
            ("L", self.segments.is_empty()),
            ("delta", self.deltas.is_empty()),
            ("S", self.thresholds.is_empty()),
        ] {
            if empty {
                return Err(HarnessError::Config(format!(
                    "grid is missing values for {name}"
                )));
            }
        }
        Ok(())
    }

    /// Grid points in deterministic order (T, then L, then delta, then S).
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &horizon in &self.horizons {
            for &segments in &self.segments {
                for &delta in &self.deltas {
                    for &threshold in &self.thresholds {
                        out.push(GridPoint {
                            horizon,
                            segments,
                            delta,
                            threshold,
                        });
                    }
                }
            }
        }
        out
    }
}

fn parse_list<T: std::str::FromStr>(values: &str, key: &str) -> Result<Vec<T>, HarnessError> {
    values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| HarnessError::Config(format!("bad value {v:?} for grid key {key}")))
        })
        .collect()
}

/// What to run the policies on.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    Family(InstanceFamily),
    /// Explicit schedule file; the grid is ignored.
    ScheduleFile(PathBuf),
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub instance: InstanceSpec,
    pub policies: Vec<PolicySpec>,
    pub grid: Grid,
    pub replications: usize,
    pub master_seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads for replication-level parallelism; 0 = rayon default.
    pub threads: usize,
}

/// Raw TOML shape of a config file; every field optional so CLI flags can
/// fill the gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub out: Option<PathBuf>,
    pub policies: Option<Vec<String>>,
    pub family: Option<String>,
    pub schedule: Option<PathBuf>,
    pub threads: Option<usize>,
    pub grid: Option<RawGrid>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    #[serde(rename = "T")]
    pub t: Option<Vec<usize>>,
    #[serde(rename = "L")]
    pub l: Option<Vec<usize>>,
    pub delta: Option<Vec<f64>>,
    #[serde(rename = "S")]
    pub s: Option<Vec<f64>>,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies `other` on top of `self` (later wins field by field).
    pub fn merge(mut self, other: RawConfig) -> RawConfig {
        if other.experiment.is_some() {
            self.experiment = other.experiment;
        }
        if other.seed.is_some() {
            self.seed = other.seed;
        }
        if other.replications.is_some() {
            self.replications = other.replications;
        }
        if other.out.is_some() {
            self.out = other.out;
        }
        if other.policies.is_some() {
            self.policies = other.policies;
        }
        if other.family.is_some() {
            self.family = other.family;
        }
        if other.schedule.is_some() {
            self.schedule = other.schedule;
        }
        if other.threads.is_some() {
            self.threads = other.threads;
        }
        self.grid = match (self.grid, other.grid) {
            (Some(a), Some(b)) => Some(RawGrid {
                t: b.t.or(a.t),
                l: b.l.or(a.l),
                delta: b.delta.or(a.delta),
                s: b.s.or(a.s),
            }),
            (a, b) => b.or(a),
        };
        self
    }

    /// Validates and resolves defaults into an [`ExperimentConfig`].
    pub fn resolve(self, kind: ExperimentKind) -> Result<ExperimentConfig, HarnessError> {
        let instance = match (self.family.as_deref(), self.schedule) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config(
                    "give either a family or a schedule file, not both".into(),
                ))
            }
            (Some(name), None) => InstanceSpec::Family(InstanceFamily::parse(name)?),
            (None, Some(path)) => InstanceSpec::ScheduleFile(path),
            (None, None) => {
                return Err(HarnessError::Config(
                    "an instance family (or schedule file) is required".into(),
                ))
            }
        };

        let policies = self
            .policies
            .unwrap_or_default()
            .iter()
            .map(|id| PolicySpec::parse(id).map_err(HarnessError::Core))
            .collect::<Result<Vec<_>, _>>()?;
        if policies.is_empty() {
            return Err(HarnessError::Config(
                "at least one policy id is required".into(),
            ));
        }

        let grid = match &instance {
            InstanceSpec::ScheduleFile(_) => Grid::default(),
            InstanceSpec::Family(_) => {
                let raw = self.grid.ok_or_else(|| {
                    HarnessError::Config("a [grid] with T, L, delta, S is required".into())
                })?;
                let grid = Grid {
                    horizons: raw.t.unwrap_or_default(),
                    segments: raw.l.unwrap_or_default(),
                    deltas: raw.delta.unwrap_or_default(),
                    thresholds: raw.s.unwrap_or_default(),
                };
                grid.validate()?;
                grid
            }
        };

        let replications = self.replications.unwrap_or(1);
        if replications == 0 {
            return Err(HarnessError::Config(
                "replications must be at least 1".into(),
            ));
        }

        Ok(ExperimentConfig {
            kind,
            instance,
            policies,
            grid,
            replications,
            master_seed: self.seed.unwrap_or(0),
            out: self.out,
            threads: self.threads.unwrap_or(0),
        })
    }
}

/// On-disk schedule document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "S")]
    pub s: f64,
    /// Full change-point list including the sentinels `1` and `T + 1`.
    pub change_points: Vec<usize>,
    /// One length-`K` mean vector per segment.
    pub segment_means: Vec<Vec<f64>>,
}

/// Loads and validates a schedule file, returning the schedule and its
/// threshold.
pub fn load_schedule(path: &Path) -> Result<(MeanSchedule, f64), HarnessError> {
    let text = fs::read_to_string(path)?;
    let file: ScheduleFile = toml::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let schedule = MeanSchedule::from_segments(file.t, file.change_points, file.segment_means)
        .map_err(HarnessError::Core)?;
    if schedule.num_arms() != file.k {
        return Err(HarnessError::Config(format!(
            "{}: K = {} but segment means have {} arms",
            path.display(),
            file.k,
            schedule.num_arms()
        )));
    }
    Ok((schedule, file.s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_cli_roundtrip() {
        let g = Grid::parse("T=4096,16384;L=1,2;delta=0.3;S=0.5").unwrap();
        assert_eq!(g.horizons, vec![4096, 16384]);
        assert_eq!(g.segments, vec![1, 2]);
        assert_eq!(g.points().len(), 4);
        assert!(Grid::parse("T=a").is_err());
        assert!(Grid::parse("Q=3").is_err());
    }

    #[test]
    fn toml_config_resolves() {
        let raw: RawConfig = toml::from_str(
            r#"
            experiment = "scaling"
            seed = 42
            replications = 8
            policies = ["nonstat-sat", "fixed:1"]
            family = "alternating"

            [grid]
            T = [1024]
            L = [1, 2]
            delta = [0.3]
            S = [0.5]
            "#,
        )
        .unwrap();
        let kind = ExperimentKind::parse(raw.experiment.as_deref().unwrap()).unwrap();
        let cfg = raw.resolve(kind).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Scaling);
        assert_eq!(cfg.master_seed, 42);
        assert_eq!(cfg.replications, 8);
        assert_eq!(cfg.policies.len(), 2);
        assert_eq!(cfg.grid.points().len(), 2);
    }

    #[test]
    fn cli_overrides_win() {
        let file: RawConfig = toml::from_str(
            r#"
            seed = 1
            replications = 4
            policies = ["uniform"]
            family = "alternating"
            [grid]
            T = [64]
            L = [2]
            delta = [0.2]
            S = [0.5]
            "#,
        )
        .unwrap();
        let cli = RawConfig {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = file.merge(cli).resolve(ExperimentKind::Simulate).unwrap();
        assert_eq!(cfg.master_seed, 9);
        assert_eq!(cfg.replications, 4);
    }

    #[test]
    fn missing_pieces_are_config_errors() {
        let raw = RawConfig::default();
        assert!(matches!(
            raw.resolve(ExperimentKind::Simulate),
            Err(HarnessError::Config(_))
        ));
    }
}
