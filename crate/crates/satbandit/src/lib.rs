//! Experiment harness for nonstationary satisficing bandit simulations:
//! configuration, seeded parallel replication, summary reports, and CSV
//! emission. The simulation kernel itself lives in `satbandit-core`.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod seed;
pub mod selfcheck;

pub use error::HarnessError;
