//! Config-driven experiment runner behind the `zakharov` binary.

pub mod config;
pub mod data;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{parse_config, ConfigErrors, Experiment, RunConfig};
pub use run::{run, run_in, RunOutcome, RunStatus};
pub use sweep::{sweep, SweepEntry};
pub use verify::{verify_dir, VerifyReport};
