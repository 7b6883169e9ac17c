//! Batch front-end: strict JSON configs in, CSV and JSON artifacts out.

pub mod config;
pub mod error;
pub mod output;
pub mod recipes;
pub mod run;

pub use config::{Overrides, RunConfig, Task};
pub use error::CliError;
pub use run::{execute, run, Artifacts};
