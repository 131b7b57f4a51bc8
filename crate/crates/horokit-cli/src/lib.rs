//! Batch front end for `horokit`: JSON experiment configs, the verification
//! suites behind the acceptance criteria, and CSV/JSON/SVG output.

pub mod commands;
pub mod config;
pub mod failure;
pub mod output;
pub mod suites;

pub use commands::{execute, run, Command, Outcome};
pub use config::ExperimentConfig;
pub use failure::Failure;
