//! Experiment configuration, the seeded runner and result files.

pub mod config;
pub mod presets;
pub mod run;

pub use config::*;
pub use run::*;

use crate::error::Error;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Json(_) => 2,
        Error::ResourceLimit { .. } => 3,
        Error::Invariant(_) => 4,
        _ => 1,
    }
}
