//! Variational preparation of Gibbs states of small spin chains.

pub mod channels;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod models;
pub mod qcore;
pub mod qoft;
pub mod symmetry;
pub mod vqt;

pub use error::{Error, Result};
