//! Files, configuration and experiment drivers around [`qsurrogate_core`].
//!
//! * [`csvio`] - dataset CSV import and export.
//! * [`model_file`] - versioned JSON model documents.
//! * [`sweep`] - the noise x sample-size QNN-vs-MLP sweep and its CSV outputs.
//! * [`profiles`] - the bundled hardware error profiles.
//! * [`config`] - TOML experiment configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csvio;
mod error;
pub mod model_file;
pub mod profiles;
pub mod sweep;

pub use error::{Error, Result};
pub use qsurrogate_core as core;
