//! Strip-imaging guidance for TDI Earth-observation satellites.
//!
//! The pipeline runs bottom-up: [`astro`] supplies the satellite trajectory,
//! [`target`] the great-circle ground strip, [`attitude`] the drift-free
//! desired frame with its exact rate and acceleration, [`ddp`] a generic
//! constrained differential dynamic programming solver, and [`ocp`] the two
//! scan-rate optimization problems built on top of them. [`config`] reads
//! scenario files and [`cli`] drives runs and comparisons from the command line.

pub mod astro;
pub mod attitude;
pub mod cli;
pub mod config;
pub mod ddp;
pub mod ocp;
pub mod error;
pub mod target;

pub use error::{Error, Result};
