//! Simulation of a delayed-choice quantum eraser under Einstein locality.
//!
//! The crate covers the whole chain: exact quantum predictions for the
//! hybrid path–polarization state ([`quantum`]), the relativistic event
//! geometry of the published lab arrangements ([`spacetime`]), Monte Carlo
//! generation of time-tagged detections ([`instrument`]), independent
//! time-tag registration and offline coincidence reconstruction
//! ([`timetag`]), and the statistical analysis ([`analysis`]).

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod instrument;
pub mod quantum;
pub mod spacetime;
pub mod timetag;

pub use error::{Error, Result};
