//! Frequency-constrained PV and battery sizing for isolated grids.
//!
//! The pipeline runs in four steps. [`ramps`] turns 1 s irradiance into
//! per-hour worst-case ramp envelopes. [`model`] builds the sizing MILP for
//! one of the [`model::ScenarioMode`]s. [`solve`] runs branch and bound on top
//! of an LP engine. [`sim`] replays the binding hour through a swing-equation
//! model to confirm the frequency limits hold. [`report`] turns a solution into
//! cost and emission indicators, and [`study`] wires it all to files.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod domain;
pub mod error;
pub mod model;
pub mod ramps;
pub mod report;
pub mod sim;
pub mod solve;
pub mod study;

pub use error::{Error, Result};
