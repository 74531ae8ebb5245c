//! Simulation and analysis toolkit for a four-wheeled, dual tilt-axle
//! aerial-ground vehicle.
//!
//! The crate is split along the physical layers of the problem:
//!
//! - [`vehicle`]: parameters, rotor performance curves, mass budget and design metrics.
//! - [`statics`]: closed-form force balances (pitch-coupled baseline, inclines, tipping, wall climbing).
//! - [`dynamics`]: time-stepped rigid-body simulation with the mode controllers.
//! - [`energy`]: batteries with over-discharge protection and the calibrated per-mode power model.
//! - [`planner`]: energy-optimal drive/fly routing over slope-annotated grids.
//! - [`scenario`]: JSON scenario files, bundled experiment scenarios and the runners used by the CLI.
//!
//! Batch entry points (planner queries, tilt sweeps, scenario sets) take an
//! [`Execution`] so callers can pick the rayon-backed or the sequential path.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod energy;
mod par;
pub mod planner;
pub mod scenario;
pub mod statics;
pub mod vehicle;

pub use par::Execution;

/// Standard gravity used for kgf → N conversion and as the default `g`.
pub const STANDARD_GRAVITY: f64 = 9.81;
