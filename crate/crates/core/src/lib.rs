//! Collision-model simulation of a quantum battery (a uniform ladder of
//! `N_B + 1` levels) charged by a stream of `N_A`-atom spin ensembles.
//!
//! The exact per-collision channel is built in Kraus form from the
//! block-diagonal interaction unitary, applied by a banded kernel, and
//! compared against short-time closed forms for the charging dynamics.

// `!(x > bound)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod collision;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod observables;
pub mod operators;
pub mod special;
pub mod state;
pub mod tolerance;
pub mod trajectory;

pub use collision::{apply_collision, build_channel, build_channel_for_state, CollisionChannel};
pub use error::{Error, Result};
pub use observables::StepObservables;
pub use operators::{AtomEnsembleSpec, AtomState, BatterySpec};
pub use state::BatteryState;
pub use tolerance::Tolerances;
pub use trajectory::{run_trajectory, RunOptions, Trajectory};
