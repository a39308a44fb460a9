//! Optimal approach speed for a red light whose green time is random.
//!
//! The vehicle starts at speed `v0`, is `d` from the light and may not pass it
//! before it turns green at the random time `T`. Acceleration is bounded by
//! `alpha`, braking by `beta` and speed by `v_max`. The objective is the
//! expected arrival time at a destination `L` beyond the start.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod distributions;
pub mod error;
pub mod euler_lagrange;
pub mod io;
pub mod kinematics;
pub mod oracle;
pub mod quadrature;
pub mod roots;
pub mod solver;

pub use distributions::GreenDistribution;
pub use error::{Error, Result};
pub use kinematics::{validate_problem, Phase, PhasePattern, ProblemSpec, Trajectory};
pub use solver::{solve, SolveReport};
