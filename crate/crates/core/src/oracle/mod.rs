//! Independent checks of solver output.

pub mod dp;
pub mod perturb;
pub mod sweep;

pub use dp::{dp_min_cost, DpGrid, DpResult};
pub use perturb::{perturbation_test, Bump, Perturbation, PerturbationReport};
pub use sweep::{sweep_switch_velocity, SweepCurve, SweepPoint};
