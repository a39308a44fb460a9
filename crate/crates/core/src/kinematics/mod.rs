//! Problem description, trajectories and their validation.

mod pattern;
mod problem;
mod trajectory;

pub use pattern::{Phase, PhasePattern};
pub use problem::{validate_problem, ProblemSpec, ProblemValidation, Violation, ViolationCode};
pub use trajectory::{Segment, SegmentKind, Trajectory, TrajectoryBuilder, DROP_DURATION};
