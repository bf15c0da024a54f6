//! Silver stepsize schedules for gradient descent on κ-conditioned functions.
//!
//! Modules:
//! - [`schedule`]: normalized stepsizes, the ψ transform, schedules and rates.
//! - [`dynamics`]: the one-dimensional map driving the rate, Taylor bounds and
//!   the acceleration/saturation envelope.
//! - [`certificate`]: co-coercivity certificates built by recursive gluing and
//!   their numerical verification.
//! - [`gd`]: gradient descent on instrumented oracles and a worst-case probe.
//! - [`twostep`]: the optimal two-step schedule and its rate floor.
//! - [`cli`]: the command-line front end.

pub mod certificate;
pub mod cli;
pub mod dynamics;
pub mod error;
mod fmt;
pub mod gd;
pub mod real;
pub mod schedule;
pub mod twostep;

pub use error::{Error, Result};
pub use fmt::fmt_g17;
pub use real::{Mp, Real};
