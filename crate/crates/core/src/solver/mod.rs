//! Time integration of the regularized and limit systems.

mod initial;
mod params;
pub mod snapshot;
mod step;

pub use initial::{make_initial_data, Profile};
pub use params::{ModelParams, State, StepperConfig, NONNEGATIVITY_TOL};
pub use step::{suggest_dt, RunStats, Stepper};
