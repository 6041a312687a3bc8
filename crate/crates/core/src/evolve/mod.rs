//! Explicit monotone time stepping on a moving window, recording, and discrete residuals.

mod record;
mod residual;
mod state;
mod stepper;

pub use record::{Recorder, Storage, Trajectory};
pub use residual::{residual, residual_with, Candidate, Reaction, ResidualReport, Sign};
pub use state::SolutionState;
pub use stepper::{stable_dt, stable_dt_on, Evolver, FillPolicy, WindowPolicy};
