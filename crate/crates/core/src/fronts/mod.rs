//! Subsolutions, front construction, interface diagnostics, the shooting oracle and
//! the trajectory comparisons behind the uniqueness, stability and periodicity checks.

mod compare;
mod diagnostics;
mod front;
mod shooting;
mod subsolution;

pub use compare::{
    distance_on, pulsating_defect, spreading_check, time_shift_distance,
    time_shift_distance_around, PulsatingReport, SpreadingReport,
};
pub use diagnostics::{
    fit_speed, rows_to_csv, tail_slope, y_of, z_minus, z_plus, Diagnostics, DiagnosticsRow,
};
pub use front::{
    construct_front, front_preconditions, launch_window, propagate, FrontConfig, FrontEstimate,
    FrontRun,
};
pub use shooting::{shooting_speed, shooting_speed_with};
pub use subsolution::{build_subsolution, Rho, Side, Subsolution};
