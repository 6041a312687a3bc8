//! Benchmark fixtures shared by the criterion benches.

use frontlab::evolve::{stable_dt_on, Evolver, SolutionState, WindowPolicy};
use frontlab::grid::Grid;
use frontlab::presets::{periodic_reaction, Medium};

pub fn medium() -> Medium {
    periodic_reaction().expect("preset builds")
}

/// Smoothed step on `nx` columns with its evolver.
pub fn stepping(m: &Medium, nx: usize) -> (Evolver, SolutionState) {
    let grid = Grid::new(1, m.dx, 1).expect("grid");
    let dt = stable_dt_on(&m.coeffs, &m.field, grid);
    let mid = nx as f64 / 2.0;
    let values = (0..nx)
        .map(|i| 1.0 / (1.0 + ((i as f64 - mid) * m.dx).exp()))
        .collect();
    let state =
        SolutionState::new(grid, dt, -(nx as i64) / 2, nx, (1.0, 0.0), values).expect("state");
    let ev = Evolver::new(&m.coeffs, &m.field, grid, WindowPolicy::Fixed).expect("evolver");
    (ev, state)
}
