//! Stationary ergodic reactions `f(x,u) = a(x) f0(u)` with i.i.d. cell amplitudes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::ReactionField;
use super::profile::{ReactionKind, ReactionProfile};
use crate::error::{Error, Result};

/// Amplitude of cell `k` for `seed`; depends on `(seed, k)` only.
pub fn cell_amplitude(seed: u64, k: i64, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        return range.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    range.0 + (range.1 - range.0) * rng.random::<f64>()
}

pub fn cell_amplitudes(seed: u64, first_cell: i64, count: usize, range: (f64, f64)) -> Vec<f64> {
    (0..count as i64)
        .map(|k| cell_amplitude(seed, first_cell + k, range))
        .collect()
}

fn check_range(base: &ReactionProfile, range: (f64, f64)) -> Result<()> {
    if !(range.0 > 0.0) {
        return Err(Error::Domain(format!(
            "amplitude lower bound {} must be positive",
            range.0
        )));
    }
    if !(range.0 <= 1.0 && 1.0 <= range.1) {
        return Err(Error::Domain(format!(
            "amplitude range [{}, {}] must contain 1",
            range.0, range.1
        )));
    }
    if base.kind() != ReactionKind::Ignition {
        return Err(Error::Precondition(
            "random media need an ignition base profile".into(),
        ));
    }
    Ok(())
}

/// `cell_count` cells of length `period_p` starting at `x1 = 0`.
pub fn sample_random_reaction(
    seed: u64,
    base: &ReactionProfile,
    amplitude_range: (f64, f64),
    cell_count: usize,
    period_p: f64,
) -> Result<ReactionField> {
    sample_random_reaction_from(seed, base, amplitude_range, 0, cell_count, period_p)
}

/// Cells `first_cell .. first_cell + cell_count`, cell `k` covering `[k p, (k+1) p)`.
pub fn sample_random_reaction_from(
    seed: u64,
    base: &ReactionProfile,
    amplitude_range: (f64, f64),
    first_cell: i64,
    cell_count: usize,
    period_p: f64,
) -> Result<ReactionField> {
    check_range(base, amplitude_range)?;
    if cell_count == 0 {
        return Err(Error::Domain("cell_count must be positive".into()));
    }
    let amps = cell_amplitudes(seed, first_cell, cell_count, amplitude_range);
    let mut f = ReactionField::cellwise_amplitudes(
        base,
        &amps,
        first_cell as f64 * period_p,
        period_p,
        amplitude_range,
        false,
    )?;
    f.set_seed(seed);
    Ok(f)
}
