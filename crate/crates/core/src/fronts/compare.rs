use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{SolutionState, Trajectory};
use crate::optimize::golden_section;

const SCAN: usize = 80;

/// Sup distance between two states over global columns `cols` (all columns of both
/// windows when `None`).
pub fn distance_on(a: &SolutionState, b: &SolutionState, cols: Option<(i64, i64)>) -> f64 {
    match cols {
        None => a.distance(b),
        Some((lo, hi)) => {
            let mut d = 0.0f64;
            for g in lo..=hi {
                for j in 0..a.grid.ny {
                    d = d.max((a.at_global(g, j) - b.at_global(g, j)).abs());
                }
            }
            d
        }
    }
}

/// Minimizes `tau -> sup |u(t_eval) - w(t_eval + tau)|` over `|tau| <= search`.
pub fn time_shift_distance(
    u: &Trajectory,
    w: &Trajectory,
    t_eval: f64,
    search: f64,
    cols: Option<(i64, i64)>,
) -> Result<(f64, f64)> {
    time_shift_distance_around(u, w, t_eval, 0.0, search, cols)
}

/// As [`time_shift_distance`], searching `|tau - center| <= search`.
pub fn time_shift_distance_around(
    u: &Trajectory,
    w: &Trajectory,
    t_eval: f64,
    center: f64,
    search: f64,
    cols: Option<(i64, i64)>,
) -> Result<(f64, f64)> {
    let us = u
        .state_at(t_eval)
        .ok_or_else(|| Error::Domain(format!("t = {t_eval} outside the first trajectory")))?;
    let dist = |tau: f64| -> Result<f64> {
        let ws = w.state_at(t_eval + tau).ok_or_else(|| {
            Error::Domain(format!(
                "t = {} outside the second trajectory",
                t_eval + tau
            ))
        })?;
        Ok(distance_on(&us, &ws, cols))
    };
    let h = 2.0 * search / SCAN as f64;
    let mut best = (0, f64::INFINITY);
    for k in 0..=SCAN {
        let d = dist(center - search + k as f64 * h)?;
        if d < best.1 {
            best = (k, d);
        }
    }
    if best.0 == 0 || best.0 == SCAN {
        return Err(Error::Bracket(format!(
            "best shift at the end of the search range +-{search} around {center}"
        )));
    }
    let a = center - search + (best.0 - 1) as f64 * h;
    golden_section(a, a + 2.0 * h, 1e-9, dist)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulsatingReport {
    pub c_estimate: f64,
    pub defect_at_estimate: f64,
    pub c_refined: f64,
    pub defect: f64,
}

fn defect_for(w: &Trajectory, k: i64, p: f64, c: f64) -> Result<f64> {
    let period = p / c;
    let (_, t1) = w
        .t_range()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    let mut worst = 0.0f64;
    let mut used = 0;
    for s in &w.snapshots {
        if s.time + period > t1 {
            break;
        }
        let later = w.state_at(s.time + period).expect("inside range");
        for i in 0..s.nx {
            let g = s.i_lo + i as i64;
            for j in 0..s.grid.ny {
                worst = worst.max((later.at_global(g + k, j) - s.values[i * s.grid.ny + j]).abs());
            }
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::Domain(format!(
            "trajectory shorter than one period {period}"
        )));
    }
    Ok(worst)
}

/// `sup |w(t + p/c, x + p e1) - w(t, x)|` over recorded `t`, then minimized over `c`
/// within `rel_bracket` of `c_est`.
pub fn pulsating_defect(
    w: &Trajectory,
    c_est: f64,
    p: f64,
    rel_bracket: f64,
) -> Result<PulsatingReport> {
    let grid = w
        .snapshots
        .first()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?
        .grid;
    let k = grid
        .cells_per(p)
        .ok_or_else(|| Error::Config(format!("period {p} is not a multiple of dx = {}", grid.dx)))?
        as i64;
    let at_est = defect_for(w, k, p, c_est)?;
    let (c, d) = golden_section(
        c_est * (1.0 - rel_bracket),
        c_est * (1.0 + rel_bracket),
        1e-7,
        |c| defect_for(w, k, p, c),
    )?;
    let (c, d) = if at_est <= d { (c_est, at_est) } else { (c, d) };
    Ok(PulsatingReport {
        c_estimate: c_est,
        defect_at_estimate: at_est,
        c_refined: c,
        defect: d,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadingReport {
    /// Earliest recorded `t'` such that `u(t' + t) >= 1 - eps` on the growing interval
    /// for all later samples.
    pub t_prime: Option<f64>,
    pub samples: usize,
    pub horizon: f64,
}

/// Certifies spreading from `x_center` at speeds `c_right`, `c_left`.
pub fn spreading_check(
    u: &Trajectory,
    x_center: f64,
    c_right: f64,
    c_left: f64,
    eps: f64,
) -> SpreadingReport {
    let snaps = &u.snapshots;
    let n = snaps.len();
    let ok = |start: usize, k: usize| -> bool {
        let s = &snaps[k];
        let t = s.time - snaps[start].time;
        let lo = x_center - c_left * t;
        let hi = x_center + c_right * t;
        let ny = s.grid.ny;
        let g_lo = (lo / s.grid.dx).ceil() as i64;
        let g_hi = (hi / s.grid.dx).floor() as i64;
        let g_lo = g_lo.max(s.i_lo);
        let g_hi = g_hi.min(s.i_lo + s.nx as i64 - 1);
        // the interval always contains x_center's nearest node
        let gc = (x_center / s.grid.dx).round() as i64;
        let (g_lo, g_hi) = (g_lo.min(gc), g_hi.max(gc));
        (g_lo..=g_hi).all(|g| (0..ny).all(|j| s.at_global(g, j) >= 1.0 - eps))
    };
    let t_prime = (0..n)
        .find(|&start| (start..n).all(|k| ok(start, k)))
        .map(|start| snaps[start].time);
    SpreadingReport {
        t_prime,
        samples: n,
        horizon: snaps.last().map_or(0.0, |s| s.time),
    }
}
