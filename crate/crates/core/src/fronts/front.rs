use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diagnostics::{Diagnostics, DiagnosticsRow};
use super::shooting::shooting_speed;
use super::subsolution::{build_subsolution, Side, Subsolution};
use crate::cell::{min_speed, zeta_zero, SpeedSolution};
use crate::error::{Error, Result};
use crate::evolve::{
    stable_dt_on, Evolver, Recorder, SolutionState, Storage, Trajectory, WindowPolicy,
};
use crate::grid::Grid;
use crate::medium::{
    check_hypotheses, check_majorizes, default_majorant, CoefficientField, ReactionField,
};

/// Parameters of the launch-and-normalize construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrontConfig {
    pub grid: Grid,
    pub dt: Option<f64>,
    pub zeta: f64,
    pub theta_tilde: f64,
    pub side: Side,
    /// Launch shift unit `p` (a grid multiple).
    pub shift: f64,
    pub n_max: usize,
    /// Normalized sample times are `-t_before ..= t_after` every `record_every`.
    pub t_before: f64,
    pub t_after: f64,
    pub record_every: f64,
    /// Give up when the level-theta crossing has not reached 0 by this time.
    pub time_cap: f64,
    /// Extra window length ahead of the data, beyond the adequacy zone.
    pub ahead: f64,
    /// Known `c0` (speed of the `f0` front); computed by shooting for constant `A`, `q = 0`.
    pub c0: Option<f64>,
}

/// Launches `u_n` from `v(x + n p e1)` and normalizes each so that `u_n(0, 0) = theta`.
#[derive(Clone, Debug)]
pub struct FrontEstimate {
    /// Normalized snapshots of `u_{n_max}`.
    pub trajectory: Trajectory,
    pub tau_n: Vec<f64>,
    pub n_used: usize,
    /// `cauchy_gap[k]`: sup distance between the normalized `u_{k+2}` and `u_{k+1}`.
    pub cauchy_gap: Vec<f64>,
    pub speed: SpeedSolution,
    pub subsolution: Subsolution,
    pub zeta_zero: Option<f64>,
    pub dt: f64,
}

/// Gate shared by front experiments: hypotheses, majorization and `f1'(0) < zeta_0`.
pub fn front_preconditions(
    coeffs: &CoefficientField,
    field: &ReactionField,
    zeta: f64,
    c0: Option<f64>,
) -> Result<Option<f64>> {
    let rep = check_hypotheses(field, coeffs);
    if !rep.all_pass() {
        let names: Vec<String> = rep
            .failures()
            .map(|c| format!("{} ({:.3e})", c.name, c.slack))
            .collect();
        return Err(Error::Precondition(format!(
            "hypotheses fail: {}",
            names.join(", ")
        )));
    }
    let g = default_majorant(field, zeta)?;
    if let Err(e) = check_majorizes(field, zeta, &g) {
        return Err(Error::Precondition(format!("majorization fails: {e}")));
    }
    let c0 = match c0 {
        Some(c) => Some(c),
        None if coeffs.is_constant() && coeffs.max_abs_q() == [0.0, 0.0] => {
            let a11 = coeffs.a(0, 0)[0];
            Some(a11.sqrt() * shooting_speed(field.lower(), 1e-10)?)
        }
        None => None,
    };
    let Some(c0) = c0 else { return Ok(None) };
    let z0 = zeta_zero(coeffs, c0, 1)?;
    let s = field.upper().slope_at_zero();
    if !(s < z0) {
        return Err(Error::Precondition(format!(
            "f1'(0) = {s} must be below zeta_0 = {z0}"
        )));
    }
    if !(zeta < z0) {
        return Err(Error::Precondition(format!(
            "zeta = {zeta} must be below zeta_0 = {z0}"
        )));
    }
    Ok(Some(z0))
}

/// Window following a front at `x_front`: `behind` to the left, adequacy zone plus `ahead` to the right.
pub fn launch_window(sub: &Subsolution, offset_x: f64, ahead: f64, zone: f64) -> (f64, f64) {
    let (lo, hi) = sub.natural_window(2.0);
    (lo + offset_x, hi + offset_x + zone + ahead)
}

struct Launch {
    tau: f64,
    snapshots: Vec<SolutionState>,
}

#[allow(clippy::too_many_arguments)]
fn launch(
    coeffs: &CoefficientField,
    field: &ReactionField,
    sub: &Subsolution,
    cfg: &FrontConfig,
    dt: f64,
    policy: WindowPolicy,
    zone: f64,
    n: usize,
) -> Result<Launch> {
    let k = cfg
        .grid
        .cells_per(cfg.shift)
        .ok_or_else(|| Error::Config(format!("shift {} is not a grid multiple", cfg.shift)))?;
    let offset = -((n * k) as i64);
    let window = launch_window(sub, offset as f64 * cfg.grid.dx, cfg.ahead, zone);
    let init = sub.state(offset, window, dt)?;
    let theta = field.lower().theta();
    // pass 1: locate tau_n
    let mut ev = Evolver::new(coeffs, field, cfg.grid, policy)?;
    let mut s = init.clone();
    let mut prev = (s.time, s.at_global(0, 0));
    let tau = loop {
        if prev.1 >= theta {
            break prev.0;
        }
        if s.time > cfg.time_cap {
            return Err(Error::Horizon(format!(
                "launch {n}: level {theta} did not reach x1 = 0 by t = {}",
                cfg.time_cap
            )));
        }
        ev.step(&mut s)?;
        let cur = (s.time, s.at_global(0, 0));
        if cur.1 >= theta {
            let w = (theta - prev.1) / (cur.1 - prev.1);
            break prev.0 + w * (cur.0 - prev.0);
        }
        prev = cur;
    };
    if tau < cfg.t_before {
        return Err(Error::Config(format!(
            "launch {n} crosses at t = {tau}, before the requested history {}",
            cfg.t_before
        )));
    }
    // pass 2: record on the normalized grid
    let m = ((cfg.t_before + cfg.t_after) / cfg.record_every + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=m)
        .map(|i| tau - cfg.t_before + i as f64 * cfg.record_every)
        .collect();
    let t_end = *times.last().unwrap();
    let mut rec = Recorder::new(times, Storage::Full)?;
    let mut ev = Evolver::new(coeffs, field, cfg.grid, policy)?;
    let mut s = init;
    ev.run(&mut s, t_end, Some(&mut rec))?;
    let mut snapshots = rec.into_snapshots();
    for sn in &mut snapshots {
        sn.time -= tau;
    }
    Ok(Launch { tau, snapshots })
}

pub fn construct_front(
    coeffs: &CoefficientField,
    field: &ReactionField,
    cfg: &FrontConfig,
) -> Result<FrontEstimate> {
    if cfg.n_max == 0 {
        return Err(Error::Config("n_max must be at least 1".into()));
    }
    let z0 = front_preconditions(coeffs, field, cfg.zeta, cfg.c0)?;
    let speed = min_speed(coeffs, cfg.zeta, 1)?;
    let sub = build_subsolution(coeffs, field.lower(), cfg.theta_tilde, cfg.side, cfg.grid)?;
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => stable_dt_on(coeffs, field, cfg.grid),
    };
    let policy = WindowPolicy::follow(speed.lambda_zeta, cfg.grid.dx);
    let zone = 5.0 / speed.lambda_zeta;
    let launches: Vec<Launch> = (1..=cfg.n_max)
        .into_par_iter()
        .map(|n| launch(coeffs, field, &sub, cfg, dt, policy, zone, n))
        .collect::<Result<_>>()?;
    let cauchy_gap = launches
        .windows(2)
        .map(|w| {
            w[0].snapshots
                .iter()
                .zip(&w[1].snapshots)
                .map(|(a, b)| a.distance(b))
                .fold(0.0, f64::max)
        })
        .collect();
    let tau_n = launches.iter().map(|l| l.tau).collect();
    let last = launches.into_iter().last().expect("n_max >= 1");
    Ok(FrontEstimate {
        trajectory: Trajectory::new(last.snapshots),
        tau_n,
        n_used: cfg.n_max,
        cauchy_gap,
        speed,
        subsolution: sub,
        zeta_zero: z0,
        dt,
    })
}

/// Evolution of one datum with diagnostics and (optionally) full snapshots.
#[derive(Clone, Debug)]
pub struct FrontRun {
    pub rows: Vec<DiagnosticsRow>,
    pub trajectory: Trajectory,
    pub final_state: SolutionState,
    pub shifts: usize,
    pub dropped_defect: f64,
}

/// Runs `state` to `t_end` recording diagnostics every `record_every`; snapshots are
/// kept only with `storage = Full`.
#[allow(clippy::too_many_arguments)]
pub fn propagate(
    coeffs: &CoefficientField,
    field: &ReactionField,
    mut state: SolutionState,
    policy: WindowPolicy,
    t_end: f64,
    record_every: f64,
    diagnostics: &mut Diagnostics,
    storage: Storage,
) -> Result<FrontRun> {
    let mut ev = Evolver::new(coeffs, field, state.grid, policy)?;
    let mut rows = Vec::new();
    let (snapshots, ..) = {
        let mut rec = Recorder::every(state.time, t_end, record_every, storage)?.with_hook(|s| {
            rows.push(diagnostics.row(s));
            Ok(Vec::new())
        });
        ev.run(&mut state, t_end, Some(&mut rec))?;
        rec.into_parts()
    };
    Ok(FrontRun {
        rows,
        trajectory: Trajectory::new(snapshots),
        final_state: state,
        shifts: ev.shifts(),
        dropped_defect: ev.dropped_defect(),
    })
}
