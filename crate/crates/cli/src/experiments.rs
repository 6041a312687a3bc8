use anyhow::{bail, Context, Result};
use frontlab::cell::{
    build_profile, kappa_shape_check, min_speed, principal_eigen, ProfileVariant,
};
use frontlab::evolve::{Evolver, Recorder, SolutionState, Storage, Trajectory, WindowPolicy};
use frontlab::fronts::{
    construct_front, fit_speed, pulsating_defect, rows_to_csv, shooting_speed, spreading_check,
    time_shift_distance_around, z_minus, z_plus, Diagnostics, FrontConfig, FrontEstimate, Side,
};
use frontlab::medium::ReactionKind;
use frontlab::presets::Medium;
use frontlab::random::{
    audit_records, records_to_csv, subadditivity_audit, summarize, CrossingSetup, Resolution,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Experiment, Normalized};
use crate::manifest::Assertion;

/// Files produced by an experiment and the assertions it checked.
#[derive(Default)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub assertions: Vec<Assertion>,
}

impl Outputs {
    fn file(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.file(name, text);
        Ok(())
    }

    fn at_most(&mut self, name: &str, value: f64, threshold: f64) {
        self.assertions
            .push(Assertion::new(name, value <= threshold, value, threshold));
    }

    fn at_least(&mut self, name: &str, value: f64, threshold: f64) {
        self.assertions
            .push(Assertion::new(name, value >= threshold, value, threshold));
    }
}

fn e17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn run(n: &Normalized) -> Result<Outputs> {
    let mut out = Outputs::default();
    match &n.config.experiment {
        Experiment::Eigen { lambdas, direction } => eigen(n, lambdas, *direction, &mut out)?,
        Experiment::Speed { zetas } => speed(n, zetas, &mut out)?,
        Experiment::Front {
            side,
            shift,
            n_max,
            t_before,
            ahead,
            time_cap,
            period,
        } => {
            let cfg = front_config(n, *side, *shift, *n_max, *t_before, *ahead, *time_cap);
            front(n, &cfg, *period, &mut out)?
        }
        Experiment::Stability {
            nu,
            mu,
            y,
            times,
            two_sided,
        } => stability(n, *nu, *mu, *y, times, *two_sided, &mut out)?,
        Experiment::Pulsating {
            period,
            rel_bracket,
            tol,
        } => {
            let cfg = front_config(n, Side::Left, 1.0, 6, 0.5, 2.0, 200.0);
            let w = construct_front(&n.medium.coeffs, &n.medium.field, &cfg)?;
            pulsating(&w, *period, *rel_bracket, *tol, &mut out)?
        }
        Experiment::Random {
            seeds,
            n: count,
            audit_starts,
            margin,
            time_cap,
            ..
        } => random(
            n,
            &seeds.list(),
            *count,
            audit_starts,
            *margin,
            *time_cap,
            &mut out,
        )?,
        Experiment::Spreading {
            nu,
            half_width,
            speed_factor,
            eps,
            speed,
        } => spreading(n, *nu, *half_width, *speed_factor, *eps, *speed, &mut out)?,
    }
    Ok(out)
}

fn eigen(n: &Normalized, lambdas: &[f64], direction: i32, out: &mut Outputs) -> Result<()> {
    let c = &n.medium.coeffs;
    // constant coefficients are resampled at the requested spacing
    let coeffs = if c.is_constant() {
        let n1 = (c.period() / n.grid.dx).round().max(1.0) as usize;
        let n2 = if c.dim() == 2 { n1 } else { 1 };
        c.at_resolution(n1, n2)?
    } else {
        c.clone()
    };
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut csv = String::from("lambda,kappa,residual,iterations\n");
    let mut exact = 0.0f64;
    let flat = coeffs.is_constant() && coeffs.max_abs_q() == [0.0, 0.0];
    for &l in &sorted {
        let e = principal_eigen(&coeffs, l, direction)?;
        csv += &format!(
            "{},{},{},{}\n",
            e17(l),
            e17(e.kappa),
            e17(e.residual_norm),
            e.iterations
        );
        if flat && l > 0.0 {
            let a11 = coeffs.a(0, 0)[0];
            exact = exact.max((e.kappa / (a11 * l * l) - 1.0).abs());
        }
    }
    out.file("eigen.csv", csv);
    let shape = kappa_shape_check(&coeffs, &sorted, direction, 1e-8)?;
    out.at_least("kappa >= A_lower lambda^2", shape.lower_bound_slack, -1e-8);
    if sorted.len() >= 3 {
        out.at_least("kappa midpoint convexity", shape.convexity_slack, -1e-8);
    }
    if flat {
        out.at_most("kappa = a11 lambda^2 (relative)", exact, 1e-6);
    }
    Ok(())
}

fn speed(n: &Normalized, zetas: &[f64], out: &mut Outputs) -> Result<()> {
    let c = &n.medium.coeffs;
    let mut sorted = zetas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut csv = String::from("zeta,c_zeta,lambda_zeta,kappa\n");
    let mut bound = f64::INFINITY;
    let mut monotone = f64::INFINITY;
    let mut prev: Option<f64> = None;
    for &z in &sorted {
        let s = min_speed(c, z, 1)?;
        csv += &format!(
            "{},{},{},{}\n",
            e17(z),
            e17(s.c_zeta),
            e17(s.lambda_zeta),
            e17(s.kappa)
        );
        bound = bound.min(s.c_zeta / (2.0 * (c.a_lower() * z).sqrt()) - 1.0);
        if let Some(p) = prev {
            monotone = monotone.min(s.c_zeta - p);
        }
        prev = Some(s.c_zeta);
    }
    out.file("speed.csv", csv);
    out.at_least(
        "c_zeta >= 2 sqrt(A_lower zeta) (relative slack)",
        bound,
        -1e-9,
    );
    if sorted.len() >= 2 {
        out.at_least("c_zeta non-decreasing in zeta", monotone, -1e-9);
    }
    if c.is_constant()
        && c.max_abs_q() == [0.0, 0.0]
        && n.medium.field.lower().kind() == ReactionKind::Ignition
    {
        let c0 = c.a(0, 0)[0].sqrt() * shooting_speed(n.medium.field.lower(), 1e-10)?;
        out.json("speed_summary.json", &json!({ "c0_shooting": c0 }))?;
    }
    Ok(())
}

fn front_config(
    n: &Normalized,
    side: Side,
    shift: f64,
    n_max: usize,
    t_before: f64,
    ahead: f64,
    time_cap: f64,
) -> FrontConfig {
    FrontConfig {
        grid: n.grid,
        dt: Some(n.dt),
        zeta: n.medium.zeta,
        theta_tilde: n.medium.theta_tilde,
        side,
        shift,
        n_max,
        t_before,
        t_after: n.t_end,
        record_every: n.record_every,
        time_cap,
        ahead,
        c0: None,
    }
}

/// Period of the medium in `x1`, if it has one.
fn medium_period(m: &Medium) -> Option<f64> {
    match m.field.period() {
        Some(p) => Some(p.max(m.coeffs.period())),
        None if m.field.nodes().len() <= 1 => Some(m.coeffs.period()),
        None => None,
    }
}

fn front_speed(w: &Trajectory) -> Result<f64> {
    let t = w.times();
    let z: Vec<f64> = w.snapshots.iter().map(|s| z_minus(s, 0.5)).collect();
    fit_speed(&t, &z)
        .map(|f| f.slope)
        .context("too few snapshots to fit a speed")
}

fn front(n: &Normalized, cfg: &FrontConfig, period: Option<f64>, out: &mut Outputs) -> Result<()> {
    let m = &n.medium;
    let w = construct_front(&m.coeffs, &m.field, cfg)?;
    let eig = principal_eigen(&m.coeffs, w.speed.lambda_zeta, 1)?;
    let psi = build_profile(&eig, &ProfileVariant::Psi)?;
    let eps = vec![0.1, 0.01];
    let mut diag = Diagnostics::new(&m.field, m.zeta, psi, eps.clone());
    let rows: Vec<_> = w.trajectory.snapshots.iter().map(|s| diag.row(s)).collect();
    out.file("front_diagnostics.csv", rows_to_csv(&rows, &eps));
    if let Some(last) = w.trajectory.snapshots.last() {
        out.file("front_final.csv", last.to_csv());
    }
    out.json(
        "front_summary.json",
        &json!({
            "tau_n": w.tau_n,
            "n_used": w.n_used,
            "cauchy_gap": w.cauchy_gap,
            "c_zeta": w.speed.c_zeta,
            "lambda_zeta": w.speed.lambda_zeta,
            "zeta_zero": w.zeta_zero,
            "dt": w.dt,
        }),
    )?;
    if let Some(&gap) = w.cauchy_gap.last() {
        out.at_most("front construction Cauchy gap", gap, 1e-2);
    }
    if let Some(p) = period.or_else(|| medium_period(m)) {
        pulsating(&w, p, 0.1, 2e-2, out)?;
    }
    Ok(())
}

fn pulsating(
    w: &FrontEstimate,
    p: f64,
    rel_bracket: f64,
    tol: f64,
    out: &mut Outputs,
) -> Result<()> {
    let c = front_speed(&w.trajectory)?;
    let r = pulsating_defect(&w.trajectory, c, p, rel_bracket)?;
    out.json("pulsating.json", &r)?;
    out.at_most("pulsating defect", r.defect, tol);
    Ok(())
}

fn evolve(
    m: &Medium,
    u0: SolutionState,
    policy: WindowPolicy,
    t_end: f64,
    every: f64,
) -> Result<Trajectory> {
    let mut ev = Evolver::new(&m.coeffs, &m.field, u0.grid, policy)?;
    let mut rec = Recorder::every(u0.time, t_end, every, Storage::Full)?;
    let mut s = u0;
    ev.run(&mut s, t_end, Some(&mut rec))?;
    Ok(Trajectory::new(rec.into_snapshots()))
}

/// `u(-x)` on the mirrored window.
fn mirrored(s: &SolutionState) -> Result<SolutionState> {
    let mut values = Vec::with_capacity(s.values.len());
    for i in (0..s.nx).rev() {
        values.extend_from_slice(s.column(i));
    }
    let mut m = SolutionState::new(
        s.grid,
        s.dt,
        -(s.i_lo + s.nx as i64 - 1),
        s.nx,
        (0.0, 0.0),
        values,
    )?;
    m.left_fill = s.right_fill.clone();
    m.right_fill = s.left_fill.clone();
    m.time = s.time;
    Ok(m)
}

/// Shift aligning the rightmost half levels of `u(t)` and `w(t + tau)`.
fn guess_shift(u: &Trajectory, w: &Trajectory, t: f64, c: f64) -> Result<f64> {
    let us = u.state_at(t).context("time outside the solution record")?;
    let ws = w.state_at(t).context("time outside the front record")?;
    Ok((z_plus(&us, 0.5) - z_plus(&ws, 0.5)) / c)
}

/// Best time shift of `u` onto `w` at `t` over columns `cols`.
fn fit_shift(
    u: &Trajectory,
    w: &Trajectory,
    t: f64,
    c: f64,
    cols: (i64, i64),
) -> Result<(f64, f64)> {
    let center = guess_shift(u, w, t, c)?;
    Ok(time_shift_distance_around(
        u,
        w,
        t,
        center,
        1.5,
        Some(cols),
    )?)
}

fn decreasing_to(d: &[f64], floor: f64) -> f64 {
    // largest increase above the floor
    d.windows(2)
        .filter(|w| w[1] >= floor)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn stability(
    n: &Normalized,
    nu: f64,
    mu: f64,
    y: f64,
    times: &[f64],
    two_sided: Option<f64>,
    out: &mut Outputs,
) -> Result<()> {
    let m = &n.medium;
    if times.is_empty() {
        bail!("stability needs sample times");
    }
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let mut cfg = front_config(n, Side::Left, 1.0, 6, 0.5, 2.0, 200.0);
    cfg.t_after = t_end + 12.0;
    let w = construct_front(&m.coeffs, &m.field, &cfg)?;
    let c = front_speed(&w.trajectory)?;
    let theta = m.field.lower().theta();
    let lam = w.speed.lambda_zeta;
    let level = theta + nu;
    let dx = n.grid.dx;
    let u0 = SolutionState::from_fn(
        n.grid,
        n.dt,
        (-20.0, 20.0 + 5.0 / lam),
        (level, 0.0),
        |x, _| level.min((-mu * (x - y)).exp()),
    )?;
    let u = evolve(m, u0, WindowPolicy::follow(lam, dx), t_end, n.record_every)?;
    let floor = 10.0 * w.cauchy_gap.last().copied().unwrap_or(f64::INFINITY);
    let mut csv = String::from("t,tau,distance\n");
    let mut one = Vec::new();
    for &t in times {
        let x = z_minus(
            &u.state_at(t).context("time outside the solution record")?,
            0.5,
        );
        let cols = (((x - 15.0) / dx) as i64, ((x + 15.0) / dx) as i64);
        let (tau, d) = fit_shift(&u, &w.trajectory, t, c, cols)?;
        csv += &format!("{},{},{}\n", e17(t), e17(tau), e17(d));
        one.push(d);
    }
    out.file("stability.csv", csv);
    out.at_most(
        "one-sided distance increase above resolution floor",
        decreasing_to(&one, floor),
        0.0,
    );
    out.at_most(
        "one-sided final distance",
        *one.last().expect("non-empty"),
        1e-2,
    );
    let Some(l) = two_sided else { return Ok(()) };
    // w_-(t, x) = w_+ of the reflected medium at -x
    let wr = construct_front(&m.coeffs.reflected(), &m.field.reflected(), &cfg)?;
    let cr = front_speed(&wr.trajectory)?;
    let reach = l + 2.0 * c.max(cr) * t_end + 20.0;
    let u0 = SolutionState::from_fn(n.grid, n.dt, (-reach, reach), (0.0, 0.0), |x, _| {
        level
            .min((-mu * (x - l - y)).exp())
            .min((mu * (x + l + y)).exp())
    })?;
    let u = evolve(m, u0, WindowPolicy::Fixed, t_end, n.record_every)?;
    let um = Trajectory::new(u.snapshots.iter().map(mirrored).collect::<Result<_>>()?);
    let floor2 = floor.max(10.0 * wr.cauchy_gap.last().copied().unwrap_or(f64::INFINITY));
    let mut csv = String::from("t,tau_plus,tau_minus,distance\n");
    let mut two = Vec::new();
    for &t in times {
        let s = u.state_at(t).context("time outside the solution record")?;
        let right = (0, s.i_lo + s.nx as i64 - 1);
        let (tp, _) = fit_shift(&u, &w.trajectory, t, c, right)?;
        let (tm, _) = fit_shift(&um, &wr.trajectory, t, cr, right)?;
        let wp = w
            .trajectory
            .state_at(t + tp)
            .context("shift outside the front record")?;
        let wm = mirrored(
            &wr.trajectory
                .state_at(t + tm)
                .context("shift outside the front record")?,
        )?;
        let mut d = 0.0f64;
        for i in 0..s.nx {
            let g = s.i_lo + i as i64;
            for j in 0..s.grid.ny {
                let target = wp.at_global(g, j) + wm.at_global(g, j) - 1.0;
                d = d.max((s.values[i * s.grid.ny + j] - target).abs());
            }
        }
        csv += &format!("{},{},{},{}\n", e17(t), e17(tp), e17(tm), e17(d));
        two.push(d);
    }
    out.file("stability_two_sided.csv", csv);
    out.at_most(
        "two-sided distance increase above resolution floor",
        decreasing_to(&two, floor2),
        0.0,
    );
    out.at_most(
        "two-sided final distance",
        *two.last().expect("non-empty"),
        1e-2,
    );
    Ok(())
}

fn random(
    n: &Normalized,
    seeds: &[u64],
    count: i64,
    starts: &[i64],
    margin: f64,
    time_cap: f64,
    out: &mut Outputs,
) -> Result<()> {
    let fam = n
        .family
        .as_ref()
        .context("random experiments need a family")?;
    let res = Resolution {
        dx: n.grid.dx,
        dt: n.dt_given,
        ny: 1,
        margin,
        time_cap,
    };
    let setup = CrossingSetup::new(fam, res)?;
    let records = audit_records(&setup, seeds, starts, count)?;
    out.file("records.csv", records_to_csv(&records));
    let est = summarize(&records, fam.period, count)?;
    let lo = fam.homogeneous_speed(fam.amplitude_range.0)?;
    let hi = fam.homogeneous_speed(fam.amplitude_range.1)?;
    let c_min =
        lo.context("the crossing tolerance needs the lower envelope speed (constant A, q = 0)")?;
    let audit = subadditivity_audit(&records, setup.tol_cross(c_min));
    out.json(
        "summary.json",
        &json!({
            "tau_plus": est.tau_plus,
            "ci": est.ci,
            "c_plus": est.c_plus,
            "per_n_means": est.per_n_means,
            "per_n_stds": est.per_n_stds,
            "samples": est.samples,
            "partial": est.partial,
            "envelope": est.envelope,
            "audit_triples": audit.triples,
            "audit_worst_slack": audit.worst_slack,
        }),
    )?;
    out.at_least("subadditivity worst slack", audit.worst_slack, 0.0);
    out.at_most(
        "seeds dropped for uncertified crossings",
        (est.samples < seeds.len()) as u8 as f64,
        0.0,
    );
    if count >= 4 {
        let (s4, sn) = (est.per_n_stds[3], est.per_n_stds[count as usize - 1]);
        out.at_most("std of tau/n at n over its value at n = 4", sn - s4, 0.0);
    }
    out.at_least(
        "c_plus above the lower envelope speed",
        est.c_plus - c_min,
        0.0,
    );
    if let Some(hi) = hi {
        out.at_most(
            "c_plus below the upper envelope speed",
            est.c_plus - hi,
            0.0,
        );
    }
    Ok(())
}

fn spreading(
    n: &Normalized,
    nu: f64,
    l: f64,
    factor: f64,
    eps: f64,
    speed: Option<f64>,
    out: &mut Outputs,
) -> Result<()> {
    let m = &n.medium;
    let c0 = match speed {
        Some(c) => c,
        None if m.coeffs.is_constant() && m.coeffs.max_abs_q() == [0.0, 0.0] => {
            m.coeffs.a(0, 0)[0].sqrt() * shooting_speed(m.field.lower(), 1e-10)?
        }
        None => bail!("spreading needs an envelope speed for media with variable A or q"),
    };
    let theta = m.field.lower().theta();
    let reach = l + c0 * n.t_end + 10.0;
    let window = n.config.discretization.window.unwrap_or((-reach, reach));
    let datum = |h: f64| {
        SolutionState::from_fn(n.grid, n.dt, window, (0.0, 0.0), |x, _| {
            if x.abs() <= l {
                h
            } else {
                0.0
            }
        })
    };
    let every = n.record_every.max(0.5);
    let u = evolve(m, datum(theta + nu)?, WindowPolicy::Fixed, n.t_end, every)?;
    let c = factor * c0;
    let rep = spreading_check(&u, 0.0, c, c, eps);
    let q = evolve(
        m,
        datum((theta - 0.05).max(0.0))?,
        WindowPolicy::Fixed,
        n.t_end,
        every,
    )?;
    let control = spreading_check(&q, 0.0, c, c, eps);
    let mut csv = String::from("t,max_u,max_quench\n");
    for (a, b) in u.snapshots.iter().zip(&q.snapshots) {
        csv += &format!("{},{},{}\n", e17(a.time), e17(a.max()), e17(b.max()));
    }
    out.file("spreading.csv", csv);
    out.json(
        "spreading.json",
        &json!({ "t_prime": rep.t_prime, "horizon": rep.horizon, "speed": c, "quench_t_prime": control.t_prime }),
    )?;
    out.assertions.push(Assertion::new(
        "spreading certified",
        rep.t_prime.is_some(),
        rep.t_prime.unwrap_or(f64::NAN),
        rep.horizon,
    ));
    out.assertions.push(Assertion::new(
        "sub-threshold datum never certified",
        control.t_prime.is_none(),
        control.t_prime.unwrap_or(f64::NAN),
        f64::NAN,
    ));
    Ok(())
}
