//! Crossing times `tau_{m,n}` of solutions launched from shifted subsolutions in
//! stationary ergodic media `f(x,u) = a(x) f0(u)`, and the speed they define.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{stable_dt_on, Evolver, SolutionState, WindowPolicy};
use crate::fronts::{build_subsolution, shooting_speed, Side, Subsolution};
use crate::grid::Grid;
use crate::medium::{cell_amplitudes, CoefficientField, ReactionField, ReactionProfile};
use crate::stats::mean_std;

/// A family of media `a(x, omega) f0(u)` with i.i.d. uniform cell amplitudes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RandomFamily {
    pub base: ReactionProfile,
    pub amplitude_range: (f64, f64),
    /// Cell length `p`, also the shift unit.
    pub period: f64,
    pub coeffs: CoefficientField,
    pub theta_tilde: f64,
    /// Medium seen through the cell shift `pi_k`: cell `j` carries the amplitude of cell `j + k`.
    #[serde(default)]
    pub cell_shift: i64,
}

impl RandomFamily {
    /// The sampled medium on cells `first .. first + count`.
    pub fn medium(&self, seed: u64, first: i64, count: usize) -> Result<ReactionField> {
        let amps = cell_amplitudes(seed, first + self.cell_shift, count, self.amplitude_range);
        let mut f = ReactionField::cellwise_amplitudes(
            &self.base,
            &amps,
            first as f64 * self.period,
            self.period,
            self.amplitude_range,
            false,
        )?;
        f.set_seed(seed);
        Ok(f)
    }

    pub fn shifted(&self, k: i64) -> Self {
        Self {
            cell_shift: self.cell_shift + k,
            ..self.clone()
        }
    }

    /// Front speed of the homogeneous medium `a f0` (shooting), when `A` is constant and `q = 0`.
    pub fn homogeneous_speed(&self, a: f64) -> Result<Option<f64>> {
        if !self.coeffs.is_constant() || self.coeffs.max_abs_q() != [0.0, 0.0] {
            return Ok(None);
        }
        let a11 = self.coeffs.a(0, 0)[0];
        Ok(Some(
            a11.sqrt() * shooting_speed(&self.base.scaled(a)?, 1e-10)?,
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub dx: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    /// Transverse rows in 2-D.
    #[serde(default = "one")]
    pub ny: usize,
    /// Window length added on both sides of the data.
    pub margin: f64,
    pub time_cap: f64,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub omega_seed: u64,
    pub m: i64,
    pub n: i64,
    pub tau: f64,
    pub certified: bool,
}

/// Subsolution, grid and step shared by every run of a family.
#[derive(Clone, Debug)]
pub struct CrossingSetup {
    pub family: RandomFamily,
    pub subsolution: Subsolution,
    pub grid: Grid,
    pub dt: f64,
    pub resolution: Resolution,
    cells: i64,
}

impl CrossingSetup {
    pub fn new(family: &RandomFamily, res: Resolution) -> Result<Self> {
        let grid = Grid::new(family.coeffs.dim(), res.dx, res.ny)?;
        let cells = grid.cells_per(family.period).ok_or_else(|| {
            Error::Config(format!(
                "period {} is not a multiple of dx = {}",
                family.period, res.dx
            ))
        })? as i64;
        let (a0, a1) = family.amplitude_range;
        let f0 = family.base.scaled(a0)?;
        let sub = build_subsolution(&family.coeffs, &f0, family.theta_tilde, Side::Left, grid)?;
        let top = ReactionField::homogeneous(family.base.scaled(a1)?);
        let dt = res
            .dt
            .unwrap_or_else(|| stable_dt_on(&family.coeffs, &top, grid));
        Ok(Self {
            family: family.clone(),
            subsolution: sub,
            grid,
            dt,
            resolution: res,
            cells,
        })
    }

    /// Recorder-plus-geometry slack `dt + dx / c_min` of crossing-time comparisons.
    pub fn tol_cross(&self, c_min: f64) -> f64 {
        self.dt + self.grid.dx / c_min
    }

    fn window(&self, m: i64, n: i64) -> (f64, f64) {
        let p = self.family.period;
        let margin = self.resolution.margin;
        let (lo, hi) = self.subsolution.natural_window(0.0);
        (lo - margin + m as f64 * p, hi + margin + n as f64 * p)
    }

    /// `min (u - v(. - n' p))` over the window, stopping at the first negative value
    /// when `early` is set.
    fn margin_to(&self, s: &SolutionState, n_prime: i64, early: bool) -> f64 {
        let off = n_prime * self.cells;
        let ny = s.grid.ny;
        let mut d = f64::INFINITY;
        for i in (0..s.nx).rev() {
            let g = s.i_lo + i as i64;
            for j in 0..ny {
                let v = self.subsolution.value(g - off, j);
                d = d.min(s.values[i * ny + j] - v);
            }
            if early && d < 0.0 {
                return d;
            }
        }
        d
    }

    /// Launches from `v(. - m p)` and records `tau_{m,n'}` for `n' = m+1 ..= n`.
    pub fn run(&self, seed: u64, m: i64, n: i64) -> Result<Vec<CrossingRecord>> {
        if n < m {
            return Err(Error::Config(format!("need m <= n, got ({m}, {n})")));
        }
        if n == m {
            return Ok(Vec::new());
        }
        let window = self.window(m, n);
        let p = self.family.period;
        let first = (window.0 / p).floor() as i64 - 1;
        let count = ((window.1 / p).ceil() as i64 - first + 2) as usize;
        let field = self.family.medium(seed, first, count)?;
        let mut s = self.subsolution.state(m * self.cells, window, self.dt)?;
        let mut ev = Evolver::new(&self.family.coeffs, &field, self.grid, WindowPolicy::Fixed)?;
        let mut prev = s.clone();
        let mut out = Vec::with_capacity((n - m) as usize);
        let mut target = m + 1;
        let record = |t: f64, n_prime: i64, certified: bool| CrossingRecord {
            omega_seed: seed,
            m,
            n: n_prime,
            tau: t,
            certified,
        };
        let mut first_step = true;
        loop {
            while target <= n {
                let d = self.margin_to(&s, target, true);
                if d < 0.0 {
                    break;
                }
                let tau = if first_step {
                    s.time
                } else {
                    let d_prev = self.margin_to(&prev, target, false);
                    if d_prev >= 0.0 {
                        prev.time
                    } else {
                        let d_cur = self.margin_to(&s, target, false);
                        prev.time + (s.time - prev.time) * (-d_prev) / (d_cur - d_prev)
                    }
                };
                out.push(record(tau, target, true));
                target += 1;
            }
            if target > n {
                break;
            }
            if s.time >= self.resolution.time_cap {
                for k in target..=n {
                    out.push(record(s.time, k, false));
                }
                break;
            }
            prev.values.copy_from_slice(&s.values);
            prev.time = s.time;
            ev.step(&mut s)?;
            first_step = false;
        }
        Ok(out)
    }
}

/// `tau_{m,n}` for one medium sample.
pub fn crossing_time(
    omega_seed: u64,
    family: &RandomFamily,
    m: i64,
    n: i64,
    res: Resolution,
) -> Result<CrossingRecord> {
    if m == n {
        return Ok(CrossingRecord {
            omega_seed,
            m,
            n,
            tau: 0.0,
            certified: true,
        });
    }
    let setup = CrossingSetup::new(family, res)?;
    setup
        .run(omega_seed, m, n)?
        .pop()
        .ok_or_else(|| Error::Config(format!("need m < n, got ({m}, {n})")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    /// Mean of `tau_{0,n} / n` over seeds.
    pub tau_plus: f64,
    /// Normal-approximation 95% half-width of `tau_plus`.
    pub ci: f64,
    pub std: f64,
    pub c_plus: f64,
    pub samples: usize,
    pub n_used: i64,
    /// Mean and sample standard deviation of `tau_{0,n'} / n'` for `n' = 1 ..= n`.
    pub per_n_means: Vec<f64>,
    pub per_n_stds: Vec<f64>,
    /// Smallest and largest `tau_{0,n'} / n'` over all seeds and `n'`.
    pub envelope: (f64, f64),
    /// Some crossing hit the time cap; those seeds are excluded.
    pub partial: bool,
}

/// Runs `tau_{0,n'}`, `n' <= n`, for every seed in parallel; records come back in seed order.
pub fn crossing_records(
    setup: &CrossingSetup,
    seeds: &[u64],
    n: i64,
) -> Result<Vec<CrossingRecord>> {
    let runs: Vec<Vec<CrossingRecord>> = seeds
        .par_iter()
        .map(|&s| setup.run(s, 0, n))
        .collect::<Result<_>>()?;
    Ok(runs.into_iter().flatten().collect())
}

/// Records for launches from every `m` in `starts` up to `n`, for nested-triple audits.
pub fn audit_records(
    setup: &CrossingSetup,
    seeds: &[u64],
    starts: &[i64],
    n: i64,
) -> Result<Vec<CrossingRecord>> {
    let jobs: Vec<(u64, i64)> = seeds
        .iter()
        .flat_map(|&s| starts.iter().map(move |&m| (s, m)))
        .collect();
    let runs: Vec<Vec<CrossingRecord>> = jobs
        .par_iter()
        .map(|&(s, m)| setup.run(s, m, n))
        .collect::<Result<_>>()?;
    Ok(runs.into_iter().flatten().collect())
}

/// Aggregates `tau_{0,n'}` records into the speed estimate.
pub fn summarize(records: &[CrossingRecord], period: f64, n: i64) -> Result<SpeedEstimate> {
    let mut seeds: Vec<u64> = records
        .iter()
        .filter(|r| r.m == 0)
        .map(|r| r.omega_seed)
        .collect();
    seeds.sort_unstable();
    seeds.dedup();
    let complete: Vec<u64> = seeds
        .iter()
        .copied()
        .filter(|&s| {
            (1..=n).all(|k| {
                records
                    .iter()
                    .any(|r| r.omega_seed == s && r.m == 0 && r.n == k && r.certified)
            })
        })
        .collect();
    if complete.len() < 2 {
        return Err(Error::Config(format!(
            "{} seed(s) with certified crossings; need at least 2",
            complete.len()
        )));
    }
    let normalized = |k: i64| -> Vec<f64> {
        complete
            .iter()
            .map(|&s| {
                let r = records
                    .iter()
                    .find(|r| r.omega_seed == s && r.m == 0 && r.n == k)
                    .expect("complete seed");
                r.tau / k as f64
            })
            .collect()
    };
    let mut per_n_means = Vec::with_capacity(n as usize);
    let mut per_n_stds = Vec::with_capacity(n as usize);
    let mut envelope = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 1..=n {
        let v = normalized(k);
        let (m, s) = mean_std(&v);
        per_n_means.push(m);
        per_n_stds.push(s);
        for x in v {
            envelope = (envelope.0.min(x), envelope.1.max(x));
        }
    }
    let tau_plus = per_n_means[n as usize - 1];
    let std = per_n_stds[n as usize - 1];
    let samples = complete.len();
    Ok(SpeedEstimate {
        tau_plus,
        ci: 1.96 * std / (samples as f64).sqrt(),
        std,
        c_plus: period / tau_plus,
        samples,
        n_used: n,
        per_n_means,
        per_n_stds,
        envelope,
        partial: samples < seeds.len(),
    })
}

/// Mean normalized crossing time over `seeds` and the speed `c_+ = p n / mean tau_{0,n}`.
pub fn estimate_speed(
    family: &RandomFamily,
    seeds: &[u64],
    n: i64,
    res: Resolution,
) -> Result<SpeedEstimate> {
    if seeds.len() < 8 || n < 8 {
        return Err(Error::Config(format!(
            "need at least 8 seeds and n >= 8, got {} seeds and n = {n}",
            seeds.len()
        )));
    }
    let setup = CrossingSetup::new(family, res)?;
    let records = crossing_records(&setup, seeds, n)?;
    summarize(&records, family.period, n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub triples: usize,
    /// `min tau(m,k) + tau(k,n) + tol - tau(m,n)`; `+inf` when there are no triples.
    pub worst_slack: f64,
    pub worst_triple: Option<(u64, i64, i64, i64)>,
    pub passed: bool,
}

/// Checks `tau(m,n) <= tau(m,k) + tau(k,n) + tol_cross` over all certified nested triples.
pub fn subadditivity_audit(records: &[CrossingRecord], tol_cross: f64) -> SubadditivityReport {
    let certified: Vec<&CrossingRecord> = records.iter().filter(|r| r.certified).collect();
    let tau = |s: u64, a: i64, b: i64| {
        certified
            .iter()
            .find(|r| r.omega_seed == s && r.m == a && r.n == b)
            .map(|r| r.tau)
    };
    let mut triples = 0;
    let mut worst = (f64::INFINITY, None);
    for mn in &certified {
        for mk in &certified {
            if mk.omega_seed != mn.omega_seed || mk.m != mn.m || !(mk.n > mn.m && mk.n < mn.n) {
                continue;
            }
            let Some(kn) = tau(mn.omega_seed, mk.n, mn.n) else {
                continue;
            };
            triples += 1;
            let slack = mk.tau + kn + tol_cross - mn.tau;
            if slack < worst.0 {
                worst = (slack, Some((mn.omega_seed, mn.m, mk.n, mn.n)));
            }
        }
    }
    SubadditivityReport {
        triples,
        worst_slack: worst.0,
        worst_triple: worst.1,
        passed: worst.0 >= 0.0,
    }
}

/// CSV `seed,m,n,tau,certified`.
pub fn records_to_csv(records: &[CrossingRecord]) -> String {
    let mut s = String::from("seed,m,n,tau,certified\n");
    for r in records {
        s += &format!(
            "{},{},{},{:.16e},{}\n",
            r.omega_seed, r.m, r.n, r.tau, r.certified
        );
    }
    s
}
