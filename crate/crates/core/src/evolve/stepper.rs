use serde::{Deserialize, Serialize};

use super::record::Recorder;
use super::state::SolutionState;
use crate::error::{Error, Result};
use crate::grid::{Grid, Stencil};
use crate::medium::{CoefficientField, ReactionField};

const RANGE_TOL: f64 = 1e-12;

/// Half the largest monotone forward-Euler step on `grid`:
/// `0.5 / (2 A_upper (1/dx^2 + 1/dy^2) + |q1|/dx + |q2|/dy + K)` (the `dy` terms in 2-D only).
pub fn stable_dt_on(coeffs: &CoefficientField, field: &ReactionField, grid: Grid) -> f64 {
    let q = coeffs.max_abs_q();
    let mut rate = 2.0 * coeffs.a_upper() / (grid.dx * grid.dx) + q[0] / grid.dx;
    if grid.dim == 2 {
        let dy = grid.dy();
        rate += 2.0 * coeffs.a_upper() / (dy * dy) + q[1] / dy;
    }
    0.5 / (rate + field.lipschitz_k())
}

/// [`stable_dt_on`] for the square grid of step `dx`.
pub fn stable_dt(coeffs: &CoefficientField, field: &ReactionField, dx: f64) -> Result<f64> {
    Ok(stable_dt_on(coeffs, field, Grid::square(coeffs.dim(), dx)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillPolicy {
    /// Keep the left fill unchanged.
    Fixed,
    /// On each shift, the last dropped column becomes the left fill.
    AdoptOnShift,
    /// Before every step the first column becomes the left fill (no-flux edge).
    Reflect,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WindowPolicy {
    Fixed,
    /// Shift right by `shift_cols` whenever some value within `edge_zone` of the right edge
    /// differs from the right fill by `tol` or more.
    FollowRight {
        edge_zone: f64,
        tol: f64,
        shift_cols: usize,
        fill: FillPolicy,
    },
}

impl WindowPolicy {
    /// Adequacy margin `1e-8` within `5/lambda` of the right edge.
    pub fn follow(lambda: f64, dx: f64) -> Self {
        let zone = 5.0 / lambda;
        WindowPolicy::FollowRight {
            edge_zone: zone,
            tol: 1e-8,
            shift_cols: ((0.5 * zone / dx).ceil() as usize).max(1),
            fill: FillPolicy::Reflect,
        }
    }
}

const LUT_BUCKETS: usize = 512;

/// Columns leave the window only when this close to the fill that replaces them.
pub const DROP_TOL: f64 = 1e-6;

struct Reaction1d<'a> {
    cache: &'a [f64],
    stride: usize,
    homogeneous: bool,
    ug: &'a [f64],
    lut: &'a [usize],
}

/// Interior update of a 1-D window; `w` holds `[xm, xp, c]` per cell column.
fn kernel_1d(
    u: &[f64],
    out: &mut [f64],
    fills: (f64, f64),
    w: &[[f64; 3]],
    mut cell: usize,
    r: Reaction1d<'_>,
    h: f64,
) {
    let nx = u.len();
    let m = r.ug.len();
    let n1 = w.len();
    let mut rates = &r.cache[..m];
    let mut slopes = &r.cache[m..r.stride];
    for i in 0..nx {
        if !r.homogeneous {
            let base = i * r.stride;
            rates = &r.cache[base..base + m];
            slopes = &r.cache[base + m..base + r.stride];
        }
        let [xm, xp, c] = w[cell];
        cell += 1;
        if cell == n1 {
            cell = 0;
        }
        let uc = u[i];
        let um = if i == 0 { fills.0 } else { u[i - 1] };
        let up = if i + 1 == nx { fills.1 } else { u[i + 1] };
        let mut k = r.lut[((uc * LUT_BUCKETS as f64) as usize).min(LUT_BUCKETS)];
        while k + 2 < m && uc > r.ug[k + 1] {
            k += 1;
        }
        let f = rates[k] + slopes[k] * (uc - r.ug[k]);
        out[i] = uc + h * (xm * um + xp * up + c * uc + f);
    }
}

fn piece_table(ug: &[f64]) -> Vec<usize> {
    let m = ug.len();
    (0..=LUT_BUCKETS)
        .map(|b| {
            let v = b as f64 / LUT_BUCKETS as f64;
            let mut k = 0;
            while k + 2 < m && v > ug[k + 1] {
                k += 1;
            }
            k
        })
        .collect()
}

/// Explicit monotone time stepper for `u_t = L u + f(x1, u)`.
pub struct Evolver {
    stencil: Stencil,
    field: ReactionField,
    u_grid: Vec<f64>,
    /// `piece_lut[b]`: piece containing `b / LUT_BUCKETS`.
    piece_lut: Vec<usize>,
    /// `[xm, xp, c]` per cell column when `ny = 1`.
    w1d: Vec<[f64; 3]>,
    /// Per window column: rates on `u_grid` followed by slopes of each piece.
    cache: Vec<f64>,
    cache_lo: i64,
    cache_nx: usize,
    homogeneous: bool,
    policy: WindowPolicy,
    scratch: Vec<f64>,
    dt_max: f64,
    shifts: usize,
    dropped_defect: f64,
}

impl Evolver {
    pub fn new(
        coeffs: &CoefficientField,
        field: &ReactionField,
        grid: Grid,
        policy: WindowPolicy,
    ) -> Result<Self> {
        let stencil = Stencil::new(coeffs, grid)?;
        let mut diag = 0.0f64;
        for c in 0..stencil.period_cols() {
            for j in 0..grid.ny {
                diag = diag.max(-stencil.column(c).row(j).c);
            }
        }
        if let WindowPolicy::FollowRight { shift_cols: 0, .. } = policy {
            return Err(Error::Config("window shift of zero columns".into()));
        }
        let w1d = (0..stencil.period_cols())
            .map(|c| {
                let w = stencil.column(c).row(0);
                [w.xm, w.xp, w.c]
            })
            .collect();
        Ok(Self {
            stencil,
            field: field.clone(),
            u_grid: field.u_grid().to_vec(),
            piece_lut: piece_table(field.u_grid()),
            w1d,
            cache: Vec::new(),
            cache_lo: 0,
            cache_nx: usize::MAX,
            homogeneous: field.nodes().len() == 1,
            policy,
            scratch: Vec::new(),
            dt_max: 1.0 / (diag + field.lipschitz_k()),
            shifts: 0,
            dropped_defect: 0.0,
        })
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn field(&self) -> &ReactionField {
        &self.field
    }

    pub fn policy(&self) -> WindowPolicy {
        self.policy
    }

    /// Largest step for which the update is monotone.
    pub fn monotone_dt(&self) -> f64 {
        self.dt_max
    }

    pub fn shifts(&self) -> usize {
        self.shifts
    }

    /// Largest `|u - left fill|` over all columns dropped by window shifts.
    pub fn dropped_defect(&self) -> f64 {
        self.dropped_defect
    }

    fn stride(&self) -> usize {
        2 * self.u_grid.len() - 1
    }

    fn fill_column(&self, x1: f64, out: &mut Vec<f64>) {
        let r = self.field.rates_at(x1);
        let ug = &self.u_grid;
        out.extend_from_slice(&r);
        for k in 1..ug.len() {
            out.push((r[k] - r[k - 1]) / (ug[k] - ug[k - 1]));
        }
    }

    fn ensure_cache(&mut self, state: &SolutionState) {
        let cols = if self.homogeneous { 1 } else { state.nx };
        let lo = if self.homogeneous { 0 } else { state.i_lo };
        if self.cache_lo == lo && self.cache_nx == cols {
            return;
        }
        let stride = self.stride();
        let mut cache = Vec::with_capacity(cols * stride);
        for i in 0..cols {
            let g = lo + i as i64;
            let reuse = g - self.cache_lo;
            if self.cache_nx != usize::MAX && reuse >= 0 && (reuse as usize) < self.cache_nx {
                let s = reuse as usize * stride;
                cache.extend_from_slice(&self.cache[s..s + stride]);
            } else {
                self.fill_column(g as f64 * state.grid.dx, &mut cache);
            }
        }
        self.cache = cache;
        self.cache_lo = lo;
        self.cache_nx = cols;
    }

    /// One full step of size `state.dt`, followed by the window policy.
    pub fn step(&mut self, state: &mut SolutionState) -> Result<()> {
        let dt = state.dt;
        self.advance(state, dt)?;
        state.time += dt;
        self.apply_policy(state);
        Ok(())
    }

    /// Forward-Euler update by `h` into `state.values`; the previous values are left in
    /// the scratch buffer.
    fn advance(&mut self, state: &mut SolutionState, h: f64) -> Result<()> {
        if state.grid != self.stencil.grid() {
            return Err(Error::Config(
                "state grid differs from the stepper grid".into(),
            ));
        }
        if h > self.dt_max * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {h} exceeds the monotone limit {}",
                self.dt_max
            )));
        }
        if let WindowPolicy::FollowRight {
            fill: FillPolicy::Reflect,
            ..
        } = self.policy
        {
            let ny = state.grid.ny;
            let first = state.values[..ny].to_vec();
            state.left_fill.copy_from_slice(&first);
        }
        self.ensure_cache(state);
        let ny = state.grid.ny;
        let nx = state.nx;
        let m = self.u_grid.len();
        let stride = self.stride();
        let ug = &self.u_grid[..];
        let g0 = state.i_lo;
        self.scratch.resize(state.values.len(), 0.0);
        let out = &mut self.scratch;
        let u = &state.values;
        let cache = &self.cache[..];
        let lut = &self.piece_lut[..];
        let n1 = self.stencil.period_cols();
        let mut cell = self.stencil.cell_of(g0);
        let mut bad = None;
        if ny == 1 {
            kernel_1d(
                &u[..nx],
                &mut out[..nx],
                (state.left_fill[0], state.right_fill[0]),
                &self.w1d,
                cell,
                Reaction1d {
                    cache,
                    stride,
                    homogeneous: self.homogeneous,
                    ug,
                    lut,
                },
                h,
            );
            for (i, v) in out[..nx].iter_mut().enumerate() {
                if !(0.0..=1.0).contains(v) {
                    if *v >= -RANGE_TOL && *v <= 1.0 + RANGE_TOL {
                        *v = v.clamp(0.0, 1.0);
                    } else if bad.is_none() {
                        bad = Some((i, 0, *v));
                    }
                }
            }
        }
        for i in (0..nx).filter(|_| ny > 1) {
            let col = if self.homogeneous { 0 } else { i };
            let base = col * stride;
            let rates = &cache[base..base + m];
            let slopes = &cache[base + m..base + stride];
            let cw = self.stencil.column(cell);
            cell += 1;
            if cell == n1 {
                cell = 0;
            }
            for j in 0..ny {
                let w = cw.row(j);
                let uc = u[i * ny + j];
                let um = if i == 0 {
                    state.left_fill[j]
                } else {
                    u[(i - 1) * ny + j]
                };
                let up = if i + 1 == nx {
                    state.right_fill[j]
                } else {
                    u[(i + 1) * ny + j]
                };
                let mut lu = w.xm * um + w.xp * up + w.c * uc;
                if ny > 1 {
                    let jm = if j == 0 { ny - 1 } else { j - 1 };
                    let jp = if j + 1 == ny { 0 } else { j + 1 };
                    lu += w.ym * u[i * ny + jm] + w.yp * u[i * ny + jp];
                }
                let k = ug[1..m - 1].partition_point(|&b| b < uc);
                let r = rates[k] + slopes[k] * (uc - ug[k]);
                let mut v = uc + h * (lu + r);
                if !(0.0..=1.0).contains(&v) {
                    if (-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v) {
                        v = v.clamp(0.0, 1.0);
                    } else if bad.is_none() {
                        bad = Some((i, j, v));
                    }
                }
                out[i * ny + j] = v;
            }
        }
        if let Some((i, j, value)) = bad {
            return Err(Error::Instability {
                column: g0 + i as i64,
                row: j,
                time: state.time + h,
                value,
            });
        }
        std::mem::swap(&mut state.values, &mut self.scratch);
        Ok(())
    }

    fn apply_policy(&mut self, state: &mut SolutionState) {
        let WindowPolicy::FollowRight {
            edge_zone,
            tol,
            shift_cols,
            fill,
        } = self.policy
        else {
            return;
        };
        let ny = state.grid.ny;
        let zone = ((edge_zone / state.grid.dx).ceil() as usize).clamp(1, state.nx);
        let start = state.nx - zone;
        let threatened = (start..state.nx).any(|i| {
            (0..ny).any(|j| (state.values[i * ny + j] - state.right_fill[j]).abs() >= tol)
        });
        if !threatened {
            return;
        }
        let want = shift_cols.min(state.nx - 1);
        let k = self.droppable(state, want, fill);
        for i in 0..k {
            for j in 0..ny {
                let d = (state.values[i * ny + j] - state.left_fill[j]).abs();
                self.dropped_defect = self.dropped_defect.max(d);
            }
        }
        if k > 0 && fill != FillPolicy::Fixed {
            let last = (k - 1) * ny;
            state
                .left_fill
                .copy_from_slice(&state.values[last..last + ny]);
        }
        state.values.drain(..k * ny);
        for _ in 0..want {
            state.values.extend_from_slice(&state.right_fill);
        }
        state.i_lo += k as i64;
        state.nx += want - k;
        self.shifts += 1;
    }

    /// Longest prefix of at most `want` columns that is flat to `DROP_TOL` against the
    /// fill it would leave behind. The window grows by the columns it cannot drop.
    fn droppable(&self, state: &SolutionState, want: usize, fill: FillPolicy) -> usize {
        let ny = state.grid.ny;
        let mut lo = vec![f64::INFINITY; ny];
        let mut hi = vec![f64::NEG_INFINITY; ny];
        for i in 0..want {
            for j in 0..ny {
                let v = state.values[i * ny + j];
                let ok = match fill {
                    FillPolicy::Fixed => (v - state.left_fill[j]).abs() <= DROP_TOL,
                    FillPolicy::AdoptOnShift | FillPolicy::Reflect => {
                        lo[j] = lo[j].min(v);
                        hi[j] = hi[j].max(v);
                        hi[j] - lo[j] <= DROP_TOL
                    }
                };
                if !ok {
                    return i;
                }
            }
        }
        want
    }

    /// Steps to `t_end`; the last step is shortened to land on `t_end` exactly. States at
    /// the recorder's sample times are interpolated linearly in time and handed to the
    /// recorder before any window shift of that step.
    pub fn run(
        &mut self,
        state: &mut SolutionState,
        t_end: f64,
        mut recorder: Option<&mut Recorder<'_>>,
    ) -> Result<()> {
        let t0 = state.time;
        if t_end < t0 {
            return Err(Error::Domain(format!("t_end = {t_end} is before t = {t0}")));
        }
        let dt = state.dt;
        if let Some(r) = recorder.as_deref_mut() {
            r.record_pending(state, t0)?;
        }
        let steps = ((t_end - t0) / dt - 1e-9).ceil().max(0.0) as u64;
        for k in 0..steps {
            let t_prev = state.time;
            let t_next = if k + 1 == steps {
                t_end
            } else {
                t0 + (k + 1) as f64 * dt
            };
            let mut h = t_next - t_prev;
            if (h - dt).abs() <= 1e-9 * dt {
                h = dt;
            }
            self.advance(state, h)?;
            state.time = t_next;
            if let Some(r) = recorder.as_deref_mut() {
                r.record_between(&self.scratch, state, t_prev)?;
            }
            self.apply_policy(state);
        }
        Ok(())
    }

    /// Largest `|u - fill|` within `zone` of the left and right edges.
    pub fn edge_defects(state: &SolutionState, zone: f64) -> (f64, f64) {
        let ny = state.grid.ny;
        let cols = ((zone / state.grid.dx).ceil() as usize).clamp(1, state.nx);
        let mut left = 0.0f64;
        let mut right = 0.0f64;
        for i in 0..cols {
            for j in 0..ny {
                left = left.max((state.values[i * ny + j] - state.left_fill[j]).abs());
                let r = state.nx - 1 - i;
                right = right.max((state.values[r * ny + j] - state.right_fill[j]).abs());
            }
        }
        (left, right)
    }
}
