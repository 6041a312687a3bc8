use super::state::SolutionState;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Storage {
    Full,
    DiagnosticsOnly,
}

type Hook<'a> = Box<dyn FnMut(&SolutionState) -> Result<Vec<f64>> + 'a>;

/// Samples a run at fixed times. With a hook, each sample also yields a row of numbers.
pub struct Recorder<'a> {
    times: Vec<f64>,
    next: usize,
    storage: Storage,
    hook: Option<Hook<'a>>,
    snapshots: Vec<SolutionState>,
    rows: Vec<(f64, Vec<f64>)>,
}

impl<'a> Recorder<'a> {
    pub fn new(times: Vec<f64>, storage: Storage) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            times,
            next: 0,
            storage,
            hook: None,
            snapshots: Vec::new(),
            rows: Vec::new(),
        })
    }

    /// Samples `t0, t0 + every, ...` up to `t_end` inclusive.
    pub fn every(t0: f64, t_end: f64, every: f64, storage: Storage) -> Result<Self> {
        if !(every > 0.0) {
            return Err(Error::Config(format!(
                "record interval {every} must be positive"
            )));
        }
        let n = ((t_end - t0) / every + 1e-9).floor() as usize;
        Self::new((0..=n).map(|k| t0 + k as f64 * every).collect(), storage)
    }

    pub fn with_hook(mut self, hook: impl FnMut(&SolutionState) -> Result<Vec<f64>> + 'a) -> Self {
        self.hook = Some(Box::new(hook));
        self
    }

    pub fn sample_times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[SolutionState] {
        &self.snapshots
    }

    pub fn into_snapshots(self) -> Vec<SolutionState> {
        self.snapshots
    }

    pub fn rows(&self) -> &[(f64, Vec<f64>)] {
        &self.rows
    }

    pub fn into_parts(self) -> (Vec<SolutionState>, Vec<(f64, Vec<f64>)>) {
        (self.snapshots, self.rows)
    }

    fn push(&mut self, s: SolutionState) -> Result<()> {
        if let Some(h) = self.hook.as_mut() {
            let row = h(&s)?;
            self.rows.push((s.time, row));
        }
        if self.storage == Storage::Full {
            self.snapshots.push(s);
        }
        Ok(())
    }

    /// Records samples at or before `t` (within rounding) from the current state.
    pub(crate) fn record_pending(&mut self, state: &SolutionState, t: f64) -> Result<()> {
        let eps = 1e-9 * state.dt;
        while self.next < self.times.len() && self.times[self.next] <= t + eps {
            if (self.times[self.next] - t).abs() <= eps {
                let mut s = state.clone();
                s.time = self.times[self.next];
                self.push(s)?;
            }
            self.next += 1;
        }
        Ok(())
    }

    /// Records samples in `(t_prev, state.time]`, interpolating with the previous values.
    pub(crate) fn record_between(
        &mut self,
        prev: &[f64],
        state: &SolutionState,
        t_prev: f64,
    ) -> Result<()> {
        let t = state.time;
        let h = t - t_prev;
        let eps = 1e-9 * state.dt;
        while self.next < self.times.len() && self.times[self.next] <= t + eps {
            let ts = self.times[self.next];
            self.next += 1;
            let mut s = state.clone();
            s.time = ts;
            let w = ((ts - t_prev) / h).clamp(0.0, 1.0);
            if w < 1.0 {
                for (v, p) in s.values.iter_mut().zip(prev) {
                    *v = (1.0 - w) * p + w * *v;
                }
            }
            self.push(s)?;
        }
        Ok(())
    }
}

/// Recorded snapshots of one run, with linear interpolation in time.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub snapshots: Vec<SolutionState>,
}

impl Trajectory {
    pub fn new(snapshots: Vec<SolutionState>) -> Self {
        Self { snapshots }
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn t_range(&self) -> Option<(f64, f64)> {
        Some((self.snapshots.first()?.time, self.snapshots.last()?.time))
    }

    /// Value at time `t`, global column `g`, row `j`; `None` outside the recorded range.
    pub fn value(&self, t: f64, g: i64, j: usize) -> Option<f64> {
        let (a, b, w) = self.bracket(t)?;
        let (sa, sb) = (&self.snapshots[a], &self.snapshots[b]);
        Some((1.0 - w) * sa.at_global(g, j) + w * sb.at_global(g, j))
    }

    /// Indices of the snapshots around `t` and the weight of the second.
    pub fn bracket(&self, t: f64) -> Option<(usize, usize, f64)> {
        let n = self.snapshots.len();
        let (t0, t1) = self.t_range()?;
        let tol = 1e-12 * t1.abs().max(1.0);
        if t < t0 - tol || t > t1 + tol {
            return None;
        }
        if n == 1 {
            return Some((0, 0, 0.0));
        }
        let k = self
            .snapshots
            .partition_point(|s| s.time <= t)
            .clamp(1, n - 1);
        let (ta, tb) = (self.snapshots[k - 1].time, self.snapshots[k].time);
        Some((k - 1, k, ((t - ta) / (tb - ta)).clamp(0.0, 1.0)))
    }

    /// Snapshot interpolated at `t`, on the window of the later bracketing snapshot.
    pub fn state_at(&self, t: f64) -> Option<SolutionState> {
        let (a, b, w) = self.bracket(t)?;
        let sa = &self.snapshots[a];
        let mut s = self.snapshots[b].clone();
        let ny = s.grid.ny;
        for i in 0..s.nx {
            let g = s.i_lo + i as i64;
            for j in 0..ny {
                let k = i * ny + j;
                s.values[k] = (1.0 - w) * sa.at_global(g, j) + w * s.values[k];
            }
        }
        s.time = t;
        Some(s)
    }
}
