//! Space-dependent reactions `f(x, u)` built from nodal profiles.

use serde::{Deserialize, Serialize};

use super::profile::{union_grid, PiecewiseLinear, ReactionProfile};
use crate::error::{Error, Result};

/// How node profiles are extended between nodes in `x1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Node `k` sits at `x_start + k*spacing`; linear in between.
    Linear,
    /// Node `k` governs `[x_start + k*spacing, x_start + (k+1)*spacing)`.
    Cellwise,
}

/// The rate `f(x, u)` with its bounding profiles `f0 <= f <= f1` and Lipschitz constant.
///
/// The rate depends on `x` through `x1` only. Outside the node support the nearest
/// profile is used, unless the field is periodic.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "FieldDoc")]
pub struct ReactionField {
    lower: ReactionProfile,
    upper: ReactionProfile,
    lipschitz_k: f64,
    x_start: f64,
    spacing: f64,
    interpolation: Interpolation,
    period: Option<f64>,
    nodes: Vec<ReactionProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<f64>>,
    #[serde(skip)]
    u_grid: Vec<f64>,
}

#[derive(Deserialize)]
struct FieldDoc {
    lower: ReactionProfile,
    upper: ReactionProfile,
    lipschitz_k: f64,
    x_start: f64,
    spacing: f64,
    interpolation: Interpolation,
    period: Option<f64>,
    nodes: Vec<ReactionProfile>,
    seed: Option<u64>,
    amplitudes: Option<Vec<f64>>,
}

impl TryFrom<FieldDoc> for ReactionField {
    type Error = Error;
    fn try_from(d: FieldDoc) -> Result<Self> {
        let mut f = ReactionField::new(
            d.lower,
            d.upper,
            Some(d.lipschitz_k),
            d.nodes,
            d.x_start,
            d.spacing,
            d.interpolation,
            d.period,
        )?;
        f.seed = d.seed;
        f.amplitudes = d.amplitudes;
        Ok(f)
    }
}

impl ReactionField {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lower: ReactionProfile,
        upper: ReactionProfile,
        lipschitz_k: Option<f64>,
        nodes: Vec<ReactionProfile>,
        x_start: f64,
        spacing: f64,
        interpolation: Interpolation,
        period: Option<f64>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidMedium("reaction field without nodes".into()));
        }
        if !(spacing > 0.0) || !x_start.is_finite() {
            return Err(Error::InvalidMedium(format!("bad node spacing {spacing}")));
        }
        if let Some(p) = period {
            let span = spacing * nodes.len() as f64;
            if !(p > 0.0) || (span - p).abs() > 1e-9 * p {
                return Err(Error::InvalidMedium(format!(
                    "period {p} does not match {} nodes at spacing {spacing}",
                    nodes.len()
                )));
            }
        }
        let k_nodes = nodes.iter().fold(0.0f64, |m, n| m.max(n.lipschitz()));
        let lipschitz_k = lipschitz_k.unwrap_or(k_nodes);
        let u_grid = union_grid(
            nodes
                .iter()
                .map(|n| n.piecewise().us())
                .chain([lower.piecewise().us(), upper.piecewise().us()]),
        );
        Ok(Self {
            lower,
            upper,
            lipschitz_k,
            x_start,
            spacing,
            interpolation,
            period,
            nodes,
            seed: None,
            amplitudes: None,
            u_grid,
        })
    }

    /// `f(x, u) = f(u)` everywhere.
    pub fn homogeneous(f: ReactionProfile) -> Self {
        Self::new(
            f.clone(),
            f.clone(),
            None,
            vec![f],
            0.0,
            1.0,
            Interpolation::Cellwise,
            None,
        )
        .expect("a single valid profile is a valid field")
    }

    /// `f(x, u) = a_k * base(u)` on cells `[x_start + k*len, x_start + (k+1)*len)`.
    pub fn cellwise_amplitudes(
        base: &ReactionProfile,
        amplitudes: &[f64],
        x_start: f64,
        cell_len: f64,
        bounds: (f64, f64),
        period: bool,
    ) -> Result<Self> {
        if amplitudes.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::Domain("amplitudes must be positive".into()));
        }
        let nodes = amplitudes
            .iter()
            .map(|&a| base.scaled(a))
            .collect::<Result<Vec<_>>>()?;
        let mut f = Self::new(
            base.scaled(bounds.0)?,
            base.scaled(bounds.1)?,
            Some(bounds.1.max(bounds.0) * base.lipschitz()),
            nodes,
            x_start,
            cell_len,
            Interpolation::Cellwise,
            period.then_some(cell_len * amplitudes.len() as f64),
        )?;
        f.amplitudes = Some(amplitudes.to_vec());
        Ok(f)
    }

    /// `f(x, u) = a(x) * base(u)` with `a` sampled at `n` nodes per period and
    /// interpolated linearly.
    pub fn periodic_amplitude(
        base: &ReactionProfile,
        period: f64,
        n: usize,
        a: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let spacing = period / n as f64;
        let amps: Vec<f64> = (0..n).map(|k| a(k as f64 * spacing)).collect();
        if amps.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Domain("amplitudes must be positive".into()));
        }
        let lo = amps.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = amps.iter().cloned().fold(0.0, f64::max);
        let nodes = amps
            .iter()
            .map(|&v| base.scaled(v))
            .collect::<Result<Vec<_>>>()?;
        let mut f = Self::new(
            base.scaled(lo)?,
            base.scaled(hi)?,
            Some(hi * base.lipschitz()),
            nodes,
            0.0,
            spacing,
            Interpolation::Linear,
            Some(period),
        )?;
        f.amplitudes = Some(amps);
        Ok(f)
    }

    pub(crate) fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn lower(&self) -> &ReactionProfile {
        &self.lower
    }

    pub fn upper(&self) -> &ReactionProfile {
        &self.upper
    }

    pub fn lipschitz_k(&self) -> f64 {
        self.lipschitz_k
    }

    pub fn nodes(&self) -> &[ReactionProfile] {
        &self.nodes
    }

    pub fn node_position(&self, k: usize) -> f64 {
        match self.interpolation {
            Interpolation::Linear => self.x_start + k as f64 * self.spacing,
            Interpolation::Cellwise => self.x_start + (k as f64 + 0.5) * self.spacing,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn amplitudes(&self) -> Option<&[f64]> {
        self.amplitudes.as_deref()
    }

    /// Union of all breakpoints; every local rate is linear between these.
    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    /// Node indices and the weight of the second one.
    fn locate(&self, x1: f64) -> (usize, usize, f64) {
        let n = self.nodes.len();
        let t = (x1 - self.x_start) / self.spacing;
        match (self.interpolation, self.period.is_some()) {
            (Interpolation::Cellwise, periodic) => {
                // Nodes on a cell boundary belong to the right cell.
                let k = (t + 1e-9).floor();
                let k = if periodic {
                    k.rem_euclid(n as f64) as usize
                } else {
                    k.clamp(0.0, (n - 1) as f64) as usize
                };
                (k, k, 0.0)
            }
            (Interpolation::Linear, true) => {
                let t = t.rem_euclid(n as f64);
                let k = (t.floor() as usize).min(n - 1);
                let w = t - k as f64;
                (k, (k + 1) % n, w)
            }
            (Interpolation::Linear, false) => {
                let t = t.clamp(0.0, (n - 1) as f64);
                let k = (t.floor() as usize).min(n - 1);
                let w = t - k as f64;
                (k, (k + 1).min(n - 1), w)
            }
        }
    }

    /// Rates of `f(x1, .)` at the points of [`Self::u_grid`].
    pub fn rates_at(&self, x1: f64) -> Vec<f64> {
        let (k0, k1, w) = self.locate(x1);
        let r0 = self.nodes[k0].piecewise().on_grid(&self.u_grid);
        if w == 0.0 || k0 == k1 {
            return r0;
        }
        let r1 = self.nodes[k1].piecewise().on_grid(&self.u_grid);
        r0.iter()
            .zip(&r1)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect()
    }

    /// `f(x1, .)` as a piecewise-linear function.
    pub fn local(&self, x1: f64) -> PiecewiseLinear {
        PiecewiseLinear::new(self.u_grid.clone(), self.rates_at(x1))
            .expect("union grid is a valid breakpoint set")
    }

    pub fn eval(&self, x1: f64, u: f64) -> f64 {
        let (k0, k1, w) = self.locate(x1);
        let a = self.nodes[k0].eval(u);
        if w == 0.0 || k0 == k1 {
            a
        } else {
            (1.0 - w) * a + w * self.nodes[k1].eval(u)
        }
    }

    /// Mirror image under `x1 -> -x1`.
    pub fn reflected(&self) -> Self {
        let n = self.nodes.len() as f64;
        let x_start = match self.interpolation {
            Interpolation::Linear => -(self.x_start + (n - 1.0) * self.spacing),
            Interpolation::Cellwise => -(self.x_start + n * self.spacing),
        };
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        let mut f = Self::new(
            self.lower.clone(),
            self.upper.clone(),
            Some(self.lipschitz_k),
            nodes,
            x_start,
            self.spacing,
            self.interpolation,
            self.period,
        )
        .expect("reflection preserves validity");
        f.seed = self.seed;
        f.amplitudes = self.amplitudes.as_ref().map(|a| {
            let mut a = a.clone();
            a.reverse();
            a
        });
        f
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `f(x, u)` with a domain check on `u`.
pub fn eval_reaction(field: &ReactionField, x1: f64, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("concentration {u} outside [0, 1]")));
    }
    Ok(field.eval(x1, u).max(0.0))
}

/// `alpha_f(x) = inf({u in (0,1) : f(x,u) >= zeta*u} U {1})`.
pub fn alpha_f(field: &ReactionField, zeta: f64, x1: f64) -> f64 {
    field.local(x1).first_crossing(zeta)
}
