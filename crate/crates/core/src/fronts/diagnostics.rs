use serde::{Deserialize, Serialize};

use crate::cell::ExpProfile;
use crate::evolve::SolutionState;
use crate::medium::{alpha_f, ReactionField};
use crate::stats::{linear_fit, LinearFit};

/// Interface functionals of one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// Rightmost point where `u >= alpha_f`; `-inf` if there is none.
    pub x: f64,
    /// Smallest `y` with `u <= Psi(x1 - y, x)`; `-inf` for `u = 0`.
    pub y: f64,
    pub z_minus: Vec<f64>,
    pub z_plus: Vec<f64>,
    pub width: Vec<f64>,
}

/// Evaluates the functionals for a fixed medium, `zeta`, profile and `eps` list.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    field: ReactionField,
    zeta: f64,
    profile: ExpProfile,
    eps: Vec<f64>,
    alpha_cache: std::collections::HashMap<i64, f64>,
}

impl Diagnostics {
    pub fn new(field: &ReactionField, zeta: f64, profile: ExpProfile, eps: Vec<f64>) -> Self {
        Self {
            field: field.clone(),
            zeta,
            profile,
            eps,
            alpha_cache: Default::default(),
        }
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn profile(&self) -> &ExpProfile {
        &self.profile
    }

    fn alpha(&mut self, g: i64, dx: f64) -> f64 {
        let (field, zeta) = (&self.field, self.zeta);
        *self
            .alpha_cache
            .entry(g)
            .or_insert_with(|| alpha_f(field, zeta, g as f64 * dx))
    }

    pub fn row(&mut self, s: &SolutionState) -> DiagnosticsRow {
        let x = self.x_of(s);
        let y = y_of(s, &self.profile);
        let z_minus: Vec<f64> = self.eps.iter().map(|&e| z_minus(s, e)).collect();
        let z_plus: Vec<f64> = self.eps.iter().map(|&e| z_plus(s, e)).collect();
        let width = z_minus.iter().zip(&z_plus).map(|(a, b)| b - a).collect();
        DiagnosticsRow {
            t: s.time,
            x,
            y,
            z_minus,
            z_plus,
            width,
        }
    }

    pub fn x_of(&mut self, s: &SolutionState) -> f64 {
        let dx = s.grid.dx;
        let d = |this: &mut Self, i: usize| {
            let a = this.alpha(s.i_lo + i as i64, dx);
            s.column(i)
                .iter()
                .fold(f64::NEG_INFINITY, |m, &u| m.max(u - a))
        };
        let mut right = None;
        for i in (0..s.nx).rev() {
            let di = d(self, i);
            if di >= 0.0 {
                return match right {
                    None => s.x1(i),
                    Some(dr) => s.x1(i) + dx * di / (di - dr),
                };
            }
            right = Some(di);
        }
        f64::NEG_INFINITY
    }
}

/// `max over nodes of x1 + ln(u / (scale gamma)) / lambda`.
pub fn y_of(s: &SolutionState, p: &ExpProfile) -> f64 {
    let ny = s.grid.ny;
    let mut y = f64::NEG_INFINITY;
    for i in 0..s.nx {
        let g = s.i_lo + i as i64;
        for j in 0..ny {
            let u = s.values[i * ny + j];
            if u > 0.0 {
                y = y.max(s.x1(i) + (u / p.weight(g, j)).ln() / p.lambda);
            }
        }
    }
    y
}

/// First crossing of `min_j u` below `1 - eps` scanning from the left (the left fill
/// counts as the column before the window).
pub fn z_minus(s: &SolutionState, eps: f64) -> f64 {
    let level = 1.0 - eps;
    let colmin = |i: usize| s.column(i).iter().cloned().fold(f64::INFINITY, f64::min);
    let fill = s.left_fill.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut prev = (s.x1(0) - s.grid.dx, fill - level);
    if prev.1 < 0.0 {
        return prev.0;
    }
    for i in 0..s.nx {
        let d = colmin(i) - level;
        if d < 0.0 {
            return prev.0 + s.grid.dx * prev.1 / (prev.1 - d);
        }
        prev = (s.x1(i), d);
    }
    s.x1(s.nx - 1)
}

/// First crossing of `max_j u` above `eps` scanning from the right; `-inf` if none.
pub fn z_plus(s: &SolutionState, eps: f64) -> f64 {
    let colmax = |i: usize| {
        s.column(i)
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut right: Option<f64> = None;
    for i in (0..s.nx).rev() {
        let d = colmax(i) - eps;
        if d > 0.0 {
            return match right {
                None => s.x1(i),
                Some(r) => s.x1(i) + s.grid.dx * d / (d - r),
            };
        }
        right = Some(d);
    }
    f64::NEG_INFINITY
}

/// Least-squares speed from the last half of a position series.
pub fn fit_speed(t: &[f64], pos: &[f64]) -> Option<LinearFit> {
    let n = t.len().min(pos.len());
    let start = n / 2;
    let pts: Vec<(f64, f64)> = (start..n)
        .filter(|&k| pos[k].is_finite())
        .map(|k| (t[k], pos[k]))
        .collect();
    let (ts, ps): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    linear_fit(&ts, &ps)
}

/// Least-squares slope of `ln u` (transverse max) against `x1` on `[from, to]`.
pub fn tail_slope(s: &SolutionState, from: f64, to: f64) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..s.nx {
        let x = s.x1(i);
        if x < from || x > to {
            continue;
        }
        let u = s.column(i).iter().cloned().fold(0.0, f64::max);
        if u > 0.0 {
            xs.push(x);
            ys.push(u.ln());
        }
    }
    linear_fit(&xs, &ys).map(|f| f.slope)
}

/// CSV `t,X,Y,Zminus,Zplus,width` (one column triple per `eps`, 17 significant digits).
pub fn rows_to_csv(rows: &[DiagnosticsRow], eps: &[f64]) -> String {
    let mut s = String::from("t,X,Y");
    for e in eps {
        s += &format!(",Zminus_{e},Zplus_{e},width_{e}");
    }
    s.push('\n');
    for r in rows {
        s += &format!("{:.16e},{:.16e},{:.16e}", r.t, r.x, r.y);
        for k in 0..eps.len() {
            s += &format!(
                ",{:.16e},{:.16e},{:.16e}",
                r.z_minus[k], r.z_plus[k], r.width[k]
            );
        }
        s.push('\n');
    }
    s
}
