use serde::{Deserialize, Serialize};

use crate::cell::{solve_corrector_on, CellFunction};
use crate::error::{Error, Result};
use crate::evolve::{residual_with, Candidate, Reaction, ResidualReport, Sign, SolutionState};
use crate::grid::{Grid, Stencil};
use crate::medium::{CoefficientField, ReactionField, ReactionProfile};

const SUB_TOL: f64 = 1e-10;
const EPS_FLOOR: f64 = 1e-6;

/// Identity on `[0, m]`, `m = (theta + theta_tilde)/2`, a concave C2 cap from `m` to
/// `theta_tilde` on `[m, 1]`, constant beyond; zero for negative arguments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rho {
    pub theta: f64,
    pub theta_tilde: f64,
    m: f64,
    len: f64,
    cap: Cap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
enum Cap {
    /// `P(t) = t - t^{a+1} + a t^{a+2}/(a+2)`.
    Alpha(f64),
    /// `P(t) = 1 - s^{b+1} - b/(b+2) (1 - s^{b+2})`, `s = 1 - t`.
    Beta(f64),
}

impl Rho {
    pub fn new(theta: f64, theta_tilde: f64) -> Result<Self> {
        if !(theta < theta_tilde && theta_tilde < 1.0 && theta >= 0.0) {
            return Err(Error::Domain(format!(
                "plateau height {theta_tilde} must lie in ({theta}, 1)"
            )));
        }
        let m = 0.5 * (theta + theta_tilde);
        let len = 1.0 - m;
        let r = (theta_tilde - m) / len;
        let cap = if r >= 0.5 {
            Cap::Alpha(2.0 * r / (1.0 - r))
        } else {
            Cap::Beta(2.0 * (1.0 - r) / r)
        };
        Ok(Self {
            theta,
            theta_tilde,
            m,
            len,
            cap,
        })
    }

    #[inline]
    pub fn eval(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v <= self.m {
            return v;
        }
        if v >= 1.0 {
            return self.theta_tilde;
        }
        let t = (v - self.m) / self.len;
        let p = match self.cap {
            Cap::Alpha(a) => t - t.powf(a + 1.0) + a * t.powf(a + 2.0) / (a + 2.0),
            Cap::Beta(b) => {
                let s = 1.0 - t;
                (1.0 - s.powf(b + 1.0)) - b / (b + 2.0) * (1.0 - s.powf(b + 2.0))
            }
        };
        self.m + self.len * p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Supported in `x1 < 0`, equal to the plateau far left.
    Left,
    /// Cut off on both sides.
    Compact,
}

/// `v = rho(eps (v+ - x1))`, or `rho(min(eps (v+ - x1), eps (v- + x1) + 4))` for the
/// compact side, with correctors `v+-` shifted so that their maximum is 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Subsolution {
    pub side: Side,
    pub theta_tilde: f64,
    pub epsilon: f64,
    pub rho: Rho,
    pub v_plus: CellFunction,
    pub v_minus: Option<CellFunction>,
    pub grid: Grid,
    pub support: (f64, f64),
    pub plateau: (f64, f64),
    pub certificate: ResidualReport,
}

impl Subsolution {
    #[inline]
    fn arg(&self, g: i64, j: usize) -> f64 {
        let x1 = g as f64 * self.grid.dx;
        let vp = self.epsilon * (self.v_plus.at(g, j) - x1);
        match &self.v_minus {
            None => vp,
            Some(vm) => vp.min(self.epsilon * (vm.at(g, j) + x1) + 4.0),
        }
    }

    /// `v` at global column `g`, row `j`.
    #[inline]
    pub fn value(&self, g: i64, j: usize) -> f64 {
        self.rho.eval(self.arg(g, j))
    }

    pub fn left_fill(&self) -> f64 {
        match self.side {
            Side::Left => self.theta_tilde,
            Side::Compact => 0.0,
        }
    }

    /// `x -> v(x - offset*dx)` sampled on the grid columns covering `window`.
    pub fn state(&self, offset: i64, window: (f64, f64), dt: f64) -> Result<SolutionState> {
        let dx = self.grid.dx;
        let i_lo = (window.0 / dx).floor() as i64;
        let i_hi = (window.1 / dx).ceil() as i64;
        let nx = (i_hi - i_lo + 1).max(0) as usize;
        let ny = self.grid.ny;
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let g = i_lo + i as i64 - offset;
            for j in 0..ny {
                values.push(self.value(g, j));
            }
        }
        SolutionState::new(self.grid, dt, i_lo, nx, (self.left_fill(), 0.0), values)
    }

    /// Window of the unshifted data with `margin` around the transition region.
    pub fn natural_window(&self, margin: f64) -> (f64, f64) {
        match self.side {
            Side::Left => (self.plateau.1 - margin, self.support.1 + margin),
            Side::Compact => (self.support.0 - margin, self.support.1 + margin),
        }
    }

    fn kinks(&self, s: &SolutionState, offset: i64) -> Vec<bool> {
        let ny = s.grid.ny;
        let mut mask = vec![false; s.values.len()];
        let sgn = |g: i64, j: usize| {
            let a = self.arg(g - offset, j);
            let x1 = (g - offset) as f64 * self.grid.dx;
            let switch = self.v_minus.as_ref().map_or(0.0, |vm| {
                self.epsilon * (self.v_plus.at(g - offset, j) - x1)
                    - self.epsilon * (vm.at(g - offset, j) + x1)
                    - 4.0
            });
            (a > 0.0, switch > 0.0, a >= 1.0)
        };
        for i in 0..s.nx {
            let g = s.i_lo + i as i64;
            for j in 0..ny {
                let c = sgn(g, j);
                let mut nb = vec![sgn(g - 1, j), sgn(g + 1, j)];
                if s.grid.dim == 2 {
                    nb.push(sgn(g, (j + 1) % ny));
                    nb.push(sgn(g, (j + ny - 1) % ny));
                }
                mask[i * ny + j] = nb
                    .iter()
                    .any(|n| n.0 != c.0 || (n.1 != c.1 && !(n.2 && c.2)));
            }
        }
        mask
    }

    /// Discrete sub-residual of the data against `f0`, on `window`.
    pub fn certify(
        &self,
        coeffs: &CoefficientField,
        f0: &ReactionProfile,
        window: (f64, f64),
    ) -> Result<ResidualReport> {
        let stencil = Stencil::new(coeffs, self.grid)?;
        let field = ReactionField::homogeneous(f0.clone());
        let s = self.state(0, window, 1.0)?;
        let kinks = self.kinks(&s, 0);
        let cand = Candidate {
            state: s,
            u_t: None,
            kinks: Some(kinks),
        };
        Ok(residual_with(
            &stencil,
            Reaction::Field(&field),
            &cand,
            Sign::Sub,
            SUB_TOL,
        ))
    }
}

/// Builds the subsolution and halves `eps` from 1 until its discrete residual against `f0`
/// is non-positive (to rounding) on the grid.
pub fn build_subsolution(
    coeffs: &CoefficientField,
    f0: &ReactionProfile,
    theta_tilde: f64,
    side: Side,
    grid: Grid,
) -> Result<Subsolution> {
    let rho = Rho::new(f0.theta(), theta_tilde)?;
    let cell = Grid::new(grid.dim, grid.dx, grid.ny)?;
    let top = |v: CellFunction| {
        let mx = v.max();
        v.shifted(-mx)
    };
    let v_plus = top(solve_corrector_on(coeffs, 1, cell)?);
    let v_minus = match side {
        Side::Left => None,
        Side::Compact => Some(top(solve_corrector_on(coeffs, -1, cell)?)),
    };
    let mut eps = 1.0;
    let mut last = None;
    while eps >= EPS_FLOOR {
        let vp_min = v_plus.min();
        let (support, plateau) = match &v_minus {
            None => (
                (f64::NEG_INFINITY, 0.0),
                (f64::NEG_INFINITY, vp_min - 1.0 / eps),
            ),
            Some(vm) => (
                (-4.0 / eps, 0.0),
                (-3.0 / eps - vm.min(), vp_min - 1.0 / eps),
            ),
        };
        let sub = Subsolution {
            side,
            theta_tilde,
            epsilon: eps,
            rho: rho.clone(),
            v_plus: v_plus.clone(),
            v_minus: v_minus.clone(),
            grid,
            support,
            plateau,
            certificate: ResidualReport {
                sign: Sign::Sub,
                worst_smooth: 0.0,
                smooth_at: None,
                worst_kink: 0.0,
                kink_at: None,
                passed: false,
            },
        };
        let margin = (2.0f64).max(10.0 * grid.dx);
        let report = sub.certify(coeffs, f0, sub.natural_window(margin))?;
        if report.passed {
            return Ok(Subsolution {
                certificate: report,
                ..sub
            });
        }
        last = Some(report);
        eps *= 0.5;
    }
    Err(Error::Precondition(format!(
        "no eps >= {EPS_FLOOR} certifies the subsolution (last residual {:?})",
        last.map(|r| r.worst_smooth)
    )))
}
