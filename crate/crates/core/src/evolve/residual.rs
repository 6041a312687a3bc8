use serde::{Deserialize, Serialize};

use super::state::SolutionState;
use crate::error::Result;
use crate::grid::Stencil;
use crate::medium::{CoefficientField, ReactionField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Sub,
    Super,
}

/// Reaction used in a residual: the medium, or a linear rate `xi * u`.
#[derive(Clone, Copy, Debug)]
pub enum Reaction<'a> {
    Field(&'a ReactionField),
    Linear(f64),
}

impl Reaction<'_> {
    #[inline]
    fn eval(&self, x1: f64, u: f64) -> f64 {
        match self {
            Reaction::Field(f) => f.eval(x1, u),
            Reaction::Linear(xi) => xi * u,
        }
    }
}

/// A grid function (with fills) to be tested, its time derivative if it is not
/// stationary, and a mask of nodes where it is not smooth.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub state: SolutionState,
    pub u_t: Option<Vec<f64>>,
    pub kinks: Option<Vec<bool>>,
}

impl Candidate {
    pub fn stationary(state: SolutionState) -> Self {
        Self {
            state,
            u_t: None,
            kinks: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub sign: Sign,
    /// Worst signed residual `u_t - L u - f` at smooth nodes (max for sub, min for super).
    pub worst_smooth: f64,
    pub smooth_at: Option<(i64, usize)>,
    /// Same over kink nodes.
    pub worst_kink: f64,
    pub kink_at: Option<(i64, usize)>,
    pub passed: bool,
}

/// Discrete residual `r = u_t - L u - f(x, u)` on interior columns with the stepping stencil.
/// Sub requires `r <= tol` everywhere, super `r >= -tol`. At kinks the discrete Laplacian
/// carries the flux jump, so the same sign test decides admissibility there.
pub fn residual_with(
    stencil: &Stencil,
    reaction: Reaction<'_>,
    cand: &Candidate,
    sign: Sign,
    tol: f64,
) -> ResidualReport {
    let s = &cand.state;
    let ny = s.grid.ny;
    let pick = |a: f64, b: f64| match sign {
        Sign::Sub => a.max(b),
        Sign::Super => a.min(b),
    };
    let init = match sign {
        Sign::Sub => f64::NEG_INFINITY,
        Sign::Super => f64::INFINITY,
    };
    let (mut ws, mut wk) = (init, init);
    let (mut sa, mut ka) = (None, None);
    for i in 1..s.nx.saturating_sub(1) {
        let g = s.i_lo + i as i64;
        let x1 = s.x1(i);
        for j in 0..ny {
            let k = i * ny + j;
            let u = s.values[k];
            let ut = cand.u_t.as_ref().map_or(0.0, |v| v[k]);
            let lu = stencil.apply(
                &s.values,
                s.nx,
                s.i_lo,
                (s.left_fill[j], s.right_fill[j]),
                i,
                j,
            );
            let r = ut - lu - reaction.eval(x1, u);
            let kink = cand.kinks.as_ref().is_some_and(|m| m[k]);
            if kink {
                let p = pick(wk, r);
                if p != wk {
                    wk = p;
                    ka = Some((g, j));
                }
            } else {
                let p = pick(ws, r);
                if p != ws {
                    ws = p;
                    sa = Some((g, j));
                }
            }
        }
    }
    let ok = |w: f64| match sign {
        Sign::Sub => w <= tol,
        Sign::Super => w >= -tol,
    };
    let passed = (sa.is_none() || ok(ws)) && (ka.is_none() || ok(wk));
    let zero = |w: f64, at: &Option<(i64, usize)>| if at.is_some() { w } else { 0.0 };
    ResidualReport {
        sign,
        worst_smooth: zero(ws, &sa),
        smooth_at: sa,
        worst_kink: zero(wk, &ka),
        kink_at: ka,
        passed,
    }
}

pub fn residual(
    coeffs: &CoefficientField,
    reaction: Reaction<'_>,
    cand: &Candidate,
    sign: Sign,
    tol: f64,
) -> Result<ResidualReport> {
    let stencil = Stencil::new(coeffs, cand.state.grid)?;
    Ok(residual_with(&stencil, reaction, cand, sign, tol))
}
