use serde::{Deserialize, Serialize};

use super::field::ReactionField;
use super::profile::{union_grid, PiecewiseLinear, ReactionProfile};
use crate::error::{Error, Result};

/// Evidence that `f` zeta-majorizes `g`: `f(x,u) >= g(u)` for `u` in `[alpha_f(x), 1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MajorizationWitness {
    pub zeta: f64,
    pub g: ReactionProfile,
    /// `(node position, alpha_f)` per node.
    pub alpha_values: Vec<(f64, f64)>,
    /// Smallest `f - g` over all checked intervals.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MajorizationFailure {
    /// `g` is not positive on `(0, 1)`.
    Precondition(String),
    /// `f(x,u) < g(u)` somewhere above `alpha_f(x)`.
    Violation {
        x: f64,
        u: f64,
        slack: f64,
        /// Maximal sub-interval of `[alpha_f(x), 1]` around `u` where `f < g`.
        zone: (f64, f64),
    },
}

impl std::fmt::Display for MajorizationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Precondition(m) => write!(f, "majorant precondition: {m}"),
            Self::Violation { x, u, slack, zone } => write!(
                f,
                "f(x, u) < g(u) at x = {x}, u = {u} (slack {slack}); zone [{}, {}]",
                zone.0, zone.1
            ),
        }
    }
}

fn below_zone(h: &PiecewiseLinear, k: usize, lo: f64) -> (f64, f64) {
    // h < 0 at breakpoint k; walk outwards to the roots.
    let us = h.us();
    let rs = h.rates();
    let mut a = us[k];
    let mut i = k;
    while i > 0 && us[i] > lo {
        let (u0, r0) = (us[i - 1], rs[i - 1]);
        if r0 >= 0.0 {
            a = us[i] - rs[i] * (us[i] - u0) / (rs[i] - r0);
            break;
        }
        a = u0;
        i -= 1;
    }
    let a = a.max(lo);
    let mut b = us[k];
    let mut i = k;
    while i + 1 < us.len() {
        let (u1, r1) = (us[i + 1], rs[i + 1]);
        if r1 >= 0.0 {
            b = us[i] + rs[i] * (u1 - us[i]) / (rs[i] - r1);
            break;
        }
        b = u1;
        i += 1;
    }
    (a, b)
}

/// Checks `f(x,u) >= g(u)` on `[alpha_f(x), 1]` at every node of the field.
pub fn check_majorizes(
    field: &ReactionField,
    zeta: f64,
    g: &ReactionProfile,
) -> std::result::Result<MajorizationWitness, MajorizationFailure> {
    let gp = g.piecewise();
    let n = gp.us().len();
    if let Some((u, _)) = gp.us()[1..n - 1]
        .iter()
        .zip(&gp.rates()[1..n - 1])
        .find(|(_, &r)| r <= 0.0)
    {
        return Err(MajorizationFailure::Precondition(format!(
            "g must be positive on (0, 1) but g({u}) <= 0"
        )));
    }
    if gp.us().len() == 2 {
        return Err(MajorizationFailure::Precondition(
            "g must be positive on (0, 1) but vanishes identically".into(),
        ));
    }
    let mut alpha_values = Vec::with_capacity(field.nodes().len());
    let mut slack = f64::INFINITY;
    let mut worst: Option<MajorizationFailure> = None;
    let mut worst_slack = 0.0;
    for (k, node) in field.nodes().iter().enumerate() {
        let x = field.node_position(k);
        let fp = node.piecewise();
        let alpha = fp.first_crossing(zeta);
        alpha_values.push((x, alpha));
        let mut grid = union_grid([fp.us(), gp.us(), &[alpha][..]]);
        grid.retain(|&u| u >= alpha);
        let diff: Vec<f64> = grid.iter().map(|&u| fp.eval(u) - gp.eval(u)).collect();
        // f - g on [alpha, 1] as a piecewise-linear function (padded to start at 0).
        let mut us = vec![0.0];
        let mut rs = vec![diff[0]];
        for (&u, &d) in grid.iter().zip(&diff) {
            if u > 0.0 {
                us.push(u);
                rs.push(d);
            }
        }
        if us.len() < 2 || *us.last().unwrap() != 1.0 {
            continue;
        }
        let h = PiecewiseLinear::new(us, rs).expect("sorted grid");
        for (i, (&u, &d)) in h.us().iter().zip(h.rates()).enumerate() {
            if u < alpha {
                continue;
            }
            slack = slack.min(d);
            if d < -1e-14 && d < worst_slack {
                worst_slack = d;
                worst = Some(MajorizationFailure::Violation {
                    x,
                    u,
                    slack: d,
                    zone: below_zone(&h, i, alpha),
                });
            }
        }
    }
    match worst {
        Some(w) => Err(w),
        None => Ok(MajorizationWitness {
            zeta,
            g: g.clone(),
            alpha_values,
            slack,
        }),
    }
}

/// Majorant used by default: `f0` on `[theta1, 1]`, the chord from the origin below.
pub fn default_majorant(field: &ReactionField, zeta: f64) -> Result<ReactionProfile> {
    let (theta1, _) = theta_bounds(field, zeta)?;
    let f0 = field.lower().piecewise();
    let mut bp = vec![(0.0, 0.0), (theta1, f0.eval(theta1))];
    for (&u, &r) in f0.us().iter().zip(f0.rates()) {
        if u > theta1 {
            bp.push((u, r));
        }
    }
    ReactionProfile::new(bp, super::ReactionKind::Positive, 0.0)
}

/// `(theta1, theta0)`: the smallest positive roots of `f1(u) = zeta*u` and `f0(u) = zeta*u`.
pub fn theta_bounds(field: &ReactionField, zeta: f64) -> Result<(f64, f64)> {
    if !(zeta > 0.0) {
        return Err(Error::Domain(format!("zeta = {zeta} must be positive")));
    }
    let s = field.upper().slope_at_zero();
    if zeta <= s {
        return Err(Error::Precondition(format!(
            "zeta = {zeta} must exceed f1'(0) = {s}"
        )));
    }
    Ok((
        field.upper().theta_zeta(zeta),
        field.lower().theta_zeta(zeta),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::ReactionKind;
    use super::*;

    fn f0() -> ReactionProfile {
        ReactionProfile::ignition(0.25, &[(0.75, 0.5)]).unwrap()
    }

    #[test]
    fn ignition_majorant_must_be_positive() {
        let f = ReactionField::homogeneous(f0());
        let g = f0().scaled(0.5).unwrap();
        match check_majorizes(&f, 0.1, &g) {
            Err(MajorizationFailure::Precondition(_)) => {}
            other => panic!("expected precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn small_majorant_is_witnessed() {
        let f = ReactionField::homogeneous(f0());
        let zeta = 0.1;
        let alpha = f0().theta_zeta(zeta);
        // dense-grid minimum of f0 over [alpha, 1 - 1e-3]
        let mut m = f64::INFINITY;
        for k in 0..=10_000 {
            let u = alpha + (0.999 - alpha) * k as f64 / 10_000.0;
            m = m.min(f0().eval(u));
        }
        let tiny = 0.5 * m / 0.25;
        let bp: Vec<(f64, f64)> = (0..=20)
            .map(|k| {
                let u = k as f64 / 20.0;
                (u, f0().eval(u).min(tiny * u * (1.0 - u)))
            })
            .collect();
        // min(f0, .) vanishes below theta; lift with the chord to keep g > 0.
        let bp: Vec<(f64, f64)> = bp
            .into_iter()
            .map(|(u, r)| {
                if u > 0.0 && u < 1.0 && r <= 0.0 {
                    (u, 1e-3 * u)
                } else {
                    (u, r)
                }
            })
            .collect();
        let g = ReactionProfile::new(bp, ReactionKind::Positive, 0.0).unwrap();
        let w = check_majorizes(&f, zeta, &g).expect("witness");
        assert_eq!(w.alpha_values.len(), 1);
        assert!((w.alpha_values[0].1 - alpha).abs() < 1e-15);
        assert!(w.slack >= 0.0);
    }

    #[test]
    fn dead_zone_is_named() {
        // practically dead on (0.5, 0.7)
        let f = ReactionProfile::new(
            vec![
                (0.0, 0.0),
                (0.1, 0.0),
                (0.3, 0.3),
                (0.5, 1e-9),
                (0.7, 1e-9),
                (0.8, 0.2),
                (1.0, 0.0),
            ],
            ReactionKind::Ignition,
            0.1,
        )
        .unwrap();
        let field = ReactionField::homogeneous(f);
        let g = ReactionProfile::new(
            vec![(0.0, 0.0), (0.5, 0.01), (1.0, 0.0)],
            ReactionKind::Positive,
            0.0,
        )
        .unwrap();
        match check_majorizes(&field, 0.5, &g) {
            Err(MajorizationFailure::Violation { zone, .. }) => {
                assert!(zone.0 > 0.3 && zone.0 < 0.5, "{zone:?}");
                assert!(zone.1 > 0.7 && zone.1 < 0.8, "{zone:?}");
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn theta_bounds_order() {
        let f = ReactionField::cellwise_amplitudes(&f0(), &[0.5, 2.0], 0.0, 1.0, (0.5, 2.0), false)
            .unwrap();
        let (t1, t0) = theta_bounds(&f, 0.2).unwrap();
        assert!(t1 <= t0);
        for k in 0..2 {
            let a = super::super::alpha_f(&f, 0.2, f.node_position(k));
            assert!(a >= t1 - 1e-15 && a <= t0 + 1e-15);
        }
    }
}
