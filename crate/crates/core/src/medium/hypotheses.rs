use serde::{Deserialize, Serialize};

use super::coeffs::CoefficientField;
use super::field::ReactionField;

/// Relative tolerance for discrete incompressibility and the mean-zero condition.
pub const FLOW_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    /// Worst-case margin; negative when violated.
    pub slack: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub clauses: Vec<Clause>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &str, slack: f64, tol: f64) {
        self.clauses.push(Clause {
            name: name.to_string(),
            passed: slack >= -tol,
            slack,
        });
    }
}

pub const SANDWICH: &str = "H1 sandwich f0 <= f <= f1";
pub const LIPSCHITZ: &str = "H1 Lipschitz constant";
pub const ENDPOINTS: &str = "H1 f(x,0) = f(x,1) = 0";
pub const PROFILE_ORDER: &str = "H1 f0 <= f1";
pub const ELLIPTIC: &str = "H2 ellipticity";
pub const INCOMPRESSIBLE: &str = "H2 incompressibility";
pub const MEAN_ZERO: &str = "H2 mean-zero q1";

/// Evaluates every clause of the reaction and coefficient hypotheses.
pub fn check_hypotheses(field: &ReactionField, coeffs: &CoefficientField) -> HypothesisReport {
    let mut r = HypothesisReport::default();
    let grid = field.u_grid();
    let lo = field.lower().piecewise().on_grid(grid);
    let hi = field.upper().piecewise().on_grid(grid);
    let mut sandwich = f64::INFINITY;
    let mut lip = 0.0f64;
    let mut ends = 0.0f64;
    for node in field.nodes() {
        let v = node.piecewise().on_grid(grid);
        for k in 0..grid.len() {
            sandwich = sandwich.min(v[k] - lo[k]).min(hi[k] - v[k]);
        }
        lip = lip.max(node.lipschitz());
        ends = ends.max(node.eval(0.0).abs()).max(node.eval(1.0).abs());
    }
    r.push(SANDWICH, sandwich, 1e-12);
    r.push(LIPSCHITZ, field.lipschitz_k() - lip, 1e-12);
    r.push(ENDPOINTS, -ends, 0.0);
    let order = (0..grid.len()).fold(f64::INFINITY, |m, k| m.min(hi[k] - lo[k]));
    r.push(PROFILE_ORDER, order, 1e-12);

    r.push(ELLIPTIC, coeffs.a_lower(), 0.0);
    let flow_scale = {
        let m = coeffs.max_abs_q();
        1.0f64.max(m[0] / coeffs.h1()).max(m[1] / coeffs.h2())
    };
    r.push(
        INCOMPRESSIBLE,
        FLOW_TOL * flow_scale - coeffs.max_discrete_divergence(),
        0.0,
    );
    let q_scale = 1.0f64.max(coeffs.max_abs_q()[0]);
    r.push(MEAN_ZERO, FLOW_TOL * q_scale - coeffs.mean_q1().abs(), 0.0);
    r
}

#[cfg(test)]
mod tests {
    use super::super::profile::ReactionProfile;
    use super::super::Interpolation;
    use super::*;
    use std::f64::consts::PI;

    fn f0() -> ReactionProfile {
        ReactionProfile::ignition(0.25, &[(0.75, 0.5)]).unwrap()
    }

    #[test]
    fn constructed_sandwich_passes() {
        let f = ReactionField::cellwise_amplitudes(
            &f0(),
            &[0.5, 1.0, 2.0],
            0.0,
            1.0,
            (0.5, 2.0),
            false,
        )
        .unwrap();
        let r = check_hypotheses(&f, &CoefficientField::identity(1, 1.0));
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn planted_bump_fails_sandwich() {
        let f1 = f0();
        let bumped = ReactionProfile::ignition(0.25, &[(0.75, 0.51)]).unwrap();
        let field = ReactionField::new(
            f0(),
            f1,
            Some(10.0),
            vec![f0(), bumped],
            0.0,
            1.0,
            Interpolation::Cellwise,
            None,
        )
        .unwrap();
        let r = check_hypotheses(&field, &CoefficientField::identity(1, 1.0));
        let c = r.clause(SANDWICH).unwrap();
        assert!(!c.passed);
        assert!((c.slack + 0.01).abs() < 1e-12, "{}", c.slack);
    }

    #[test]
    fn shear_flow_passes() {
        let c = CoefficientField::from_fn(2, 1.0, 8, 16, |_, y| {
            ([(2.0 * PI * y).sin(), 0.0], [1.0, 0.0, 1.0])
        })
        .unwrap();
        let r = check_hypotheses(&ReactionField::homogeneous(f0()), &c);
        assert!(r.all_pass());
        assert!(c.max_discrete_divergence() <= 1e-12);
        assert!(c.mean_q1().abs() <= 1e-12);
    }

    #[test]
    fn net_flux_fails_mean_zero() {
        let c =
            CoefficientField::from_fn(2, 1.0, 1, 4, |_, _| ([0.3, 0.0], [1.0, 0.0, 1.0])).unwrap();
        let r = check_hypotheses(&ReactionField::homogeneous(f0()), &c);
        assert!(!r.clause(MEAN_ZERO).unwrap().passed);
        assert!(r.clause(INCOMPRESSIBLE).unwrap().passed);
    }
}
