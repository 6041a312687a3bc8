//! Piecewise-linear reaction rates in the concentration variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous piecewise-linear function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    us: Vec<f64>,
    rs: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(us: Vec<f64>, rs: Vec<f64>) -> Result<Self> {
        if us.len() != rs.len() || us.len() < 2 {
            return Err(Error::InvalidMedium(
                "a profile needs at least two breakpoints".into(),
            ));
        }
        if us[0] != 0.0 || *us.last().unwrap() != 1.0 {
            return Err(Error::InvalidMedium(
                "breakpoints must start at u = 0 and end at u = 1".into(),
            ));
        }
        if us.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMedium(
                "breakpoints must be strictly increasing in u".into(),
            ));
        }
        if rs.iter().chain(us.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMedium("non-finite breakpoint".into()));
        }
        Ok(Self { us, rs })
    }

    pub fn us(&self) -> &[f64] {
        &self.us
    }

    pub fn rates(&self) -> &[f64] {
        &self.rs
    }

    /// Index `k` of the piece `[us[k], us[k+1]]` containing `u`.
    fn piece(&self, u: f64) -> usize {
        let n = self.us.len();
        let mut k = 0;
        while k + 2 < n && u > self.us[k + 1] {
            k += 1;
        }
        k
    }

    pub fn eval(&self, u: f64) -> f64 {
        let k = self.piece(u);
        let (u0, u1) = (self.us[k], self.us[k + 1]);
        let w = (u - u0) / (u1 - u0);
        (1.0 - w) * self.rs[k] + w * self.rs[k + 1]
    }

    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.us
            .windows(2)
            .zip(self.rs.windows(2))
            .map(|(u, r)| (r[1] - r[0]) / (u[1] - u[0]))
    }

    pub fn lipschitz(&self) -> f64 {
        self.slopes().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn slope_at_zero(&self) -> f64 {
        (self.rs[1] - self.rs[0]) / (self.us[1] - self.us[0])
    }

    /// `inf({u in (0,1) : f(u) >= zeta*u} U {1})`, exact on the pieces.
    pub fn first_crossing(&self, zeta: f64) -> f64 {
        for k in 0..self.us.len() - 1 {
            let (u0, u1) = (self.us[k], self.us[k + 1]);
            let h0 = if k == 0 { 0.0 } else { self.rs[k] - zeta * u0 };
            let h1 = self.rs[k + 1] - zeta * u1;
            if k == 0 {
                // h vanishes at the origin; the set starts at 0 iff h is non-decreasing there.
                if h1 >= 0.0 {
                    return 0.0;
                }
                continue;
            }
            if h0 >= 0.0 {
                return u0;
            }
            if h1 >= 0.0 {
                let t = -h0 / (h1 - h0);
                return (u0 + t * (u1 - u0)).min(u1);
            }
        }
        1.0
    }

    /// Minimum over `[a, b]`.
    pub fn min_on(&self, a: f64, b: f64) -> f64 {
        let mut m = self.eval(a).min(self.eval(b));
        for (&u, &r) in self.us.iter().zip(&self.rs) {
            if u > a && u < b {
                m = m.min(r);
            }
        }
        m
    }

    /// `sup_{u in (0,1]} f(u)/u`.
    pub fn sup_ratio(&self) -> f64 {
        let mut m = self.slope_at_zero();
        for (&u, &r) in self.us.iter().zip(&self.rs).skip(1) {
            m = m.max(r / u);
        }
        m
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            us: self.us.clone(),
            rs: self.rs.iter().map(|r| a * r).collect(),
        }
    }

    /// Resample on a finer breakpoint set containing all of ours.
    pub fn on_grid(&self, us: &[f64]) -> Vec<f64> {
        us.iter().map(|&u| self.eval(u)).collect()
    }
}

/// Sorted union of breakpoint sets.
pub fn union_grid<'a>(sets: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut all: Vec<f64> = sets.into_iter().flatten().copied().collect();
    all.sort_by(|a, b| a.total_cmp(b));
    all.dedup();
    all
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReactionKind {
    Ignition,
    Positive,
}

/// A rate `f(u)` vanishing at 0 and 1, either of ignition type (zero on `[0, theta]`)
/// or positive on `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileDoc", into = "ProfileDoc")]
pub struct ReactionProfile {
    pl: PiecewiseLinear,
    kind: ReactionKind,
    theta: f64,
    decreasing_from: f64,
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    profile: Vec<[f64; 2]>,
    kind: ReactionKind,
    #[serde(default)]
    theta: f64,
}

impl TryFrom<ProfileDoc> for ReactionProfile {
    type Error = Error;
    fn try_from(doc: ProfileDoc) -> Result<Self> {
        ReactionProfile::new(
            doc.profile.iter().map(|p| (p[0], p[1])).collect(),
            doc.kind,
            doc.theta,
        )
    }
}

impl From<ReactionProfile> for ProfileDoc {
    fn from(p: ReactionProfile) -> Self {
        ProfileDoc {
            profile: p
                .pl
                .us
                .iter()
                .zip(&p.pl.rs)
                .map(|(&u, &r)| [u, r])
                .collect(),
            kind: p.kind,
            theta: p.theta,
        }
    }
}

impl ReactionProfile {
    pub fn new(breakpoints: Vec<(f64, f64)>, kind: ReactionKind, theta: f64) -> Result<Self> {
        let (us, rs): (Vec<f64>, Vec<f64>) = breakpoints.into_iter().unzip();
        let pl = PiecewiseLinear::new(us, rs)?;
        Self::from_piecewise(pl, kind, theta)
    }

    pub fn from_piecewise(pl: PiecewiseLinear, kind: ReactionKind, theta: f64) -> Result<Self> {
        let n = pl.us.len();
        if pl.rs[0] != 0.0 || pl.rs[n - 1] != 0.0 {
            return Err(Error::InvalidMedium(
                "rate must vanish exactly at u = 0 and u = 1".into(),
            ));
        }
        if pl.rs.iter().any(|&r| r < 0.0) {
            return Err(Error::InvalidMedium("negative rate".into()));
        }
        match kind {
            ReactionKind::Ignition => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::InvalidMedium(format!(
                        "ignition threshold {theta} outside (0, 1)"
                    )));
                }
                if pl.eval(theta) != 0.0 {
                    return Err(Error::InvalidMedium(format!(
                        "ignition rate must vanish at theta = {theta}"
                    )));
                }
                for (&u, &r) in pl.us.iter().zip(&pl.rs) {
                    if u <= theta && r != 0.0 {
                        return Err(Error::InvalidMedium(format!(
                            "ignition rate nonzero at u = {u} <= theta"
                        )));
                    }
                    if u > theta && u < 1.0 && r <= 0.0 {
                        return Err(Error::InvalidMedium(format!(
                            "ignition rate not positive at u = {u} > theta"
                        )));
                    }
                }
            }
            ReactionKind::Positive => {
                if theta != 0.0 {
                    return Err(Error::InvalidMedium(
                        "positive reactions carry theta = 0".into(),
                    ));
                }
                if pl.rs[1..n - 1].iter().any(|&r| r <= 0.0) {
                    return Err(Error::InvalidMedium(
                        "positive reaction must be positive on (0, 1)".into(),
                    ));
                }
            }
        }
        let mut k = n - 2;
        while k > 0 && pl.rs[k - 1] >= pl.rs[k] {
            k -= 1;
        }
        let decreasing_from = pl.us[k];
        Ok(Self {
            pl,
            kind,
            theta,
            decreasing_from,
        })
    }

    /// Ignition profile that is zero on `[0, theta]`, rises linearly with unit slope,
    /// and has linear pieces through the given interior points.
    pub fn ignition(theta: f64, interior: &[(f64, f64)]) -> Result<Self> {
        let mut bp = vec![(0.0, 0.0), (theta, 0.0)];
        bp.extend_from_slice(interior);
        bp.push((1.0, 0.0));
        Self::new(bp, ReactionKind::Ignition, theta)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.pl.eval(u)
    }

    pub fn piecewise(&self) -> &PiecewiseLinear {
        &self.pl
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pl.us.iter().copied().zip(self.pl.rs.iter().copied())
    }

    pub fn kind(&self) -> ReactionKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn decreasing_from(&self) -> f64 {
        self.decreasing_from
    }

    pub fn lipschitz(&self) -> f64 {
        self.pl.lipschitz()
    }

    pub fn slope_at_zero(&self) -> f64 {
        self.pl.slope_at_zero()
    }

    /// Smallest positive root of `f(u) = zeta*u` (1 if none).
    pub fn theta_zeta(&self, zeta: f64) -> f64 {
        self.pl.first_crossing(zeta)
    }

    pub fn sup_ratio(&self) -> f64 {
        self.pl.sup_ratio()
    }

    pub fn min_on(&self, a: f64, b: f64) -> f64 {
        self.pl.min_on(a, b)
    }

    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::from_piecewise(self.pl.scaled(a), self.kind, self.theta)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_f0() -> ReactionProfile {
        // u - 0.25 on [0.25, 0.75], then linearly to 0 at 1.
        ReactionProfile::ignition(0.25, &[(0.75, 0.5)]).unwrap()
    }

    #[test]
    fn evaluates_pieces() {
        let f = spec_f0();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(0.2), 0.0);
        assert!((f.eval(0.5) - 0.25).abs() < 1e-15);
        assert!((f.eval(0.875) - 0.25).abs() < 1e-15);
        assert_eq!(f.eval(1.0), 0.0);
        assert!((f.lipschitz() - 2.0).abs() < 1e-15);
        assert_eq!(f.decreasing_from(), 0.75);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(
            ReactionProfile::new(vec![(0.0, 0.1), (1.0, 0.0)], ReactionKind::Positive, 0.0)
                .is_err()
        );
        assert!(ReactionProfile::new(
            vec![(0.0, 0.0), (0.5, -0.1), (1.0, 0.0)],
            ReactionKind::Positive,
            0.0
        )
        .is_err());
        // nonzero below theta
        assert!(ReactionProfile::new(
            vec![(0.0, 0.0), (0.2, 0.1), (0.3, 0.0), (0.6, 0.2), (1.0, 0.0)],
            ReactionKind::Ignition,
            0.3
        )
        .is_err());
        // theta not a zero of the profile
        assert!(ReactionProfile::new(
            vec![(0.0, 0.0), (0.2, 0.0), (0.6, 0.2), (1.0, 0.0)],
            ReactionKind::Ignition,
            0.3
        )
        .is_err());
    }

    #[test]
    fn crossing_matches_dense_scan() {
        let f = ReactionProfile::new(
            vec![
                (0.0, 0.0),
                (0.25, 0.1875),
                (0.5, 0.25),
                (0.75, 0.1875),
                (1.0, 0.0),
            ],
            ReactionKind::Positive,
            0.0,
        )
        .unwrap();
        let zeta = 0.5;
        // first-piece slope 0.75 > zeta: the set reaches down to 0
        assert_eq!(f.theta_zeta(zeta), 0.0);
        let zeta = 0.8;
        let exact = f.theta_zeta(zeta);
        let mut scan = 1.0;
        let mut u: f64 = 1e-6;
        while u < 1.0 {
            if f.eval(u) >= zeta * u {
                scan = u;
                break;
            }
            u += 1e-6;
        }
        assert!((exact - scan).abs() <= 1e-6, "{exact} vs {scan}");
    }

    #[test]
    fn json_roundtrip() {
        let f = spec_f0();
        let s = f.to_json().unwrap();
        let g = ReactionProfile::from_json(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn sup_ratio_of_ignition() {
        let f = spec_f0();
        // max of f(u)/u at the breakpoint (0.75, 0.5)
        assert!((f.sup_ratio() - 0.5 / 0.75).abs() < 1e-15);
    }
}
