use crate::error::{Error, Result};
use crate::medium::{ReactionKind, ReactionProfile};

const H_MAX: f64 = 1e-3;

/// Traveling-wave speed of `W'' + c W' + f0(W) = 0`, `W(-inf) = 1`, `W(+inf) = 0`, by
/// phase-plane shooting in `s(W) = -W'`, bisected to a bracket narrower than `tol`.
pub fn shooting_speed(f0: &ReactionProfile, tol: f64) -> Result<f64> {
    shooting_speed_with(f0, tol, H_MAX)
}

/// [`shooting_speed`] with an explicit largest integration step in `W`.
pub fn shooting_speed_with(f0: &ReactionProfile, tol: f64, h_max: f64) -> Result<f64> {
    if f0.kind() != ReactionKind::Ignition || !(f0.theta() > 0.0) {
        return Err(Error::Precondition(
            "shooting needs an ignition profile with theta > 0".into(),
        ));
    }
    let mismatch = |c: f64| landing(f0, c, h_max).map(|s| s - c * f0.theta());
    let mut hi = 1.0;
    let mut tries = 0;
    while mismatch(hi)? >= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::Bracket("no speed bracket found".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `s(theta)` for speed `c`; negative when the orbit reaches `s = 0` above `theta`.
fn landing(f0: &ReactionProfile, c: f64, h_max: f64) -> Result<f64> {
    let pl = f0.piecewise();
    let us = pl.us();
    let rs = pl.rates();
    let n = us.len();
    let beta = -(rs[n - 1] - rs[n - 2]) / (us[n - 1] - us[n - 2]);
    if !(beta > 0.0) {
        return Err(Error::Precondition(
            "profile must decrease into u = 1".into(),
        ));
    }
    // Exact on the last piece: s = k (1 - W) with k^2 + c k - beta = 0.
    let k = 0.5 * (-c + (c * c + 4.0 * beta).sqrt());
    let theta = f0.theta();
    let mut w = us[n - 2];
    let mut s = k * (1.0 - w);
    let rhs = |w: f64, s: f64| c - pl.eval(w) / s;
    for p in (0..n - 2).rev() {
        let w_end = us[p].max(theta);
        if w <= w_end {
            continue;
        }
        while w > w_end {
            if !(s > 0.0) {
                return Ok(-1.0);
            }
            let f = pl.eval(w);
            let r = rhs(w, s).abs();
            let mut h = h_max;
            if f > 0.0 {
                h = h.min(0.5 * s * s / f);
            }
            if r > 0.0 {
                h = h.min(0.1 * s / r);
            }
            h = h.max(1e-14).min(w - w_end);
            // dW = -h
            let k1 = rhs(w, s);
            let k2 = rhs(w - 0.5 * h, s - 0.5 * h * k1);
            let k3 = rhs(w - 0.5 * h, s - 0.5 * h * k2);
            let k4 = rhs(w - h, s - h * k3);
            s -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            w -= h;
            if w - w_end < 1e-15 {
                w = w_end;
            }
        }
        if w <= theta {
            break;
        }
    }
    Ok(if s > 0.0 { s } else { -1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f0(theta: f64) -> ReactionProfile {
        // piecewise-linear (u - theta)(1 - u)
        let pts: Vec<(f64, f64)> = (1..8)
            .map(|k| {
                let u = theta + (1.0 - theta) * k as f64 / 8.0;
                (u, (u - theta) * (1.0 - u))
            })
            .collect();
        ReactionProfile::ignition(theta, &pts).unwrap()
    }

    #[test]
    fn rejects_positive_profiles() {
        let kpp = ReactionProfile::new(
            vec![(0.0, 0.0), (0.5, 0.25), (1.0, 0.0)],
            ReactionKind::Positive,
            0.0,
        )
        .unwrap();
        assert!(shooting_speed(&kpp, 1e-8).is_err());
    }

    #[test]
    fn step_halving_is_stable() {
        let f = f0(0.25);
        let a = shooting_speed_with(&f, 1e-10, 1e-3).unwrap();
        let b = shooting_speed_with(&f, 1e-10, 5e-4).unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn quadrupled_rate_doubles_speed() {
        let f = f0(0.25);
        let a = shooting_speed(&f, 1e-10).unwrap();
        let b = shooting_speed(&f.scaled(4.0).unwrap(), 1e-10).unwrap();
        assert!((b / a - 2.0).abs() < 1e-4);
    }
}
