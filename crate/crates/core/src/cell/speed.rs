use serde::{Deserialize, Serialize};

use super::eigen::principal_eigen;
use crate::error::{Error, Result};
use crate::medium::CoefficientField;
use crate::optimize::{bisect, golden_section};

const BRACKET_CAP: usize = 60;

/// Minimal linearized speed `c_zeta = min_{lambda>0} (zeta + kappa(lambda))/lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedSolution {
    pub zeta: f64,
    pub direction: i32,
    pub lambda_zeta: f64,
    pub c_zeta: f64,
    pub kappa: f64,
    pub bracket: (f64, f64),
}

fn objective(coeffs: &CoefficientField, zeta: f64, direction: i32, lam: f64) -> Result<f64> {
    let k = principal_eigen(coeffs, lam, direction)?.kappa;
    Ok((zeta + k) / lam)
}

pub fn min_speed(coeffs: &CoefficientField, zeta: f64, direction: i32) -> Result<SpeedSolution> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::Domain(format!("zeta = {zeta} must be positive")));
    }
    let g = |l: f64| objective(coeffs, zeta, direction, l);
    let mut b = (zeta / coeffs.a_upper()).sqrt();
    let (mut a, mut c) = (0.5 * b, 2.0 * b);
    let (mut ga, mut gb, mut gc) = (g(a)?, g(b)?, g(c)?);
    let mut expansions = 0;
    while ga < gb {
        expansions += 1;
        if expansions > BRACKET_CAP {
            return Err(Error::Bracket(format!("lambda bracket fell below {a}")));
        }
        (c, gc) = (b, gb);
        (b, gb) = (a, ga);
        a *= 0.5;
        ga = g(a)?;
    }
    while gc < gb {
        expansions += 1;
        if expansions > BRACKET_CAP {
            return Err(Error::Bracket(format!("lambda bracket exceeded {c}")));
        }
        (a, ga) = (b, gb);
        (b, gb) = (c, gc);
        c *= 2.0;
        gc = g(c)?;
    }
    let _ = (ga, gc);
    let (lambda_zeta, c_zeta) = golden_section(a, c, 1e-8, g)?;
    let kappa = c_zeta * lambda_zeta - zeta;
    Ok(SpeedSolution {
        zeta,
        direction,
        lambda_zeta,
        c_zeta,
        kappa,
        bracket: (a, c),
    })
}

/// `zeta` at which `c_zeta` equals `c0`, by bisection (`c_zeta` is increasing in `zeta`).
pub fn zeta_zero(coeffs: &CoefficientField, c0: f64, direction: i32) -> Result<f64> {
    if !(c0 > 0.0) {
        return Err(Error::Domain(format!("target speed {c0} must be positive")));
    }
    let h = |z: f64| min_speed(coeffs, z, direction).map(|s| s.c_zeta - c0);
    let (mut lo, mut hi) = (1.0, 1.0);
    for _ in 0..BRACKET_CAP {
        if h(hi)? >= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..BRACKET_CAP {
        if h(lo)? <= 0.0 {
            break;
        }
        hi = lo;
        lo *= 0.5;
    }
    bisect(lo, hi, 1e-12, h)
}
