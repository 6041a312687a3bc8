//! Media shipped with the laboratory.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cell::zeta_zero;
use crate::error::{Error, Result};
use crate::fronts::shooting_speed;
use crate::medium::{sample_random_reaction, CoefficientField, ReactionField, ReactionProfile};

/// Piecewise-linear `rate * (u - theta)(1 - u)` on `[theta, 1]` with seven interior nodes.
pub fn ignition_profile(theta: f64, rate: f64) -> Result<ReactionProfile> {
    let pts: Vec<(f64, f64)> = (1..8)
        .map(|k| {
            let u = theta + (1.0 - theta) * k as f64 / 8.0;
            (u, rate * (u - theta) * (1.0 - u))
        })
        .collect();
    ReactionProfile::ignition(theta, &pts)
}

/// Base profile of the heterogeneous presets.
pub fn base_profile() -> ReactionProfile {
    ignition_profile(0.25, 4.0).expect("valid preset profile")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Medium {
    pub name: String,
    pub coeffs: CoefficientField,
    pub field: ReactionField,
    pub zeta: f64,
    pub theta_tilde: f64,
    /// Grid spacing the medium is tuned for.
    pub dx: f64,
    /// Transverse rows in 2-D.
    pub ny: usize,
}

/// `zeta_0 / 2`, with `zeta_0` solving `c_zeta = c0` and `c0` from shooting on `f0`
/// (constant `A`, `q = 0` only).
pub fn default_zeta(coeffs: &CoefficientField, field: &ReactionField) -> Result<f64> {
    if !coeffs.is_constant() || coeffs.max_abs_q() != [0.0, 0.0] {
        return Err(Error::Precondition(
            "c0 is only available by shooting for constant A and q = 0".into(),
        ));
    }
    let c0 = coeffs.a(0, 0)[0].sqrt() * shooting_speed(field.lower(), 1e-10)?;
    Ok(0.5 * zeta_zero(coeffs, c0, 1)?)
}

fn homogeneous(name: &str, theta: f64, rate: f64, dx: f64) -> Result<Medium> {
    let coeffs = CoefficientField::identity(1, 1.0);
    let field = ReactionField::homogeneous(ignition_profile(theta, rate)?);
    Ok(Medium {
        name: name.into(),
        zeta: default_zeta(&coeffs, &field)?,
        coeffs,
        field,
        theta_tilde: 0.9,
        dx,
        ny: 1,
    })
}

/// Fast homogeneous ignition media with `theta = 0.2` and `theta = 0.4`.
pub fn homogeneous_pair() -> Result<[Medium; 2]> {
    Ok([
        homogeneous("homogeneous-0.2", 0.2, 10.0, 0.01)?,
        homogeneous("homogeneous-0.4", 0.4, 30.0, 0.01)?,
    ])
}

/// `a(x) f0(u)` with `a = 1 + 0.5 sin(2 pi x1)`, period 1.
pub fn periodic_reaction() -> Result<Medium> {
    let coeffs = CoefficientField::identity(1, 1.0);
    let field = ReactionField::periodic_amplitude(&base_profile(), 1.0, 20, |x| {
        1.0 + 0.5 * (2.0 * PI * x).sin()
    })?;
    Ok(Medium {
        name: "periodic-reaction".into(),
        zeta: default_zeta(&coeffs, &field)?,
        coeffs,
        field,
        theta_tilde: 0.9,
        dx: 0.05,
        ny: 1,
    })
}

/// `A = 1 + 0.5 sin(2 pi x1)` with the base reaction.
pub fn periodic_diffusion() -> Result<Medium> {
    let coeffs = CoefficientField::from_fn(1, 1.0, 20, 1, |x, _| {
        ([0.0; 2], [1.0 + 0.5 * (2.0 * PI * x).sin(), 0.0, 0.0])
    })?;
    Ok(Medium {
        name: "periodic-diffusion".into(),
        coeffs,
        field: ReactionField::homogeneous(base_profile()),
        zeta: 0.05,
        theta_tilde: 0.9,
        dx: 0.05,
        ny: 1,
    })
}

/// i.i.d. amplitudes in `[0.5, 2]` on 64 unit cells starting at `x1 = 0`.
pub fn disordered(seed: u64) -> Result<Medium> {
    let coeffs = CoefficientField::identity(1, 1.0);
    let field = sample_random_reaction(seed, &base_profile(), (0.5, 2.0), 64, 1.0)?;
    Ok(Medium {
        name: format!("disordered-{seed}"),
        zeta: default_zeta(&coeffs, &field)?,
        coeffs,
        field,
        theta_tilde: 0.9,
        dx: 0.05,
        ny: 1,
    })
}

/// Shear flow `q = (sin(2 pi x2), 0)`, `A = I`, on the unit cylinder.
pub fn shear_2d() -> Result<Medium> {
    let n = 16;
    let coeffs = CoefficientField::from_fn(2, 1.0, n, n, |_, y| {
        ([(2.0 * PI * y).sin(), 0.0], [1.0, 0.0, 1.0])
    })?;
    Ok(Medium {
        name: "shear-2d".into(),
        coeffs,
        field: ReactionField::homogeneous(base_profile()),
        zeta: 0.05,
        theta_tilde: 0.9,
        dx: 1.0 / n as f64,
        ny: n,
    })
}

/// Every shipped medium.
pub fn shipped() -> Result<Vec<Medium>> {
    let [a, b] = homogeneous_pair()?;
    Ok(vec![
        a,
        b,
        periodic_reaction()?,
        periodic_diffusion()?,
        disordered(1)?,
        shear_2d()?,
    ])
}

pub fn by_name(name: &str) -> Result<Medium> {
    if let Some(seed) = name.strip_prefix("disordered-") {
        let seed = seed
            .parse()
            .map_err(|_| Error::Config(format!("bad seed in preset name {name}")))?;
        return disordered(seed);
    }
    shipped()?
        .into_iter()
        .find(|m| m.name == name)
        .ok_or_else(|| Error::Config(format!("unknown preset {name}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronts::{build_subsolution, front_preconditions, Side};
    use crate::grid::Grid;

    #[test]
    fn shipped_media_satisfy_preconditions() {
        for m in shipped().unwrap() {
            front_preconditions(&m.coeffs, &m.field, m.zeta, None)
                .unwrap_or_else(|e| panic!("{}: {e}", m.name));
            let g = Grid::new(m.coeffs.dim(), m.dx, m.ny).unwrap();
            for side in [Side::Left, Side::Compact] {
                build_subsolution(&m.coeffs, m.field.lower(), m.theta_tilde, side, g)
                    .unwrap_or_else(|e| panic!("{} {side:?}: {e}", m.name));
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for m in shipped().unwrap() {
            assert_eq!(by_name(&m.name).unwrap().name, m.name);
        }
        assert!(by_name("disordered-7").is_ok());
        assert!(by_name("nope").is_err());
    }
}
