use serde::{Deserialize, Serialize};

use super::corrector::CellFunction;
use super::eigen::EigenSolution;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProfileVariant {
    /// `[inf gamma_zeta]^{-1} e^{-lambda_zeta s} gamma_zeta`.
    Psi,
    /// Built on `lambda_zeta / 2`, dominating `e^{lambda_zeta s/2} Psi`; carries the `lambda_zeta` data.
    Phi(Box<EigenSolution>),
    /// Built on `mu`, with the factor-2 prefactor; carries the `lambda_zeta` data.
    Mu(Box<EigenSolution>),
}

/// `Psi(s, x) = scale * e^{-lambda s} * gamma(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpProfile {
    pub lambda: f64,
    pub gamma: CellFunction,
    pub scale: f64,
}

impl ExpProfile {
    /// Value at offset `s` and grid node (global column `g`, row `j`).
    #[inline]
    pub fn eval(&self, s: f64, g: i64, j: usize) -> f64 {
        self.scale * (-self.lambda * s).exp() * self.gamma.at(g, j)
    }

    /// `scale * gamma` at a grid node.
    #[inline]
    pub fn weight(&self, g: i64, j: usize) -> f64 {
        self.scale * self.gamma.at(g, j)
    }

    pub fn sup_weight(&self) -> f64 {
        self.scale * self.gamma.max()
    }

    pub fn inf_weight(&self) -> f64 {
        self.scale * self.gamma.min()
    }
}

/// Builds the exponential comparison profile of `eig` with the prefactor of `variant`.
pub fn build_profile(eig: &EigenSolution, variant: &ProfileVariant) -> Result<ExpProfile> {
    if !(eig.lambda > 0.0) {
        return Err(Error::Domain("exponential profiles need lambda > 0".into()));
    }
    let inf = eig.gamma.min();
    if !(inf > 0.0) {
        return Err(Error::Precondition("eigenfunction is not positive".into()));
    }
    let scale = match variant {
        ProfileVariant::Psi => 1.0 / inf,
        ProfileVariant::Phi(z) | ProfileVariant::Mu(z) => {
            if z.gamma.n1 != eig.gamma.n1 || z.gamma.n2 != eig.gamma.n2 {
                return Err(Error::Precondition(
                    "eigen data on different cell grids".into(),
                ));
            }
            let k = if matches!(variant, ProfileVariant::Mu(_)) {
                2.0
            } else {
                1.0
            };
            k * z.gamma.max() / (z.gamma.min() * inf)
        }
    };
    let p = ExpProfile {
        lambda: eig.lambda,
        gamma: eig.gamma.clone(),
        scale,
    };
    let nodes = (0..p.gamma.n1 as i64).flat_map(|g| (0..p.gamma.n2).map(move |j| (g, j)));
    match variant {
        ProfileVariant::Psi => {
            if let Some((g, j)) = nodes.clone().find(|&(g, j)| p.eval(0.0, g, j) < 1.0) {
                return Err(Error::Precondition(format!(
                    "Psi(0) < 1 at node ({g}, {j})"
                )));
            }
        }
        ProfileVariant::Phi(z) | ProfileVariant::Mu(z) => {
            let psi = ExpProfile {
                lambda: z.lambda,
                gamma: z.gamma.clone(),
                scale: 1.0 / z.gamma.min(),
            };
            for k in 0..=100 {
                let s = -5.0 + 0.1 * k as f64;
                for (g, j) in nodes.clone() {
                    let bound = match variant {
                        ProfileVariant::Mu(_) => (-eig.lambda * s).exp(),
                        _ => (0.5 * z.lambda * s).exp() * psi.eval(s, g, j),
                    };
                    if p.eval(s, g, j) < bound * (1.0 - 1e-12) {
                        return Err(Error::Precondition(format!(
                            "domination fails at s = {s}, node ({g}, {j})"
                        )));
                    }
                }
            }
        }
    }
    Ok(p)
}
