//! Reaction profiles, inhomogeneous reaction fields, periodic coefficients and the
//! hypothesis checks that gate every experiment.

mod coeffs;
mod disorder;
mod field;
mod hypotheses;
mod majorize;
mod profile;

pub use coeffs::CoefficientField;
pub use disorder::{
    cell_amplitude, cell_amplitudes, sample_random_reaction, sample_random_reaction_from,
};
pub use field::{alpha_f, eval_reaction, Interpolation, ReactionField};
pub use hypotheses::{check_hypotheses, Clause, HypothesisReport};
pub use majorize::{
    check_majorizes, default_majorant, theta_bounds, MajorizationFailure, MajorizationWitness,
};
pub use profile::{union_grid, PiecewiseLinear, ReactionKind, ReactionProfile};

pub mod clauses {
    pub use super::hypotheses::{
        ELLIPTIC, ENDPOINTS, INCOMPRESSIBLE, LIPSCHITZ, MEAN_ZERO, PROFILE_ORDER, SANDWICH,
    };
}
