//! Periodic cell problems: the corrector, the principal eigenvalue `kappa(lambda)`,
//! the minimal linearized speed and the exponential comparison profiles.

mod corrector;
mod eigen;
mod profile;
mod speed;

pub use corrector::{
    cell_grid, corrector_residual, solve_corrector, solve_corrector_on, stencil_matrix,
    CellFunction,
};
pub use eigen::{
    eigen_operator, kappa_shape_check, principal_eigen, EigenSolution, KappaShapeReport,
};
pub use profile::{build_profile, ExpProfile, ProfileVariant};
pub use speed::{min_speed, zeta_zero, SpeedSolution};
