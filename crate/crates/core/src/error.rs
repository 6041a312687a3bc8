use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("eigen iteration did not converge after {iterations} iterations (last residuals: {history:?})")]
    NoConvergence {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("instability at column {column}, row {row}, t = {time}: value {value}")]
    Instability {
        column: i64,
        row: usize,
        time: f64,
        value: f64,
    },

    #[error("bracket search failed: {0}")]
    Bracket(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("horizon reached: {0}")]
    Horizon(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
