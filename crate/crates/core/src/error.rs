use thiserror::Error;

use crate::model::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("series did not converge: {0}")]
    NonConvergent(String),

    #[error("quadrature did not converge on [{lo}, {hi}] (estimated error {error:e})")]
    Quadrature { lo: f64, hi: f64, error: f64 },

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("steady state is not unique (kernel dimension {0})")]
    DegenerateKernel(usize),

    #[error("integration became unstable: {0}")]
    Unstable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Config(#[from] ConfigError),
}
