use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QstError {
    #[error("chain needs at least {required} sites, got {got}")]
    TooFewSites { required: usize, got: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("site {site} is outside the chain 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bi-localized pair is degenerate (gap {0:e}); transfer period unresolvable")]
    DegenerateGap(f64),

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("non-physical state: {0}")]
    NonPhysical(String),

    #[error("full-space oracle limited to {max} sites, got {n_sites}")]
    TooLarge { n_sites: usize, max: usize },

    #[error("integration did not converge: {0}")]
    NonConvergent(String),

    #[error("eigensolver failed to converge for eigenvalue {0}")]
    EigenNoConvergence(usize),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, QstError>;
