use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("out of range: {0}")]
    Range(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("detuning is zero; the loop radius is singular")]
    SingularDetuning,

    #[error(
        "truncation guard: leaked population {leaked:.3e} above level {level} exceeds {threshold:.1e}; \
         increase the fock cutoff (currently {n_max})"
    )]
    Truncation {
        leaked: f64,
        threshold: f64,
        level: usize,
        n_max: usize,
    },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("run refused by size guard: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that come out of the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Integration(_) | Error::SingularDetuning | Error::Domain(_)
        )
    }
}
