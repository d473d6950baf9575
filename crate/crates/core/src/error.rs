use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error(
        "{subsets} candidate subsets exceed the enumeration cap of {cap}; \
         use the closed-form hyperbox path (centroid_hyperbox / trimmed_trusted_hyperbox) instead"
    )]
    EnumerationCap { subsets: u128, cap: u128 },

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    /// A geometric fact that holds in exact arithmetic was violated beyond tolerance.
    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("unknown aggregator `{name}`; valid names: {}", valid.join(", "))]
    UnknownAggregator {
        name: String,
        valid: &'static [&'static str],
    },

    #[error("unknown attack kind `{0}`; valid kinds: sign_flip, omit, fixed_vector, gaussian_noise, shift")]
    UnknownAttack(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
