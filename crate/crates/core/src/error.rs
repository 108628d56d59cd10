use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("lattice mismatch: {0}")]
    ShapeMismatch(String),

    /// A product was requested for fields whose band would alias on the lattice.
    #[error("aliasing: band extent {extent} exceeds product-safe limit {limit}")]
    Aliasing { extent: i64, limit: i64 },

    #[error("level {requested} is not admissible on this lattice (max admissible level is {max})")]
    InadmissibleLevel { requested: i64, max: u32 },

    /// Energy of a field that the requested wavelet levels cannot represent.
    #[error("field has {relative:.3e} relative energy outside the representable band")]
    Leakage { relative: f64 },

    #[error("invalid transition ramp: {0}")]
    InvalidRamp(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The bound shape admits no finite constant on the ensemble.
    #[error("certification failure: {0}")]
    Certification(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
