use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("enumeration guard: {sites} unmasked sites exceed the limit of {limit}")]
    EnumerationGuard { sites: u32, limit: u32 },

    #[error("unknown cluster id {0}")]
    UnknownCluster(u32),

    #[error("point lies on the loop")]
    PointOnLoop,

    #[error("empty loop ensemble")]
    EmptyEnsemble,

    #[error("Möbius map is singular (AD - BC = 0)")]
    SingularMap,

    #[error("point hits the pole of the Möbius map")]
    PoleHit,

    #[error("power-law fit needs at least {needed} points with positive means, got {got}")]
    FitUnderdetermined { needed: usize, got: usize },

    #[error("nonpositive mean in power-law fit at scale {scale}")]
    NonPositiveMean { scale: f64 },

    #[error("degenerate triangle")]
    DegenerateTriangle,

    #[error("invalid event specification: {0}")]
    InvalidEvent(String),

    #[error("scale hierarchy violated: {0}")]
    ScaleHierarchy(String),

    #[error("rejection acceptance rate {rate:.2e} below minimum {min:.2e}")]
    RejectionRateTooLow { rate: f64, min: f64 },

    #[error("bad dump format: {0}")]
    BadDump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
