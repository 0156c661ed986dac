use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("group functions or representations live on different groups")]
    GroupMismatch,
    #[error("exponent mismatch: {0} vs {1}")]
    ExponentMismatch(f64, f64),
    #[error("p must lie in (1, inf), got {0}")]
    InvalidExponent(f64),
    #[error("vectors or operators live on different spaces")]
    SpaceMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("zero vector generates no cyclic subspace")]
    ZeroVector,
    #[error("search sphere of real dimension {0} exceeds the brute-force limit {1}")]
    DimensionTooLarge(usize, usize),
    #[error("group is not abelian")]
    NotAbelian,
    #[error("no candidate representation realizes the function as a coefficient")]
    Infeasible,
    #[error("record is missing a witness: {0}")]
    WitnessMissing(String),
    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
