use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("non-finite quotient")]
    NonFiniteQuotient,
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("inner brane unsupported")]
    InnerBrane,
    #[error("not a 2-cone of the fan: {0}")]
    NotACone(String),
    #[error("pole at restriction locus: {0}")]
    PoleAtRestriction(String),
    #[error("non-convergent pairing: {0}")]
    NonConvergentPairing(String),
    #[error("grading not positive: enumeration infinite")]
    GradingNotPositive,
    #[error("nef cone not simplicial")]
    NefNotSimplicial,
    #[error("nef basis conditions unsatisfiable automatically; supply an override")]
    NefBasis,
    #[error("unsupported Hurwitz-Hodge vertex (rank > 0)")]
    UnsupportedVertex,
    #[error("non-integer cancellation offset")]
    NonIntegerOffset,
    #[error("series shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("brane required")]
    BraneRequired,
}

pub type Result<T> = std::result::Result<T, Error>;
