use thiserror::Error;

use crate::exactnum::Rat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("pole at parameter: ({base})_{length} vanishes in a denominator")]
    PoleAtParameter { base: Rat, length: i64 },

    #[error("cannot parse rational from {0:?}")]
    ParseRat(String),

    #[error("basis would hold {size} monomials, above the limit of {limit}")]
    CapTooLarge { size: usize, limit: usize },

    #[error("variable name {0:?} appears on both sides of a tensor product")]
    NameCollision(String),

    #[error("unknown variable {0:?}")]
    UnknownVariable(String),

    #[error("image of {monomial} reaches height {found}, declared bound was {declared}")]
    ShiftViolation {
        monomial: String,
        declared: i32,
        found: i32,
    },

    #[error("image of {monomial} leaves the Laurent padding at {term}")]
    FloorViolation { monomial: String, term: String },

    #[error("operator bases do not match: {0}")]
    BasisMismatch(String),

    #[error("operator is not block diagonal for the given charges: {0}")]
    NotBlockDiagonal(String),

    #[error("substitution rule for {var} is not height homogeneous")]
    NotHomogeneous { var: String },

    #[error("column {monomial} is outside the certified window")]
    Uncertified { monomial: String },

    #[error("{0}")]
    NotFiniteDimensional(String),

    #[error("invariant subspace has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("factorized and direct forms differ at {0}")]
    FactorizationMismatch(String),

    #[error("factorization orders disagree at {0}")]
    OrderMismatch(String),

    #[error("output still carries negative powers: {0}")]
    LaurentLeak(String),

    #[error("lowest-weight kernel at level {level} has dimension {dim}")]
    DegenerateDecomposition { level: usize, dim: usize },

    #[error("lowest-weight vector is not mapped to a multiple of itself: {0}")]
    NotLowestWeightStable(String),

    #[error("intertwiner system has only the zero solution")]
    EmptyNullspace,

    #[error("intertwiner system has a {0}-dimensional solution space")]
    MultiDimensional(usize),

    #[error("invalid configuration: {0}")]
    Config(String),
}
