use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: BigInt },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("ray {ray} is not a primitive integer vector")]
    NonPrimitiveRay { ray: usize },

    #[error("fan is not smooth: cone {cone:?} has determinant {det}")]
    SmoothnessViolation { cone: Vec<usize>, det: BigInt },

    #[error("fan is not complete: {0}")]
    CompletenessViolation(String),

    #[error("invalid fan data: {0}")]
    InvalidFan(String),

    #[error("vector is not covered by any maximal cone")]
    NotCovered,

    #[error("height vector has {found} entries, fan has {expected} rays")]
    HeightLength { expected: usize, found: usize },

    #[error("support function is not convex: primitive collection {collection:?} has slack {slack}")]
    NotConvex { collection: Vec<usize>, slack: BigInt },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("canonical parameter {name} = {value} is negative")]
    NegativeCanonicalParameter { name: &'static str, value: BigInt },

    #[error("height vector is not in canonical form: {0}")]
    NonCanonicalHeight(String),

    #[error("coordinate does not fit in a machine integer during enumeration")]
    CoordinateOverflow,

    #[error("point {alpha:?} is not a lattice point of the simplex of size {scale}")]
    OutsideSimplex { alpha: Vec<BigInt>, scale: BigInt },

    #[error("reduced fiber heights fail convexity on the reduced fan ({0})")]
    ConvexityPostcheckFailed(String),

    #[error("no lattice point in the fiber intersection polytope")]
    NoLatticePoint,

    #[error("point is not a lattice point of P + Q")]
    PointNotInSum,

    #[error("internal invariant breached at stage {stage}: {detail}")]
    InvariantBreach { stage: &'static str, detail: String },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("search would run {estimated} instances, above the cap of {cap}")]
    ResourceCap { estimated: u64, cap: u64 },
}

impl Error {
    pub(crate) fn breach(stage: &'static str, detail: impl Into<String>) -> Self {
        Error::InvariantBreach {
            stage,
            detail: detail.into(),
        }
    }
}
