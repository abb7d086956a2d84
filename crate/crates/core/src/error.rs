use crate::lattice::FiniteSet;

/// Errors shared by the lattice, function, space, and operator layers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("zero-dimensional elements are not supported")]
    ZeroDimension,

    #[error("a finite set must contain at least one element")]
    EmptySet,

    #[error("closure exceeded the cap of {cap} distinct elements")]
    ClosureTruncated { partial: FiniteSet, cap: usize },

    #[error("expected a positive element")]
    NotPositive,

    #[error("argument {0} lies outside the domain [0, 1]")]
    OutOfDomain(String),

    #[error("invalid breakpoints: {0}")]
    InvalidBreakpoints(String),

    #[error("invalid rational literal `{0}`")]
    InvalidRational(String),

    #[error("invalid space tag: {0}")]
    InvalidTag(String),

    #[error("element does not conform to tag {0}")]
    TagMismatch(String),

    #[error("product tags carry no single norm; use is_bounded_in with a neighborhood spec")]
    ProductHasNoNorm,

    #[error("neighborhood spec does not match the space tag: {0}")]
    InvalidNeighborhood(String),

    #[error("the family does not provide a computable bound function")]
    FamilyNotComputable,

    #[error("operator shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sign-pattern oracle limited to {max} input dimensions, got {got}")]
    OracleGuard { max: usize, got: usize },

    #[error("induced norm is only defined for matching SeqL1 or SeqLInf tag pairs, got {0}")]
    UnsupportedTagPair(String),

    #[error("projection index {n} out of range 1..={dim}")]
    ProjectionOutOfRange { n: usize, dim: usize },

    #[error("order claim violated at index {index}: {detail}")]
    OrderClaimViolated { index: u32, detail: String },

    #[error("family precondition violated: {0}")]
    FamilyPrecondition(String),

    #[error("both inputs are zero")]
    BothZero,

    #[error("no strictly positive coordinate available for the evaluation functional")]
    NoPositiveCoordinate,

    #[error("probe `{probe}` parameter error at {path}: {detail}")]
    ProbeParams {
        probe: String,
        path: String,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
