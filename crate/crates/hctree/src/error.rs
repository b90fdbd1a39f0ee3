//! Error type shared by every module of the crate.
//!
//! The numerical routines themselves are total on their documented domains;
//! errors arise from invalid constructions (non-positive activities, malformed
//! kernels, mismatched dimensions) or from resource guards (configuration
//! tables too large to enumerate).

/// Crate-wide error enumeration.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An activity sequence must have at least one explicit head entry.
    #[error("activity head must contain at least one entry")]
    EmptyHead,

    /// Activities are strictly positive finite reals.
    #[error("activity entry {index} is {value}; entries must be finite and > 0")]
    InvalidActivity { index: usize, value: f64 },

    /// The geometric tail ratio must lie in [0, 1).
    #[error("tail ratio {value} outside [0, 1)")]
    InvalidTailRatio { value: f64 },

    /// Truncations keep at least one coordinate.
    #[error("truncation length must be at least 1 (got {n})")]
    InvalidTruncation { n: usize },

    /// Malformed activity configuration text.
    #[error("config parse error at line {line}: {message}")]
    Config { line: usize, message: String },

    /// State vectors live in the strictly positive cone.
    #[error("state entry {index} is {value}; entries must be finite and > 0")]
    NonPositiveEntry { index: usize, value: f64 },

    /// A state vector is longer than the activity sequence's support.
    #[error("state dimension {dim} exceeds the activity support {support} (zero tail ratio)")]
    DimensionMismatch { dim: usize, support: usize },

    /// Custom adjacency matrices must be rectangular 0/1 with an all-ones first row.
    #[error("invalid adjacency kernel: {reason}")]
    InvalidKernel { reason: String },

    /// Fixed-point iteration needs a positive convergence tolerance.
    #[error("iteration tolerance must be positive (got {value})")]
    InvalidTolerance { value: f64 },

    /// Contraction thresholds are defined for branching order k ≥ 2.
    #[error("branching order must be at least 2 (got {k})")]
    InvalidBranchingOrder { k: u32 },

    /// A cubic needs a nonzero leading coefficient.
    #[error("degenerate cubic: leading coefficient is {c3}")]
    DegenerateCubic { c3: f64 },

    /// Closed-form fixed points need activity mass beyond the first coordinate.
    #[error("first activity {lambda1} must be strictly below the total mass {norm}")]
    NoMassBeyondFirst { lambda1: f64, norm: f64 },

    /// The driving cubics are expected to have exactly one positive root.
    #[error("expected exactly one positive root, found {found}")]
    NoUniquePositiveRoot { found: usize },

    /// Reduced parameters are strictly positive.
    #[error("reduced parameters must be positive (L = {l}, lambda1 = {lambda1})")]
    InvalidReducedParams { l: f64, lambda1: f64 },

    /// Scalar maps of the reduced analysis take strictly positive arguments.
    #[error("argument {value} must be strictly positive")]
    NonPositiveArgument { value: f64 },

    /// Enumeration grids below the supported floor are rejected.
    #[error("enumeration grid must be at least 100 (got {grid})")]
    GridTooCoarse { grid: usize },

    /// Expanding a reduced solution requires matching block masses.
    #[error("activity {which} mass {actual} does not match the reduced parameter {expected}")]
    BlockMassMismatch {
        which: &'static str,
        expected: f64,
        actual: f64,
    },

    /// Boundary laws are built from verified fixed points only.
    #[error("input is not a fixed point: residual {residual:e} exceeds tolerance {tol:e}")]
    NotAFixedPoint { residual: f64, tol: f64 },

    /// Stored probability tables are capped.
    #[error("configuration table would hold {states} entries, above the cap {cap}")]
    TableTooLarge { states: u128, cap: u128 },

    /// Streamed enumerations are capped as well (much higher than stored tables).
    #[error("streamed enumeration of {states} configurations is above the cap {cap}")]
    EnumerationTooLarge { states: u128, cap: u128 },

    /// Marginal regions must contain the ball's root vertex.
    #[error("region must contain the root vertex")]
    RegionMustContainRoot,

    /// Marginal regions are connected: every non-root member's parent is a member.
    #[error("region is disconnected: vertex {vertex} is a member but its parent is not")]
    RegionDisconnected { vertex: u64 },

    /// The region and its outer boundary must fit inside the enumeration ball.
    #[error("vertex {vertex} sits on the ball surface; its children fall outside the ball")]
    RegionExceedsBall { vertex: u64 },

    /// Nested-consistency checks need one region inside the other.
    #[error("regions are not nested: vertex {vertex} of the small region is missing from the big one")]
    RegionsNotNested { vertex: u64 },

    /// Spin spaces contain the vacuum plus at least one occupied value.
    #[error("spin count {spins} too small; need the vacuum plus at least one occupied spin")]
    TooFewSpins { spins: usize },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
