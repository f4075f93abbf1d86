//! Error type shared across the crate.

use std::fmt;

/// Everything that can go wrong while computing with moments.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A pixel location or intensity is NaN or infinite.
    NonFinitePixel { index: usize },
    /// A pixel intensity is negative.
    NegativeIntensity { index: usize, intensity: f64 },
    /// A moment overflowed to a non-finite value; usually a sign that the
    /// coordinates need pre-normalization before going to high order.
    NonFiniteMoment { j: usize, l: usize },
    /// A requested order exceeds what the source table or triangle holds.
    OrderExceedsTable { requested: usize, available: usize },
    /// A requested order exceeds the configured cap.
    OrderAboveCap { order: usize, cap: usize },
    /// Binomial coefficient arguments out of range (`k > n`).
    BinomialRange { n: u64, k: u64 },
    /// Binomial coefficient does not fit the integer width.
    BinomialOverflow { n: u64, k: u64 },
    /// An operation that needs pixels got an empty cloud.
    EmptyCloud,
    /// Total intensity is zero, so there is no centroid to normalize around.
    ZeroTotalIntensity,
    /// Locations passed to a solver are not pairwise distinct.
    DuplicateLocations,
    /// A zero location is not allowed for column solves with `l >= 1`.
    ZeroLocation { index: usize },
    /// Two collections that must have equal lengths do not.
    LengthMismatch { expected: usize, found: usize },
    /// A linear system that should be invertible is numerically singular.
    SingularSystem { context: &'static str },
    /// Condition estimate above the configured refusal bound.
    IllConditioned { condition: f64, bound: f64 },
    /// Not enough moment data for the requested recovery.
    InsufficientOrder { needed: usize, available: usize },
    /// The estimated support contradicts the solvability of the system.
    SupportInconsistency { support: usize },
    /// The simultaneous root iteration did not converge.
    RootFindingStalled { iterations: usize, residual: f64 },
    /// Projection angles alias each other modulo pi.
    NonGenericAngles,
    /// A moment sample carries a different order than the row being solved.
    SampleOrderMismatch { expected: usize, found: usize },
    /// A value that must be real carries too large an imaginary part.
    ImaginaryResidue { residue: f64, tolerance: f64 },
    /// Triangle entries that must encode conjugate moments disagree.
    InconsistentTriangle { row: usize, entry: usize },
    /// Reconstruction needs a raw (non-invariantized) triangle.
    FrameTagsPresent,
    /// `mu_{1,1} <= 0`: the scaling frame does not exist.
    DegenerateScale,
    /// `mu_{0,0} <= 0`: there is no image mass to work with.
    EmptyImage,
    /// A table expected to be centralized has a large first moment.
    NotCentralized { magnitude: f64 },
    /// A moment outside the stored grid was requested.
    MomentUnavailable { j: usize, l: usize },
    /// A scale factor that must be positive is not.
    NonPositiveScale { value: f64 },
    /// A direction vector with zero length has no angle.
    ZeroVector,
    /// Malformed JSON payload.
    Json { message: String },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteMoment { .. }
                | Error::SingularSystem { .. }
                | Error::IllConditioned { .. }
                | Error::SupportInconsistency { .. }
                | Error::RootFindingStalled { .. }
                | Error::ImaginaryResidue { .. }
                | Error::InconsistentTriangle { .. }
                | Error::DegenerateScale
                | Error::NotCentralized { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinitePixel { index } => {
                write!(f, "pixel {index} has a non-finite location or intensity")
            }
            Error::NegativeIntensity { index, intensity } => {
                write!(f, "pixel {index} has negative intensity {intensity}")
            }
            Error::NonFiniteMoment { j, l } => write!(
                f,
                "moment ({j},{l}) overflowed to a non-finite value; normalize coordinates first"
            ),
            Error::OrderExceedsTable {
                requested,
                available,
            } => write!(f, "order {requested} exceeds available order {available}"),
            Error::OrderAboveCap { order, cap } => {
                write!(f, "order {order} exceeds the configured cap {cap}")
            }
            Error::BinomialRange { n, k } => write!(f, "binomial ({n} choose {k}) out of range"),
            Error::BinomialOverflow { n, k } => {
                write!(f, "binomial ({n} choose {k}) overflows the integer width")
            }
            Error::EmptyCloud => write!(f, "operation needs a non-empty pixel cloud"),
            Error::ZeroTotalIntensity => write!(f, "total intensity is zero"),
            Error::DuplicateLocations => write!(f, "pixel locations are not pairwise distinct"),
            Error::ZeroLocation { index } => {
                write!(f, "location {index} is zero; not allowed for column l >= 1")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::SingularSystem { context } => write!(f, "singular system in {context}"),
            Error::IllConditioned { condition, bound } => write!(
                f,
                "condition estimate {condition:.3e} above refusal bound {bound:.3e}"
            ),
            Error::InsufficientOrder { needed, available } => write!(
                f,
                "insufficient moment order: need {needed}, have {available}"
            ),
            Error::SupportInconsistency { support } => write!(
                f,
                "moment matrix is singular despite estimated support {support}"
            ),
            Error::RootFindingStalled {
                iterations,
                residual,
            } => write!(
                f,
                "root finder stalled after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::NonGenericAngles => {
                write!(f, "projection angles alias each other modulo pi")
            }
            Error::SampleOrderMismatch { expected, found } => {
                write!(
                    f,
                    "sample has moment order {found}, row solve needs {expected}"
                )
            }
            Error::ImaginaryResidue { residue, tolerance } => write!(
                f,
                "imaginary residue {residue:.3e} exceeds tolerance {tolerance:.3e}"
            ),
            Error::InconsistentTriangle { row, entry } => write!(
                f,
                "triangle row {row} entry {entry} disagrees with its conjugate partner"
            ),
            Error::FrameTagsPresent => {
                write!(
                    f,
                    "triangle carries frame tags; reconstruction needs raw moments"
                )
            }
            Error::DegenerateScale => write!(f, "mu_(1,1) <= 0: scaling frame is degenerate"),
            Error::EmptyImage => write!(f, "mu_(0,0) <= 0: image carries no mass"),
            Error::NotCentralized { magnitude } => {
                write!(f, "table is not centralized (|mu_(1,0)| = {magnitude:.3e})")
            }
            Error::MomentUnavailable { j, l } => {
                write!(f, "moment ({j},{l}) is not available at this order")
            }
            Error::NonPositiveScale { value } => {
                write!(f, "scale factor must be positive, got {value}")
            }
            Error::ZeroVector => write!(f, "zero vector has no direction"),
            Error::Json { message } => write!(f, "malformed JSON: {message}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
