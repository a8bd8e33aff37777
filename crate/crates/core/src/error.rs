use core::fmt;

/// Errors produced by grid construction, field validation, and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A grid needs at least one spatial axis.
    EmptySpatialDims,
    /// More spatial axes than the supported maximum of 3.
    TooManySpatialDims(usize),
    /// Every spatial dimension must have at least one voxel.
    ZeroSpatialDim,
    /// The cyclic axis needs at least two bins.
    TooFewThetaBins(usize),
    /// A value buffer does not match the grid's node/voxel count.
    LengthMismatch { expected: usize, got: usize },
    /// Two fields that must share a grid do not.
    GridMismatch,
    /// A field or parameter contains NaN or infinity.
    NonFinite,
    /// A capacity (smoothness) field has a negative entry.
    NegativeCapacity,
    /// Data-term distance power must be 1 or 2.
    InvalidDataPower(f64),
    /// Data-term scale must be positive.
    NonPositiveScale(f64),
    /// An observed angle lies outside [-pi, pi).
    AngleOutOfRange(f64),
    /// An observation weight is negative.
    NegativeWeight(f64),
    /// An RGB channel value lies outside [0, 1].
    ChannelOutOfRange(f64),
    /// Bregman reference has a zero entry where the argument carries mass.
    ZeroBregmanReference,
    /// A labeling density has a negative entry where it must be >= 0.
    NegativeDensity(f64),
    /// A solver configuration parameter is out of range.
    BadConfig(&'static str),
    /// A discrete labeling refers to a bin index outside the grid.
    InvalidLabel { label: usize, n_theta: usize },
    /// The exhaustive oracle would enumerate too many labelings.
    InstanceTooLarge,
    /// The chain oracle only handles a single spatial axis.
    NotAChain,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySpatialDims => write!(f, "grid needs at least one spatial axis"),
            Error::TooManySpatialDims(n) => {
                write!(f, "grid supports at most 3 spatial axes, got {n}")
            }
            Error::ZeroSpatialDim => write!(f, "spatial dimensions must be at least 1"),
            Error::TooFewThetaBins(n) => write!(f, "cyclic axis needs at least 2 bins, got {n}"),
            Error::LengthMismatch { expected, got } => {
                write!(
                    f,
                    "value buffer length {got} does not match grid size {expected}"
                )
            }
            Error::GridMismatch => write!(f, "fields live on different grids"),
            Error::NonFinite => write!(f, "value is NaN or infinite"),
            Error::NegativeCapacity => write!(f, "capacity field has a negative entry"),
            Error::InvalidDataPower(p) => write!(f, "data-term power must be 1 or 2, got {p}"),
            Error::NonPositiveScale(s) => write!(f, "data-term scale must be positive, got {s}"),
            Error::AngleOutOfRange(a) => write!(f, "angle {a} outside [-pi, pi)"),
            Error::NegativeWeight(w) => write!(f, "observation weight {w} is negative"),
            Error::ChannelOutOfRange(v) => write!(f, "colour channel {v} outside [0, 1]"),
            Error::ZeroBregmanReference => {
                write!(
                    f,
                    "Bregman reference is zero where the argument carries mass"
                )
            }
            Error::NegativeDensity(v) => write!(f, "labeling density has negative entry {v}"),
            Error::BadConfig(what) => write!(f, "bad solver config: {what}"),
            Error::InvalidLabel { label, n_theta } => {
                write!(f, "label {label} outside the {n_theta} theta bins")
            }
            Error::InstanceTooLarge => {
                write!(f, "instance exceeds the exhaustive enumeration bound")
            }
            Error::NotAChain => write!(f, "oracle chain solver needs a 1-D spatial grid"),
        }
    }
}

impl core::error::Error for Error {}
