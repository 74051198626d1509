use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong inside the core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input violates a documented invariant (bad count, bad config, ...).
    Validation(String),
    /// Nothing survived network filtering.
    EmptyNetwork,
    /// An operation that needs a connected graph got a disconnected one.
    Disconnected { components: usize },
    /// One or more prime words are not nodes of the network.
    MissingPrime(Vec<String>),
    /// A word that must be a node of the network is not.
    MissingNode(String),
    /// Every target of a set (or an emotion) is absent from the network.
    NoTargets(String),
    /// Activation matrix is in the wrong normalization state.
    Normalization(String),
    /// Wilcoxon input with no non-zero differences.
    DegenerateSample,
    /// Not enough observations for the requested fit.
    TooFewObservations { needed: usize, got: usize },
    /// Design matrix columns are linearly dependent.
    RankDeficient { column: String },
    /// Contrast covariance in a Wald test is singular.
    DegenerateContrast,
    /// Mindset stream requested with prime equal to target.
    DegenerateStream,
    /// Generic bad argument (empty input, out-of-range index, ...).
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(msg) => write!(f, "validation error: {msg}"),
            Error::EmptyNetwork => f.write_str("empty network after filtering"),
            Error::Disconnected { components } => {
                write!(f, "network is disconnected ({components} components)")
            }
            Error::MissingPrime(words) => write!(f, "missing prime: {}", words.join(", ")),
            Error::MissingNode(word) => write!(f, "word not in network: {word}"),
            Error::NoTargets(label) => write!(f, "no targets of '{label}' are in the network"),
            Error::Normalization(msg) => write!(f, "normalization: {msg}"),
            Error::DegenerateSample => f.write_str("degenerate sample: all differences are zero"),
            Error::TooFewObservations { needed, got } => {
                write!(f, "too few observations: need more than {needed}, got {got}")
            }
            Error::RankDeficient { column } => {
                write!(f, "rank-deficient design: column '{column}' is collinear with earlier columns")
            }
            Error::DegenerateContrast => f.write_str("degenerate contrast: singular contrast covariance"),
            Error::DegenerateStream => f.write_str("degenerate stream: prime equals target"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}
