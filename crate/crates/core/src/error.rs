use thiserror::Error;

/// Errors raised by the divergence engine, the filtration builders and the
/// persistence machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coordinate {index} = {value} lies outside the {domain} domain")]
    DomainViolation {
        index: usize,
        value: f64,
        domain: &'static str,
    },

    #[error("line {line}: coordinate {index} = {value} lies outside the {domain} domain")]
    RowDomainViolation {
        line: usize,
        index: usize,
        value: f64,
        domain: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("points are affinely dependent (singular value ratio {ratio:e})")]
    Degenerate { ratio: f64 },

    #[error("circumball solver stopped after {iterations} iterations with gradient norm {gradient_norm:e}")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("line search could not keep the circumcenter inside the domain")]
    DomainEscape,

    #[error("the simplex has no dual circumball inside the domain")]
    Unbounded,

    #[error("general position violated: point {point} is within {gap:e} of the circumball boundary of {simplex:?}")]
    GeneralPositionViolation {
        point: usize,
        simplex: Vec<u32>,
        gap: f64,
    },

    #[error("interval partition failed: {0}")]
    PartitionFailure(String),

    #[error("face {face:?} has radius {face_radius} above its coface {coface:?} with radius {coface_radius}")]
    MonotonicityViolation {
        face: Vec<u32>,
        face_radius: f64,
        coface: Vec<u32>,
        coface_radius: f64,
    },

    #[error("dimension {dim}: {left} vs {right} essential classes, bottleneck distance is infinite")]
    InfinityMismatch { dim: usize, left: usize, right: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("emptiness linear program failed: {0}")]
    LinearProgram(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DomainViolation { .. } | Error::RowDomainViolation { .. } => "DomainViolation",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Degenerate { .. } => "Degenerate",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DomainEscape => "DomainEscape",
            Error::Unbounded => "Unbounded",
            Error::GeneralPositionViolation { .. } => "GeneralPositionViolation",
            Error::PartitionFailure(_) => "PartitionFailure",
            Error::MonotonicityViolation { .. } => "MonotonicityViolation",
            Error::InfinityMismatch { .. } => "InfinityMismatch",
            Error::Parse { .. } => "ParseError",
            Error::LinearProgram(_) => "LinearProgramFailure",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
