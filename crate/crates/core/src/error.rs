use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Every message starts with the variant name so that command-line
/// diagnostics and downstream bindings can match on error identity.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("DegenerateWindow: window end {t1} must be greater than start {t0}")]
    DegenerateWindow { t0: u64, t1: u64 },

    #[error("OutOfWindow: timestamp {t} outside [{t0}, {t1}]")]
    OutOfWindow { t: u64, t0: u64, t1: u64 },

    #[error("InvalidGeometry: sensor size {width}x{height} must be at least 1x1")]
    InvalidGeometry { width: usize, height: usize },

    #[error("InvalidBins: temporal bin count must be at least 1")]
    InvalidBins,

    #[error("InvalidTau: time constant must be positive and finite, got {0}")]
    InvalidTau(f64),

    #[error("InvalidRange: lookup range [{u_min}, {u_max}] is empty or not finite")]
    InvalidRange { u_min: f64, u_max: f64 },

    #[error("InvalidResolution: lookup table needs at least 2 samples, got {0}")]
    InvalidResolution(usize),

    #[error("InvalidKernel: {0}")]
    InvalidKernel(String),

    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),

    #[error("NonFiniteWeight: {0}")]
    NonFiniteWeight(String),

    #[error("GeometryMismatch: config is {cfg_w}x{cfg_h}, window is {win_w}x{win_h}")]
    GeometryMismatch {
        cfg_w: usize,
        cfg_h: usize,
        win_w: usize,
        win_h: usize,
    },

    #[error("OutOfBounds: event {index} at (x={x}, y={y}, t={t}) lies outside the grid or window")]
    OutOfBounds {
        index: usize,
        x: u16,
        y: u16,
        t: u64,
    },

    #[error("UnknownAxis: {0}")]
    UnknownAxis(String),

    #[error("ParseError: {message} (at byte {offset})")]
    Parse { offset: usize, message: String },

    #[error("EmptyStream: no events in stream")]
    EmptyStream,

    #[error(
        "TruncatedRecord: {trailing} trailing bytes at offset {offset} do not form a full record"
    )]
    TruncatedRecord { offset: usize, trailing: usize },

    #[error("RangeOverflow: {0}")]
    RangeOverflow(String),

    #[error("UnsupportedDtype: {0}")]
    UnsupportedDtype(String),

    #[error("UnsupportedOrder: fortran_order arrays are not supported")]
    UnsupportedOrder,

    #[error("UnknownFormat: {0}")]
    UnknownFormat(String),

    #[error("InvalidSequence: {0}")]
    InvalidSequence(String),

    #[error("IoError: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }

    /// The variant name, as it appears at the start of the message.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateWindow { .. } => "DegenerateWindow",
            Error::OutOfWindow { .. } => "OutOfWindow",
            Error::InvalidGeometry { .. } => "InvalidGeometry",
            Error::InvalidBins => "InvalidBins",
            Error::InvalidTau(_) => "InvalidTau",
            Error::InvalidRange { .. } => "InvalidRange",
            Error::InvalidResolution(_) => "InvalidResolution",
            Error::InvalidKernel(_) => "InvalidKernel",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::NonFiniteWeight(_) => "NonFiniteWeight",
            Error::GeometryMismatch { .. } => "GeometryMismatch",
            Error::OutOfBounds { .. } => "OutOfBounds",
            Error::UnknownAxis(_) => "UnknownAxis",
            Error::Parse { .. } => "ParseError",
            Error::EmptyStream => "EmptyStream",
            Error::TruncatedRecord { .. } => "TruncatedRecord",
            Error::RangeOverflow(_) => "RangeOverflow",
            Error::UnsupportedDtype(_) => "UnsupportedDtype",
            Error::UnsupportedOrder => "UnsupportedOrder",
            Error::UnknownFormat(_) => "UnknownFormat",
            Error::InvalidSequence(_) => "InvalidSequence",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
