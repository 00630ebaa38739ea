use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A coordinate was NaN or infinite.
    NonFiniteCoordinate,
    /// `x1 > x2` or `y1 > y2`.
    InvertedBox,
    /// Box has no area (possibly after clamping to the image).
    DegenerateBox,
    /// Image dimensions must be positive.
    EmptyImage,
    InvalidChannels(u8),
    BufferSize { expected: usize, actual: usize },
    UnknownClass(String),
    /// A value fell outside its documented range.
    OutOfRange { field: &'static str, value: f64 },
    InvalidBlurParams(&'static str),
    InvalidInterval { field: &'static str },
    InvalidGazeConfig,
    EmptyScores,
    /// POI aggregation needs exactly one score.
    PoiArity(usize),
    /// Training data contains a single label.
    SingleClass,
    NonFiniteFeature,
    /// Dataset has nothing to evaluate.
    NoData,
    DuplicateImage(String),
    /// A landmark provider returned a face box outside the requested crop.
    FaceOutsideCrop,
    Provider(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteCoordinate => write!(f, "box coordinate is not finite"),
            Error::InvertedBox => write!(f, "box corners are out of order"),
            Error::DegenerateBox => write!(f, "box has zero area"),
            Error::EmptyImage => write!(f, "image dimensions must be positive"),
            Error::InvalidChannels(c) => write!(f, "unsupported channel count {c} (expected 1 or 3)"),
            Error::BufferSize { expected, actual } => {
                write!(f, "pixel buffer holds {actual} bytes, expected {expected}")
            }
            Error::UnknownClass(label) => write!(f, "unknown accessibility class '{label}'"),
            Error::OutOfRange { field, value } => write!(f, "{field} = {value} is out of range"),
            Error::InvalidBlurParams(why) => write!(f, "invalid blur parameters: {why}"),
            Error::InvalidInterval { field } => write!(f, "interval for {field} has lower > upper or is not finite"),
            Error::InvalidGazeConfig => write!(f, "gaze threshold must satisfy 0 < tau_r < straight angle"),
            Error::EmptyScores => write!(f, "cannot aggregate an empty score list"),
            Error::PoiArity(n) => write!(f, "poi aggregation expects exactly one score, got {n}"),
            Error::SingleClass => write!(f, "training set must contain both labels"),
            Error::NonFiniteFeature => write!(f, "training feature is not finite"),
            Error::NoData => write!(f, "nothing to evaluate"),
            Error::DuplicateImage(path) => write!(f, "image '{path}' appears more than once in the manifest"),
            Error::FaceOutsideCrop => write!(f, "landmark provider returned a face box outside the crop"),
            Error::Provider(msg) => write!(f, "provider error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
