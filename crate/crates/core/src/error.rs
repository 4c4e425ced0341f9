use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("DimensionMismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("NonFiniteInput: value at index {index} is not finite")]
    NonFiniteInput { index: usize },

    #[error("InvalidShape: {0}")]
    InvalidShape(String),

    #[error("NegativeValue: GE value at index {index} is negative")]
    NegativeValue { index: usize },

    #[error("InvalidBlock: block {h}x{w} must be at least 1x1")]
    InvalidBlock { h: usize, w: usize },

    #[error("BlockTooLarge: block {block_h}x{block_w} exceeds map {map_h}x{map_w}")]
    BlockTooLarge {
        block_h: usize,
        block_w: usize,
        map_h: usize,
        map_w: usize,
    },

    #[error("InvalidSeries: {0}")]
    InvalidSeries(String),

    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),

    #[error("InvalidWeights: {0}")]
    InvalidWeights(String),

    #[error("SingleClass: labels contain only class {class}")]
    SingleClass { class: u8 },

    #[error("ZeroNormalLevel: mean GE over normal frames is zero")]
    ZeroNormalLevel,

    #[error("NoNormalFrames: segment {segment} has no normal frames")]
    NoNormalFrames { segment: String },

    #[error("NonPositiveLevel: levels must be > 0, got {a} and {b}")]
    NonPositiveLevel { a: f64, b: f64 },

    #[error("ZeroVariance: {which} has zero variance")]
    ZeroVariance { which: &'static str },

    #[error("TooFewSegments: need at least 2, got {got}")]
    TooFewSegments { got: usize },

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("PlacementFailure: could not place a {size}x{size} blob in segment {segment} frame {frame} after {retries} attempts")]
    PlacementFailure {
        segment: usize,
        frame: usize,
        size: usize,
        retries: usize,
    },

    #[error("ParseError: {path}: {message}")]
    ParseError { path: PathBuf, message: String },

    #[error("MissingFile: {0}")]
    MissingFile(PathBuf),

    #[error("LabelOutOfRange: segment {segment} frame {frame} has label {value}")]
    LabelOutOfRange {
        segment: String,
        frame: usize,
        value: i64,
    },

    #[error("DuplicateSegmentId: {0}")]
    DuplicateSegmentId(String),

    #[error("BadMagic: {path}")]
    BadMagic { path: PathBuf },

    #[error("TruncatedFile: {path}")]
    TruncatedFile { path: PathBuf },

    #[error("NonFiniteValue: {path} sample {index}")]
    NonFiniteValue { path: PathBuf, index: usize },

    #[error("EmptySeries")]
    EmptySeries,

    #[error("TooFewPoints: need at least 2 sweep points, got {got}")]
    TooFewPoints { got: usize },

    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short variant name, used in report error columns.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFiniteInput { .. } => "NonFiniteInput",
            Error::InvalidShape(_) => "InvalidShape",
            Error::NegativeValue { .. } => "NegativeValue",
            Error::InvalidBlock { .. } => "InvalidBlock",
            Error::BlockTooLarge { .. } => "BlockTooLarge",
            Error::InvalidSeries(_) => "InvalidSeries",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::InvalidWeights(_) => "InvalidWeights",
            Error::SingleClass { .. } => "SingleClass",
            Error::ZeroNormalLevel => "ZeroNormalLevel",
            Error::NoNormalFrames { .. } => "NoNormalFrames",
            Error::NonPositiveLevel { .. } => "NonPositiveLevel",
            Error::ZeroVariance { .. } => "ZeroVariance",
            Error::TooFewSegments { .. } => "TooFewSegments",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::PlacementFailure { .. } => "PlacementFailure",
            Error::ParseError { .. } => "ParseError",
            Error::MissingFile(_) => "MissingFile",
            Error::LabelOutOfRange { .. } => "LabelOutOfRange",
            Error::DuplicateSegmentId(_) => "DuplicateSegmentId",
            Error::BadMagic { .. } => "BadMagic",
            Error::TruncatedFile { .. } => "TruncatedFile",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::EmptySeries => "EmptySeries",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::Io { .. } => "IoError",
        }
    }
}
