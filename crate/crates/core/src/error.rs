use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("audio frame has {got} channels, array has {expected} microphones")]
    ChannelMismatch { expected: usize, got: usize },

    #[error("audio frame of {len} samples is shorter than the {needed}-sample maximum inter-mic delay")]
    FrameTooShort { len: usize, needed: usize },

    #[error("azimuth span [{lo}, {hi}] does not overlap the grid")]
    EmptySpan { lo: f64, hi: f64 },

    #[error("zero-sized frame")]
    EmptyFrame,

    #[error("frame dimensions differ: {0}")]
    DimensionMismatch(String),

    #[error("region {0} lies outside the image")]
    RegionOutside(String),

    #[error("only {valid:.1}% of depth pixels are valid, need at least 50%")]
    InsufficientDepth { valid: f64 },

    #[error("depth must be positive, got {0}")]
    NonPositiveDepth(f64),

    #[error("invalid training set: {0}")]
    Training(String),

    #[error("feature vector has {got} values, model expects {expected}")]
    FeatureDimension { expected: usize, got: usize },

    #[error("timestamp went backwards: {prev} -> {next}")]
    TimestampRegression { prev: f64, next: f64 },

    #[error("time {t} outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error{}: {msg}", location(.line))]
    Parse { line: Option<usize>, msg: String },

    #[error("{0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse { line: None, msg: msg.into() }
    }

    pub(crate) fn parse_at(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line: Some(line), msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
