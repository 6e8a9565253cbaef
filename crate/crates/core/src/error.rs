use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("non-uniform sampling at row {row}")]
    NonUniformSampling { row: usize },

    #[error("non-finite sample at row {row}, column `{column}`")]
    NonFinite { row: usize, column: String },

    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("degenerate signal: every sample is an outlier")]
    DegenerateSignal,

    #[error("filter design error: {0}")]
    FilterDesign(String),

    #[error("refusing to apply an unstable filter cascade")]
    UnstableFilter,

    #[error("signal of {duration_s} s is shorter than one {segment_len_s} s segment")]
    SignalTooShort { duration_s: f64, segment_len_s: f64 },

    #[error("segment of {len} samples is too short for depth {depth} (needs at least {required})")]
    SegmentTooShort { len: usize, depth: u32, required: usize },

    #[error("silent segment: no signal power in the analysis band")]
    SilentSegment,

    #[error("insufficient observations: {0}")]
    InsufficientObservations(String),

    #[error("no trajectory points within the {0} s baseline window")]
    EmptyBaseline(f64),

    #[error("{0} detector did not fire")]
    NotDetected(&'static str),

    #[error("infeasible synthesis band: {0}")]
    InfeasibleBand(String),

    #[error("time {t} s outside [0, {duration}] s")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
