//! Muscle-fatigue detection from surface EMG by weak monotonicity of the
//! band-limited median-frequency trajectory.
//!
//! Pipeline: [`io`] loads recordings, [`preprocess`] filters and segments,
//! [`spectral`] builds median-frequency trajectories per wavelet-packet band,
//! [`trend`] runs the WM and threshold detectors. [`synth`] generates
//! recordings with a known schedule and [`eval`] compares detectors over cohorts.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod eval;
pub mod io;
pub mod preprocess;
pub mod spectral;
pub mod synth;
pub mod trend;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use io::{AnnotationEvent, AnnotationTrack, Channel, SignalRecording};
pub use preprocess::{FilterCascade, FilterDesign, FilterKind, PreprocessConfig, SegmentSet};
pub use spectral::{BandSet, FeatureTrajectory, PipelineConfig, TrajectoryPoint, Wavelet};
pub use synth::SynthSpec;
pub use trend::{DetectionResult, DetectorKind, WmParams};
