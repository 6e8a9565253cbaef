//! Signal conditioning ahead of spectral analysis: outlier replacement,
//! band-pass and mains band-stop filtering, and fixed-length segmentation.

mod butterworth;
mod outliers;
mod segment;

pub use butterworth::{
    apply_filter, apply_filter_zero_phase, design_butterworth, Biquad, FilterCascade, FilterDesign, FilterKind,
    SUPPORTED_ORDERS,
};
pub use outliers::remove_outliers;
pub use segment::{segment, segment_samples, Segment, SegmentSet};

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEdges {
    pub order: usize,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessConfig {
    pub bandpass: BandEdges,
    pub bandstop: BandEdges,
    pub outlier_k_sd: f64,
    pub segment_len_s: f64,
    /// Forward-backward filtering instead of the causal single pass.
    pub zero_phase: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            bandpass: BandEdges {
                order: 6,
                lo_hz: 10.0,
                hi_hz: 500.0,
            },
            bandstop: BandEdges {
                order: 2,
                lo_hz: 49.0,
                hi_hz: 51.0,
            },
            outlier_k_sd: 3.0,
            segment_len_s: 30.0,
            zero_phase: false,
        }
    }
}

/// The two filter cascades of a preprocessing configuration, designed once.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    config: PreprocessConfig,
    bandpass: FilterCascade,
    bandstop: FilterCascade,
}

impl Preprocessor {
    pub fn new(config: &PreprocessConfig, sample_rate_hz: f64) -> Result<Self> {
        let bp = &config.bandpass;
        let bs = &config.bandstop;
        Ok(Self {
            config: config.clone(),
            bandpass: design_butterworth(FilterKind::BandPass, bp.order, bp.lo_hz, bp.hi_hz, sample_rate_hz)?,
            bandstop: design_butterworth(FilterKind::BandStop, bs.order, bs.lo_hz, bs.hi_hz, sample_rate_hz)?,
        })
    }

    pub fn bandpass(&self) -> &FilterCascade {
        &self.bandpass
    }

    pub fn bandstop(&self) -> &FilterCascade {
        &self.bandstop
    }

    /// Outliers, then band-pass, then band-stop. Length is preserved.
    pub fn run(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let cleaned = remove_outliers(samples, self.config.outlier_k_sd)?;
        let filter = if self.config.zero_phase {
            apply_filter_zero_phase
        } else {
            apply_filter
        };
        let x = filter(&self.bandpass, &cleaned)?;
        filter(&self.bandstop, &x)
    }
}
