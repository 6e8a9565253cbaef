//! Frequency-domain features: packet band decomposition, per-segment median
//! frequency, trajectory assembly and ANOVA-based band selection.
//!
//! Band indices are 1-based in ascending frequency: band 1 is
//! `[0, w)` with `w = (fs / 2) / 2^depth`, so at 2148 Hz and depth 6 band 5
//! covers `[67.125, 83.906)` Hz.

mod anova;
mod coeffs;
mod mdf;
mod wavelet;

pub use anova::{anova_band_select, one_way_anova, probe_groups, AnovaResult, BandCandidate, BandSelection};
pub use mdf::{median_frequency, welch_psd, MdfConfig, Psd, WelchEstimator};
pub use wavelet::{
    band_range_hz, band_width_hz, wavelet_packet_band, wavelet_packet_decompose, BandSet, Wavelet, MAX_DEPTH,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::SignalRecording;
use crate::preprocess::{segment, PreprocessConfig, Preprocessor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    /// Segment end time `T_j`.
    pub t_s: f64,
    /// Median frequency `F(T_j)`.
    pub f_hz: f64,
}

/// Median frequency per segment, `{(T_j, F(T_j))}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrajectory {
    channel: String,
    band_index: Option<usize>,
    points: Vec<TrajectoryPoint>,
}

impl FeatureTrajectory {
    /// `band_index` is `None` for a full-band (undecomposed) trajectory.
    pub fn new(channel: impl Into<String>, band_index: Option<usize>, points: Vec<TrajectoryPoint>) -> Result<Self> {
        for (j, p) in points.iter().enumerate() {
            if !(p.t_s.is_finite() && p.f_hz.is_finite() && p.f_hz >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "trajectory point {j} is not a finite non-negative frequency: ({}, {})",
                    p.t_s, p.f_hz
                )));
            }
            if j > 0 && p.t_s <= points[j - 1].t_s {
                return Err(Error::InvalidParameter(format!(
                    "trajectory times must be strictly increasing (point {j})"
                )));
            }
        }
        Ok(Self {
            channel: channel.into(),
            band_index,
            points,
        })
    }

    /// Build from parallel time/value slices.
    pub fn from_values(channel: impl Into<String>, times: &[f64], values: &[f64]) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidParameter("times and values differ in length".into()));
        }
        let points = times
            .iter()
            .zip(values)
            .map(|(&t_s, &f_hz)| TrajectoryPoint { t_s, f_hz })
            .collect();
        Self::new(channel, None, points)
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn band_index(&self) -> Option<usize> {
        self.band_index
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.f_hz).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t_s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralConfig {
    pub wavelet: Wavelet,
    pub depth: u32,
    pub mdf: MdfConfig,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            wavelet: Wavelet::Db14,
            depth: 6,
            mdf: MdfConfig::default(),
        }
    }
}

/// Everything needed to turn a raw channel into a trajectory.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PipelineConfig {
    pub preprocess: PreprocessConfig,
    pub spectral: SpectralConfig,
}

fn demeaned(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// Preprocessed, de-meaned segments of one channel.
fn prepared_segments(recording: &SignalRecording, channel: &str, cfg: &PipelineConfig) -> Result<Vec<(f64, Vec<f64>)>> {
    let fs = recording.sample_rate_hz();
    let samples = &recording.channel(channel)?.samples;
    let clean = Preprocessor::new(&cfg.preprocess, fs)?.run(samples)?;
    let set = segment(&clean, fs, cfg.preprocess.segment_len_s)?;
    Ok(set
        .segments
        .into_iter()
        .map(|s| (s.end_s, demeaned(&s.samples)))
        .collect())
}

/// Preprocess, segment, decompose and take one median frequency per segment.
///
/// `band` is a 1-based packet band; `None` measures the whole preprocessed
/// segment without decomposition.
pub fn feature_trajectory(
    recording: &SignalRecording,
    channel: &str,
    band: Option<usize>,
    cfg: &PipelineConfig,
) -> Result<FeatureTrajectory> {
    let fs = recording.sample_rate_hz();
    let sc = &cfg.spectral;
    if let Some(b) = band {
        let count = 1usize << sc.depth.min(MAX_DEPTH);
        if !(1..=count).contains(&b) {
            return Err(Error::InvalidParameter(format!("band {b} outside 1..={count}")));
        }
    }
    let segments = prepared_segments(recording, channel, cfg)?;
    let welch = WelchEstimator::new(fs, sc.mdf.welch_window_s, sc.mdf.welch_overlap)?;

    let points = segments
        .par_iter()
        .map(|(t_end, x)| {
            let f_hz = match band {
                Some(b) => {
                    let sig = wavelet_packet_band(x, sc.wavelet, sc.depth, b)?;
                    welch.median_frequency(&sig, sc.mdf.f0_hz, sc.mdf.f1_hz)?
                }
                None => welch.median_frequency(x, sc.mdf.f0_hz, sc.mdf.f1_hz)?,
            };
            Ok(TrajectoryPoint { t_s: *t_end, f_hz })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureTrajectory::new(channel, band, points)
}

/// Trajectories of every band overlapping the median-frequency range `[f0, f1]`.
///
/// Bands outside that range carry no power in it and are skipped.
pub fn band_trajectories(
    recording: &SignalRecording,
    channel: &str,
    cfg: &PipelineConfig,
) -> Result<Vec<FeatureTrajectory>> {
    let fs = recording.sample_rate_hz();
    let sc = &cfg.spectral;
    let segments = prepared_segments(recording, channel, cfg)?;
    let welch = WelchEstimator::new(fs, sc.mdf.welch_window_s, sc.mdf.welch_overlap)?;
    let count = 1usize << sc.depth.min(MAX_DEPTH);
    let bands: Vec<usize> = (1..=count)
        .filter(|&b| {
            let (lo, hi) = band_range_hz(fs, sc.depth, b);
            lo <= sc.mdf.f1_hz && hi >= sc.mdf.f0_hz
        })
        .collect();

    // per_segment[j][i] = F of band bands[i] in segment j
    let per_segment = segments
        .par_iter()
        .map(|(_, x)| {
            let set = wavelet_packet_decompose(x, sc.wavelet, sc.depth, fs)?;
            bands
                .iter()
                .map(|&b| welch.median_frequency(set.band(b).unwrap(), sc.mdf.f0_hz, sc.mdf.f1_hz))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    bands
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let points = segments
                .iter()
                .zip(&per_segment)
                .map(|((t, _), fs_j)| TrajectoryPoint { t_s: *t, f_hz: fs_j[i] })
                .collect();
            FeatureTrajectory::new(channel, Some(b), points)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::Channel;
    use std::f64::consts::PI;

    #[test]
    fn trajectory_invariants() {
        let p = |t, f| TrajectoryPoint { t_s: t, f_hz: f };
        assert!(FeatureTrajectory::new("c", None, vec![p(30.0, 40.0), p(30.0, 41.0)]).is_err());
        assert!(FeatureTrajectory::new("c", None, vec![p(30.0, f64::NAN)]).is_err());
        assert!(FeatureTrajectory::new("c", None, vec![]).unwrap().is_empty());
    }

    #[test]
    fn one_segment_recording_gives_one_point() {
        let fs = 2148.0;
        let x: Vec<f64> = (0..(30.0 * fs) as usize)
            .map(|i| (2.0 * PI * 75.0 * i as f64 / fs).sin() + 0.3 * (2.0 * PI * 120.0 * i as f64 / fs).sin())
            .collect();
        let rec = SignalRecording::new(fs, vec![Channel::new("ch1", x)]).unwrap();
        let cfg = PipelineConfig::default();
        let traj = feature_trajectory(&rec, "ch1", Some(5), &cfg).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.points()[0].t_s, 30.0);
        assert!((traj.points()[0].f_hz - 75.0).abs() < 1.5, "{:?}", traj.points());
        assert!(feature_trajectory(&rec, "ch9", Some(5), &cfg).is_err());
        assert!(feature_trajectory(&rec, "ch1", Some(65), &cfg).is_err());
    }
}
