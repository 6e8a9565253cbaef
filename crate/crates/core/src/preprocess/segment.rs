use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_s: f64,
    pub end_s: f64,
    pub samples: Vec<f64>,
}

/// Contiguous, non-overlapping, equal-length segments of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    pub segment_len_s: f64,
    pub sample_rate_hz: f64,
    pub segments: Vec<Segment>,
}

impl SegmentSet {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Seconds of signal covered by the segments.
    pub fn covered_s(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end_s)
    }
}

/// Samples per segment for a given length in seconds.
pub fn segment_samples(sample_rate_hz: f64, segment_len_s: f64) -> usize {
    (segment_len_s * sample_rate_hz).round() as usize
}

/// Split into consecutive `segment_len_s` segments; a trailing partial segment is dropped.
pub fn segment(samples: &[f64], sample_rate_hz: f64, segment_len_s: f64) -> Result<SegmentSet> {
    if !(segment_len_s > 0.0 && segment_len_s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "segment length must be positive, got {segment_len_s}"
        )));
    }
    if !(sample_rate_hz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    let n = segment_samples(sample_rate_hz, segment_len_s);
    let count = samples.len().checked_div(n).unwrap_or(0);
    if count == 0 {
        return Err(Error::SignalTooShort {
            duration_s: samples.len() as f64 / sample_rate_hz,
            segment_len_s,
        });
    }
    let segments = samples
        .chunks_exact(n)
        .take(count)
        .enumerate()
        .map(|(j, chunk)| Segment {
            start_s: (j * n) as f64 / sample_rate_hz,
            end_s: ((j + 1) * n) as f64 / sample_rate_hz,
            samples: chunk.to_vec(),
        })
        .collect();
    Ok(SegmentSet {
        segment_len_s,
        sample_rate_hz,
        segments,
    })
}
