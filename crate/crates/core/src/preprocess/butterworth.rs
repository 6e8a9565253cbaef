//! Butterworth band-pass / band-stop design as cascaded second-order sections.
//!
//! Design goes analog low-pass prototype -> band transform -> bilinear
//! transform, with both band edges pre-warped so the digital response is
//! exactly -3 dB at the requested cutoffs.
//!
//! `order` is the prototype order (the convention of `butter(n, [lo hi])`):
//! the resulting band filter has `2 * order` poles, i.e. `order` sections.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const SUPPORTED_ORDERS: [usize; 4] = [2, 4, 6, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    BandPass,
    BandStop,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterKind::BandPass => f.write_str("bandpass"),
            FilterKind::BandStop => f.write_str("bandstop"),
        }
    }
}

/// One biquad, `H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + self.b[1] * z_inv + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z_inv + self.a[1] * z2;
        num / den
    }

    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterDesign {
    pub kind: FilterKind,
    pub order: usize,
    pub cutoffs_hz: (f64, f64),
    pub sample_rate_hz: f64,
}

/// An immutable cascade of second-order sections plus the parameters it was designed from.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCascade {
    sections: Vec<Biquad>,
    design: FilterDesign,
}

impl FilterCascade {
    /// Wrap raw sections. No stability check happens here; [`apply_filter`]
    /// refuses unstable cascades.
    pub fn from_sections(sections: Vec<Biquad>, design: FilterDesign) -> Self {
        Self { sections, design }
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn design(&self) -> &FilterDesign {
        &self.design
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    /// Complex frequency response at `f_hz`.
    pub fn response(&self, f_hz: f64) -> Complex64 {
        let w = 2.0 * PI * f_hz / self.design.sample_rate_hz;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude_db(&self, f_hz: f64) -> f64 {
        20.0 * self.response(f_hz).norm().log10()
    }
}

pub fn design_butterworth(
    kind: FilterKind,
    order: usize,
    f_lo_hz: f64,
    f_hi_hz: f64,
    sample_rate_hz: f64,
) -> Result<FilterCascade> {
    if !SUPPORTED_ORDERS.contains(&order) {
        return Err(Error::FilterDesign(format!(
            "order {order} unsupported (expected one of {SUPPORTED_ORDERS:?})"
        )));
    }
    let nyquist = sample_rate_hz / 2.0;
    if !(sample_rate_hz > 0.0 && 0.0 < f_lo_hz && f_lo_hz < f_hi_hz && f_hi_hz < nyquist) {
        return Err(Error::FilterDesign(format!(
            "need 0 < f_lo < f_hi < Nyquist ({nyquist} Hz), got {f_lo_hz}..{f_hi_hz} Hz"
        )));
    }

    // Pre-warped edges for the bilinear map s = (z - 1) / (z + 1).
    let w_lo = (PI * f_lo_hz / sample_rate_hz).tan();
    let w_hi = (PI * f_hi_hz / sample_rate_hz).tan();
    let bw = w_hi - w_lo;
    let w0_sq = w_lo * w_hi;
    // Digital centre frequency (rad/sample) of the transformed band.
    let theta0 = 2.0 * w0_sq.sqrt().atan();

    let mut sections = Vec::with_capacity(order);
    for k in 0..order {
        let p = Complex64::from_polar(1.0, PI * (2 * k + order + 1) as f64 / (2 * order) as f64);
        let scaled = match kind {
            FilterKind::BandPass => p * bw,
            FilterKind::BandStop => bw / p,
        };
        let root = (scaled * scaled - 4.0 * w0_sq).sqrt();
        for s in [(scaled + root) / 2.0, (scaled - root) / 2.0] {
            // One pole of each conjugate pair builds the section.
            if s.im <= 0.0 {
                continue;
            }
            let z = (1.0 + s) / (1.0 - s);
            let a = [-2.0 * z.re, z.norm_sqr()];
            let b = match kind {
                FilterKind::BandPass => [1.0, 0.0, -1.0],
                FilterKind::BandStop => [1.0, -2.0 * theta0.cos(), 1.0],
            };
            sections.push(Biquad { b, a });
        }
    }
    if sections.len() != order {
        return Err(Error::FilterDesign(format!(
            "pole pairing produced {} sections for order {order}",
            sections.len()
        )));
    }

    // Unit gain per section: at the band centre for band-pass, at DC for band-stop.
    let z_ref = match kind {
        FilterKind::BandPass => Complex64::from_polar(1.0, -theta0),
        FilterKind::BandStop => Complex64::new(1.0, 0.0),
    };
    for sec in &mut sections {
        let g = sec.response(z_ref).norm();
        sec.b.iter_mut().for_each(|c| *c /= g);
    }

    Ok(FilterCascade {
        sections,
        design: FilterDesign {
            kind,
            order,
            cutoffs_hz: (f_lo_hz, f_hi_hz),
            sample_rate_hz,
        },
    })
}

/// Causal single-pass filtering (transposed direct form II, zero initial state).
pub fn apply_filter(cascade: &FilterCascade, samples: &[f64]) -> Result<Vec<f64>> {
    if !cascade.is_stable() {
        return Err(Error::UnstableFilter);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite sample in filter input".into()));
    }
    let mut out = samples.to_vec();
    for sec in cascade.sections() {
        run_section(sec, &mut out);
    }
    Ok(out)
}

/// Forward-backward filtering: zero phase, squared magnitude response.
pub fn apply_filter_zero_phase(cascade: &FilterCascade, samples: &[f64]) -> Result<Vec<f64>> {
    let mut out = apply_filter(cascade, samples)?;
    out.reverse();
    for sec in cascade.sections() {
        run_section(sec, &mut out);
    }
    out.reverse();
    Ok(out)
}

fn run_section(sec: &Biquad, data: &mut [f64]) {
    let [b0, b1, b2] = sec.b;
    let [a1, a2] = sec.a;
    let (mut s1, mut s2) = (0.0, 0.0);
    for x in data.iter_mut() {
        let input = *x;
        let y = b0 * input + s1;
        s1 = b1 * input - a1 * y + s2;
        s2 = b2 * input - a2 * y;
        *x = y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 2148.0;

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    fn sine(f: f64, secs: f64) -> Vec<f64> {
        let n = (secs * FS) as usize;
        (0..n).map(|i| (2.0 * PI * f * i as f64 / FS).sin()).collect()
    }

    #[test]
    fn bandpass_cutoffs_and_passband() {
        let bp = design_butterworth(FilterKind::BandPass, 6, 10.0, 500.0, FS).unwrap();
        assert_eq!(bp.sections().len(), 6);
        assert!(bp.magnitude_db(100.0).abs() <= 0.1);
        assert!((bp.magnitude_db(10.0) + 3.0).abs() <= 0.3, "{}", bp.magnitude_db(10.0));
        assert!(
            (bp.magnitude_db(500.0) + 3.0).abs() <= 0.3,
            "{}",
            bp.magnitude_db(500.0)
        );
        assert!(bp.is_stable());
    }

    #[test]
    fn bandstop_notch_depth() {
        let bs = design_butterworth(FilterKind::BandStop, 2, 49.0, 51.0, FS).unwrap();
        // Evaluate on a grid around the stopband and compare against the spot checks.
        assert!(bs.magnitude_db(50.0) <= -40.0, "{}", bs.magnitude_db(50.0));
        assert!(bs.magnitude_db(30.0) >= -1.0);
        assert!((bs.magnitude_db(49.0) + 3.0).abs() <= 0.3);
        assert!((bs.magnitude_db(51.0) + 3.0).abs() <= 0.3);
        let grid_max_in_stop = (0..=100)
            .map(|i| 49.8 + 0.004 * i as f64)
            .map(|f| bs.magnitude_db(f))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(grid_max_in_stop < -20.0);
        assert!(bs.is_stable());
    }

    #[test]
    fn rejects_out_of_range_designs() {
        assert!(design_butterworth(FilterKind::BandPass, 6, 10.0, 1200.0, FS).is_err());
        assert!(design_butterworth(FilterKind::BandPass, 3, 10.0, 500.0, FS).is_err());
        assert!(design_butterworth(FilterKind::BandPass, 6, 500.0, 10.0, FS).is_err());
        assert!(design_butterworth(FilterKind::BandStop, 2, 0.0, 51.0, FS).is_err());
    }

    #[test]
    fn zeros_in_zeros_out() {
        let bp = design_butterworth(FilterKind::BandPass, 6, 10.0, 500.0, FS).unwrap();
        let y = apply_filter(&bp, &[0.0; 512]).unwrap();
        assert_eq!(y.len(), 512);
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mains_tone_removed() {
        let bs = design_butterworth(FilterKind::BandStop, 2, 49.0, 51.0, FS).unwrap();
        let y = apply_filter(&bs, &sine(50.0, 6.0)).unwrap();
        let steady = &y[(FS as usize) * 5..];
        let amplitude = rms(steady) * 2f64.sqrt();
        assert!(amplitude <= 0.01, "{amplitude}");
    }

    #[test]
    fn passband_tone_preserved() {
        let bp = design_butterworth(FilterKind::BandPass, 6, 10.0, 500.0, FS).unwrap();
        let y = apply_filter(&bp, &sine(100.0, 3.0)).unwrap();
        let amplitude = rms(&y[FS as usize..]) * 2f64.sqrt();
        assert!((amplitude - 1.0).abs() <= 0.02, "{amplitude}");
    }

    #[test]
    fn unstable_cascade_refused() {
        let design = FilterDesign {
            kind: FilterKind::BandPass,
            order: 2,
            cutoffs_hz: (1.0, 2.0),
            sample_rate_hz: 10.0,
        };
        let cascade = FilterCascade::from_sections(
            vec![Biquad {
                b: [1.0, 0.0, 0.0],
                a: [0.0, 1.21],
            }],
            design,
        );
        assert!(matches!(
            apply_filter(&cascade, &[1.0, 0.0]),
            Err(Error::UnstableFilter)
        ));
    }

    #[test]
    fn zero_phase_has_no_delay() {
        let bp = design_butterworth(FilterKind::BandPass, 2, 20.0, 200.0, FS).unwrap();
        let x = sine(60.0, 4.0);
        let y = apply_filter_zero_phase(&bp, &x).unwrap();
        let mid = &y[FS as usize..3 * FS as usize];
        let ref_mid = &x[FS as usize..3 * FS as usize];
        let err = mid.iter().zip(ref_mid).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 0.02, "{err}");
    }
}
