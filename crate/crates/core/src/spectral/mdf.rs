//! Welch power spectral density and the median frequency of a band.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdfConfig {
    pub welch_window_s: f64,
    pub welch_overlap: f64,
    /// Lower edge of the frequency range the median is taken over.
    pub f0_hz: f64,
    /// Upper edge of that range.
    pub f1_hz: f64,
}

impl Default for MdfConfig {
    fn default() -> Self {
        Self {
            welch_window_s: 1.0,
            welch_overlap: 0.5,
            f0_hz: 10.0,
            f1_hz: 150.0,
        }
    }
}

/// One-sided PSD on the grid `k * df`, in units²/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub df: f64,
    pub power: Vec<f64>,
}

impl Psd {
    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.df
    }

    /// Median of the PSD restricted to bins whose centres lie in `[f0, f1]`.
    ///
    /// Each bin's power is spread uniformly over `[f_k - df/2, f_k + df/2]`,
    /// so the cumulative power is piecewise linear and the median falls
    /// between bin centres.
    pub fn median(&self, f0_hz: f64, f1_hz: f64) -> Result<f64> {
        let bins: Vec<usize> = (0..self.power.len())
            .filter(|&k| (f0_hz..=f1_hz).contains(&self.frequency(k)))
            .collect();
        let total: f64 = bins.iter().map(|&k| self.power[k]).sum();
        if !(total > 0.0) {
            return Err(Error::SilentSegment);
        }
        let half = total / 2.0;
        let mut cum = 0.0;
        for &k in &bins {
            let p = self.power[k];
            if p > 0.0 && cum + p >= half {
                let left = self.frequency(k) - self.df / 2.0;
                return Ok(left + (half - cum) / p * self.df);
            }
            cum += p;
        }
        // Rounding left the running sum a hair short of `half`.
        let last = *bins.iter().rev().find(|&&k| self.power[k] > 0.0).unwrap();
        Ok(self.frequency(last) + self.df / 2.0)
    }
}

/// Reusable Welch estimator: Hann window (periodic), fixed segment length and hop.
pub struct WelchEstimator {
    sample_rate_hz: f64,
    nperseg: usize,
    hop: usize,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for WelchEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WelchEstimator")
            .field("sample_rate_hz", &self.sample_rate_hz)
            .field("nperseg", &self.nperseg)
            .field("hop", &self.hop)
            .finish()
    }
}

impl WelchEstimator {
    pub fn new(sample_rate_hz: f64, window_s: f64, overlap: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0 && window_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Welch needs positive sample rate and window, got {sample_rate_hz} Hz / {window_s} s"
            )));
        }
        if !(0.0..1.0).contains(&overlap) {
            return Err(Error::InvalidParameter(format!(
                "Welch overlap must be in [0, 1), got {overlap}"
            )));
        }
        let nperseg = ((window_s * sample_rate_hz).round() as usize).max(2);
        Ok(Self::with_nperseg(sample_rate_hz, nperseg, overlap))
    }

    fn with_nperseg(sample_rate_hz: f64, nperseg: usize, overlap: f64) -> Self {
        let noverlap = ((overlap * nperseg as f64).round() as usize).min(nperseg - 1);
        let window: Vec<f64> = (0..nperseg)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / nperseg as f64).cos())
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(nperseg);
        Self {
            sample_rate_hz,
            nperseg,
            hop: nperseg - noverlap,
            window,
            window_power,
            fft,
        }
    }

    pub fn nperseg(&self) -> usize {
        self.nperseg
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz / self.nperseg as f64
    }

    /// Signals shorter than one window are analysed as a single window of their own length.
    pub fn psd(&self, x: &[f64]) -> Result<Psd> {
        if x.len() < 2 {
            return Err(Error::InvalidParameter("PSD needs at least 2 samples".into()));
        }
        if x.len() < self.nperseg {
            let overlap = 1.0 - self.hop as f64 / self.nperseg as f64;
            return Self::with_nperseg(self.sample_rate_hz, x.len(), overlap).psd(x);
        }
        let n = self.nperseg;
        let bins = n / 2 + 1;
        let mut acc = vec![0.0; bins];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut frames = 0usize;
        let mut start = 0;
        while start + n <= x.len() {
            for ((b, &s), &w) in buf.iter_mut().zip(&x[start..start + n]).zip(&self.window) {
                *b = Complex64::new(s * w, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b.norm_sqr();
            }
            frames += 1;
            start += self.hop;
        }
        let scale = 1.0 / (self.sample_rate_hz * self.window_power * frames as f64);
        for (k, a) in acc.iter_mut().enumerate() {
            let one_sided = if k == 0 || (n % 2 == 0 && k == n / 2) { 1.0 } else { 2.0 };
            *a *= scale * one_sided;
        }
        Ok(Psd {
            df: self.bin_width_hz(),
            power: acc,
        })
    }

    pub fn median_frequency(&self, x: &[f64], f0_hz: f64, f1_hz: f64) -> Result<f64> {
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::SilentSegment);
        }
        self.psd(x)?.median(f0_hz, f1_hz)
    }
}

pub fn welch_psd(x: &[f64], sample_rate_hz: f64, window_s: f64, overlap: f64) -> Result<Psd> {
    WelchEstimator::new(sample_rate_hz, window_s, overlap)?.psd(x)
}

/// Median frequency of `x` over `[cfg.f0_hz, cfg.f1_hz]` from its Welch PSD.
pub fn median_frequency(x: &[f64], sample_rate_hz: f64, cfg: &MdfConfig) -> Result<f64> {
    WelchEstimator::new(sample_rate_hz, cfg.welch_window_s, cfg.welch_overlap)?
        .median_frequency(x, cfg.f0_hz, cfg.f1_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 2148.0;

    fn tone(f: f64, secs: f64) -> Vec<f64> {
        (0..(secs * FS) as usize)
            .map(|i| (2.0 * PI * f * i as f64 / FS).sin())
            .collect()
    }

    #[test]
    fn pure_tone() {
        let cfg = MdfConfig::default();
        let m = median_frequency(&tone(100.0, 30.0), FS, &cfg).unwrap();
        assert!((m - 100.0).abs() <= 1.0, "{m}");
    }

    #[test]
    fn silent_input() {
        let cfg = MdfConfig::default();
        assert!(matches!(
            median_frequency(&vec![0.0; 4000], FS, &cfg),
            Err(Error::SilentSegment)
        ));
        let empty_band = Psd {
            df: 1.0,
            power: vec![0.0, 0.0, 0.0, 5.0],
        };
        assert!(matches!(empty_band.median(0.0, 2.0), Err(Error::SilentSegment)));
    }

    #[test]
    fn psd_integrates_to_variance() {
        let x = tone(100.0, 10.0);
        let psd = welch_psd(&x, FS, 1.0, 0.5).unwrap();
        let total: f64 = psd.power.iter().sum::<f64>() * psd.df;
        // Hann leakage keeps the integral equal to the signal power (0.5).
        assert!((total - 0.5).abs() < 1e-3, "{total}");
    }

    #[test]
    fn short_input_uses_single_window() {
        let x = tone(100.0, 0.5);
        let est = WelchEstimator::new(FS, 1.0, 0.5).unwrap();
        let psd = est.psd(&x).unwrap();
        assert_eq!(psd.power.len(), x.len() / 2 + 1);
        let m = est.median_frequency(&x, 10.0, 150.0).unwrap();
        assert!((m - 100.0).abs() <= 2.0 * psd.df, "{m}");
    }

    #[test]
    fn interpolated_median_of_two_bins() {
        let psd = Psd {
            df: 1.0,
            power: vec![0.0, 1.0, 3.0, 0.0],
        };
        // total 4, half 2: bin 1 contributes 1, then 1/3 of bin 2's cell.
        let m = psd.median(0.0, 3.0).unwrap();
        assert!((m - (1.5 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_welch_parameters() {
        assert!(WelchEstimator::new(FS, 0.0, 0.5).is_err());
        assert!(WelchEstimator::new(FS, 1.0, 1.0).is_err());
    }
}
