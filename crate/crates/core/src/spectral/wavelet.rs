//! Periodized orthogonal wavelet packet decomposition.
//!
//! The segment is zero-padded to a multiple of `2^depth` and transformed with
//! circular (periodized) filtering, which keeps every split orthogonal: leaf
//! coefficient energies sum to the input energy exactly up to rounding.
//!
//! Leaves of a packet tree come out in Paley order; because each high-pass
//! branch mirrors its spectrum on downsampling, the leaf covering the q-th
//! frequency band (0-based) is Paley index `q ^ (q >> 1)` (Gray code).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::coeffs::{COIF2, DB14, SYM7};
use crate::error::{Error, Result};

pub const MAX_DEPTH: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Wavelet {
    Db14,
    Sym7,
    Coif2,
}

impl Wavelet {
    pub const ALL: [Wavelet; 3] = [Wavelet::Db14, Wavelet::Sym7, Wavelet::Coif2];

    /// Orthonormal scaling filter, sum = sqrt(2).
    pub fn scaling_filter(self) -> &'static [f64] {
        match self {
            Wavelet::Db14 => &DB14,
            Wavelet::Sym7 => &SYM7,
            Wavelet::Coif2 => &COIF2,
        }
    }

    /// Quadrature mirror of the scaling filter: `g[k] = (-1)^k h[K-1-k]`.
    pub fn wavelet_filter(self) -> Vec<f64> {
        let h = self.scaling_filter();
        let k = h.len();
        (0..k)
            .map(|i| if i % 2 == 0 { h[k - 1 - i] } else { -h[k - 1 - i] })
            .collect()
    }

    pub fn filter_len(self) -> usize {
        self.scaling_filter().len()
    }

    pub fn name(self) -> &'static str {
        match self {
            Wavelet::Db14 => "db14",
            Wavelet::Sym7 => "sym7",
            Wavelet::Coif2 => "coif2",
        }
    }
}

impl fmt::Display for Wavelet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "db14" => Ok(Wavelet::Db14),
            "sym7" => Ok(Wavelet::Sym7),
            "coif2" => Ok(Wavelet::Coif2),
            other => Err(Error::InvalidParameter(format!(
                "unknown wavelet `{other}` (expected db14, sym7 or coif2)"
            ))),
        }
    }
}

/// Width of each packet band in Hz: `(fs / 2) / 2^depth`.
pub fn band_width_hz(sample_rate_hz: f64, depth: u32) -> f64 {
    sample_rate_hz / 2.0 / f64::from(1u32 << depth)
}

/// Frequency range `[lo, hi)` of a 1-based band index.
pub fn band_range_hz(sample_rate_hz: f64, depth: u32, band: usize) -> (f64, f64) {
    let w = band_width_hz(sample_rate_hz, depth);
    ((band - 1) as f64 * w, band as f64 * w)
}

/// Packet bands of one segment, in ascending frequency order.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    pub wavelet: Wavelet,
    pub depth: u32,
    pub sample_rate_hz: f64,
    bands: Vec<Vec<f64>>,
    energies: Vec<f64>,
}

impl BandSet {
    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn band_width_hz(&self) -> f64 {
        band_width_hz(self.sample_rate_hz, self.depth)
    }

    /// Time-domain signal of a 1-based band, at the segment's original length.
    pub fn band(&self, index: usize) -> Option<&[f64]> {
        index.checked_sub(1).and_then(|i| self.bands.get(i)).map(Vec::as_slice)
    }

    pub fn bands(&self) -> &[Vec<f64>] {
        &self.bands
    }

    /// Leaf coefficient energies, ascending frequency. These sum to the
    /// segment energy.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
}

fn check_args(len: usize, wavelet: Wavelet, depth: u32) -> Result<()> {
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(Error::InvalidParameter(format!(
            "wavelet depth must be in 1..={MAX_DEPTH}, got {depth}"
        )));
    }
    let required = (1usize << depth) * wavelet.filter_len();
    if len < required {
        return Err(Error::SegmentTooShort { len, depth, required });
    }
    Ok(())
}

fn padded(segment: &[f64], depth: u32) -> Vec<f64> {
    let block = 1usize << depth;
    let len = segment.len().div_ceil(block) * block;
    let mut x = Vec::with_capacity(len);
    x.extend_from_slice(segment);
    x.resize(len, 0.0);
    x
}

/// One analysis branch: `out[n] = sum_k f[k] x[(2n + k) mod N]`.
fn analyze(x: &[f64], filter: &[f64]) -> Vec<f64> {
    let n = x.len();
    let k = filter.len();
    (0..n / 2)
        .map(|i| {
            let start = 2 * i;
            if start + k <= n {
                filter.iter().zip(&x[start..start + k]).map(|(a, b)| a * b).sum()
            } else {
                filter.iter().enumerate().map(|(j, a)| a * x[(start + j) % n]).sum()
            }
        })
        .collect()
}

/// Adjoint of [`analyze`], accumulated into `out` (length `2 * coeffs.len()`).
fn synthesize_into(coeffs: &[f64], filter: &[f64], out: &mut [f64]) {
    let n = out.len();
    let k = filter.len();
    for (i, &c) in coeffs.iter().enumerate() {
        let start = 2 * i;
        if start + k <= n {
            for (o, f) in out[start..start + k].iter_mut().zip(filter) {
                *o += f * c;
            }
        } else {
            for (j, f) in filter.iter().enumerate() {
                out[(start + j) % n] += f * c;
            }
        }
    }
}

/// Reconstruct the time-domain contribution of one leaf.
fn reconstruct_leaf(leaf: &[f64], paley: usize, depth: u32, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let mut current = leaf.to_vec();
    for level in (0..depth).rev() {
        // Node index at level+1 on the path; its parity picks the branch.
        let node = paley >> (depth - 1 - level);
        let filter = if node & 1 == 0 { lo } else { hi };
        let mut parent = vec![0.0; current.len() * 2];
        synthesize_into(&current, filter, &mut parent);
        current = parent;
    }
    current
}

fn paley_of_band(band0: usize) -> usize {
    band0 ^ (band0 >> 1)
}

/// Full packet tree to `depth`; every band reconstructed in the time domain.
pub fn wavelet_packet_decompose(segment: &[f64], wavelet: Wavelet, depth: u32, sample_rate_hz: f64) -> Result<BandSet> {
    check_args(segment.len(), wavelet, depth)?;
    let lo = wavelet.scaling_filter();
    let hi = wavelet.wavelet_filter();

    let mut nodes = vec![padded(segment, depth)];
    for _ in 0..depth {
        nodes = nodes
            .par_iter()
            .flat_map_iter(|node| [analyze(node, lo), analyze(node, &hi)])
            .collect();
    }

    let count = nodes.len();
    let energies = (0..count)
        .map(|q| nodes[paley_of_band(q)].iter().map(|c| c * c).sum())
        .collect();
    let bands = (0..count)
        .into_par_iter()
        .map(|q| {
            let p = paley_of_band(q);
            let mut band = reconstruct_leaf(&nodes[p], p, depth, lo, &hi);
            band.truncate(segment.len());
            band
        })
        .collect();

    Ok(BandSet {
        wavelet,
        depth,
        sample_rate_hz,
        bands,
        energies,
    })
}

/// Time-domain signal of a single 1-based band, computing only its branch of the tree.
pub fn wavelet_packet_band(segment: &[f64], wavelet: Wavelet, depth: u32, band: usize) -> Result<Vec<f64>> {
    check_args(segment.len(), wavelet, depth)?;
    let count = 1usize << depth;
    if !(1..=count).contains(&band) {
        return Err(Error::InvalidParameter(format!("band {band} outside 1..={count}")));
    }
    let lo = wavelet.scaling_filter();
    let hi = wavelet.wavelet_filter();
    let paley = paley_of_band(band - 1);

    let mut current = padded(segment, depth);
    for level in 0..depth {
        let node = paley >> (depth - 1 - level);
        current = analyze(&current, if node & 1 == 0 { lo } else { &hi });
    }
    let mut out = reconstruct_leaf(&current, paley, depth, lo, &hi);
    out.truncate(segment.len());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn energy(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn filters_are_orthonormal() {
        for w in Wavelet::ALL {
            let h = w.scaling_filter();
            let g = w.wavelet_filter();
            assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-12, "{w}");
            for shift in (0..h.len()).step_by(2) {
                let hh: f64 = (0..h.len() - shift).map(|k| h[k] * h[k + shift]).sum();
                let hg: f64 = (0..h.len() - shift).map(|k| h[k] * g[k + shift]).sum();
                let expect = if shift == 0 { 1.0 } else { 0.0 };
                assert!((hh - expect).abs() < 1e-12, "{w} shift {shift}: {hh}");
                assert!(hg.abs() < 1e-12, "{w} shift {shift}: {hg}");
            }
        }
    }

    #[test]
    fn depth_six_band_width() {
        assert_eq!(band_width_hz(2148.0, 6), 16.78125);
        let (lo, hi) = band_range_hz(2148.0, 6, 5);
        assert_eq!(lo, 67.125);
        assert!((hi - 83.906_25).abs() < 1e-12);
    }

    #[test]
    fn zero_segment_gives_zero_bands() {
        let bs = wavelet_packet_decompose(&vec![0.0; 2048], Wavelet::Db14, 6, 2148.0).unwrap();
        assert_eq!(bs.band_count(), 64);
        assert!(bs.bands().iter().flatten().all(|&v| v == 0.0));
        assert!(bs.energies().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn too_short_rejected() {
        let err = wavelet_packet_decompose(&vec![1.0; 1000], Wavelet::Db14, 6, 2148.0).unwrap_err();
        assert!(matches!(err, Error::SegmentTooShort { required: 1792, .. }));
        assert!(wavelet_packet_band(&vec![1.0; 4096], Wavelet::Sym7, 9, 1).is_err());
        assert!(wavelet_packet_band(&vec![1.0; 4096], Wavelet::Sym7, 6, 65).is_err());
    }

    #[test]
    fn energy_conserved_and_bands_sum_to_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for w in Wavelet::ALL {
            // 4096 is a multiple of 64, so the reconstructed bands are not truncated.
            let x: Vec<f64> = (0..4096).map(|_| rng.random_range(-1.0..1.0)).collect();
            let bs = wavelet_packet_decompose(&x, w, 6, 2148.0).unwrap();
            let total: f64 = bs.energies().iter().sum();
            assert!((total - energy(&x)).abs() / energy(&x) < 1e-10, "{w}");
            let time_energy: f64 = bs.bands().iter().map(|b| energy(b)).sum();
            assert!((time_energy - energy(&x)).abs() / energy(&x) < 1e-10, "{w}");
            for i in 0..x.len() {
                let s: f64 = bs.bands().iter().map(|b| b[i]).sum();
                assert!((s - x[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_band_path_matches_full_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..5000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bs = wavelet_packet_decompose(&x, Wavelet::Coif2, 5, 2148.0).unwrap();
        for band in [1, 5, 17, 32] {
            let single = wavelet_packet_band(&x, Wavelet::Coif2, 5, band).unwrap();
            let full = bs.band(band).unwrap();
            assert_eq!(single.len(), x.len());
            for (a, b) in single.iter().zip(full) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tones_land_in_their_band() {
        let fs = 2148.0;
        for w in Wavelet::ALL {
            for band in [2usize, 5, 12, 40] {
                let (lo, hi) = band_range_hz(fs, 6, band);
                let f = (lo + hi) / 2.0;
                let x: Vec<f64> = (0..8192).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect();
                let bs = wavelet_packet_decompose(&x, w, 6, fs).unwrap();
                let e = bs.energies();
                let argmax = (0..e.len()).max_by(|&a, &b| e[a].total_cmp(&e[b])).unwrap();
                assert_eq!(argmax + 1, band, "{w} tone {f} Hz");
            }
        }
    }
}
