//! Synthetic sEMG-like recordings with a known median-frequency schedule.
//!
//! Each channel is white Gaussian noise shaped in 1 s blocks. Block `k`
//! (2 s long, centred on second `k`) has a flat power spectrum on
//! `[c_k - halfwidth, c_k + halfwidth]`, where `c_k` is the scheduled median
//! frequency at its centre; the median of a flat band is its centre.
//! Neighbouring blocks overlap by half and are cross-faded with a sine/cosine
//! pair whose squares sum to one, so the variance stays constant across the
//! fade. Mains interference and white measurement noise are added on top.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::config::{parse_kv, KvEntry};
use crate::error::{Error, Result};
use crate::io::{Channel, SignalRecording};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthSpec {
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub mdf_start_hz: f64,
    pub mdf_end_hz: f64,
    /// Overrides the linear start/end drift when present: `(time_s, mdf_hz)`, increasing in time.
    pub drift_breakpoints: Option<Vec<(f64, f64)>>,
    pub passband_halfwidth_hz: f64,
    /// 50 Hz amplitude relative to the shaped signal's RMS.
    pub mains_amp: f64,
    /// Shaped-signal power over white-noise power, in dB.
    pub noise_snr_db: f64,
    pub seed: u64,
    pub channels: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            duration_s: 900.0,
            sample_rate_hz: 2148.0,
            mdf_start_hz: 78.0,
            mdf_end_hz: 73.0,
            drift_breakpoints: None,
            passband_halfwidth_hz: 3.0,
            mains_amp: 0.0,
            noise_snr_db: 20.0,
            seed: 0,
            channels: 1,
        }
    }
}

pub const SPEC_KEYS: &[(&str, &str)] = &[
    ("duration_s", "recording length in seconds"),
    ("sample_rate_hz", "sampling rate (default 2148)"),
    ("mdf_start_hz", "median frequency at t = 0"),
    ("mdf_end_hz", "median frequency at t = duration"),
    (
        "drift_breakpoints",
        "piecewise-linear schedule `t:f,t:f,...` (overrides start/end)",
    ),
    ("passband_halfwidth_hz", "half-width of the flat shaped band"),
    ("mains_amp", "50 Hz amplitude relative to signal RMS"),
    ("noise_snr_db", "signal-to-white-noise ratio in dB"),
    ("seed", "RNG seed"),
    ("channels", "number of independent channels ch1..chN"),
];

impl SynthSpec {
    /// Parse a key=value spec; keys not given keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let entries = parse_kv(text)?;
        let mut spec = SynthSpec::default();
        for e in &entries {
            if !spec.apply(e)? {
                return Err(Error::Config(format!("line {}: unknown synth key `{}`", e.line, e.key)));
            }
        }
        Ok(spec)
    }

    /// Apply one entry. Returns `false` for keys this spec does not know.
    pub fn apply(&mut self, e: &KvEntry) -> Result<bool> {
        match e.key.as_str() {
            "duration_s" => self.duration_s = e.parse()?,
            "sample_rate_hz" => self.sample_rate_hz = e.parse()?,
            "mdf_start_hz" => self.mdf_start_hz = e.parse()?,
            "mdf_end_hz" => self.mdf_end_hz = e.parse()?,
            "drift_breakpoints" => self.drift_breakpoints = Some(parse_breakpoints(e)?),
            "passband_halfwidth_hz" => self.passband_halfwidth_hz = e.parse()?,
            "mains_amp" => self.mains_amp = e.parse()?,
            "noise_snr_db" => self.noise_snr_db = e.parse()?,
            "seed" => self.seed = e.parse()?,
            "channels" => self.channels = e.parse()?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Render as a key=value file that [`SynthSpec::from_kv_str`] reads back.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        s += &format!("duration_s = {}\n", self.duration_s);
        s += &format!("sample_rate_hz = {}\n", self.sample_rate_hz);
        s += &format!("mdf_start_hz = {}\n", self.mdf_start_hz);
        s += &format!("mdf_end_hz = {}\n", self.mdf_end_hz);
        if let Some(bp) = &self.drift_breakpoints {
            let items: Vec<String> = bp.iter().map(|(t, f)| format!("{t}:{f}")).collect();
            s += &format!("drift_breakpoints = {}\n", items.join(","));
        }
        s += &format!("passband_halfwidth_hz = {}\n", self.passband_halfwidth_hz);
        s += &format!("mains_amp = {}\n", self.mains_amp);
        s += &format!("noise_snr_db = {}\n", self.noise_snr_db);
        s += &format!("seed = {}\n", self.seed);
        s += &format!("channels = {}\n", self.channels);
        s
    }

    /// The drift schedule as `(time_s, mdf_hz)` knots.
    pub fn schedule(&self) -> Vec<(f64, f64)> {
        match &self.drift_breakpoints {
            Some(bp) => bp.clone(),
            None => vec![(0.0, self.mdf_start_hz), (self.duration_s, self.mdf_end_hz)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample rate must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if self.channels == 0 {
            return Err(Error::InvalidParameter("need at least one channel".into()));
        }
        if !(self.passband_halfwidth_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "passband half-width must be positive, got {}",
                self.passband_halfwidth_hz
            )));
        }
        if !(self.mains_amp >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mains_amp must be >= 0, got {}",
                self.mains_amp
            )));
        }
        if self.noise_snr_db.is_nan() {
            return Err(Error::InvalidParameter("noise_snr_db is NaN".into()));
        }
        if (self.duration_s * self.sample_rate_hz).round() < 2.0 {
            return Err(Error::InvalidParameter(
                "recording would have fewer than 2 samples".into(),
            ));
        }
        let schedule = self.schedule();
        if schedule.is_empty() {
            return Err(Error::InvalidParameter("empty drift schedule".into()));
        }
        for w in schedule.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParameter("drift breakpoint times must increase".into()));
            }
        }
        let nyquist = self.sample_rate_hz / 2.0;
        for &(t, f) in &schedule {
            if !(t.is_finite() && f.is_finite()) {
                return Err(Error::InvalidParameter("non-finite drift breakpoint".into()));
            }
            let (lo, hi) = (f - self.passband_halfwidth_hz, f + self.passband_halfwidth_hz);
            if !(lo > 0.0 && hi < nyquist) {
                return Err(Error::InfeasibleBand(format!(
                    "band [{lo}, {hi}] Hz around {f} Hz (t = {t} s) leaves (0, {nyquist}) Hz"
                )));
            }
        }
        Ok(())
    }

    fn schedule_at(&self, t: f64) -> f64 {
        interpolate(&self.schedule(), t)
    }
}

fn parse_breakpoints(e: &KvEntry) -> Result<Vec<(f64, f64)>> {
    e.value
        .split(',')
        .map(|item| {
            let (t, f) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("line {}: breakpoint `{item}` is not `t:f`", e.line)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("line {}: bad number `{s}`", e.line)))
            };
            Ok((parse(t)?, parse(f)?))
        })
        .collect()
}

/// Piecewise-linear interpolation, constant beyond the end knots.
fn interpolate(knots: &[(f64, f64)], t: f64) -> f64 {
    let (t0, f0) = knots[0];
    if t <= t0 {
        return f0;
    }
    for w in knots.windows(2) {
        let ((ta, fa), (tb, fb)) = (w[0], w[1]);
        if t <= tb {
            return fa + (t - ta) / (tb - ta) * (fb - fa);
        }
    }
    knots[knots.len() - 1].1
}

/// The analytic median frequency of the shaped spectrum at time `t`.
pub fn ground_truth_mdf(spec: &SynthSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    if !(0.0..=spec.duration_s).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            duration: spec.duration_s,
        });
    }
    Ok(spec.schedule_at(t))
}

/// Generate the recording; channels are `ch1..chN`, each from its own RNG stream.
pub fn synth_emg(spec: &SynthSpec) -> Result<SignalRecording> {
    spec.validate()?;
    let channels = (0..spec.channels)
        .map(|c| Channel::new(format!("ch{}", c + 1), synth_channel(spec, c as u64)))
        .collect();
    SignalRecording::new(spec.sample_rate_hz, channels)
}

fn synth_channel(spec: &SynthSpec, stream: u64) -> Vec<f64> {
    let fs = spec.sample_rate_hz;
    let n_total = (spec.duration_s * fs).round() as usize;
    let hop = (fs.round() as usize).max(1);
    let block = 2 * hop;
    let df = fs / block as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(block);
    let inv = planner.plan_fft_inverse(block);
    let fade: Vec<f64> = (0..block)
        .map(|i| (PI * (i as f64 + 0.5) / block as f64).sin())
        .collect();

    let mut out = vec![0.0; n_total];
    let mut buf = vec![Complex64::new(0.0, 0.0); block];
    let blocks = n_total.div_ceil(hop) + 1;
    for k in 0..blocks {
        let centre_t = ((k * hop) as f64 / fs).min(spec.duration_s);
        let centre = spec.schedule_at(centre_t);
        let (lo, hi) = (centre - spec.passband_halfwidth_hz, centre + spec.passband_halfwidth_hz);

        for b in buf.iter_mut() {
            *b = Complex64::new(rng.sample(StandardNormal), 0.0);
        }
        fwd.process(&mut buf);
        let mut weight_sq_sum = 0.0;
        for (i, b) in buf.iter_mut().enumerate() {
            let f = i.min(block - i) as f64 * df;
            // Fraction of this bin's cell inside the band.
            let overlap = ((f + df / 2.0).min(hi) - (f - df / 2.0).max(lo)).max(0.0) / df;
            weight_sq_sum += overlap;
            *b *= overlap.sqrt();
        }
        inv.process(&mut buf);
        // Unit-variance white input -> output variance weight_sq_sum / block after 1/block scaling.
        let gain = 1.0 / (block as f64 * (weight_sq_sum / block as f64).sqrt());

        let start = k as isize * hop as isize - hop as isize;
        for (i, b) in buf.iter().enumerate() {
            let idx = start + i as isize;
            if idx >= 0 && (idx as usize) < n_total {
                out[idx as usize] += b.re * gain * fade[i];
            }
        }
    }

    let mains_phase = rng.random_range(0.0..2.0 * PI);
    let noise_sd = if spec.noise_snr_db.is_infinite() && spec.noise_snr_db > 0.0 {
        0.0
    } else {
        10f64.powf(-spec.noise_snr_db / 20.0)
    };
    for (i, x) in out.iter_mut().enumerate() {
        let t = i as f64 / fs;
        let z: f64 = rng.sample(StandardNormal);
        *x += spec.mains_amp * (2.0 * PI * 50.0 * t + mains_phase).sin() + noise_sd * z;
    }
    out
}

/// Ground truth sampled once per second (plus the end point), for the sidecar CSV.
pub fn ground_truth_series(spec: &SynthSpec) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let whole = spec.duration_s.floor() as usize;
    let mut times: Vec<f64> = (0..=whole).map(|s| s as f64).collect();
    if spec.duration_s > whole as f64 {
        times.push(spec.duration_s);
    }
    times.into_iter().map(|t| Ok((t, ground_truth_mdf(spec, t)?))).collect()
}
