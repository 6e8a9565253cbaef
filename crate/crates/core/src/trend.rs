//! Weak-monotonicity trend statistic and the two fatigue detectors.
//!
//! A transition `F(T_{j-1}) -> F(T_j)` is *weakly decreasing* when
//! `F(T_j) <= F(T_{j-1}) + delta_{j-1}`, with the fluctuation bound
//! `delta_{j-1} = delta_r * F(T_{j-1})` by default. Over `n` points with
//! `s-` weakly decreasing and `s+ = n - 1 - s-` other transitions,
//! `WM = s+/(n-1) - s-/(n-1)`, which lies in `[-1, 1]`; -1 means every step
//! stayed within the bound.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::FeatureTrajectory;

/// How the per-step fluctuation bound is derived from `delta_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// `delta_{j-1} = delta_r * F(T_{j-1})`.
    #[default]
    Relative,
    /// One fixed bound for the whole trajectory, `delta = delta_r * F_int`.
    Absolute,
}

impl FromStr for BoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relative" => Ok(BoundMode::Relative),
            "absolute" => Ok(BoundMode::Absolute),
            other => Err(Error::InvalidParameter(format!(
                "bound mode must be relative or absolute, got `{other}`"
            ))),
        }
    }
}

/// Which points enter `WM(T_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    /// All points from the first through `T_j`.
    #[default]
    Cumulative,
    /// The last `window_len` points ending at `T_j`.
    Sliding,
}

impl FromStr for WindowMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cumulative" => Ok(WindowMode::Cumulative),
            "sliding" => Ok(WindowMode::Sliding),
            other => Err(Error::InvalidParameter(format!(
                "window mode must be cumulative or sliding, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluctuationBound {
    Relative(f64),
    Absolute(f64),
}

impl FluctuationBound {
    /// Whether `current` is within the bound of `previous` (a weakly decreasing step).
    #[inline]
    pub fn within(self, previous: f64, current: f64) -> bool {
        let delta = match self {
            FluctuationBound::Relative(rate) => rate * previous,
            FluctuationBound::Absolute(hz) => hz,
        };
        current <= previous + delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WmParams {
    pub delta_r: f64,
    pub f_th_hz: f64,
    pub wm_th: f64,
    pub baseline_window_s: f64,
    pub bound_mode: BoundMode,
    pub window_mode: WindowMode,
    /// Points per window in sliding mode.
    pub window_len: usize,
}

impl Default for WmParams {
    fn default() -> Self {
        Self {
            delta_r: 0.0083,
            f_th_hz: 1.25,
            wm_th: -0.5,
            baseline_window_s: 60.0,
            bound_mode: BoundMode::Relative,
            window_mode: WindowMode::Cumulative,
            window_len: 10,
        }
    }
}

impl WmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(0.0..1.0).contains(&self.delta_r) {
            return bad(format!("delta_r must be in [0, 1), got {}", self.delta_r));
        }
        if !(self.f_th_hz > 0.0 && self.f_th_hz.is_finite()) {
            return bad(format!("f_th_hz must be positive, got {}", self.f_th_hz));
        }
        if !(-1.0..=0.0).contains(&self.wm_th) {
            return bad(format!("wm_th must be in [-1, 0], got {}", self.wm_th));
        }
        if !(self.baseline_window_s > 0.0) {
            return bad(format!(
                "baseline window must be positive, got {}",
                self.baseline_window_s
            ));
        }
        if self.window_mode == WindowMode::Sliding && self.window_len < 2 {
            return bad(format!(
                "sliding window needs at least 2 points, got {}",
                self.window_len
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdParams {
    pub theta_hz: f64,
    pub baseline_window_s: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            theta_hz: 1.25,
            baseline_window_s: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DetectorParams {
    Wm(WmParams),
    Threshold(ThresholdParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Wm,
    Threshold,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Wm => "wm",
            DetectorKind::Threshold => "threshold",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wm" => Ok(DetectorKind::Wm),
            "threshold" => Ok(DetectorKind::Threshold),
            other => Err(Error::InvalidParameter(format!(
                "detector must be wm or threshold, got `{other}`"
            ))),
        }
    }
}

/// Detector state at one trajectory point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentTrace {
    pub t_s: f64,
    pub f_hz: f64,
    /// `WM(T_j)`; undefined at the first point.
    pub wm: Option<f64>,
    pub cond_freq: bool,
    /// The WM condition; `None` for the threshold detector or where WM is undefined.
    pub cond_wm: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionResult {
    pub detector: DetectorKind,
    pub detected: bool,
    pub time_s: Option<f64>,
    pub f_int_hz: f64,
    pub trace: Vec<SegmentTrace>,
    pub params: DetectorParams,
}

impl DetectionResult {
    pub fn wm_trace(&self) -> Vec<(f64, f64)> {
        self.trace.iter().filter_map(|s| s.wm.map(|w| (s.t_s, w))).collect()
    }

    pub fn condition_trace(&self) -> Vec<(f64, bool, Option<bool>)> {
        self.trace.iter().map(|s| (s.t_s, s.cond_freq, s.cond_wm)).collect()
    }

    /// Index of the point where the detector fired.
    pub fn detection_index(&self) -> Option<usize> {
        let t = self.time_s?;
        self.trace.iter().position(|s| s.t_s == t)
    }
}

/// WM of a sequence under the relative bound `delta_r * F(T_{j-1})`.
pub fn wm_value(f_values: &[f64], delta_r: f64) -> Result<f64> {
    if !(delta_r >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta_r must be >= 0, got {delta_r}")));
    }
    wm_value_with_bound(f_values, FluctuationBound::Relative(delta_r))
}

pub fn wm_value_with_bound(f_values: &[f64], bound: FluctuationBound) -> Result<f64> {
    let n = f_values.len();
    if n < 2 {
        return Err(Error::InsufficientObservations(format!(
            "WM needs at least 2 values, got {n}"
        )));
    }
    let decreasing = f_values.windows(2).filter(|w| bound.within(w[0], w[1])).count();
    Ok(wm_from_counts(n - 1 - decreasing, decreasing))
}

#[inline]
fn wm_from_counts(s_plus: usize, s_minus: usize) -> f64 {
    let steps = (s_plus + s_minus) as f64;
    s_plus as f64 / steps - s_minus as f64 / steps
}

/// `WM(T_j)` at every point (`None` at the first), cumulative or sliding.
pub fn wm_trace(f_values: &[f64], bound: FluctuationBound, window: WindowMode, window_len: usize) -> Vec<Option<f64>> {
    let step_ok: Vec<bool> = f_values.windows(2).map(|w| bound.within(w[0], w[1])).collect();
    let mut out = Vec::with_capacity(f_values.len());
    if f_values.is_empty() {
        return out;
    }
    out.push(None);
    let mut minus = 0usize;
    for j in 1..f_values.len() {
        if step_ok[j - 1] {
            minus += 1;
        }
        let wm = match window {
            WindowMode::Cumulative => wm_from_counts(j - minus, minus),
            WindowMode::Sliding => {
                // `window_len` points span `window_len - 1` steps.
                let first_step = j.saturating_sub(window_len.max(2) - 1);
                let m = step_ok[first_step..j].iter().filter(|&&ok| ok).count();
                wm_from_counts(j - first_step - m, m)
            }
        };
        out.push(Some(wm));
    }
    out
}

/// Mean of all `F(T_j)` with `T_j <= window_s`: the baseline `F_int`.
pub fn baseline_mmf(trajectory: &FeatureTrajectory, window_s: f64) -> Result<f64> {
    let inside: Vec<f64> = trajectory
        .points()
        .iter()
        .take_while(|p| p.t_s <= window_s)
        .map(|p| p.f_hz)
        .collect();
    if inside.is_empty() {
        return Err(Error::EmptyBaseline(window_s));
    }
    Ok(inside.iter().sum::<f64>() / inside.len() as f64)
}

fn check_detectable(trajectory: &FeatureTrajectory, window_s: f64) -> Result<()> {
    if trajectory.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if trajectory.len() < 3 {
        return Err(Error::InsufficientObservations(format!(
            "detection needs at least 3 points, got {}",
            trajectory.len()
        )));
    }
    let last = trajectory.points().last().unwrap().t_s;
    if last <= window_s {
        return Err(Error::InsufficientObservations(format!(
            "trajectory ends at {last} s, inside the {window_s} s baseline window"
        )));
    }
    Ok(())
}

/// WM-based detector: fires at the first point after the baseline window where
/// `F(T_j) (1 - delta_r) <= F_int - F_th` and `WM(T_j) <= WM_th` both hold.
pub fn detect_wm(trajectory: &FeatureTrajectory, params: &WmParams) -> Result<DetectionResult> {
    params.validate()?;
    check_detectable(trajectory, params.baseline_window_s)?;
    let f_int = baseline_mmf(trajectory, params.baseline_window_s)?;
    let bound = match params.bound_mode {
        BoundMode::Relative => FluctuationBound::Relative(params.delta_r),
        BoundMode::Absolute => FluctuationBound::Absolute(params.delta_r * f_int),
    };
    let values = trajectory.values();
    let wms = wm_trace(&values, bound, params.window_mode, params.window_len);
    let limit = f_int - params.f_th_hz;

    let mut time_s = None;
    let trace = trajectory
        .points()
        .iter()
        .zip(wms)
        .map(|(p, wm)| {
            let cond_freq = p.f_hz * (1.0 - params.delta_r) <= limit;
            let cond_wm = wm.map(|w| w <= params.wm_th);
            if time_s.is_none() && p.t_s > params.baseline_window_s && cond_freq && cond_wm == Some(true) {
                time_s = Some(p.t_s);
            }
            SegmentTrace {
                t_s: p.t_s,
                f_hz: p.f_hz,
                wm,
                cond_freq,
                cond_wm,
            }
        })
        .collect();

    Ok(DetectionResult {
        detector: DetectorKind::Wm,
        detected: time_s.is_some(),
        time_s,
        f_int_hz: f_int,
        trace,
        params: DetectorParams::Wm(*params),
    })
}

/// Conventional detector: fires at the first point after the baseline window
/// where the decline `F_int - F(T_j)` reaches `theta_hz`.
pub fn detect_threshold(
    trajectory: &FeatureTrajectory,
    theta_hz: f64,
    baseline_window_s: f64,
) -> Result<DetectionResult> {
    if !(theta_hz > 0.0 && theta_hz.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "theta must be positive, got {theta_hz}"
        )));
    }
    if !(baseline_window_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "baseline window must be positive, got {baseline_window_s}"
        )));
    }
    check_detectable(trajectory, baseline_window_s)?;
    let f_int = baseline_mmf(trajectory, baseline_window_s)?;

    let mut time_s = None;
    let trace = trajectory
        .points()
        .iter()
        .map(|p| {
            let cond_freq = f_int - p.f_hz >= theta_hz;
            if time_s.is_none() && p.t_s > baseline_window_s && cond_freq {
                time_s = Some(p.t_s);
            }
            SegmentTrace {
                t_s: p.t_s,
                f_hz: p.f_hz,
                wm: None,
                cond_freq,
                cond_wm: None,
            }
        })
        .collect();

    Ok(DetectionResult {
        detector: DetectorKind::Threshold,
        detected: time_s.is_some(),
        time_s,
        f_int_hz: f_int,
        trace,
        params: DetectorParams::Threshold(ThresholdParams {
            theta_hz,
            baseline_window_s,
        }),
    })
}

/// Lead index for a dual detection: +1 when the WM detector fired strictly first, else -1.
pub fn case2_index(t_wm: Option<f64>, t_th: Option<f64>) -> Result<i8> {
    let t_wm = t_wm.ok_or(Error::NotDetected("wm"))?;
    let t_th = t_th.ok_or(Error::NotDetected("threshold"))?;
    Ok(if t_wm < t_th { 1 } else { -1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TrajectoryPoint;

    fn traj(values: &[f64]) -> FeatureTrajectory {
        let points = values
            .iter()
            .enumerate()
            .map(|(j, &f)| TrajectoryPoint {
                t_s: 30.0 * (j + 1) as f64,
                f_hz: f,
            })
            .collect();
        FeatureTrajectory::new("t", None, points).unwrap()
    }

    #[test]
    fn wm_examples() {
        assert_eq!(wm_value(&[1.0, 2.0, 3.0], 0.0).unwrap(), 1.0);
        assert_eq!(wm_value(&[5.0, 5.0, 5.0], 0.0).unwrap(), -1.0);
        // 39.0 <= 40.4, 39.3 <= 39.39, 38.0 <= 39.693, 38.4 > 38.38
        assert_eq!(wm_value(&[40.0, 39.0, 39.3, 38.0, 38.4], 0.01).unwrap(), -0.5);
        assert!(wm_value(&[1.0], 0.0).is_err());
        assert!(wm_value(&[1.0, 2.0], -0.1).is_err());
    }

    #[test]
    fn absolute_bound() {
        let f = [40.0, 40.3, 40.1, 40.6];
        let wm = wm_value_with_bound(&f, FluctuationBound::Absolute(0.35)).unwrap();
        assert!((wm + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn baseline_examples() {
        let t = FeatureTrajectory::from_values("b", &[30.0, 60.0, 90.0], &[40.0, 42.0, 10.0]).unwrap();
        assert_eq!(baseline_mmf(&t, 60.0).unwrap(), 41.0);
        let single = FeatureTrajectory::from_values("b", &[30.0], &[40.0]).unwrap();
        assert_eq!(baseline_mmf(&single, 60.0).unwrap(), 40.0);
        assert!(matches!(baseline_mmf(&t, 10.0), Err(Error::EmptyBaseline(_))));
    }

    #[test]
    fn wm_frequency_limit_from_defaults() {
        let p = WmParams::default();
        let limit = (40.0 - p.f_th_hz) / (1.0 - p.delta_r);
        assert!((limit - 39.0743).abs() < 1e-4);
        // Just below and just above the limit, with a monotone WM history.
        let fire = detect_wm(&traj(&[40.0, 40.0, 39.07]), &p).unwrap();
        assert_eq!(fire.time_s, Some(90.0));
        let hold = detect_wm(&traj(&[40.0, 40.0, 39.08]), &p).unwrap();
        assert!(!hold.detected);
    }

    #[test]
    fn constant_trajectory_never_fires() {
        let r = detect_wm(&traj(&[40.0; 30]), &WmParams::default()).unwrap();
        assert!(!r.detected);
        assert_eq!(r.time_s, None);
        assert!(r.wm_trace().iter().all(|&(_, w)| w == -1.0));
    }

    #[test]
    fn constructed_descent_fires_at_first_qualifying_point() {
        // F_int = 40; limit 39.0743. Both 39.0 and 38.9 qualify with WM = -1,
        // so the first of them (T = 150 s) is the detection.
        let values = [40.0, 40.0, 39.8, 39.5, 39.0, 38.9];
        let r = detect_wm(&traj(&values), &WmParams::default()).unwrap();
        assert_eq!(r.f_int_hz, 40.0);
        assert_eq!(r.time_s, Some(150.0));
        let cond: Vec<bool> = r.trace.iter().map(|s| s.cond_freq).collect();
        assert_eq!(cond, [false, false, false, false, true, true]);
        assert_eq!(r.trace[0].wm, None);
        assert_eq!(r.trace[4].wm, Some(-1.0));
    }

    #[test]
    fn baseline_points_cannot_fire() {
        // F_int = 40.1667 over a 90 s window; the dip at 90 s meets the
        // decline condition but lies inside the window.
        let r = detect_threshold(&traj(&[41.0, 41.0, 38.5, 40.0, 40.0, 40.0]), 1.25, 90.0).unwrap();
        assert!(r.trace[2].cond_freq);
        assert_eq!(r.time_s, None);
    }

    #[test]
    fn threshold_examples() {
        let r = detect_threshold(&traj(&[40.0, 40.0, 39.5, 38.76, 38.75]), 1.25, 60.0).unwrap();
        assert_eq!(r.time_s, Some(150.0));

        let n = 30;
        let ramp: Vec<f64> = (0..n).map(|j| 40.0 - j as f64 / (n - 1) as f64).collect();
        assert!(!detect_threshold(&traj(&ramp), 1.25, 60.0).unwrap().detected);

        // Dip to 38.7 at 390 s, then recovery: first crossing counts.
        let mut dip = vec![40.0; 20];
        dip[12] = 38.7;
        let r = detect_threshold(&traj(&dip), 1.25, 60.0).unwrap();
        assert_eq!(r.time_s, Some(390.0));
    }

    #[test]
    fn detector_preconditions() {
        let p = WmParams::default();
        assert!(detect_wm(&traj(&[40.0, 39.0]), &p).is_err());
        assert!(detect_wm(&traj(&[]), &p).is_err());
        let inside = FeatureTrajectory::from_values("x", &[10.0, 20.0, 30.0], &[1.0, 1.0, 1.0]).unwrap();
        assert!(detect_wm(&inside, &p).is_err());
        assert!(detect_threshold(&inside, 1.25, 60.0).is_err());
        let bad = WmParams { wm_th: 0.5, ..p };
        assert!(detect_wm(&traj(&[40.0; 5]), &bad).is_err());
    }

    #[test]
    fn case2_examples() {
        assert_eq!(case2_index(Some(240.0), Some(390.0)).unwrap(), 1);
        assert_eq!(case2_index(Some(300.0), Some(300.0)).unwrap(), -1);
        assert_eq!(case2_index(Some(400.0), Some(350.0)).unwrap(), -1);
        assert!(matches!(case2_index(None, Some(1.0)), Err(Error::NotDetected("wm"))));
        assert!(matches!(
            case2_index(Some(1.0), None),
            Err(Error::NotDetected("threshold"))
        ));
    }

    #[test]
    fn sliding_window_forgets_history() {
        // Long flat history then a rising tail: cumulative stays negative, sliding turns positive.
        let mut v = vec![40.0; 20];
        v.extend((1..=6).map(|i| 40.0 + i as f64));
        let bound = FluctuationBound::Relative(0.0);
        let cum = wm_trace(&v, bound, WindowMode::Cumulative, 0);
        let sl = wm_trace(&v, bound, WindowMode::Sliding, 5);
        assert!(cum.last().unwrap().unwrap() < 0.0);
        assert_eq!(sl.last().unwrap().unwrap(), 1.0);
        for j in 1..v.len() {
            let lo = j.saturating_sub(4);
            let expect = wm_value_with_bound(&v[lo..=j], bound).unwrap();
            assert_eq!(sl[j].unwrap(), expect, "j={j}");
            assert_eq!(cum[j].unwrap(), wm_value_with_bound(&v[..=j], bound).unwrap());
        }
    }
}
