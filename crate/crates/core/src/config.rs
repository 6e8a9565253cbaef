//! `key = value` settings: parsing, the run-configuration schema, and
//! conversion into the typed configs of each stage.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Later assignments override earlier ones.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::preprocess::{BandEdges, PreprocessConfig};
use crate::spectral::{MdfConfig, PipelineConfig, SpectralConfig, Wavelet};
use crate::trend::{BoundMode, ThresholdParams, WindowMode, WmParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

impl KvEntry {
    pub fn parse<T: FromStr>(&self) -> Result<T> {
        self.value.parse().map_err(|_| {
            Error::Config(format!(
                "line {}: cannot parse `{}` for key `{}`",
                self.line, self.value, self.key
            ))
        })
    }
}

pub fn parse_kv(text: &str) -> Result<Vec<KvEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push(KvEntry {
            line: i + 1,
            key: key.to_string(),
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Float,
    Count,
    Bool,
    Wavelet,
    BoundMode,
    WindowMode,
    /// Comma-separated positive integers.
    CountList,
}

impl ValueKind {
    fn check(self, value: &str) -> std::result::Result<(), String> {
        let ok = match self {
            ValueKind::Float => value.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false),
            ValueKind::Count => value.parse::<usize>().is_ok(),
            ValueKind::Bool => value.parse::<bool>().is_ok(),
            ValueKind::Wavelet => return value.parse::<Wavelet>().map(|_| ()).map_err(|e| e.to_string()),
            ValueKind::BoundMode => return value.parse::<BoundMode>().map(|_| ()).map_err(|e| e.to_string()),
            ValueKind::WindowMode => return value.parse::<WindowMode>().map(|_| ()).map_err(|e| e.to_string()),
            ValueKind::CountList => {
                !value.is_empty() && value.split(',').all(|s| s.trim().parse::<usize>().is_ok_and(|v| v > 0))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(format!("expected {}", self.describe()))
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ValueKind::Float => "a finite number",
            ValueKind::Count => "a non-negative integer",
            ValueKind::Bool => "true or false",
            ValueKind::Wavelet => "db14, sym7 or coif2",
            ValueKind::BoundMode => "relative or absolute",
            ValueKind::WindowMode => "cumulative or sliding",
            ValueKind::CountList => "a comma-separated list of positive integers",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KeyDef {
    pub key: &'static str,
    pub kind: ValueKind,
    pub default: &'static str,
    pub help: &'static str,
}

impl KeyDef {
    /// Command-line spelling: `wm.delta_r` becomes `wm.delta-r`.
    pub fn flag(&self) -> String {
        self.key.replace('_', "-")
    }
}

macro_rules! key {
    ($k:literal, $kind:ident, $d:literal, $h:literal) => {
        KeyDef {
            key: $k,
            kind: ValueKind::$kind,
            default: $d,
            help: $h,
        }
    };
}

pub const SCHEMA: &[KeyDef] = &[
    key!(
        "bandpass.order",
        Count,
        "6",
        "band-pass Butterworth prototype order (2, 4, 6, 8)"
    ),
    key!("bandpass.lo_hz", Float, "10", "band-pass lower cutoff"),
    key!("bandpass.hi_hz", Float, "500", "band-pass upper cutoff"),
    key!("bandstop.order", Count, "2", "mains band-stop prototype order"),
    key!("bandstop.lo_hz", Float, "49", "band-stop lower edge"),
    key!("bandstop.hi_hz", Float, "51", "band-stop upper edge"),
    key!(
        "outlier.k_sd",
        Float,
        "3",
        "samples beyond k standard deviations are replaced"
    ),
    key!("segment.len_s", Float, "30", "analysis segment length"),
    key!("filter.zero_phase", Bool, "false", "forward-backward filtering"),
    key!("wavelet.name", Wavelet, "db14", "packet wavelet"),
    key!("wavelet.depth", Count, "6", "packet tree depth (2^depth bands)"),
    key!("mdf.welch_window_s", Float, "1", "Welch window length"),
    key!("mdf.welch_overlap", Float, "0.5", "Welch window overlap fraction"),
    key!("mdf.f0_hz", Float, "10", "lower edge of the median-frequency range"),
    key!("mdf.f1_hz", Float, "150", "upper edge of the median-frequency range"),
    key!("anova.alpha", Float, "0.05", "band selection significance level"),
    key!(
        "anova.probe_minutes",
        CountList,
        "1,7,14",
        "minutes whose segments form the ANOVA groups"
    ),
    key!("wm.delta_r", Float, "0.0083", "relative fluctuation bound"),
    key!("wm.f_th_hz", Float, "1.25", "required decline from baseline"),
    key!("wm.wm_th", Float, "-0.5", "WM must be at or below this"),
    key!("wm.baseline_window_s", Float, "60", "baseline (initial MDF) window"),
    key!(
        "wm.bound_mode",
        BoundMode,
        "relative",
        "fluctuation bound: relative or absolute"
    ),
    key!(
        "wm.window_mode",
        WindowMode,
        "cumulative",
        "WM window: cumulative or sliding"
    ),
    key!("wm.window_len", Count, "10", "points per sliding window"),
    key!(
        "threshold.theta_hz",
        Float,
        "1.25",
        "conventional detector decline threshold"
    ),
];

pub fn key_def(key: &str) -> Option<&'static KeyDef> {
    SCHEMA.iter().find(|d| d.key == key)
}

/// Settings merged from defaults, then a config file, then explicit overrides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: SCHEMA.iter().map(|d| (d.key, d.default.to_string())).collect(),
        }
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let def = key_def(key).ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        let value = value.trim();
        def.kind
            .check(value)
            .map_err(|m| Error::Config(format!("key `{key}`: `{value}`: {m}")))?;
        self.values.insert(def.key, value.to_string());
        Ok(())
    }

    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        for e in parse_kv(text)? {
            self.set(&e.key, &e.value)
                .map_err(|err| Error::Config(format!("line {}: {err}", e.line)))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.merge_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Every key with its current value, in schema order.
    pub fn to_kv_string(&self) -> String {
        SCHEMA
            .iter()
            .map(|d| format!("{} = {}\n", d.key, self.values[d.key]))
            .collect()
    }

    fn typed<T: FromStr>(&self, key: &str) -> T {
        // Values were checked against their kind on insertion.
        match self.values[key].parse() {
            Ok(v) => v,
            Err(_) => unreachable!("schema-checked value for {key}"),
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            preprocess: PreprocessConfig {
                bandpass: BandEdges {
                    order: self.typed("bandpass.order"),
                    lo_hz: self.typed("bandpass.lo_hz"),
                    hi_hz: self.typed("bandpass.hi_hz"),
                },
                bandstop: BandEdges {
                    order: self.typed("bandstop.order"),
                    lo_hz: self.typed("bandstop.lo_hz"),
                    hi_hz: self.typed("bandstop.hi_hz"),
                },
                outlier_k_sd: self.typed("outlier.k_sd"),
                segment_len_s: self.typed("segment.len_s"),
                zero_phase: self.typed("filter.zero_phase"),
            },
            spectral: SpectralConfig {
                wavelet: self.typed("wavelet.name"),
                depth: self.typed::<u32>("wavelet.depth"),
                mdf: MdfConfig {
                    welch_window_s: self.typed("mdf.welch_window_s"),
                    welch_overlap: self.typed("mdf.welch_overlap"),
                    f0_hz: self.typed("mdf.f0_hz"),
                    f1_hz: self.typed("mdf.f1_hz"),
                },
            },
        }
    }

    pub fn wm_params(&self) -> WmParams {
        WmParams {
            delta_r: self.typed("wm.delta_r"),
            f_th_hz: self.typed("wm.f_th_hz"),
            wm_th: self.typed("wm.wm_th"),
            baseline_window_s: self.typed("wm.baseline_window_s"),
            bound_mode: self.typed("wm.bound_mode"),
            window_mode: self.typed("wm.window_mode"),
            window_len: self.typed("wm.window_len"),
        }
    }

    pub fn threshold_params(&self) -> ThresholdParams {
        ThresholdParams {
            theta_hz: self.typed("threshold.theta_hz"),
            baseline_window_s: self.typed("wm.baseline_window_s"),
        }
    }

    pub fn anova_alpha(&self) -> f64 {
        self.typed("anova.alpha")
    }

    pub fn probe_minutes(&self) -> Vec<usize> {
        self.values["anova.probe_minutes"]
            .split(',')
            .map(|s| s.trim().parse().unwrap())
            .collect()
    }

    /// Range checks that span keys or need domain knowledge.
    pub fn validate(&self) -> Result<()> {
        let cfg = self.pipeline();
        let p = &cfg.preprocess;
        let s = &cfg.spectral;
        let bad = |m: String| Err(Error::Config(m));
        for (name, b) in [("bandpass", &p.bandpass), ("bandstop", &p.bandstop)] {
            if !(b.lo_hz > 0.0 && b.lo_hz < b.hi_hz) {
                return bad(format!("{name}: need 0 < lo_hz < hi_hz, got {} / {}", b.lo_hz, b.hi_hz));
            }
        }
        if !(p.outlier_k_sd > 0.0) {
            return bad(format!("outlier.k_sd must be positive, got {}", p.outlier_k_sd));
        }
        if !(p.segment_len_s > 0.0) {
            return bad(format!("segment.len_s must be positive, got {}", p.segment_len_s));
        }
        if !(1..=crate::spectral::MAX_DEPTH).contains(&s.depth) {
            return bad(format!(
                "wavelet.depth must be in 1..={}, got {}",
                crate::spectral::MAX_DEPTH,
                s.depth
            ));
        }
        if !(s.mdf.welch_window_s > 0.0) || !(0.0..1.0).contains(&s.mdf.welch_overlap) {
            return bad("mdf: need welch_window_s > 0 and 0 <= welch_overlap < 1".into());
        }
        if !(s.mdf.f0_hz >= 0.0 && s.mdf.f0_hz < s.mdf.f1_hz) {
            return bad(format!(
                "mdf: need 0 <= f0_hz < f1_hz, got {} / {}",
                s.mdf.f0_hz, s.mdf.f1_hz
            ));
        }
        let alpha = self.anova_alpha();
        if !(alpha > 0.0 && alpha < 1.0) {
            return bad(format!("anova.alpha must be in (0, 1), got {alpha}"));
        }
        self.wm_params().validate().map_err(|e| Error::Config(e.to_string()))?;
        let theta = self.threshold_params().theta_hz;
        if !(theta > 0.0) {
            return bad(format!("threshold.theta_hz must be positive, got {theta}"));
        }
        Ok(())
    }
}
