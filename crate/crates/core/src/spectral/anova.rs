//! One-way ANOVA over median-frequency groups, and band selection from it.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::FeatureTrajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaResult {
    pub f_statistic: f64,
    pub p_value: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
}

/// One-way ANOVA F-test. Every group needs at least two observations.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::InsufficientObservations(format!(
            "need at least 2 groups, got {}",
            groups.len()
        )));
    }
    if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < 2) {
        return Err(Error::InsufficientObservations(format!(
            "group {i} has {} observation(s), need at least 2",
            g.len()
        )));
    }

    let n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (mean - grand).powi(2);
        ss_within += g.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    }
    let df_between = groups.len() - 1;
    let df_within = n - groups.len();

    let (f_statistic, p_value) = if ss_within == 0.0 {
        if ss_between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        let dist = FisherSnedecor::new(df_between as f64, df_within as f64)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        (f, dist.sf(f))
    };

    Ok(AnovaResult {
        f_statistic,
        p_value,
        df_between,
        df_within,
        ss_between,
        ss_within,
    })
}

/// Probe-time groups for one (channel, band) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCandidate {
    pub channel: String,
    pub band_index: usize,
    pub groups: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSelection {
    pub channel: String,
    pub band_index: usize,
    pub p_value: f64,
}

/// Candidates whose probe groups differ at `p < alpha`, ascending by p.
pub fn anova_band_select(candidates: &[BandCandidate], alpha: f64) -> Result<Vec<BandSelection>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let mut selected = Vec::new();
    for c in candidates {
        let res = one_way_anova(&c.groups)?;
        if res.p_value < alpha {
            selected.push(BandSelection {
                channel: c.channel.clone(),
                band_index: c.band_index,
                p_value: res.p_value,
            });
        }
    }
    selected.sort_by(|a, b| {
        a.p_value
            .total_cmp(&b.p_value)
            .then_with(|| a.channel.cmp(&b.channel))
            .then_with(|| a.band_index.cmp(&b.band_index))
    });
    Ok(selected)
}

/// Group trajectory values by probe minute.
///
/// Minute `m` is the interval `[(m - 1) * 60, m * 60]` s; a point belongs to
/// it when its whole segment `[T - segment_len, T]` lies inside. With 30 s
/// segments each group pools two points.
pub fn probe_groups(trajectory: &FeatureTrajectory, probe_minutes: &[f64], segment_len_s: f64) -> Vec<Vec<f64>> {
    const EPS: f64 = 1e-9;
    probe_minutes
        .iter()
        .map(|&m| {
            let (lo, hi) = ((m - 1.0) * 60.0, m * 60.0);
            trajectory
                .points()
                .iter()
                .filter(|p| p.t_s - segment_len_s >= lo - EPS && p.t_s <= hi + EPS)
                .map(|p| p.f_hz)
                .collect()
        })
        .collect()
}
