use crate::error::{Error, Result};

/// Replace samples farther than `k_sd` standard deviations from the mean.
///
/// Mean and (sample) standard deviation are taken once over the whole
/// sequence. Flagged samples are linearly interpolated from the nearest
/// surviving neighbours; flagged runs at either end take the nearest
/// surviving value. The output has the input's length, so the sampling
/// grid is untouched.
pub fn remove_outliers(samples: &[f64], k_sd: f64) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "outlier removal needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !(k_sd > 0.0 && k_sd.is_finite()) {
        return Err(Error::InvalidParameter(format!("k_sd must be positive, got {k_sd}")));
    }

    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let bound = k_sd * var.sqrt();

    let keep: Vec<bool> = samples.iter().map(|x| (x - mean).abs() <= bound).collect();
    if !keep.iter().any(|&k| k) {
        return Err(Error::DegenerateSignal);
    }
    if keep.iter().all(|&k| k) {
        return Ok(samples.to_vec());
    }

    let mut out = samples.to_vec();
    let mut prev: Option<usize> = None;
    let mut i = 0;
    while i < samples.len() {
        if keep[i] {
            prev = Some(i);
            i += 1;
            continue;
        }
        let run_end = (i..samples.len()).find(|&j| keep[j]);
        match (prev, run_end) {
            (Some(a), Some(b)) => {
                let (ya, yb) = (samples[a], samples[b]);
                for (j, slot) in out.iter_mut().enumerate().take(b).skip(i) {
                    let w = (j - a) as f64 / (b - a) as f64;
                    *slot = ya + w * (yb - ya);
                }
            }
            (Some(a), None) => out[i..].iter_mut().for_each(|s| *s = samples[a]),
            (None, Some(b)) => out[i..b].iter_mut().for_each(|s| *s = samples[b]),
            (None, None) => unreachable!("at least one sample survives"),
        }
        i = run_end.unwrap_or(samples.len());
    }
    Ok(out)
}
