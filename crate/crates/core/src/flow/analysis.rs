//! Feature extraction from sampled series: capacity times, zero crossings
//! and oscillation periods.

use crate::error::{Error, Result};

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn refine_maximum(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// First time a sampled entropy attains `capacity`.
///
/// Scans for the first local maximum whose sampled value is within
/// `coarse_tol` of `capacity`, then refines it with `entropy_at` by
/// golden-section search. Returns `None` if the refined peak still misses
/// `capacity` by more than `fine_tol`.
pub fn first_capacity_time(
    times: &[f64],
    values: &[f64],
    capacity: f64,
    entropy_at: impl Fn(f64) -> f64,
    coarse_tol: f64,
    fine_tol: f64,
) -> Option<f64> {
    let n = values.len();
    for k in 1..n.saturating_sub(1) {
        let is_peak = values[k] >= values[k - 1] && values[k] >= values[k + 1];
        if is_peak && values[k] >= capacity - coarse_tol {
            let (t, s) = refine_maximum(&entropy_at, times[k - 1], times[k + 1], 1e-10);
            if s >= capacity - fine_tol {
                return Some(t);
            }
        }
    }
    None
}

/// Linearly interpolated time of the first change from positive to
/// non-positive values after the series has become positive.
pub fn first_downward_zero_crossing(times: &[f64], values: &[f64]) -> Option<f64> {
    let mut seen_positive = false;
    for k in 1..values.len() {
        seen_positive |= values[k - 1] > 0.0;
        if seen_positive && values[k - 1] > 0.0 && values[k] <= 0.0 {
            let (t0, t1) = (times[k - 1], times[k]);
            let (v0, v1) = (values[k - 1], values[k]);
            return Some(t0 + (t1 - t0) * v0 / (v0 - v1));
        }
    }
    None
}

/// Indices of local maxima with topographic prominence of at least
/// `min_prominence`.
pub fn prominent_peaks(values: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    for k in 1..n.saturating_sub(1) {
        if !(values[k] > values[k - 1] && values[k] >= values[k + 1]) {
            continue;
        }
        let peak = values[k];
        let mut left_min = peak;
        for j in (0..k).rev() {
            if values[j] > peak {
                break;
            }
            left_min = left_min.min(values[j]);
        }
        let mut right_min = peak;
        for &v in &values[k + 1..] {
            if v > peak {
                break;
            }
            right_min = right_min.min(v);
        }
        if peak - left_min.max(right_min) >= min_prominence {
            out.push(k);
        }
    }
    out
}

/// Mean spacing of the peaks whose prominence is at least
/// `prominence_fraction` of the series range.
pub fn period_by_peak_spacing(times: &[f64], values: &[f64], prominence_fraction: f64) -> Result<f64> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let peaks = prominent_peaks(values, prominence_fraction * (max - min));
    if peaks.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least two prominent peaks, found {}", peaks.len())));
    }
    let first = times[peaks[0]];
    let last = times[*peaks.last().expect("non-empty")];
    Ok((last - first) / (peaks.len() - 1) as f64)
}
