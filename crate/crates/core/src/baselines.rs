//! Mean-projection correction with a view-constant gain per detector unit.
//!
//! The ideal mean projection is estimated from the measured one with a moving
//! median followed by a Gaussian blur; the gain of unit `i` is the ratio of
//! the smoothed to the measured mean.

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::projection_model::{Domain, Sinogram};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct MeanProjection<T> {
    /// Column means of the normalized counts.
    pub mean: Vec<T>,
    /// Smoothed estimate of the ideal mean projection.
    pub smoothed: Vec<T>,
    /// Per-detector compensation gain `smoothed / mean`.
    pub gains: Vec<T>,
}

/// `m_i = (1/V) Σ_j q_{j,i}`
pub fn column_mean<T: Real>(q: &Sinogram<T>) -> Vec<T> {
    let views = T::of_usize(q.num_views().max(1));
    q.data.axis_iter(Axis(1)).map(|col| col.iter().copied().sum::<T>() / views).collect()
}

/// Moving median with a window of `2·radius + 1`, clamped at both ends.
pub fn moving_median<T: Real>(values: &[T], radius: usize) -> Vec<T> {
    let len = values.len();
    let mut window = Vec::with_capacity(2 * radius + 1);
    (0..len)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(len);
            window.clear();
            window.extend_from_slice(&values[lo..hi]);
            window.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            let mid = window.len() / 2;
            if window.len() % 2 == 1 {
                window[mid]
            } else {
                (window[mid - 1] + window[mid]) / T::of(2.0)
            }
        })
        .collect()
}

/// Gaussian blur truncated at 3σ; weights are renormalized near the ends.
pub fn gaussian_blur<T: Real>(values: &[T], sigma: f64) -> Vec<T> {
    if sigma <= 0.0 {
        return values.to_vec();
    }
    let reach = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> =
        (-reach..=reach).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let len = values.len() as isize;
    (0..len)
        .map(|i| {
            let (mut acc, mut norm) = (0.0, 0.0);
            for (k, w) in kernel.iter().enumerate() {
                let j = i + k as isize - reach;
                if (0..len).contains(&j) {
                    acc += w * values[j as usize].as_f64();
                    norm += w;
                }
            }
            T::of(acc / norm)
        })
        .collect()
}

/// Returns the corrected normalized sinogram `q_{j,i} · s_i` and the fitted
/// mean projection.
pub fn mean_projection_correct<T: Real>(
    q: &Sinogram<T>,
    smoothing_radius: usize,
) -> Result<(Sinogram<T>, MeanProjection<T>)> {
    if q.domain != Domain::NormalizedCounts {
        return Err(Error::Validation("mean projection correction needs normalized counts".into()));
    }
    if smoothing_radius == 0 {
        return Err(Error::Config("smoothing_radius must be at least 1".into()));
    }
    let mean = column_mean(q);
    if let Some(i) = mean.iter().position(|m| !(*m > T::zero() && m.is_finite())) {
        return Err(Error::Validation(format!(
            "mean projection of detector unit {i} is not positive ({})",
            mean[i]
        )));
    }
    let median = moving_median(&mean, smoothing_radius);
    let smoothed = gaussian_blur(&median, smoothing_radius as f64 / 2.0);
    let gains: Vec<T> = smoothed.iter().zip(&mean).map(|(s, m)| *s / *m).collect();
    let mut data: Array2<T> = q.data.clone();
    for mut row in data.rows_mut() {
        for (v, g) in row.iter_mut().zip(&gains) {
            *v *= *g;
        }
    }
    Ok((Sinogram::new(data, Domain::NormalizedCounts), MeanProjection { mean, smoothed, gains }))
}
