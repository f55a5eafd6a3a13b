//! Reconstruction fidelity and ring-artifact severity.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::baselines::moving_median;
use crate::error::{check_dim, Result};
use crate::scalar::Real;

/// Radial moving-median window (in polar samples) of [`ring_energy`].
pub const RING_SMOOTH_WINDOW: usize = 9;

/// Pixels excluded at the rim of the default rmse mask.
pub const MASK_RIM: f64 = 2.0;

/// Boolean support mask, `true` where pixels count.
pub type Mask = Array2<bool>;

/// Inscribed circle of an `n × n` image minus `rim` pixels.
pub fn circular_mask(n: usize, rim: f64) -> Mask {
    let c = (n as f64 - 1.0) / 2.0;
    let radius = n as f64 / 2.0 - rim;
    Array2::from_shape_fn((n, n), |(r, col)| {
        let (dy, dx) = (r as f64 - c, col as f64 - c);
        (dx * dx + dy * dy).sqrt() <= radius
    })
}

pub fn default_mask(n: usize) -> Mask {
    circular_mask(n, MASK_RIM)
}

/// Root-mean-square difference over the masked pixels (all pixels if `None`).
pub fn rmse<T: Real>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>, mask: Option<&Mask>) -> Result<f64> {
    check_dim("rmse", a.dim(), b.dim())?;
    if let Some(m) = mask {
        check_dim("rmse mask", a.dim(), m.dim())?;
    }
    let (mut acc, mut count) = (0.0f64, 0usize);
    for ((idx, x), y) in a.indexed_iter().zip(b.iter()) {
        if mask.is_none_or(|m| m[idx]) {
            let d = (*x - *y).as_f64();
            acc += d * d;
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { (acc / count as f64).sqrt() })
}

/// Image resampled on rays from the rotation center; rows are radii.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarImage<T> {
    /// `R × Θ`
    pub data: Array2<T>,
    /// Radial step in pixels; sample `k` sits at radius `(k + 1)·radial_step`.
    pub radial_step: f64,
    pub angular_step: f64,
}

/// Bilinear sample with clamp-to-edge.
fn bilinear<T: Real>(img: ArrayView2<'_, T>, row: f64, col: f64) -> T {
    let (rows, cols) = img.dim();
    let r = row.clamp(0.0, (rows - 1) as f64);
    let c = col.clamp(0.0, (cols - 1) as f64);
    let (r0, c0) = (r.floor() as usize, c.floor() as usize);
    let (r1, c1) = ((r0 + 1).min(rows - 1), (c0 + 1).min(cols - 1));
    let (fr, fc) = (T::of(r - r0 as f64), T::of(c - c0 as f64));
    let one = T::one();
    let top = img[[r0, c0]] * (one - fc) + img[[r0, c1]] * fc;
    let bottom = img[[r1, c0]] * (one - fc) + img[[r1, c1]] * fc;
    top * (one - fr) + bottom * fr
}

/// Samples `radii × angles` points with radii spanning `(0, n/2]` pixels.
pub fn polar_resample<T: Real>(x: ArrayView2<'_, T>, radii: usize, angles: usize) -> PolarImage<T> {
    assert!(radii >= 2 && angles >= 2, "polar grid needs at least 2 × 2 samples");
    let (rows, cols) = x.dim();
    let half = rows.min(cols) as f64 / 2.0;
    let cr = (rows as f64 - 1.0) / 2.0;
    let cc = (cols as f64 - 1.0) / 2.0;
    let radial_step = half / radii as f64;
    let angular_step = std::f64::consts::TAU / angles as f64;
    let data = Array2::from_shape_fn((radii, angles), |(k, m)| {
        let rad = (k + 1) as f64 * radial_step;
        let (s, c) = (m as f64 * angular_step).sin_cos();
        bilinear(x, cr - rad * s, cc + rad * c)
    });
    PolarImage { data, radial_step, angular_step }
}

/// Angular-mean radial profile of a polar image.
pub fn radial_profile<T: Real>(polar: &PolarImage<T>) -> Array1<f64> {
    polar
        .data
        .axis_iter(Axis(0))
        .map(|row| row.iter().map(|v| v.as_f64()).sum::<f64>() / row.len() as f64)
        .collect()
}

/// `‖μ − smooth(μ)‖₂` of the angular-mean profile `μ(r)`, sampled every half
/// pixel over `4n` angles. `smooth` is a moving median, which passes step edges
/// of piecewise-constant objects untouched but removes structures narrower
/// than half the window, so rings inflate the score and object edges do not.
pub fn ring_energy<T: Real>(x: ArrayView2<'_, T>) -> f64 {
    let n = x.nrows().min(x.ncols());
    let polar = polar_resample(x, n.max(2), (4 * n).max(8));
    let profile = radial_profile(&polar);
    let smooth = moving_median(profile.as_slice().expect("contiguous"), RING_SMOOTH_WINDOW / 2);
    profile.iter().zip(&smooth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rmse_uncorrected: f64,
    pub rmse_corrected: f64,
    pub ring_energy_uncorrected: f64,
    pub ring_energy_corrected: f64,
    pub ring_energy_ground_truth: f64,
}

impl MetricsReport {
    pub fn compute<T: Real>(
        ground_truth: ArrayView2<'_, T>,
        uncorrected: ArrayView2<'_, T>,
        corrected: ArrayView2<'_, T>,
    ) -> Result<Self> {
        let mask = default_mask(ground_truth.nrows());
        Ok(Self {
            rmse_uncorrected: rmse(uncorrected, ground_truth, Some(&mask))?,
            rmse_corrected: rmse(corrected, ground_truth, Some(&mask))?,
            ring_energy_uncorrected: ring_energy(uncorrected),
            ring_energy_corrected: ring_energy(corrected),
            ring_energy_ground_truth: ring_energy(ground_truth),
        })
    }
}
