//! Flat-panel fan-beam geometry and a Joseph-style interpolating projector.
//!
//! Image pixel `(row j, col i)` has its center at
//! `x = (i - c)·pitch`, `y = (c - j)·pitch` with `c = (n - 1)/2`, so row 0 is
//! the top of the image. For view angle `β` the source sits at
//! `D_so·(cos β, sin β)`, the detector is perpendicular to the central ray at
//! distance `D_sd` from the source, and detector unit `u` is offset by
//! `(u - (U - 1)/2)·detector_pitch` along `(-sin β, cos β)`.
//!
//! Each ray is sampled once per pixel column (or row, whichever axis the ray
//! is closer to) and linearly interpolated between the two nearest pixels on
//! the other axis. Forward and back projection share the same weight
//! generator, so they are exact adjoints of each other.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

/// Number of view chunks back projection accumulates independently before
/// the fixed-order reduction. Fixed so results do not depend on thread count.
const BACKPROJECT_CHUNKS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FanBeamGeometry<T> {
    source_to_detector: T,
    source_to_center: T,
    detector_pitch: T,
    num_detectors: usize,
    view_angles: Vec<T>,
    image_size: usize,
    pixel_pitch: T,
    /// Per view `(cos β, sin β)`.
    trig: Vec<(T, T)>,
}

impl<T: Real> FanBeamGeometry<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        source_to_detector: T,
        source_to_center: T,
        detector_pitch: T,
        num_detectors: usize,
        view_angles: Vec<T>,
        image_size: usize,
        pixel_pitch: T,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::Validation(msg));
        if !(source_to_center > T::zero() && source_to_detector > source_to_center) {
            return invalid(format!(
                "need source_to_detector > source_to_center > 0, got {source_to_detector} and {source_to_center}"
            ));
        }
        if !(detector_pitch > T::zero() && pixel_pitch > T::zero()) {
            return invalid("detector and pixel pitch must be positive".into());
        }
        if num_detectors < 2 {
            return invalid(format!("need at least 2 detector units, got {num_detectors}"));
        }
        if view_angles.is_empty() {
            return invalid("need at least one view".into());
        }
        if image_size == 0 {
            return invalid("image size must be positive".into());
        }
        let two_pi = T::PI() + T::PI();
        if view_angles.iter().any(|a| !a.is_finite() || *a < T::zero() || *a >= two_pi) {
            return invalid("view angles must lie in [0, 2π)".into());
        }
        if view_angles.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("view angles must be strictly increasing".into());
        }
        let half_width = T::of_usize(image_size) * pixel_pitch / T::of(2.0);
        if source_to_center <= half_width * T::SQRT_2() {
            return invalid("source must lie outside the image square".into());
        }
        let half_detector = T::of_usize(num_detectors) * detector_pitch / T::of(2.0);
        let fan_half_angle = (half_detector / source_to_detector).atan();
        let needed = (half_width / source_to_center).atan();
        if fan_half_angle < needed {
            return invalid(format!(
                "fan half-angle {fan_half_angle} rad does not cover the image (needs {needed} rad)"
            ));
        }
        let trig = view_angles.iter().map(|a| (a.cos(), a.sin())).collect();
        Ok(Self {
            source_to_detector,
            source_to_center,
            detector_pitch,
            num_detectors,
            view_angles,
            image_size,
            pixel_pitch,
            trig,
        })
    }

    /// Geometry with `num_views` angles spaced uniformly over `[0, 2π)`.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        source_to_detector: T,
        source_to_center: T,
        detector_pitch: T,
        num_detectors: usize,
        num_views: usize,
        image_size: usize,
        pixel_pitch: T,
    ) -> Result<Self> {
        Self::new(
            source_to_detector,
            source_to_center,
            detector_pitch,
            num_detectors,
            uniform_angles(num_views),
            image_size,
            pixel_pitch,
        )
    }

    /// Desk-scale scanner: 256² image, 360 views, 363 detector units, with
    /// the source distances of the full-size device.
    pub fn desk_default() -> Self {
        Self::uniform(T::of(433.507), T::of(205.0), T::of(155.1 / 363.0), 363, 360, 256, T::of(0.28))
            .expect("default geometry is valid")
    }

    /// Full-size device: 720 views, 2068 units of 0.075 mm, 2068² image.
    pub fn full_scale() -> Self {
        Self::uniform(T::of(433.507), T::of(205.0), T::of(0.075), 2068, 720, 2068, T::of(0.0349))
            .expect("full-scale geometry is valid")
    }

    pub fn source_to_detector(&self) -> T {
        self.source_to_detector
    }

    pub fn source_to_center(&self) -> T {
        self.source_to_center
    }

    pub fn detector_pitch(&self) -> T {
        self.detector_pitch
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    pub fn num_views(&self) -> usize {
        self.view_angles.len()
    }

    pub fn view_angles(&self) -> &[T] {
        &self.view_angles
    }

    pub fn image_size(&self) -> usize {
        self.image_size
    }

    pub fn pixel_pitch(&self) -> T {
        self.pixel_pitch
    }

    /// `(V, U)`
    pub fn sinogram_shape(&self) -> (usize, usize) {
        (self.num_views(), self.num_detectors)
    }

    /// `(n, n)`
    pub fn image_shape(&self) -> (usize, usize) {
        (self.image_size, self.image_size)
    }

    /// Calls `visit(row, col, weight)` for every pixel touched by the ray of
    /// `(view, detector)`. Weights are path lengths in the units of the pitches.
    #[inline]
    fn trace_ray<F: FnMut(usize, usize, T)>(&self, view: usize, detector: usize, mut visit: F) {
        let n = self.image_size;
        let pp = self.pixel_pitch;
        let center = T::of_usize(n - 1) / T::of(2.0);
        let (cb, sb) = self.trig[view];

        let src_x = self.source_to_center * cb;
        let src_y = self.source_to_center * sb;
        let offset =
            (T::of_usize(detector) - T::of_usize(self.num_detectors - 1) / T::of(2.0)) * self.detector_pitch;
        let det_x = src_x - self.source_to_detector * cb - offset * sb;
        let det_y = src_y - self.source_to_detector * sb + offset * cb;
        let dx = det_x - src_x;
        let dy = det_y - src_y;
        let len = (dx * dx + dy * dy).sqrt();

        // Along the major axis index k the fractional minor index is f0 + slope·k.
        let x_major = dx.abs() >= dy.abs();
        let (weight, f0, slope) = if x_major {
            let s = dy / dx;
            let y0 = src_y + (-center * pp - src_x) * s;
            (pp * len / dx.abs(), center - y0 / pp, -s)
        } else {
            let s = dx / dy;
            let x0 = src_x + (center * pp - src_y) * s;
            (pp * len / dy.abs(), x0 / pp + center, -s)
        };
        let (lo, hi) = major_range(f0, slope, n);
        let n_f = T::of_usize(n);
        for k in lo..hi {
            let f = f0 + slope * T::of_usize(k);
            if f <= -T::one() || f >= n_f {
                continue;
            }
            let lower = f.floor();
            let frac = f - lower;
            let m0 = lower.to_i64().unwrap_or(-2);
            let emit = |m: usize, w: T, visit: &mut F| {
                if x_major {
                    visit(m, k, w)
                } else {
                    visit(k, m, w)
                }
            };
            if m0 >= 0 {
                emit(m0 as usize, weight * (T::one() - frac), &mut visit);
            }
            if m0 + 1 < n as i64 && frac > T::zero() {
                emit((m0 + 1) as usize, weight * frac, &mut visit);
            }
        }
    }

    /// Line integrals `A x` for every (view, detector) pair, shape `V × U`.
    pub fn forward_project(&self, image: ArrayView2<'_, T>) -> Result<Array2<T>> {
        check_dim("forward_project image", self.image_shape(), image.dim())?;
        let (views, dets) = self.sinogram_shape();
        let n = self.image_size;
        let image = image.as_standard_layout();
        let pix = image.as_slice().expect("standard layout");
        let rows: Vec<Vec<T>> = (0..views)
            .into_par_iter()
            .map(|v| {
                (0..dets)
                    .map(|u| {
                        let mut acc = T::zero();
                        self.trace_ray(v, u, |r, c, w| acc += w * pix[r * n + c]);
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(Array2::from_shape_vec((views, dets), rows.concat()).expect("shape matches"))
    }

    /// Exact adjoint `Aᵀ y` of [`forward_project`](Self::forward_project).
    pub fn back_project(&self, sino: ArrayView2<'_, T>) -> Result<Array2<T>> {
        check_dim("back_project sinogram", self.sinogram_shape(), sino.dim())?;
        let views = self.num_views();
        let chunk = views.div_ceil(BACKPROJECT_CHUNKS);
        let partials: Vec<Vec<T>> = (0..views)
            .step_by(chunk)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|start| {
                let n = self.image_size;
                let mut img = vec![T::zero(); n * n];
                for v in start..(start + chunk).min(views) {
                    for u in 0..self.num_detectors {
                        let val = sino[[v, u]];
                        if val == T::zero() {
                            continue;
                        }
                        self.trace_ray(v, u, |r, c, w| img[r * n + c] += w * val);
                    }
                }
                img
            })
            .collect();
        let mut out = vec![T::zero(); self.image_size * self.image_size];
        for p in partials {
            out.iter_mut().zip(&p).for_each(|(o, v)| *o += *v);
        }
        Ok(Array2::from_shape_vec(self.image_shape(), out).expect("shape matches"))
    }

    /// `(A·1, Aᵀ·1)`: per-ray and per-pixel weight sums used by SART.
    pub fn row_column_sums(&self) -> (Array2<T>, Array2<T>) {
        let ones_img = Array2::from_elem(self.image_shape(), T::one());
        let ones_sino = Array2::from_elem(self.sinogram_shape(), T::one());
        let rows = self.forward_project(ones_img.view()).expect("shape matches");
        let cols = self.back_project(ones_sino.view()).expect("shape matches");
        (rows, cols)
    }
}

/// Major-axis indices `k` for which `f0 + slope·k` may lie in `(-1, n)`.
fn major_range<T: Real>(f0: T, slope: T, n: usize) -> (usize, usize) {
    if slope == T::zero() {
        return (0, n);
    }
    let a = (-T::one() - f0) / slope;
    let b = (T::of_usize(n) - f0) / slope;
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let lo = a.floor().max(T::zero()).min(T::of_usize(n));
    let hi = (b.ceil() + T::one()).max(T::zero()).min(T::of_usize(n));
    (lo.to_usize().unwrap_or(0), hi.to_usize().unwrap_or(n))
}

pub fn uniform_angles<T: Real>(num_views: usize) -> Vec<T> {
    let step = (T::PI() + T::PI()) / T::of_usize(num_views.max(1));
    (0..num_views).map(|k| T::of_usize(k) * step).collect()
}
