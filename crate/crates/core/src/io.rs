//! On-disk formats.
//!
//! Arrays are stored as raw little-endian `f64`, row-major, next to a JSON
//! sidecar named `<file>.json`. Sinogram sidecars hold
//! `{"views", "detectors", "domain"}`, image sidecars `{"rows", "cols"}`.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection_model::{Domain, Sinogram};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinogramHeader {
    pub views: usize,
    pub detectors: usize,
    pub domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageHeader {
    pub rows: usize,
    pub cols: usize,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_raw<T: Real>(path: &Path, data: ArrayView2<'_, T>) -> Result<()> {
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for v in data.iter() {
        bytes.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_raw<T: Real>(path: &Path, shape: (usize, usize)) -> Result<Array2<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = shape.0 * shape.1 * 8;
    if bytes.len() != expected {
        return Err(Error::parse(
            path,
            format!("expected {expected} bytes for shape {shape:?}, found {}", bytes.len()),
        ));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    Ok(Array2::from_shape_vec(shape, values).expect("length checked"))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<S: for<'de> Deserialize<'de>>(path: &Path) -> Result<S> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}

pub fn write_sinogram<T: Real>(path: &Path, sino: &Sinogram<T>) -> Result<()> {
    write_raw(path, sino.view())?;
    write_json(
        &sidecar_path(path),
        &SinogramHeader { views: sino.num_views(), detectors: sino.num_detectors(), domain: sino.domain },
    )
}

pub fn read_sinogram<T: Real>(path: &Path) -> Result<Sinogram<T>> {
    let header: SinogramHeader = read_json(&sidecar_path(path))?;
    let data = read_raw(path, (header.views, header.detectors))?;
    Ok(Sinogram::new(data, header.domain))
}

pub fn write_image<T: Real>(path: &Path, image: ArrayView2<'_, T>) -> Result<()> {
    write_raw(path, image)?;
    let (rows, cols) = image.dim();
    write_json(&sidecar_path(path), &ImageHeader { rows, cols })
}

pub fn read_image<T: Real>(path: &Path) -> Result<Array2<T>> {
    let header: ImageHeader = read_json(&sidecar_path(path))?;
    read_raw(path, (header.rows, header.cols))
}

/// Maps `value <= lo` to 0, `value >= hi` to 255, linear in between.
pub fn window_to_u8(value: f64, lo: f64, hi: f64) -> u8 {
    if !(value > lo) {
        0
    } else if value >= hi {
        255
    } else {
        ((value - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
    }
}

/// 8-bit grayscale rendering of an image with the display window `[lo, hi]`.
pub fn render_png<T: Real>(path: &Path, image: ArrayView2<'_, T>, lo: f64, hi: f64) -> Result<()> {
    if !(hi > lo) {
        return Err(Error::Config(format!("render window needs hi > lo, got [{lo}, {hi}]")));
    }
    let (rows, cols) = image.dim();
    let mut out = GrayImage::new(cols as u32, rows as u32);
    for ((r, c), v) in image.indexed_iter() {
        out.put_pixel(c as u32, r as u32, Luma([window_to_u8(v.as_f64(), lo, hi)]));
    }
    out.save(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::parse(path, other),
    })
}
