//! Piecewise-constant disk phantoms.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A disk in normalized coordinates: the image spans `[-1, 1]` on both axes,
/// `+y` pointing up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomSpec {
    pub image_size: usize,
    /// Attenuation inside the unit circle but outside every disk.
    pub background: f64,
    /// Later disks are painted over earlier ones.
    pub disks: Vec<Disk>,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self::water_and_bone(256)
    }
}

impl PhantomSpec {
    /// Water cylinder (0.02/mm, radius 0.8) with two bone inserts (0.05/mm).
    pub fn water_and_bone(image_size: usize) -> Self {
        Self {
            image_size,
            background: 0.0,
            disks: vec![
                Disk { center_x: 0.0, center_y: 0.0, radius: 0.8, value: 0.02 },
                Disk { center_x: -0.35, center_y: 0.15, radius: 0.18, value: 0.05 },
                Disk { center_x: 0.3, center_y: -0.3, radius: 0.18, value: 0.05 },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_size == 0 {
            return Err(Error::Validation("phantom image_size must be positive".into()));
        }
        if !(self.background.is_finite() && self.background >= 0.0) {
            return Err(Error::Validation("phantom background must be finite and >= 0".into()));
        }
        for (k, d) in self.disks.iter().enumerate() {
            let reach = d.center_x.hypot(d.center_y) + d.radius;
            if !(d.radius > 0.0) || !reach.is_finite() || reach > 1.0 + 1e-12 {
                return Err(Error::Validation(format!(
                    "disk {k} does not lie inside the unit circle (|center| + radius = {reach})"
                )));
            }
            if !(d.value.is_finite() && d.value >= 0.0) {
                return Err(Error::Validation(format!("disk {k} has negative value {}", d.value)));
            }
        }
        Ok(())
    }

    pub fn generate<T: Real>(&self) -> Result<Array2<T>> {
        self.validate()?;
        let n = self.image_size;
        let nf = n as f64;
        Ok(Array2::from_shape_fn((n, n), |(row, col)| {
            // integer numerators keep mirrored pixels exactly symmetric
            let x = (2.0 * col as f64 + 1.0 - nf) / nf;
            let y = (nf - 2.0 * row as f64 - 1.0) / nf;
            let value = if x * x + y * y > 1.0 {
                0.0
            } else {
                self.disks
                    .iter()
                    .rev()
                    .find(|d| {
                        let (ex, ey) = (x - d.center_x, y - d.center_y);
                        ex * ex + ey * ey <= d.radius * d.radius
                    })
                    .map_or(self.background, |d| d.value)
            };
            T::of(value)
        }))
    }
}
