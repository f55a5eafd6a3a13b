use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{check_dim, Result};
use crate::geometry::FanBeamGeometry;
use crate::scalar::Real;

/// Ray or pixel weight sums below this are treated as empty.
pub const SUM_GUARD: f64 = 1e-12;

/// One-pass SART update with precomputed normalization sums.
pub struct Sart<'g, T: Real> {
    geom: &'g FanBeamGeometry<T>,
    inv_row_sums: Array2<T>,
    inv_col_sums: Array2<T>,
}

impl<'g, T: Real> Sart<'g, T> {
    pub fn new(geom: &'g FanBeamGeometry<T>) -> Self {
        let (rows, cols) = geom.row_column_sums();
        let guard = T::of(SUM_GUARD);
        let inv = |s: T| if s < guard { T::zero() } else { T::one() / s };
        Self { geom, inv_row_sums: rows.mapv(inv), inv_col_sums: cols.mapv(inv) }
    }

    pub fn geometry(&self) -> &FanBeamGeometry<T> {
        self.geom
    }

    /// `x + relaxation · Aᵀ[(p − A x) ⊘ A·1] ⊘ Aᵀ·1`, optionally clamped at zero.
    pub fn step(
        &self,
        x_prev: ArrayView2<'_, T>,
        data: ArrayView2<'_, T>,
        relaxation: T,
        nonneg: bool,
    ) -> Result<Array2<T>> {
        let ax = self.geom.forward_project(x_prev)?;
        self.step_with_projection(x_prev, ax.view(), data, relaxation, nonneg)
    }

    /// Same as [`step`](Self::step) with `A x_prev` supplied by the caller.
    pub fn step_with_projection(
        &self,
        x_prev: ArrayView2<'_, T>,
        ax_prev: ArrayView2<'_, T>,
        data: ArrayView2<'_, T>,
        relaxation: T,
        nonneg: bool,
    ) -> Result<Array2<T>> {
        check_dim("sart data", self.geom.sinogram_shape(), data.dim())?;
        check_dim("sart projection", self.geom.sinogram_shape(), ax_prev.dim())?;
        check_dim("sart image", self.geom.image_shape(), x_prev.dim())?;
        let mut ratio = &data - &ax_prev;
        ratio *= &self.inv_row_sums;
        let correction = self.geom.back_project(ratio.view())?;
        let mut x = x_prev.to_owned();
        Zip::from(&mut x).and(&correction).and(&self.inv_col_sums).for_each(|xv, &c, &w| {
            *xv += relaxation * c * w;
            if nonneg && *xv < T::zero() {
                *xv = T::zero();
            }
        });
        Ok(x)
    }
}

/// Single SART pass; computes the normalization sums on every call.
pub fn sart_step<T: Real>(
    x_prev: ArrayView2<'_, T>,
    data: ArrayView2<'_, T>,
    geom: &FanBeamGeometry<T>,
    relaxation: T,
    nonneg: bool,
) -> Result<Array2<T>> {
    Sart::new(geom).step(x_prev, data, relaxation, nonneg)
}
