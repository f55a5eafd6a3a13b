//! Cyclic first-order difference operators.
//!
//! `grad_v` differences along axis 0 (rows: projection views for a sinogram,
//! image rows for an image) and `grad_h` along axis 1. The last entry wraps to
//! the first, so both operators are circulant and `grad_*` of a constant is
//! exactly zero.

use ndarray::{Array2, ArrayView2, Axis, Zip};

use crate::scalar::Real;

/// `[∇_V a]_{j,i} = a_{j+1,i} - a_{j,i}` with row `V-1` wrapping to row 0.
pub fn grad_v<T: Real>(a: ArrayView2<'_, T>) -> Array2<T> {
    let (rows, cols) = a.dim();
    Array2::from_shape_fn((rows, cols), |(j, i)| a[[(j + 1) % rows, i]] - a[[j, i]])
}

/// `[∇_H a]_{j,i} = a_{j,i+1} - a_{j,i}` with column `U-1` wrapping to column 0.
pub fn grad_h<T: Real>(a: ArrayView2<'_, T>) -> Array2<T> {
    let (rows, cols) = a.dim();
    Array2::from_shape_fn((rows, cols), |(j, i)| a[[j, (i + 1) % cols]] - a[[j, i]])
}

/// Adjoint of [`grad_v`]: `[∇_Vᵀ g]_{j} = g_{j-1} - g_{j}` (cyclic).
pub fn grad_v_adjoint<T: Real>(g: ArrayView2<'_, T>) -> Array2<T> {
    let (rows, cols) = g.dim();
    Array2::from_shape_fn((rows, cols), |(j, i)| g[[(j + rows - 1) % rows, i]] - g[[j, i]])
}

/// Adjoint of [`grad_h`].
pub fn grad_h_adjoint<T: Real>(g: ArrayView2<'_, T>) -> Array2<T> {
    let (rows, cols) = g.dim();
    Array2::from_shape_fn((rows, cols), |(j, i)| g[[j, (i + cols - 1) % cols]] - g[[j, i]])
}

pub fn l1_norm<T: Real>(a: ArrayView2<'_, T>) -> T {
    a.iter().map(|v| v.abs()).sum()
}

/// Sum of Euclidean norms of the columns.
pub fn l21_norm<T: Real>(a: ArrayView2<'_, T>) -> T {
    a.axis_iter(Axis(1)).map(|col| col.iter().map(|v| *v * *v).sum::<T>().sqrt()).sum()
}

/// `‖∇_H x‖₁ + ‖∇_V x‖₁`
pub fn anisotropic_tv<T: Real>(x: ArrayView2<'_, T>) -> T {
    l1_norm(grad_h(x).view()) + l1_norm(grad_v(x).view())
}

pub fn sum_sq<T: Real>(a: ArrayView2<'_, T>) -> T {
    a.iter().map(|v| *v * *v).sum()
}

pub fn dot<T: Real>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> T {
    let mut acc = T::zero();
    Zip::from(a).and(b).for_each(|&x, &y| acc += x * y);
    acc
}

pub fn all_finite<T: Real>(a: ArrayView2<'_, T>) -> bool {
    a.iter().all(|v| v.is_finite())
}
