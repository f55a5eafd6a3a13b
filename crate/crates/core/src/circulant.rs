//! Linear solves with operators diagonalized by the DFT.
//!
//! Both solvers handle systems of the form `(a·I + b·DᵀD) z = rhs` where `D` is
//! a cyclic first-difference operator. `DᵀD` is circulant with eigenvalues
//! `4 sin²(πk/L)`, so the solve is a pointwise division in Fourier space.

use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// `4 sin²(πk/len)` for `k = 0..len`.
pub fn difference_eigenvalues<T: Real>(len: usize) -> Vec<T> {
    let len_f = T::of_usize(len);
    (0..len)
        .map(|k| {
            let s = (T::PI() * T::of_usize(k) / len_f).sin();
            T::of(4.0) * s * s
        })
        .collect()
}

/// Solves `(diag + coupling·∇_Vᵀ∇_V) z_i = rhs_i` independently for every
/// column `i` of a `V × U` array.
pub struct ColumnCirculantSolver<T: Real> {
    len: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// Fourier-domain reciprocal of the operator, already scaled by `1/len`.
    inv_spectrum: Vec<T>,
}

impl<T: Real> ColumnCirculantSolver<T> {
    pub fn new(len: usize, diag: T, coupling: T) -> Self {
        let mut planner = FftPlanner::new();
        let scale = T::of_usize(len);
        let inv_spectrum = difference_eigenvalues::<T>(len)
            .into_iter()
            .map(|e| T::one() / ((diag + coupling * e) * scale))
            .collect();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            inv_spectrum,
        }
    }

    pub fn solve(&self, rhs: ArrayView2<'_, T>) -> Array2<T> {
        let (rows, cols) = rhs.dim();
        assert_eq!(rows, self.len, "column length does not match the planned size");
        // column-contiguous buffer: one FFT of length V per detector column
        let mut buf: Vec<Complex<T>> = rhs.t().iter().map(|v| Complex::new(*v, T::zero())).collect();
        self.forward.process(&mut buf);
        for chunk in buf.chunks_mut(rows) {
            for (c, s) in chunk.iter_mut().zip(&self.inv_spectrum) {
                *c = c.scale(*s);
            }
        }
        self.inverse.process(&mut buf);
        Array2::from_shape_fn((rows, cols), |(j, i)| buf[i * rows + j].re)
    }
}

/// Solves `(diag + coupling·(∇_Hᵀ∇_H + ∇_Vᵀ∇_V)) z = rhs` on a periodic 2-D grid.
pub struct GridCirculantSolver<T: Real> {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
    /// Row-major `rows × cols`, scaled by `1/(rows·cols)`.
    inv_spectrum: Vec<T>,
}

impl<T: Real> GridCirculantSolver<T> {
    pub fn new(rows: usize, cols: usize, diag: T, coupling: T) -> Self {
        let mut planner = FftPlanner::new();
        let ev_r = difference_eigenvalues::<T>(rows);
        let ev_c = difference_eigenvalues::<T>(cols);
        let scale = T::of_usize(rows * cols);
        let mut inv_spectrum = Vec::with_capacity(rows * cols);
        for er in &ev_r {
            for ec in &ev_c {
                inv_spectrum.push(T::one() / ((diag + coupling * (*er + *ec)) * scale));
            }
        }
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
            inv_spectrum,
        }
    }

    pub fn solve(&self, rhs: ArrayView2<'_, T>) -> Array2<T> {
        let (rows, cols) = (self.rows, self.cols);
        assert_eq!(rhs.dim(), (rows, cols), "grid shape does not match the planned size");
        let mut buf: Vec<Complex<T>> = rhs.iter().map(|v| Complex::new(*v, T::zero())).collect();
        self.row_fwd.process(&mut buf);
        let mut tr = transpose(&buf, rows, cols);
        self.col_fwd.process(&mut tr);
        // tr is cols × rows: entry (c, r)
        for c in 0..cols {
            for r in 0..rows {
                let k = c * rows + r;
                tr[k] = tr[k].scale(self.inv_spectrum[r * cols + c]);
            }
        }
        self.col_inv.process(&mut tr);
        let mut buf = transpose(&tr, cols, rows);
        self.row_inv.process(&mut buf);
        Array2::from_shape_fn((rows, cols), |(r, c)| buf[r * cols + c].re)
    }
}

fn transpose<T: Copy>(src: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(src.len());
    for c in 0..cols {
        for r in 0..rows {
            out.push(src[r * cols + c]);
        }
    }
    out
}
