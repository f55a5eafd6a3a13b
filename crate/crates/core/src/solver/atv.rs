//! Anisotropic TV denoising: `argmin_x w·(‖∇_H x‖₁ + ‖∇_V x‖₁) + ‖x − v‖²`.
//!
//! ADMM on the split `d_h = ∇_H x`, `d_v = ∇_V x` with scaled multipliers. The
//! x-update `(2I + ρ(∇_Hᵀ∇_H + ∇_Vᵀ∇_V)) x = 2v + ρ∇ᵀ(d + b)` is circulant and
//! solved with a 2-D FFT.

use ndarray::{Array2, ArrayView2, Zip};

use crate::circulant::GridCirculantSolver;
use crate::diff::{grad_h, grad_h_adjoint, grad_v, grad_v_adjoint};
use crate::scalar::{soft_threshold, Real};

/// ADMM penalty of the gradient split, relative to the unit fidelity weight.
pub const ATV_PENALTY: f64 = 1.0;

pub struct AtvDenoiser<T: Real> {
    shape: (usize, usize),
    penalty: T,
    solver: GridCirculantSolver<T>,
}

impl<T: Real> AtvDenoiser<T> {
    pub fn new(rows: usize, cols: usize) -> Self {
        let penalty = T::of(ATV_PENALTY);
        Self {
            shape: (rows, cols),
            penalty,
            solver: GridCirculantSolver::new(rows, cols, T::of(2.0), penalty),
        }
    }

    pub fn denoise(&self, v: ArrayView2<'_, T>, weight: T, iters: usize) -> Array2<T> {
        assert_eq!(v.dim(), self.shape, "image shape does not match the denoiser");
        if weight <= T::zero() || iters == 0 {
            return v.to_owned();
        }
        let rho = self.penalty;
        let tau = weight / rho;
        let two = T::of(2.0);
        let mut x = v.to_owned();
        let mut b_h = Array2::<T>::zeros(self.shape);
        let mut b_v = Array2::<T>::zeros(self.shape);
        for _ in 0..iters {
            let gh = grad_h(x.view());
            let gv = grad_v(x.view());
            let mut d_h = &gh - &b_h;
            d_h.mapv_inplace(|t| soft_threshold(t, tau));
            let mut d_v = &gv - &b_v;
            d_v.mapv_inplace(|t| soft_threshold(t, tau));

            // rhs = 2v + ρ ∇ᵀ(d + b)
            let mut rhs = grad_h_adjoint((&d_h + &b_h).view());
            rhs += &grad_v_adjoint((&d_v + &b_v).view());
            Zip::from(&mut rhs).and(&v).for_each(|r, &vv| *r = two * vv + rho * *r);
            x = self.solver.solve(rhs.view());

            Zip::from(&mut b_h).and(&d_h).and(&grad_h(x.view())).for_each(|b, &d, &g| *b += d - g);
            Zip::from(&mut b_v).and(&d_v).and(&grad_v(x.view())).for_each(|b, &d, &g| *b += d - g);
        }
        x
    }
}

/// One-shot wrapper around [`AtvDenoiser`].
pub fn atv_denoise<T: Real>(v: ArrayView2<'_, T>, weight: T, iters: usize) -> Array2<T> {
    let (r, c) = v.dim();
    AtvDenoiser::new(r, c).denoise(v, weight, iters)
}

/// `w·ATV(x) + ‖x − v‖²`
pub fn atv_objective<T: Real>(x: ArrayView2<'_, T>, v: ArrayView2<'_, T>, weight: T) -> T {
    let fid: T = Zip::from(x).and(v).fold(T::zero(), |acc, &a, &b| acc + (a - b) * (a - b));
    weight * crate::diff::anisotropic_tv(x) + fid
}
