//! ADMM updates for the offset sub-problem
//! `min_S ½‖S + r‖² + λ2‖∇_V S‖₁ + λ3‖S‖₂,₁` with `r = A x − Y`,
//! split as `H = ∇_V S`, `W = S`.

use ndarray::{Array2, ArrayView2, Axis, Zip};

use crate::circulant::ColumnCirculantSolver;
use crate::diff::{grad_v, grad_v_adjoint};
use crate::error::{check_dim, Error, Result};
use crate::scalar::{soft_threshold, Real};

/// Split variables and Lagrange multipliers of the offset ADMM.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmVars<T> {
    pub h: Array2<T>,
    pub w: Array2<T>,
    pub gamma1: Array2<T>,
    pub gamma2: Array2<T>,
}

impl<T: Real> AdmmVars<T> {
    pub fn zeros(shape: (usize, usize)) -> Self {
        Self {
            h: Array2::zeros(shape),
            w: Array2::zeros(shape),
            gamma1: Array2::zeros(shape),
            gamma2: Array2::zeros(shape),
        }
    }
}

pub(crate) fn check_penalties(mu1: f64, mu2: f64) -> Result<()> {
    if mu1 > 0.0 && mu2 > 0.0 && mu1.is_finite() && mu2.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("penalties mu1, mu2 must be > 0, got {mu1}, {mu2}")))
    }
}

/// Exact S-minimizer of the augmented Lagrangian, one circulant system per
/// detector column:
/// `((1 + μ2)I + μ1∇_Vᵀ∇_V) S = −r + ∇_Vᵀ(γ1 + μ1 H) + γ2 + μ2 W`.
pub struct OffsetSolver<T: Real> {
    mu1: T,
    mu2: T,
    columns: ColumnCirculantSolver<T>,
}

impl<T: Real> OffsetSolver<T> {
    pub fn new(num_views: usize, mu1: f64, mu2: f64) -> Result<Self> {
        check_penalties(mu1, mu2)?;
        let (m1, m2) = (T::of(mu1), T::of(mu2));
        Ok(Self { mu1: m1, mu2: m2, columns: ColumnCirculantSolver::new(num_views, T::one() + m2, m1) })
    }

    pub fn rhs(&self, residual: ArrayView2<'_, T>, vars: &AdmmVars<T>) -> Array2<T> {
        let mut inner = vars.h.clone();
        Zip::from(&mut inner).and(&vars.gamma1).for_each(|h, &g| *h = g + self.mu1 * *h);
        let mut rhs = grad_v_adjoint(inner.view());
        Zip::from(&mut rhs)
            .and(residual)
            .and(&vars.gamma2)
            .and(&vars.w)
            .for_each(|out, &r, &g2, &w| *out += g2 + self.mu2 * w - r);
        rhs
    }

    pub fn solve(&self, residual: ArrayView2<'_, T>, vars: &AdmmVars<T>) -> Result<Array2<T>> {
        check_dim("offset residual", vars.h.dim(), residual.dim())?;
        Ok(self.columns.solve(self.rhs(residual, vars).view()))
    }
}

/// Convenience wrapper that plans a fresh [`OffsetSolver`].
pub fn s_subproblem_solve<T: Real>(
    residual: ArrayView2<'_, T>,
    vars: &AdmmVars<T>,
    mu1: f64,
    mu2: f64,
) -> Result<Array2<T>> {
    OffsetSolver::new(residual.nrows(), mu1, mu2)?.solve(residual, vars)
}

/// `H = soft(∇_V S − γ1/μ1, λ2/μ1)`
pub fn h_update<T: Real>(
    s: ArrayView2<'_, T>,
    gamma1: ArrayView2<'_, T>,
    lambda2: f64,
    mu1: f64,
) -> Array2<T> {
    let mu = T::of(mu1);
    let tau = T::of(lambda2) / mu;
    let mut h = grad_v(s);
    Zip::from(&mut h).and(gamma1).for_each(|h, &g| *h = soft_threshold(*h - g / mu, tau));
    h
}

/// Column-wise group shrinkage of `Z = S − γ2/μ2` with threshold `λ3/μ2`.
pub fn w_update<T: Real>(
    s: ArrayView2<'_, T>,
    gamma2: ArrayView2<'_, T>,
    lambda3: f64,
    mu2: f64,
) -> Array2<T> {
    let mu = T::of(mu2);
    let tau = T::of(lambda3) / mu;
    let mut z = Array2::zeros(s.dim());
    Zip::from(&mut z).and(s).and(gamma2).for_each(|z, &s, &g| *z = s - g / mu);
    for mut col in z.axis_iter_mut(Axis(1)) {
        let norm = col.iter().map(|v| *v * *v).sum::<T>().sqrt();
        let scale = if norm > tau { T::one() - tau / norm } else { T::zero() };
        col.mapv_inplace(|v| v * scale);
    }
    z
}

/// `γ1 += μ1(H − ∇_V S)`, `γ2 += μ2(W − S)`.
pub fn dual_update<T: Real>(vars: &mut AdmmVars<T>, s: ArrayView2<'_, T>, mu1: f64, mu2: f64) -> Result<()> {
    check_penalties(mu1, mu2)?;
    check_dim("dual update", vars.h.dim(), s.dim())?;
    let (m1, m2) = (T::of(mu1), T::of(mu2));
    let gs = grad_v(s);
    Zip::from(&mut vars.gamma1).and(&vars.h).and(&gs).for_each(|g, &h, &d| *g += m1 * (h - d));
    Zip::from(&mut vars.gamma2).and(&vars.w).and(s).for_each(|g, &w, &s| *g += m2 * (w - s));
    Ok(())
}

/// Value of the S-dependent part of the augmented Lagrangian at fixed
/// `H, W, γ1, γ2`.
pub fn s_subproblem_objective<T: Real>(
    s: ArrayView2<'_, T>,
    residual: ArrayView2<'_, T>,
    vars: &AdmmVars<T>,
    mu1: f64,
    mu2: f64,
) -> f64 {
    let (m1, m2) = (T::of(mu1), T::of(mu2));
    let half = T::of(0.5);
    let gs = grad_v(s);
    let mut acc = T::zero();
    Zip::from(s).and(residual).and(&gs).and(&vars.h).for_each(|&s, &r, &d, &h| {
        acc += half * (s + r) * (s + r) + half * m1 * (h - d) * (h - d);
    });
    Zip::from(s).and(&gs).and(&vars.h).and(&vars.gamma1).for_each(|_, &d, &h, &g1| acc += g1 * (h - d));
    Zip::from(s).and(&vars.w).and(&vars.gamma2).for_each(|&s, &w, &g2| {
        acc += g2 * (w - s) + half * m2 * (w - s) * (w - s);
    });
    acc.as_f64()
}
