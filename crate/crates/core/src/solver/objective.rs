use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::diff::{anisotropic_tv, grad_v, l1_norm, l21_norm, sum_sq};
use crate::error::{check_dim, Result};
use crate::geometry::FanBeamGeometry;
use crate::scalar::Real;

/// Weighted terms of the joint objective; `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub data_term: f64,
    pub tv_term: f64,
    pub l1_term: f64,
    pub group_term: f64,
    pub total: f64,
}

/// `½‖Ax − (Y − S)‖² + λ1·ATV(x) + λ2‖∇_V S‖₁ + λ3‖S‖₂,₁`
pub fn objective<T: Real>(
    x: ArrayView2<'_, T>,
    offsets: ArrayView2<'_, T>,
    measured: ArrayView2<'_, T>,
    geom: &FanBeamGeometry<T>,
    cfg: &SolverConfig,
) -> Result<ObjectiveTerms> {
    let ax = geom.forward_project(x)?;
    objective_with_projection(x, ax.view(), offsets, measured, cfg)
}

/// Same as [`objective`] with `A x` supplied by the caller.
pub fn objective_with_projection<T: Real>(
    x: ArrayView2<'_, T>,
    ax: ArrayView2<'_, T>,
    offsets: ArrayView2<'_, T>,
    measured: ArrayView2<'_, T>,
    cfg: &SolverConfig,
) -> Result<ObjectiveTerms> {
    check_dim("objective offsets", measured.dim(), offsets.dim())?;
    check_dim("objective projection", measured.dim(), ax.dim())?;
    let residual = &ax - &measured + offsets;
    let data_term = 0.5 * sum_sq(residual.view()).as_f64();
    let tv_term = cfg.lambda1 * anisotropic_tv(x).as_f64();
    let l1_term = cfg.lambda2 * l1_norm(grad_v(offsets).view()).as_f64();
    let group_term = cfg.lambda3 * l21_norm(offsets).as_f64();
    Ok(ObjectiveTerms {
        data_term,
        tv_term,
        l1_term,
        group_term,
        total: data_term + tv_term + l1_term + group_term,
    })
}
