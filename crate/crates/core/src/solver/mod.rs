//! Alternating minimization of the joint image/offset objective.
//!
//! Each outer iteration runs one SART pass on the compensated data `Y − S`
//! followed by anisotropic TV denoising, then a fixed number of ADMM
//! iterations on the offsets `S` with the image held fixed.

mod admm;
mod atv;
mod objective;
mod sart;

pub use admm::{
    dual_update, h_update, s_subproblem_objective, s_subproblem_solve, w_update, AdmmVars, OffsetSolver,
};
pub use atv::{atv_denoise, atv_objective, AtvDenoiser, ATV_PENALTY};
pub use objective::{objective, objective_with_projection, ObjectiveTerms};
pub use sart::{sart_step, Sart, SUM_GUARD};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::diff::all_finite;
use crate::error::{check_dim, Error, Result};
use crate::geometry::FanBeamGeometry;
use crate::projection_model::Sinogram;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Image anisotropic TV weight.
    pub lambda1: f64,
    /// View-direction L1 weight on `∇_V S`.
    pub lambda2: f64,
    /// Column group-sparsity weight on `S`.
    pub lambda3: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub outer_iters: usize,
    pub admm_iters: usize,
    pub tv_inner_iters: usize,
    pub sart_relaxation: f64,
    pub nonneg_image: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda1: 2e-4,
            lambda2: 0.5,
            lambda3: 1.0,
            mu1: 1.0,
            mu2: 1.0,
            outer_iters: 300,
            admm_iters: 10,
            tv_inner_iters: 20,
            sart_relaxation: 1.9,
            nonneg_image: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        admm::check_penalties(self.mu1, self.mu2)?;
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2), ("lambda3", self.lambda3)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.admm_iters == 0 {
            return Err(Error::Config("admm_iters must be at least 1".into()));
        }
        if !(self.sart_relaxation > 0.0 && self.sart_relaxation < 2.0) {
            return Err(Error::Config(format!(
                "sart_relaxation must lie in (0, 2), got {}",
                self.sart_relaxation
            )));
        }
        Ok(())
    }
}

/// Everything the alternating scheme carries between outer iterations.
#[derive(Debug, Clone)]
pub struct SolverState<T> {
    pub x: Array2<T>,
    pub offsets: Array2<T>,
    pub admm: AdmmVars<T>,
    pub trace: Vec<ObjectiveTerms>,
}

impl<T: Real> SolverState<T> {
    pub fn zeros(geom: &FanBeamGeometry<T>) -> Self {
        Self {
            x: Array2::zeros(geom.image_shape()),
            offsets: Array2::zeros(geom.sinogram_shape()),
            admm: AdmmVars::zeros(geom.sinogram_shape()),
            trace: Vec::new(),
        }
    }

    fn check_finite(&self, iteration: usize) -> Result<()> {
        let arrays: [(&'static str, ArrayView2<'_, T>); 6] = [
            ("x", self.x.view()),
            ("S", self.offsets.view()),
            ("H", self.admm.h.view()),
            ("W", self.admm.w.view()),
            ("gamma1", self.admm.gamma1.view()),
            ("gamma2", self.admm.gamma2.view()),
        ];
        for (array, a) in arrays {
            if !all_finite(a) {
                return Err(Error::NonFinite { array, iteration });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput<T> {
    pub x: Array2<T>,
    pub offsets: Array2<T>,
    /// Objective before the first and after every outer iteration.
    pub trace: Vec<ObjectiveTerms>,
}

/// Solver bound to one geometry; caches SART sums and FFT plans.
pub struct Solver<'g, T: Real> {
    cfg: SolverConfig,
    sart: Sart<'g, T>,
    tv: AtvDenoiser<T>,
    offsets: OffsetSolver<T>,
}

impl<'g, T: Real> Solver<'g, T> {
    pub fn new(geom: &'g FanBeamGeometry<T>, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let n = geom.image_size();
        Ok(Self {
            offsets: OffsetSolver::new(geom.num_views(), cfg.mu1, cfg.mu2)?,
            tv: AtvDenoiser::new(n, n),
            sart: Sart::new(geom),
            cfg,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &FanBeamGeometry<T> {
        self.sart.geometry()
    }

    /// Joint estimate of the image and the offsets from measured data `Y`.
    pub fn run(&self, measured: &Sinogram<T>) -> Result<SolveOutput<T>> {
        self.iterate(measured, true)
    }

    /// SART + ATV reconstruction of `data` with the offsets held at zero.
    pub fn reconstruct(&self, data: &Sinogram<T>) -> Result<SolveOutput<T>> {
        self.iterate(data, false)
    }

    fn iterate(&self, measured: &Sinogram<T>, update_offsets: bool) -> Result<SolveOutput<T>> {
        let geom = self.geometry();
        check_dim("measured sinogram", geom.sinogram_shape(), measured.shape())?;
        if !all_finite(measured.view()) {
            return Err(Error::Validation("measured sinogram contains non-finite values".into()));
        }
        let y = measured.view();
        let cfg = &self.cfg;
        let relax = T::of(cfg.sart_relaxation);
        let lambda1 = T::of(cfg.lambda1);

        let mut state = SolverState::zeros(geom);
        let mut ax = Array2::zeros(geom.sinogram_shape());
        state.trace.push(objective_with_projection(state.x.view(), ax.view(), state.offsets.view(), y, cfg)?);

        for k in 0..cfg.outer_iters {
            let corrected = &y - &state.offsets;
            let half = self.sart.step_with_projection(
                state.x.view(),
                ax.view(),
                corrected.view(),
                relax,
                cfg.nonneg_image,
            )?;
            state.x = self.tv.denoise(half.view(), lambda1, cfg.tv_inner_iters);

            ax = geom.forward_project(state.x.view())?;
            if update_offsets {
                let residual = &ax - &y;
                for _ in 0..cfg.admm_iters {
                    state.offsets = self.offsets.solve(residual.view(), &state.admm)?;
                    state.admm.h =
                        h_update(state.offsets.view(), state.admm.gamma1.view(), cfg.lambda2, cfg.mu1);
                    state.admm.w =
                        w_update(state.offsets.view(), state.admm.gamma2.view(), cfg.lambda3, cfg.mu2);
                    dual_update(&mut state.admm, state.offsets.view(), cfg.mu1, cfg.mu2)?;
                }
            }
            state.check_finite(k + 1)?;
            state.trace.push(objective_with_projection(
                state.x.view(),
                ax.view(),
                state.offsets.view(),
                y,
                cfg,
            )?);
        }

        Ok(SolveOutput { x: state.x, offsets: state.offsets, trace: state.trace })
    }
}

/// One-shot wrapper around [`Solver::run`].
pub fn run<T: Real>(
    measured: &Sinogram<T>,
    geom: &FanBeamGeometry<T>,
    cfg: &SolverConfig,
) -> Result<SolveOutput<T>> {
    Solver::new(geom, cfg.clone())?.run(measured)
}
