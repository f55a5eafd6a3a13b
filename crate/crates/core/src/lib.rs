//! Ring artifact removal for fan-beam CT by joint estimation of the image and
//! of per-detector, per-view response offsets.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below pin the double-precision types used by the pipeline.

pub mod baselines;
pub mod circulant;
pub mod diff;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod phantom;
pub mod pipeline;
pub mod projection_model;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::FanBeamGeometry;
pub use phantom::{Disk, PhantomSpec};
pub use projection_model::{CorruptionSpec, Domain, GainField, Sinogram, ViewProfile};
pub use scalar::Real;
pub use solver::{SolveOutput, Solver, SolverConfig};

/// `n × n` attenuation map (rows top to bottom).
pub type Image<T> = ndarray::Array2<T>;

pub type Image64 = Image<f64>;
pub type Image32 = Image<f32>;
pub type Sinogram64 = Sinogram<f64>;
pub type Sinogram32 = Sinogram<f32>;
pub type Geometry64 = FanBeamGeometry<f64>;
pub type Geometry32 = FanBeamGeometry<f32>;
pub type GainField64 = GainField<f64>;
pub type Solver64<'g> = Solver<'g, f64>;
pub type SolveOutput64 = SolveOutput<f64>;
