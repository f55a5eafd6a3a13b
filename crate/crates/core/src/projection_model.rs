//! Projection-domain data model: count normalization, log conversion and
//! per-detector, per-view response inconsistencies.
//!
//! Sign convention used throughout the crate: the measured log sinogram is
//! `Y = p + S` where `p` is the ideal sinogram and `S = -log s` the offsets
//! of a [`GainField`]. Compensation subtracts an offset estimate, so a
//! perfect estimate recovers `p = Y - S`.

use ndarray::{Array2, ArrayView2, Zip};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

/// Lower bound applied to normalized counts before taking the logarithm.
pub const COUNT_FLOOR: f64 = 1e-6;

/// Allowed overshoot of normalized counts above 1 (noise).
pub const NORMALIZED_OVERSHOOT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    NormalizedCounts,
    LogAttenuation,
}

impl Domain {
    pub fn tag(self) -> &'static str {
        match self {
            Domain::NormalizedCounts => "normalized_counts",
            Domain::LogAttenuation => "log_attenuation",
        }
    }
}

/// A `V × U` array of projection data (rows are views).
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram<T> {
    pub data: Array2<T>,
    pub domain: Domain,
}

impl<T: Real> Sinogram<T> {
    pub fn new(data: Array2<T>, domain: Domain) -> Self {
        Self { data, domain }
    }

    pub fn log(data: Array2<T>) -> Self {
        Self::new(data, Domain::LogAttenuation)
    }

    pub fn num_views(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_detectors(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    /// Checks the invariants of the domain tag.
    pub fn validate(&self) -> Result<()> {
        let upper = T::of(1.0 + NORMALIZED_OVERSHOOT);
        for ((v, u), x) in self.data.indexed_iter() {
            let ok = match self.domain {
                Domain::LogAttenuation => x.is_finite(),
                Domain::NormalizedCounts => x.is_finite() && *x > T::zero() && *x <= upper,
            };
            if !ok {
                return Err(Error::Validation(format!(
                    "{} sinogram entry ({v}, {u}) = {x} is out of range",
                    self.domain.tag()
                )));
            }
        }
        Ok(())
    }

    fn expect_domain(&self, domain: Domain, op: &str) -> Result<()> {
        if self.domain == domain {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "{op} expects a {} sinogram, got {}",
                domain.tag(),
                self.domain.tag()
            )))
        }
    }
}

/// Raw detector counts plus per-unit flat and dark field.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsFrame<T> {
    /// `V × U`
    pub scan: Array2<T>,
    pub flat: Vec<T>,
    pub dark: Vec<T>,
}

impl<T: Real> CountsFrame<T> {
    pub fn validate(&self) -> Result<()> {
        let units = self.scan.ncols();
        if self.flat.len() != units || self.dark.len() != units {
            return Err(Error::Dimension {
                context: "counts frame flat/dark fields",
                expected: (units, units),
                actual: (self.flat.len(), self.dark.len()),
            });
        }
        for (i, (f, d)) in self.flat.iter().zip(&self.dark).enumerate() {
            if !(f.is_finite() && d.is_finite() && *d >= T::zero()) {
                return Err(Error::Validation(format!("detector unit {i}: invalid flat/dark field")));
            }
            if *f <= *d {
                return Err(Error::Validation(format!(
                    "detector unit {i}: flat field {f} does not exceed dark field {d}"
                )));
            }
        }
        if self.scan.iter().any(|c| !c.is_finite() || *c < T::zero()) {
            return Err(Error::Validation("scan counts must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// `q = (I - D) / (F - D)` per detector unit, clamped below at [`COUNT_FLOOR`].
///
/// Returns the normalized sinogram and the number of clamped entries.
pub fn normalize<T: Real>(frame: &CountsFrame<T>) -> Result<(Sinogram<T>, usize)> {
    frame.validate()?;
    let floor = T::of(COUNT_FLOOR);
    let mut clamped = 0;
    let mut q = frame.scan.clone();
    for mut row in q.rows_mut() {
        for (i, v) in row.iter_mut().enumerate() {
            let val = (*v - frame.dark[i]) / (frame.flat[i] - frame.dark[i]);
            *v = if val < floor {
                clamped += 1;
                floor
            } else {
                val
            };
        }
    }
    Ok((Sinogram::new(q, Domain::NormalizedCounts), clamped))
}

/// `y = -log q`. Entries below [`COUNT_FLOOR`] are clamped first; the count of
/// clamped entries is returned alongside.
pub fn neg_log<T: Real>(sino: &Sinogram<T>) -> Result<(Sinogram<T>, usize)> {
    sino.expect_domain(Domain::NormalizedCounts, "neg_log")?;
    let floor = T::of(COUNT_FLOOR);
    let mut clamped = 0;
    let data = sino.data.mapv(|q| {
        if q < floor || q.is_nan() {
            clamped += 1;
            -floor.ln()
        } else {
            -q.ln()
        }
    });
    Ok((Sinogram::log(data), clamped))
}

/// Inverse of [`neg_log`] (no clamping).
pub fn exp_neg<T: Real>(sino: &Sinogram<T>) -> Result<Sinogram<T>> {
    sino.expect_domain(Domain::LogAttenuation, "exp_neg")?;
    Ok(Sinogram::new(sino.data.mapv(|y| (-y).exp()), Domain::NormalizedCounts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ViewProfile {
    /// One gain per corrupted detector for all views.
    Constant,
    /// Independent gains on `num_blocks` contiguous view blocks.
    Piecewise { num_blocks: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub fraction_bad: f64,
    pub gain_range: (f64, f64),
    pub view_profile: ViewProfile,
    pub rng_seed: u64,
}

impl Default for CorruptionSpec {
    fn default() -> Self {
        Self {
            fraction_bad: 0.05,
            gain_range: (0.92, 1.08),
            view_profile: ViewProfile::Constant,
            rng_seed: 1,
        }
    }
}

impl CorruptionSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.gain_range;
        if !(self.fraction_bad > 0.0 && self.fraction_bad < 1.0) {
            return Err(Error::Validation(format!(
                "fraction_bad must lie in (0, 1), got {}",
                self.fraction_bad
            )));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Validation(format!("gain_range must satisfy 0 < lo <= hi, got ({lo}, {hi})")));
        }
        if let ViewProfile::Piecewise { num_blocks: 0 } = self.view_profile {
            return Err(Error::Validation("piecewise profile needs at least one block".into()));
        }
        Ok(())
    }

    /// Number of corrupted detector columns, `⌈fraction_bad · U⌉`.
    pub fn num_bad_columns(&self, num_detectors: usize) -> Result<usize> {
        self.validate()?;
        let expected = self.fraction_bad * num_detectors as f64;
        if expected < 1.0 {
            return Err(Error::Validation(format!(
                "fraction_bad {} selects no detector column out of {num_detectors}",
                self.fraction_bad
            )));
        }
        Ok((expected.ceil() as usize).min(num_detectors))
    }
}

/// Multiplicative gains `s` and log-domain offsets `S = -log s`, both `V × U`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainField<T> {
    pub gains: Array2<T>,
    pub offsets: Array2<T>,
    /// Sorted indices of the corrupted detector columns.
    pub corrupted_columns: Vec<usize>,
}

impl<T: Real> GainField<T> {
    /// Field with every gain equal to one.
    pub fn ideal(num_views: usize, num_detectors: usize) -> Self {
        Self {
            gains: Array2::ones((num_views, num_detectors)),
            offsets: Array2::zeros((num_views, num_detectors)),
            corrupted_columns: Vec::new(),
        }
    }

    pub fn from_gains(gains: Array2<T>, corrupted_columns: Vec<usize>) -> Result<Self> {
        if gains.iter().any(|s| !(s.is_finite() && *s > T::zero())) {
            return Err(Error::Validation("gains must be finite and positive".into()));
        }
        let offsets = gains.mapv(|s| -s.ln());
        Ok(Self { gains, offsets, corrupted_columns })
    }
}

/// Draws a seeded gain field following `spec`.
pub fn sample_gain_field<T: Real>(
    spec: &CorruptionSpec,
    num_views: usize,
    num_detectors: usize,
) -> Result<GainField<T>> {
    let count = spec.num_bad_columns(num_detectors)?;
    if num_views == 0 {
        return Err(Error::Validation("gain field needs at least one view".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut columns = sample(&mut rng, num_detectors, count).into_vec();
    columns.sort_unstable();

    let (lo, hi) = spec.gain_range;
    let blocks = match spec.view_profile {
        ViewProfile::Constant => 1,
        ViewProfile::Piecewise { num_blocks } => num_blocks.min(num_views),
    };
    let mut gains = Array2::<T>::ones((num_views, num_detectors));
    for &col in &columns {
        for b in 0..blocks {
            let g = if lo == hi { lo } else { rng.random_range(lo..=hi) };
            let start = b * num_views / blocks;
            let end = (b + 1) * num_views / blocks;
            for v in start..end {
                gains[[v, col]] = T::of(g);
            }
        }
    }
    GainField::from_gains(gains, columns)
}

/// Measured sinogram `Y = clean + S`.
pub fn corrupt<T: Real>(clean: &Sinogram<T>, gains: &GainField<T>) -> Result<Sinogram<T>> {
    clean.expect_domain(Domain::LogAttenuation, "corrupt")?;
    check_dim("corrupt", clean.shape(), gains.offsets.dim())?;
    Ok(Sinogram::log(&clean.data + &gains.offsets))
}

/// Compensated sinogram `Y - S`.
pub fn apply_compensation<T: Real>(
    measured: &Sinogram<T>,
    offsets: ArrayView2<'_, T>,
) -> Result<Sinogram<T>> {
    measured.expect_domain(Domain::LogAttenuation, "apply_compensation")?;
    check_dim("apply_compensation", measured.shape(), offsets.dim())?;
    Ok(Sinogram::log(&measured.data - &offsets))
}

/// Simulated photon counts for a clean log sinogram: `I ~ Poisson(N₀ e^{-p})`,
/// flat field `N₀`, dark field 0.
pub fn simulate_counts<T: Real>(
    clean: &Sinogram<T>,
    photons_per_ray: f64,
    seed: u64,
) -> Result<CountsFrame<T>> {
    clean.expect_domain(Domain::LogAttenuation, "simulate_counts")?;
    if !(photons_per_ray > 0.0 && photons_per_ray.is_finite()) {
        return Err(Error::Validation("photons_per_ray must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scan = Array2::zeros(clean.shape());
    // row-major traversal keeps the draw order fixed
    for (dst, p) in scan.iter_mut().zip(clean.data.iter()) {
        let mean = photons_per_ray * (-p.as_f64()).exp();
        let draw = if mean > 0.0 {
            Poisson::new(mean)
                .map_err(|e| Error::Validation(format!("poisson mean {mean}: {e}")))?
                .sample(&mut rng)
        } else {
            0.0
        };
        *dst = T::of(draw);
    }
    let units = clean.num_detectors();
    Ok(CountsFrame { scan, flat: vec![T::of(photons_per_ray); units], dark: vec![T::zero(); units] })
}

/// Elementwise `a == b` check used to confirm a corrupted sinogram is unchanged.
pub fn max_abs_diff<T: Real>(a: ArrayView2<'_, T>, b: ArrayView2<'_, T>) -> T {
    let mut m = T::zero();
    Zip::from(a).and(b).for_each(|x, y| m = m.max((*x - *y).abs()));
    m
}
