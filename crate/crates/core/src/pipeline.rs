//! End-to-end experiments: simulate a corrupted scan, correct it with one of
//! the available methods, score the result and compare runs.
//!
//! Directory layout produced under `output_dir`:
//!
//! ```text
//! manifest.json
//! ground_truth.img   clean_sino.sino   measured_sino.sino   gain_field.sino
//! <method>/recon.img  <method>/s_est.sino  <method>/trace.csv
//! <method>/metrics.json  <method>/recon.png
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::baselines::mean_projection_correct;
use crate::error::{Error, Result};
use crate::geometry::{uniform_angles, FanBeamGeometry};
use crate::io;
use crate::metrics::MetricsReport;
use crate::phantom::PhantomSpec;
use crate::projection_model::{
    corrupt, exp_neg, neg_log, normalize, sample_gain_field, simulate_counts, CorruptionSpec, GainField,
    Sinogram,
};
use crate::solver::{ObjectiveTerms, SolveOutput, Solver, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub source_to_detector: f64,
    pub source_to_center: f64,
    pub detector_pitch: f64,
    pub num_detectors: usize,
    pub num_views: usize,
    pub image_size: usize,
    pub pixel_pitch: f64,
    /// Explicit view angles in radians; uniform over `[0, 2π)` when absent.
    pub view_angles: Option<Vec<f64>>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            source_to_detector: 433.507,
            source_to_center: 205.0,
            detector_pitch: 155.1 / 363.0,
            num_detectors: 363,
            num_views: 360,
            image_size: 256,
            pixel_pitch: 0.28,
            view_angles: None,
        }
    }
}

impl GeometryConfig {
    pub fn build(&self) -> Result<FanBeamGeometry<f64>> {
        let angles = match &self.view_angles {
            Some(a) if a.len() != self.num_views => {
                return Err(Error::Validation(format!(
                    "{} view angles given for num_views = {}",
                    a.len(),
                    self.num_views
                )))
            }
            Some(a) => a.clone(),
            None => uniform_angles(self.num_views),
        };
        FanBeamGeometry::new(
            self.source_to_detector,
            self.source_to_center,
            self.detector_pitch,
            self.num_detectors,
            angles,
            self.image_size,
            self.pixel_pitch,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub smoothing_radius: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { smoothing_radius: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub photons_per_ray: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub window_lo: f64,
    pub window_hi: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { window_lo: 0.0, window_hi: 0.06 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Label carried into metrics and reports.
    pub scenario: String,
    pub geometry: GeometryConfig,
    pub phantom: PhantomSpec,
    pub corruption: CorruptionSpec,
    pub solver: SolverConfig,
    pub baseline: BaselineConfig,
    pub noise: Option<NoiseConfig>,
    pub output_dir: PathBuf,
    pub render: RenderConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: "default".into(),
            geometry: GeometryConfig::default(),
            phantom: PhantomSpec::default(),
            corruption: CorruptionSpec::default(),
            solver: SolverConfig::default(),
            baseline: BaselineConfig::default(),
            noise: None,
            output_dir: PathBuf::from("ringfix-out"),
            render: RenderConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.geometry.build()?;
        self.phantom.validate()?;
        if self.phantom.image_size != self.geometry.image_size {
            return Err(Error::Config(format!(
                "phantom.image_size {} differs from geometry.image_size {}",
                self.phantom.image_size, self.geometry.image_size
            )));
        }
        self.corruption.num_bad_columns(self.geometry.num_detectors)?;
        self.solver.validate()?;
        if self.baseline.smoothing_radius == 0 {
            return Err(Error::Config("baseline.smoothing_radius must be at least 1".into()));
        }
        if let Some(noise) = &self.noise {
            if !(noise.photons_per_ray > 0.0 && noise.photons_per_ray.is_finite()) {
                return Err(Error::Config("noise.photons_per_ray must be positive".into()));
            }
        }
        if !(self.render.window_hi > self.render.window_lo) {
            return Err(Error::Config("render.window_hi must exceed render.window_lo".into()));
        }
        Ok(())
    }
}

/// In-memory result of [`simulate`].
#[derive(Debug, Clone)]
pub struct Simulation {
    pub ground_truth: Array2<f64>,
    pub clean: Sinogram<f64>,
    pub measured: Sinogram<f64>,
    pub gains: GainField<f64>,
    /// Entries clamped at the count floor when noise was applied.
    pub clamped: usize,
}

/// Echo of the resolved configuration plus everything drawn at random.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub corrupted_columns: Vec<usize>,
    pub corruption_seed: u64,
    pub noise_seed: Option<u64>,
    pub clamped_entries: usize,
    pub files: Vec<String>,
}

pub const GROUND_TRUTH_FILE: &str = "ground_truth.img";
pub const CLEAN_SINO_FILE: &str = "clean_sino.sino";
pub const MEASURED_SINO_FILE: &str = "measured_sino.sino";
pub const GAIN_FIELD_FILE: &str = "gain_field.sino";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";

/// Phantom → projection → optional Poisson noise → gain corruption.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    cfg.validate()?;
    let geom = cfg.geometry.build()?;
    let ground_truth = cfg.phantom.generate::<f64>()?;
    let clean = Sinogram::log(geom.forward_project(ground_truth.view())?);
    let (noisy, clamped) = match &cfg.noise {
        Some(noise) => {
            let counts = simulate_counts(&clean, noise.photons_per_ray, noise.seed)?;
            let (q, c1) = normalize(&counts)?;
            let (y, c2) = neg_log(&q)?;
            (y, c1 + c2)
        }
        None => (clean.clone(), 0),
    };
    let (views, dets) = geom.sinogram_shape();
    let gains = sample_gain_field(&cfg.corruption, views, dets)?;
    let measured = corrupt(&noisy, &gains)?;
    Ok(Simulation { ground_truth, clean, measured, gains, clamped })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs [`simulate`] and writes every artifact plus the manifest.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    let sim = simulate(cfg)?;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    io::write_image(&dir.join(GROUND_TRUTH_FILE), sim.ground_truth.view())?;
    io::write_sinogram(&dir.join(CLEAN_SINO_FILE), &sim.clean)?;
    io::write_sinogram(&dir.join(MEASURED_SINO_FILE), &sim.measured)?;
    io::write_sinogram(&dir.join(GAIN_FIELD_FILE), &Sinogram::log(sim.gains.offsets.clone()))?;
    let manifest = Manifest {
        config: cfg.clone(),
        corrupted_columns: sim.gains.corrupted_columns.clone(),
        corruption_seed: cfg.corruption.rng_seed,
        noise_seed: cfg.noise.as_ref().map(|n| n.seed),
        clamped_entries: sim.clamped,
        files: [GROUND_TRUTH_FILE, CLEAN_SINO_FILE, MEASURED_SINO_FILE, GAIN_FIELD_FILE]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    };
    io::write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(sim)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Proposed,
    Baseline,
    None,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Baseline => "baseline",
            Method::None => "none",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "baseline" => Ok(Method::Baseline),
            "none" => Ok(Method::None),
            other => {
                Err(Error::Config(format!("unknown method '{other}' (expected proposed, baseline or none)")))
            }
        }
    }
}

/// In-memory result of [`correct`].
#[derive(Debug, Clone)]
pub struct Correction {
    pub method: Method,
    pub recon: Array2<f64>,
    /// Offsets subtracted from the measured sinogram (`Y − corrected data`).
    pub offsets: Array2<f64>,
    pub trace: Vec<ObjectiveTerms>,
    /// Plain reconstruction of the measured data, used as the uncorrected reference.
    pub uncorrected: Array2<f64>,
    pub metrics: MetricsReport,
}

/// Reconstruction and offset estimate of one method, without scoring.
///
/// The offsets of [`Method::Baseline`] are `Y` minus its corrected data.
pub fn run_method(
    solver: &Solver<'_, f64>,
    baseline: &BaselineConfig,
    method: Method,
    measured: &Sinogram<f64>,
) -> Result<(SolveOutput<f64>, Array2<f64>)> {
    match method {
        Method::None => Ok((solver.reconstruct(measured)?, Array2::zeros(measured.shape()))),
        Method::Proposed => {
            let out = solver.run(measured)?;
            let offsets = out.offsets.clone();
            Ok((out, offsets))
        }
        Method::Baseline => {
            let q = exp_neg(measured)?;
            let (q_corrected, _) = mean_projection_correct(&q, baseline.smoothing_radius)?;
            let (data, _) = neg_log(&q_corrected)?;
            let offsets = &measured.data - &data.data;
            Ok((solver.reconstruct(&data)?, offsets))
        }
    }
}

/// Runs one correction method on `measured` and scores it against `ground_truth`.
pub fn correct(
    cfg: &ExperimentConfig,
    method: Method,
    measured: &Sinogram<f64>,
    ground_truth: &Array2<f64>,
) -> Result<Correction> {
    cfg.validate()?;
    let geom = cfg.geometry.build()?;
    let solver = Solver::new(&geom, cfg.solver.clone())?;
    let uncorrected = solver.reconstruct(measured)?;
    let (out, offsets) = match method {
        Method::None => (uncorrected.clone(), Array2::zeros(measured.shape())),
        _ => run_method(&solver, &cfg.baseline, method, measured)?,
    };
    let metrics = MetricsReport::compute(ground_truth.view(), uncorrected.x.view(), out.x.view())?;
    Ok(Correction { method, recon: out.x, offsets, trace: out.trace, uncorrected: uncorrected.x, metrics })
}

/// `metrics.json` contents: the metric report tagged with its run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub scenario: String,
    pub method: Method,
    #[serde(flatten)]
    pub report: MetricsReport,
}

pub fn write_trace_csv(path: &Path, trace: &[ObjectiveTerms]) -> Result<()> {
    let mut text = String::from("iteration,data_term,tv_term,l1_term,group_term,total\n");
    for (k, t) in trace.iter().enumerate() {
        text.push_str(&format!(
            "{k},{:e},{:e},{:e},{:e},{:e}\n",
            t.data_term, t.tv_term, t.l1_term, t.group_term, t.total
        ));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn method_dir(cfg: &ExperimentConfig, method: Method) -> PathBuf {
    cfg.output_dir.join(method.name())
}

/// Reads the simulation artifacts from `output_dir`, runs [`correct`] and
/// writes the method's outputs to `output_dir/<method>/`.
pub fn cmd_correct(cfg: &ExperimentConfig, method: Method) -> Result<Correction> {
    let dir = &cfg.output_dir;
    let measured: Sinogram<f64> = io::read_sinogram(&dir.join(MEASURED_SINO_FILE))?;
    let ground_truth: Array2<f64> = io::read_image(&dir.join(GROUND_TRUTH_FILE))?;
    let result = correct(cfg, method, &measured, &ground_truth)?;

    let out = method_dir(cfg, method);
    create_dir(&out)?;
    io::write_image(&out.join("recon.img"), result.recon.view())?;
    io::write_sinogram(&out.join("s_est.sino"), &Sinogram::log(result.offsets.clone()))?;
    write_trace_csv(&out.join("trace.csv"), &result.trace)?;
    io::write_json(
        &out.join(METRICS_FILE),
        &MetricsFile { scenario: cfg.scenario.clone(), method, report: result.metrics.clone() },
    )?;
    io::render_png(&out.join("recon.png"), result.recon.view(), cfg.render.window_lo, cfg.render.window_hi)?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    pub method: Method,
    pub rmse: f64,
    pub ring_energy: f64,
    /// Lowest rmse within the scenario (ties all flagged).
    pub best_rmse: bool,
    /// Lowest ring energy within the scenario (ties all flagged).
    pub best_ring: bool,
    pub source: PathBuf,
}

/// `metrics.json` files for a report argument: the directory's own file if
/// present, otherwise those of its immediate subdirectories in name order.
fn metrics_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let direct = dir.join(METRICS_FILE);
    if direct.is_file() {
        return Ok(vec![direct]);
    }
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path().join(METRICS_FILE);
        if path.is_file() {
            found.push(path);
        }
    }
    found.sort();
    if found.is_empty() {
        return Err(Error::io(
            direct,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no metrics.json found"),
        ));
    }
    Ok(found)
}

/// Tabulates rmse and ring energy per method per scenario.
pub fn cmd_report<P: AsRef<Path>>(dirs: &[P]) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for dir in dirs {
        for path in metrics_files(dir.as_ref())? {
            let m: MetricsFile = io::read_json(&path)?;
            rows.push(ReportRow {
                scenario: m.scenario,
                method: m.method,
                rmse: m.report.rmse_corrected,
                ring_energy: m.report.ring_energy_corrected,
                best_rmse: false,
                best_ring: false,
                source: path,
            });
        }
    }
    let scenarios: Vec<String> = rows.iter().map(|r| r.scenario.clone()).collect();
    for scenario in scenarios {
        let best_rmse =
            rows.iter().filter(|r| r.scenario == scenario).map(|r| r.rmse).fold(f64::INFINITY, f64::min);
        let best_ring = rows
            .iter()
            .filter(|r| r.scenario == scenario)
            .map(|r| r.ring_energy)
            .fold(f64::INFINITY, f64::min);
        for r in rows.iter_mut().filter(|r| r.scenario == scenario) {
            r.best_rmse = r.rmse == best_rmse;
            r.best_ring = r.ring_energy == best_ring;
        }
    }
    Ok(rows)
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("scenario,method,rmse,ring_energy,best_rmse,best_ring,source\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:e},{:e},{},{},{}\n",
            r.scenario,
            r.method,
            r.rmse,
            r.ring_energy,
            r.best_rmse,
            r.best_ring,
            r.source.display()
        ));
    }
    out
}

pub fn report_text(rows: &[ReportRow]) -> String {
    let mut out = format!("{:<20} {:<10} {:>12} {:>12}\n", "scenario", "method", "rmse", "ring_energy");
    for r in rows {
        out.push_str(&format!(
            "{:<20} {:<10} {:>12.4e}{} {:>12.4e}{}\n",
            r.scenario,
            r.method.name(),
            r.rmse,
            if r.best_rmse { "*" } else { " " },
            r.ring_energy,
            if r.best_ring { "*" } else { " " },
        ));
    }
    out
}
