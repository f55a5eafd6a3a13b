//! Runs the synthetic ring scenario once and prints per-method metrics.
//!
//! Usage: `cargo run --release --example scenario -- [key=value ...]` with keys
//! `blocks, seed, gain, frac, l1, l2, l3, mu1, mu2, k, j, tv, relax, radius`,
//! `methods` (comma list of `none,proposed,baseline`), `half=1` for a
//! half-resolution geometry and `dump=<prefix>` to write reconstruction,
//! image-error and offset-error PNGs. `to-first` is the rmse against the
//! first method's reconstruction.

use std::time::Instant;

use ringfix::metrics::{default_mask, ring_energy, rmse};
use ringfix::pipeline::{run_method, simulate, ExperimentConfig, Method};
use ringfix::{Solver, ViewProfile};

fn main() {
    let mut cfg = ExperimentConfig::default();
    let mut dump: Option<String> = None;
    let mut methods = vec![Method::None, Method::Proposed, Method::Baseline];
    for arg in std::env::args().skip(1) {
        let (k, v) = arg.split_once('=').expect("arguments are key=value");
        match k {
            "blocks" => {
                let b: usize = v.parse().unwrap();
                cfg.corruption.view_profile =
                    if b <= 1 { ViewProfile::Constant } else { ViewProfile::Piecewise { num_blocks: b } };
            }
            "seed" => cfg.corruption.rng_seed = v.parse().unwrap(),
            "gain" => {
                let g: f64 = v.parse().unwrap();
                cfg.corruption.gain_range = (g, g);
            }
            "frac" => cfg.corruption.fraction_bad = v.parse().unwrap(),
            "half" => {
                let g = &mut cfg.geometry;
                g.detector_pitch *= 2.0;
                g.num_detectors = 182;
                g.num_views = 180;
                g.image_size = 128;
                g.pixel_pitch *= 2.0;
                cfg.phantom = ringfix::PhantomSpec::water_and_bone(128);
            }
            "l1" => cfg.solver.lambda1 = v.parse().unwrap(),
            "l2" => cfg.solver.lambda2 = v.parse().unwrap(),
            "l3" => cfg.solver.lambda3 = v.parse().unwrap(),
            "mu1" => cfg.solver.mu1 = v.parse().unwrap(),
            "mu2" => cfg.solver.mu2 = v.parse().unwrap(),
            "k" => cfg.solver.outer_iters = v.parse().unwrap(),
            "j" => cfg.solver.admm_iters = v.parse().unwrap(),
            "tv" => cfg.solver.tv_inner_iters = v.parse().unwrap(),
            "relax" => cfg.solver.sart_relaxation = v.parse().unwrap(),
            "radius" => cfg.baseline.smoothing_radius = v.parse().unwrap(),
            "dump" => dump = Some(v.to_string()),
            "methods" => methods = v.split(',').map(|m| m.parse().unwrap()).collect(),
            _ => panic!("unknown key {k}"),
        }
    }
    let sim = simulate(&cfg).unwrap();
    let geom = cfg.geometry.build().unwrap();
    let solver = Solver::new(&geom, cfg.solver.clone()).unwrap();
    let mask = default_mask(cfg.phantom.image_size);
    let e0 = ring_energy(sim.ground_truth.view());
    println!("columns {:?} e0 {e0:.3e}", sim.gains.corrupted_columns);
    let mut reference: Option<ndarray::Array2<f64>> = None;
    for m in methods {
        let t = Instant::now();
        let (out, offsets) = run_method(&solver, &cfg.baseline, m, &sim.measured).unwrap();
        if let Some(prefix) = &dump {
            let png = |name: &str, img: ndarray::ArrayView2<'_, f64>, lo: f64, hi: f64| {
                let path = format!("{prefix}_{m}_{name}.png");
                ringfix::io::render_png(std::path::Path::new(&path), img, lo, hi).unwrap();
            };
            png("recon", out.x.view(), 0.0, 0.06);
            png("err", (&out.x - &sim.ground_truth).view(), -0.003, 0.003);
            png("serr", (&offsets - &sim.gains.offsets).view(), -0.05, 0.05);
        }
        let err = rmse(out.x.view(), sim.ground_truth.view(), Some(&mask)).unwrap();
        let ring = ring_energy(out.x.view());
        let to_ref = reference.as_ref().map_or(0.0, |r| rmse(out.x.view(), r.view(), Some(&mask)).unwrap());
        if reference.is_none() {
            reference = Some(out.x.clone());
        }
        let s_err = (&offsets - &sim.gains.offsets).iter().map(|v| v * v).sum::<f64>().sqrt();
        let s_max = offsets.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let incr = out
            .trace
            .windows(2)
            .map(|w| (w[1].total - w[0].total) / w[0].total)
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{m:9} {:6.1?} rmse {err:.4e} ring {ring:.4e} (-e0 {:+.3e}) |S-St| {s_err:.3e} |S|inf {s_max:.2e} trace {:.4e}->{:.4e} maxincr {incr:.2e} to-first {to_ref:.3e}",
            t.elapsed(),
            ring - e0,
            out.trace[0].total,
            out.trace.last().unwrap().total,
        );
    }
}
