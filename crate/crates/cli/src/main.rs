//! `ringfix` command-line driver: simulate, correct, report.

mod overrides;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ringfix::pipeline::{
    self, cmd_correct, cmd_report, cmd_simulate, report_csv, report_text, ExperimentConfig, Method,
    NoiseConfig,
};
use ringfix::Error;
use serde_json::Value;

const THREADS_ENV: &str = "RINGFIX_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "ringfix",
    version,
    about = "Simulate detector ring artifacts and remove them",
    after_help = "Any configuration field can be overridden with a dotted flag, \
                  e.g. --solver.lambda2=0.3 or --corruption.view_profile='{\"kind\":\"piecewise\",\"num_blocks\":4}'.\n\
                  RINGFIX_THREADS caps the worker threads (0 = all cores)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the phantom, clean and corrupted sinograms and a manifest.
    Simulate {
        /// JSON configuration; missing fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Reconstruct the simulated data with one correction method.
    Correct {
        #[arg(long)]
        config: Option<PathBuf>,
        /// proposed, baseline or none
        #[arg(long, default_value = "proposed")]
        method: String,
    },
    /// Tabulate metrics.json files from experiment directories.
    Report {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Also write the table as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the fully resolved configuration as JSON.
    Config {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Dimension { .. } | Error::Validation(_) | Error::Config(_) => 2,
        Error::Io { .. } | Error::Parse { .. } => 3,
        Error::NonFinite { .. } => 4,
    }
}

fn load_config(
    path: Option<&PathBuf>,
    overrides: &[overrides::Override],
) -> ringfix::Result<ExperimentConfig> {
    let mut value = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
            serde_json::from_str::<Value>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Default::default()),
    };
    let schema = serde_json::to_value(ExperimentConfig {
        noise: Some(NoiseConfig { photons_per_ray: 1.0, seed: 0 }),
        geometry: pipeline::GeometryConfig { view_angles: Some(Vec::new()), ..Default::default() },
        ..ExperimentConfig::default()
    })
    .expect("default configuration serializes");
    let mut full = serde_json::to_value(ExperimentConfig::default()).expect("serializable");
    merge(&mut full, value.take());
    overrides::apply(&mut full, &schema, overrides).map_err(Error::Config)?;
    let cfg: ExperimentConfig = serde_json::from_value(full).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Recursively overlays `patch` onto `base`.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

fn configure_threads() -> ringfix::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli, overrides: &[overrides::Override]) -> ringfix::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load_config(config.as_ref(), overrides)?;
            let sim = cmd_simulate(&cfg)?;
            println!(
                "simulated {} views x {} detectors into {} ({} corrupted columns)",
                sim.measured.num_views(),
                sim.measured.num_detectors(),
                cfg.output_dir.display(),
                sim.gains.corrupted_columns.len()
            );
        }
        Command::Correct { config, method } => {
            let cfg = load_config(config.as_ref(), overrides)?;
            let method: Method = method.parse()?;
            let out = cmd_correct(&cfg, method)?;
            let m = &out.metrics;
            println!(
                "{method}: rmse {:.4e} (uncorrected {:.4e}), ring energy {:.4e} (uncorrected {:.4e}, ground truth {:.4e})",
                m.rmse_corrected,
                m.rmse_uncorrected,
                m.ring_energy_corrected,
                m.ring_energy_uncorrected,
                m.ring_energy_ground_truth
            );
            println!("outputs in {}", pipeline::method_dir(&cfg, method).display());
        }
        Command::Report { dirs, csv } => {
            if !overrides.is_empty() {
                return Err(Error::Config("report takes no configuration overrides".into()));
            }
            let rows = cmd_report(&dirs)?;
            print!("{}", report_text(&rows));
            if let Some(path) = csv {
                fs::write(&path, report_csv(&rows)).map_err(|e| Error::Io { path, source: e })?;
            }
        }
        Command::Config { config } => {
            let cfg = load_config(config.as_ref(), overrides)?;
            println!("{}", serde_json::to_string_pretty(&cfg).expect("serializable"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let (program, rest) = args.split_first().expect("program name");
    let (overrides, rest) = match overrides::extract(rest.to_vec()) {
        Ok(split) => split,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(std::iter::once(program.clone()).chain(rest)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
