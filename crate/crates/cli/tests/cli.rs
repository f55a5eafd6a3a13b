use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &[&str] = &[
    "--geometry.num_detectors=45",
    "--geometry.detector_pitch=3.4466666666666668",
    "--geometry.num_views=40",
    "--geometry.image_size=32",
    "--geometry.pixel_pitch=2.24",
    "--phantom.image_size=32",
    "--solver.outer_iters=4",
    "--solver.admm_iters=2",
    "--solver.tv_inner_iters=3",
];

fn ringfix(args: &[&str], out: &Path) -> Output {
    let dir = format!("--output_dir={}", out.display());
    Command::new(env!("CARGO_BIN_EXE_ringfix"))
        .args(args)
        .arg(&dir)
        .env("RINGFIX_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn with_small<'a>(head: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(SMALL).copied().collect()
}

#[test]
fn simulate_correct_report_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ringfix(&with_small(&["simulate", "--scenario=smoke"]), tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("manifest.json").exists());

    for method in ["proposed", "baseline", "none"] {
        let out = ringfix(&with_small(&["correct", "--method", method, "--scenario=smoke"]), tmp.path());
        assert!(out.status.success(), "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let trace = fs::read_to_string(tmp.path().join(method).join("trace.csv")).unwrap();
        assert_eq!(trace.lines().count(), 1 + 5);
    }

    let csv = tmp.path().join("table.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_ringfix"))
        .arg("report")
        .arg(tmp.path())
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4, "{text}");
    assert!(text.contains("smoke"));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 4);
}

#[test]
fn config_file_and_overrides_resolve() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"solver": {"lambda2": 0.25}, "scenario": "from-file"}"#).unwrap();
    let out = ringfix(
        &[
            "config",
            "--config",
            cfg.to_str().unwrap(),
            "--solver.lambda3=0.75",
            "--noise.photons_per_ray=1e4",
            "--noise.seed=3",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let resolved: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(resolved["solver"]["lambda2"], 0.25);
    assert_eq!(resolved["solver"]["lambda3"], 0.75);
    assert_eq!(resolved["scenario"], "from-file");
    assert_eq!(resolved["noise"]["seed"], 3);
    assert_eq!(resolved["geometry"]["num_detectors"], 363);
}

#[test]
fn exit_codes_distinguish_failures() {
    let tmp = tempfile::tempdir().unwrap();

    let bad_value = ringfix(&["simulate", "--solver.mu1=0"], tmp.path());
    assert_eq!(bad_value.status.code(), Some(2));

    let unknown = ringfix(&["simulate", "--solver.nope=1"], tmp.path());
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("solver.nope"));

    let bad_method = ringfix(&["correct", "--method", "magic"], tmp.path());
    assert_eq!(bad_method.status.code(), Some(2));

    let missing = ringfix(&with_small(&["correct", "--method", "none"]), &tmp.path().join("absent"));
    assert_eq!(missing.status.code(), Some(3));

    let missing_cfg = ringfix(&["simulate", "--config", "/nonexistent/cfg.json"], tmp.path());
    assert_eq!(missing_cfg.status.code(), Some(3));

    let bad_threads = Command::new(env!("CARGO_BIN_EXE_ringfix"))
        .args(["config"])
        .env("RINGFIX_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn non_finite_state_exits_with_numerical_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ringfix(&with_small(&["simulate"]), tmp.path());
    assert!(out.status.success());
    let huge = ringfix::Sinogram::log(ndarray::Array2::from_elem((40, 45), 1e307));
    ringfix::io::write_sinogram(&tmp.path().join("measured_sino.sino"), &huge).unwrap();
    let out =
        ringfix(&with_small(&["correct", "--method", "none", "--solver.nonneg_image=false"]), tmp.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteration"));
}
