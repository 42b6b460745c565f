//! End-to-end tests of the `pointburst` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use pointburst::estimate::{bin_counts, KernelSpec, SeasonalCurve};
use pointburst::ibtest::{detect_day_with, AvarScheme, TestConfig};
use pointburst::io::read_events;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pointburst"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pointburst-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn write_burst_scenario(dir: &PathBuf) -> PathBuf {
    let path = dir.join("scenario.json");
    fs::write(
        &path,
        r#"{
            "base": { "kind": "poisson", "rate": 1.0 },
            "burst": {
                "tau_ib": 12000.0,
                "alpha": 0.5,
                "sigma": 16.9,
                "half_width": 300.0
            }
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn simulate_then_detect_finds_the_burst() {
    let dir = tmp_dir("roundtrip");
    let scenario = write_burst_scenario(&dir);
    let events = dir.join("events.csv");
    let out = run(bin()
        .args(["simulate", "--config"])
        .arg(&scenario)
        .args(["--seed", "42", "--grid-step", "1.0", "--out"])
        .arg(&events));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let detections = dir.join("detections.json");
    let plot = dir.join("plot.csv");
    let out = run(bin()
        .args(["detect", "--input"])
        .arg(&events)
        .args(["--ell", "300", "--threshold", "4.0", "--out"])
        .arg(&detections)
        .arg("--plot-data")
        .arg(&plot));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let payload: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&detections).unwrap()).unwrap();
    let hits = payload["detections"].as_array().unwrap();
    assert!(!hits.is_empty(), "no detections: {payload}");
    let t = hits[0]["t"].as_f64().unwrap();
    assert!((t - 12_000.0).abs() <= 300.0, "detection at {t}");

    // Plot data has one row per second plus the header.
    let plot_text = fs::read_to_string(&plot).unwrap();
    assert_eq!(plot_text.lines().count(), 23_401);
    assert!(plot_text.starts_with("t,spot,statistic\n"));
}

#[test]
fn file_pipeline_matches_in_memory_pipeline() {
    let dir = tmp_dir("equiv");
    let scenario = write_burst_scenario(&dir);
    let events_path = dir.join("events.csv");
    run(bin()
        .args(["simulate", "--config"])
        .arg(&scenario)
        .args(["--seed", "7", "--grid-step", "1.0", "--out"])
        .arg(&events_path));

    let detections = dir.join("detections.json");
    let out = run(bin()
        .args(["detect", "--input"])
        .arg(&events_path)
        .args(["--ell", "300", "--threshold", "4.0", "--out"])
        .arg(&detections));
    assert!(out.status.success());
    let payload: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&detections).unwrap()).unwrap();

    // Same computation through the library on the round-tripped file.
    let events = read_events(&events_path, Some(23_400.0)).unwrap();
    let counts = bin_counts(&events, 1.0, 23_400.0).unwrap();
    let config = TestConfig {
        ell: 300,
        k_n: 3_000,
        kernel: KernelSpec::exponential(),
        avar_scheme: AvarScheme::Overlapping,
    };
    let day = detect_day_with(
        &counts,
        &SeasonalCurve::flat(counts.len()),
        &config,
        4.0,
        20,
        300.0,
    )
    .unwrap();
    let file_hits = payload["detections"].as_array().unwrap();
    assert_eq!(file_hits.len(), day.detections.len());
    for (a, b) in file_hits.iter().zip(&day.detections) {
        assert_eq!(a["t"].as_f64().unwrap(), b.t);
        assert_eq!(a["statistic"].as_f64().unwrap(), b.statistic);
    }
}

#[test]
fn descending_times_fail_with_line_number() {
    let dir = tmp_dir("badfile");
    let bad = dir.join("bad.csv");
    fs::write(&bad, "time_s\n5.0\n3.0\n").unwrap();
    let out = run(bin()
        .args(["detect", "--input"])
        .arg(&bad)
        .args(["--out"])
        .arg(dir.join("x.json")));
    assert!(!out.status.success());
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"]["code"], "format");
    assert!(
        err["error"]["message"].as_str().unwrap().contains("line 3"),
        "{err}"
    );
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run(bin().arg("frobnicate"));
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage") || stderr.contains("usage"), "{stderr}");
}

#[test]
fn seasonality_and_classify_round_trip() {
    let dir = tmp_dir("seasonal");
    let scenario = dir.join("null.json");
    fs::write(
        &scenario,
        r#"{ "base": { "kind": "poisson", "rate": 1.0 } }"#,
    )
    .unwrap();
    let mut day_paths = Vec::new();
    for seed in 0..3 {
        let path = dir.join(format!("day{seed}.csv"));
        let out = run(bin()
            .args(["simulate", "--config"])
            .arg(&scenario)
            .args(["--seed", &seed.to_string(), "--grid-step", "1.0", "--out"])
            .arg(&path));
        assert!(out.status.success());
        day_paths.push(path);
    }
    let curve = dir.join("seasonal.csv");
    let mut cmd = bin();
    cmd.arg("seasonality").arg("--inputs");
    for p in &day_paths {
        cmd.arg(p);
    }
    let out = run(cmd.arg("--out").arg(&curve));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(&curve).unwrap().starts_with("bin_index,factor"));

    // Classify the burst day at its center.
    let burst_scenario = write_burst_scenario(&dir);
    let events = dir.join("burst_events.csv");
    run(bin()
        .args(["simulate", "--config"])
        .arg(&burst_scenario)
        .args(["--seed", "11", "--grid-step", "1.0", "--out"])
        .arg(&events));
    let classified = dir.join("classification.json");
    let out = run(bin()
        .args(["classify", "--input"])
        .arg(&events)
        .args(["--theta", "12000", "--ell", "60", "--out"])
        .arg(&classified));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let payload: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&classified).unwrap()).unwrap();
    assert_eq!(payload["theta"].as_f64().unwrap(), 12_000.0);
    assert!(payload["ratio"].as_f64().unwrap() < 0.95);
    assert_eq!(payload["verdict"], "burst_like");
}

#[test]
fn output_dir_env_var_prefixes_relative_paths() {
    let dir = tmp_dir("envvar");
    let scenario = write_burst_scenario(&dir);
    let out = run(bin()
        .env(OUT_DIR_ENV, &dir)
        .args(["simulate", "--config"])
        .arg(&scenario)
        .args(["--seed", "1", "--grid-step", "1.0", "--out", "relative_events.csv"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("relative_events.csv").exists());
}

const OUT_DIR_ENV: &str = "POINTBURST_OUT_DIR";
