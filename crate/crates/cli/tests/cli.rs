use std::path::Path;
use std::process::{Command, Output};

use piv_cli::config::builtin_config;
use serde_json::Value;
use tempfile::TempDir;

fn piv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&piv(args))).unwrap()
}

fn write_config(dir: &TempDir, name: &str, v: &Value) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn builtin_json() -> Value {
    serde_json::from_str(&builtin_config().to_json_pretty()).unwrap()
}

fn with_points(points: &[(&str, f64, f64)]) -> Value {
    let mut v = builtin_json();
    let beliefs = v["beliefs"].as_array_mut().unwrap();
    for &(name, t, c) in points {
        beliefs.push(serde_json::json!({"kind": "point", "name": name, "y_t_un": t, "y_c_un": c}));
    }
    v
}

#[test]
fn compute_reproduces_belief_one_corner() {
    let v = json(&["compute", "--belief", "belief-1-corner", "--format", "json"]);
    let value = v["result"]["piv"].as_f64().unwrap();
    assert!((value - 0.918_433_270_429_551_3).abs() < 1e-12, "{value}");
    let text = stdout(&piv(&["compute", "--belief", "belief-1-corner"]));
    assert!(text.contains("piv                  0.918433"), "{text}");
}

#[test]
fn compute_at_zero_correlation_gives_the_test_size() {
    let v = json(&["compute", "--belief", "null", "--format", "json"]);
    assert!(v["ideal"]["r_wy_id"].as_f64().unwrap().abs() < 1e-15);
    assert!((v["result"]["piv"].as_f64().unwrap() - 0.024_997_895_148_220_435).abs() < 1e-12);
}

#[test]
fn json_floats_have_seventeen_significant_digits() {
    let raw = stdout(&piv(&[
        "compute",
        "--belief",
        "belief-1-corner",
        "--format",
        "json",
    ]));
    assert!(raw.contains("\"piv\":9.1843327042955125e-1"), "{raw}");
}

#[test]
fn invalid_config_exits_two_with_field_name() {
    let dir = TempDir::new().unwrap();
    let mut v = builtin_json();
    v["observed"]["pi"] = 1.5.into();
    let path = write_config(&dir, "bad.json", &v);
    let o = piv(&["--config", &path, "compute", "--belief", "null"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("observed.pi"));

    let mut v = builtin_json();
    v["surprise"] = true.into();
    let path = write_config(&dir, "unknown.json", &v);
    assert_eq!(
        piv(&["--config", &path, "compute", "--belief", "null"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn empty_region_exits_two() {
    let dir = TempDir::new().unwrap();
    let mut v = builtin_json();
    v["beliefs"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!({"kind": "region", "name": "empty", "t": [46.0, 45.0], "c": [null, null]}));
    let path = write_config(&dir, "empty.json", &v);
    let o = piv(&["--config", &path, "bound", "--belief", "empty"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_spread_exits_three() {
    let dir = TempDir::new().unwrap();
    let mut v = with_points(&[("flat", 1.0, 1.0)]);
    v["observed"]["var_t"] = 0.0.into();
    v["observed"]["var_c"] = 0.0.into();
    v["observed"]["y_t_ob"] = 1.0.into();
    v["observed"]["y_c_ob"] = 1.0.into();
    let path = write_config(&dir, "flat.json", &v);
    assert_eq!(
        piv(&["--config", &path, "compute", "--belief", "flat"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn bound_reports_published_minima_and_verdicts() {
    let v = json(&["bound", "--belief", "belief-2", "--format", "json"]);
    assert!((v["bound"]["piv_min"].as_f64().unwrap() - 0.936).abs() <= 0.005);
    assert_eq!(v["verdict"], "Robust");
    assert_eq!(v["bound"]["clamped"]["t_lo"], true);

    let v = json(&["bound", "--belief", "minus-seven", "--format", "json"]);
    assert!((v["bound"]["piv_min"].as_f64().unwrap() - 0.795).abs() <= 0.005);

    let text = stdout(&piv(&["bound", "--belief", "belief-1"]));
    assert!(text.contains("piv min  0.918433"), "{text}");
    assert!(
        text.contains("verdict at piv threshold 0.800000: robust"),
        "{text}"
    );
}

#[test]
fn contour_csv_layout() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("grid.csv");
    let summary = stdout(&piv(&[
        "contour",
        "--belief",
        "plausible",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(summary.contains("200x200"), "{summary}");
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 201);
    assert!(lines.iter().all(|l| l.split(',').count() == 201));
    assert!(lines[0].starts_with("y_t_un\\y_c_un,36.77,"));
}

fn grid_json(dir: &Path, grid: &str) -> Value {
    let out = dir.join(format!("grid-{grid}.json"));
    stdout(&piv(&[
        "contour",
        "--belief",
        "plausible",
        "--grid",
        grid,
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]));
    serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn contour_corners_match_compute() {
    let dir = TempDir::new().unwrap();
    let g = grid_json(dir.path(), "2x2");
    let corners = [
        (36.77, 36.77),
        (36.77, 45.78),
        (45.78, 36.77),
        (45.78, 45.78),
    ];
    let points: Vec<(String, f64, f64)> = corners
        .iter()
        .enumerate()
        .map(|(i, &(t, c))| (format!("corner-{i}"), t, c))
        .collect();
    let named: Vec<(&str, f64, f64)> = points
        .iter()
        .map(|(n, t, c)| (n.as_str(), *t, *c))
        .collect();
    let path = write_config(&dir, "corners.json", &with_points(&named));
    for (k, (name, _, _)) in named.iter().enumerate() {
        let v = json(&[
            "--config", &path, "compute", "--belief", name, "--format", "json",
        ]);
        let value = v["result"]["piv"].as_f64().unwrap();
        let cell = g["piv"][k / 2][k % 2].as_f64().unwrap();
        assert!((value - cell).abs() < 1e-15, "{name}: {value} vs {cell}");
    }
}

#[test]
fn fine_grid_minimum_agrees_with_bound() {
    let dir = TempDir::new().unwrap();
    let g = grid_json(dir.path(), "200x200");
    let min = g["piv"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|row| row.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()))
        .fold(f64::INFINITY, f64::min);
    let b = json(&["bound", "--belief", "plausible", "--format", "json"]);
    assert!((b["bound"]["piv_min"].as_f64().unwrap() - min).abs() <= 1e-3);
}

#[test]
fn unwritable_output_exits_four() {
    let o = piv(&[
        "contour",
        "--belief",
        "plausible",
        "--out",
        "/nonexistent-dir/grid.csv",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unbounded_region_cannot_be_gridded() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.csv");
    let o = piv(&[
        "contour",
        "--belief",
        "belief-1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn power_rises_as_counterfactual_treated_mean_falls() {
    let dir = TempDir::new().unwrap();
    let path = write_config(
        &dir,
        "power.json",
        &with_points(&[
            ("high", 45.78, 45.2),
            ("mid", 45.5, 45.2),
            ("low", 45.3, 45.2),
        ]),
    );
    let power = |name: &str| {
        let v = json(&[
            "--config", &path, "power", "--belief", name, "--format", "json",
        ]);
        let p = v["power"].as_f64().unwrap();
        let c = json(&[
            "--config", &path, "compute", "--belief", name, "--format", "json",
        ]);
        assert!((p - c["result"]["piv"].as_f64().unwrap()).abs() <= 1e-12);
        assert_eq!(v["null_mean"].as_f64().unwrap(), 0.0);
        p
    };
    let (high, mid, low) = (power("high"), power("mid"), power("low"));
    assert!(high < mid && mid < low, "{high} {mid} {low}");

    let v = json(&["power", "--belief", "null", "--format", "json"]);
    assert!((v["power"].as_f64().unwrap() - 0.024_997_895_148_220_435).abs() < 1e-12);
    assert_eq!(v["table"].as_array().unwrap().len(), 25);
}

#[test]
fn replicate_prints_report_and_writes_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fig.csv");
    let text = stdout(&piv(&["replicate", "--out", out.to_str().unwrap()]));
    for needle in [
        "Step 1.",
        "Step 6.",
        "lower bound 0.918433 (published 0.92)",
        "lower bound 0.936380 (published 0.936)",
        "lower bound 0.820283 (published 0.82)",
        "lower bound 0.795236 (published 0.795)",
        "prefactor check PASS",
    ] {
        assert!(text.contains(needle), "missing `{needle}` in\n{text}");
    }
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 201);
}

#[test]
fn verify_passes_and_reports_expected_failure() {
    let text = stdout(&piv(&["verify", "--seeds", "12", "--reps", "2000"]));
    assert!(
        text.contains("expected failure (collinear design): detected"),
        "{text}"
    );
    assert!(!text.contains("FAILED"), "{text}");
}

#[test]
fn verify_rejects_bad_arguments() {
    assert_eq!(piv(&["verify", "--seeds", "0"]).status.code(), Some(2));
    assert_eq!(piv(&["verify", "--reps", "10"]).status.code(), Some(2));
}

#[test]
fn dumped_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let first = stdout(&piv(&["--dump-config"]));
    let path = dir.path().join("dumped.json");
    std::fs::write(&path, &first).unwrap();
    let second = stdout(&piv(&["--config", path.to_str().unwrap(), "--dump-config"]));
    assert_eq!(first, second);

    let custom = with_points(&[("odd", 1.0 / 3.0, -2.0e-7)]);
    let path = write_config(&dir, "custom.json", &custom);
    let dumped = stdout(&piv(&["--config", &path, "--dump-config"]));
    let reparsed: piv_cli::config::AnalysisConfig = serde_json::from_str(&dumped).unwrap();
    let original: piv_cli::config::AnalysisConfig = serde_json::from_value(custom).unwrap();
    assert_eq!(reparsed, original);
}

#[test]
fn output_is_deterministic() {
    let args = ["bound", "--belief", "belief-1-variant", "--format", "json"];
    assert_eq!(stdout(&piv(&args)), stdout(&piv(&args)));
    let args = [
        "verify", "--seeds", "3", "--reps", "1000", "--format", "json",
    ];
    assert_eq!(stdout(&piv(&args)), stdout(&piv(&args)));
}
