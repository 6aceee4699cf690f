//! End-to-end tests of the `thermobound` binary: exit codes, output formats,
//! determinism and golden files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermobound"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Data rows of a CSV report: comment lines dropped, header split off.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn footer(text: &str, name: &str) -> f64 {
    let prefix = format!("# {name},");
    let line = text.lines().find(|l| l.starts_with(&prefix)).unwrap();
    line[prefix.len()..].parse().unwrap()
}

const HARMONIC: &str = r#"{
  "model": { "kind": "analytic_harmonic", "mass": 1.0, "omega0": 1.0 },
  "temperatures": { "log_range": { "t_min": 0.01, "t_max": 100.0, "count": 50 } }
}"#;

#[test]
fn specfun_boundary_row() {
    let out = run(&["specfun", "--x", "0"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["x", "g", "g_inverse", "gamma", "w"]);
    assert_eq!(
        rows[0],
        [
            "0.0000000000000000e0",
            "0.0000000000000000e0",
            "0.0000000000000000e0",
            "inf",
            "1.0000000000000000e0"
        ]
    );
}

#[test]
fn specfun_g_at_one_is_tanh_half() {
    let out = run(&["specfun", "--x", "1"]);
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    let g = column(&header, &rows, "g")[0];
    assert!((g - 0.5f64.tanh()).abs() <= 1e-16);
    assert!(rows[0][1].starts_with("4.62117157"));
}

#[test]
fn specfun_range_has_inclusive_endpoints() {
    let out = run(&["specfun", "--range", "0:50:10"]);
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(rows.len(), 11);
    let w = column(&header, &rows, "w");
    assert!(w.windows(2).all(|p| p[1] >= p[0]));
    assert_eq!(column(&header, &rows, "x")[10], 50.0);
}

#[test]
fn specfun_rejects_negative_input() {
    assert_eq!(code(&run(&["specfun", "--x", "-1"])), 3);
    assert_eq!(code(&run(&["specfun", "--x", "1,-0.5"])), 3);
    assert_eq!(code(&run(&["specfun", "--range", "-1:1:4"])), 3);
    assert_eq!(code(&run(&["specfun", "--range", "0:1"])), 3);
}

#[test]
fn usage_errors_exit_3_and_help_exits_0() {
    assert_eq!(code(&run(&[])), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(code(&run(&["specfun"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn fig1_rows_start_at_one_and_never_drop_below() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("fig1.csv");
    let out = run(&[
        "fig1",
        "--z-max",
        "10",
        "--n-points",
        "101",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["z", "w"]);
    assert_eq!(rows.len(), 101);
    let z = column(&header, &rows, "z");
    let w = column(&header, &rows, "w");
    assert_eq!((z[0], w[0]), (0.0, 1.0));
    assert_eq!(z[100], 10.0);
    assert!(w.iter().all(|&v| v >= 1.0));
    assert!(w.windows(2).all(|p| p[1] >= p[0]));
}

#[test]
fn fig1_refined_grid_reproduces_shared_points() {
    let coarse = run(&["fig1", "--z-max", "10", "--n-points", "101"]);
    let fine = run(&["fig1", "--z-max", "10", "--n-points", "201"]);
    let (_, coarse) = csv_rows(std::str::from_utf8(&coarse.stdout).unwrap());
    let (_, fine) = csv_rows(std::str::from_utf8(&fine.stdout).unwrap());
    for (i, row) in coarse.iter().enumerate() {
        assert_eq!(row, &fine[2 * i], "row {i}");
    }
}

#[test]
fn fig1_unwritable_path_exits_3() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("missing").join("fig1.csv");
    assert_eq!(code(&run(&["fig1", "--out", path.to_str().unwrap()])), 3);
    assert!(!path.exists());
    assert_eq!(code(&run(&["fig1", "--n-points", "1"])), 3);
    assert_eq!(code(&run(&["fig1", "--z-max", "0"])), 3);
}

#[test]
fn verify_harmonic_sweep_saturates() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "ho.json", HARMONIC);
    let out_path = dir.path().join("ho.csv");
    let out = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# timestamp_unix=")));
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 50);
    assert_eq!(header.last().unwrap(), "flags");
    for s in column(&header, &rows, "sat_product") {
        assert!((s - 1.0).abs() <= 1e-9, "sat_product = {s}");
    }
    assert!(rows.iter().all(|r| r.last().unwrap() == "ok"));
}

#[test]
fn verify_csv_round_trips_derived_columns() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "ho.json", HARMONIC);
    let out = run(&["verify", "--config", config.to_str().unwrap(), "--no-timestamp"]);
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    let delta_x = column(&header, &rows, "delta_x");
    let lambda = column(&header, &rows, "lambda_th");
    let r = column(&header, &rows, "r");
    let z = column(&header, &rows, "z");
    for i in 0..rows.len() {
        let r_again = delta_x[i] / lambda[i];
        let z_again = 1.0 / (4.0 * std::f64::consts::PI * r_again * r_again);
        assert!((r_again - r[i]).abs() <= 1e-12 * r[i], "row {i}");
        assert!((z_again - z[i]).abs() <= 1e-12 * z[i], "row {i}");
    }
}

#[test]
fn verify_json_mirrors_csv() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "ho.json", HARMONIC);
    let c = config.to_str().unwrap();
    let csv = run(&["verify", "--config", c, "--no-timestamp"]);
    let json = run(&["verify", "--config", c, "--no-timestamp", "--format", "json"]);
    assert_eq!(code(&json), 0);
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let meta = &doc["metadata"];
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert!(meta.get("timestamp_unix").is_none());
    assert_eq!(meta["config"]["model"]["kind"], "analytic_harmonic");
    assert_eq!(meta["tolerances"]["bound_rel_tol"], 1e-9);
    let (header, rows) = csv_rows(std::str::from_utf8(&csv.stdout).unwrap());
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len());
    for name in header.iter().filter(|h| *h != "flags") {
        for (value, row) in column(&header, &rows, name).iter().zip(json_rows) {
            assert_eq!(row[name.as_str()].as_f64().unwrap(), *value, "{name}");
        }
    }
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "ho.json", HARMONIC);
    let c = config.to_str().unwrap();
    for format in ["csv", "json"] {
        let a = run(&["verify", "--config", c, "--no-timestamp", "--format", format]);
        let b = run(&["verify", "--config", c, "--no-timestamp", "--format", format]);
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn verify_matches_golden_files() {
    let golden = golden_dir();
    let config = golden.join("harmonic_sweep.json");
    for (format, file) in [("csv", "harmonic_sweep.csv"), ("json", "harmonic_sweep.out.json")] {
        let out = run(&[
            "verify",
            "--config",
            config.to_str().unwrap(),
            "--no-timestamp",
            "--format",
            format,
        ]);
        assert_eq!(code(&out), 0);
        let expected_path = golden.join(file);
        if std::env::var_os("THERMOBOUND_UPDATE_GOLDEN").is_some() {
            std::fs::write(&expected_path, &out.stdout).unwrap();
        }
        let expected = std::fs::read(&expected_path).unwrap();
        assert!(out.stdout == expected, "{file} differs from the golden copy");
    }
}

#[test]
fn verify_negative_temperature_exits_3_without_output() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "bad.json",
        r#"{"model": {"kind": "analytic_harmonic", "mass": 1.0, "omega0": 1.0}, "temperatures": {"list": [-1.0]}}"#,
    );
    let out_path = dir.path().join("out.csv");
    let out = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(!out_path.exists());
}

#[test]
fn verify_config_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(
        &dir,
        "unknown.json",
        r#"{"model": {"kind": "analytic_harmonic", "mass": 1.0, "omega0": 1.0}, "temperatures": {"list": [1.0]}, "colour": "blue"}"#,
    );
    assert_eq!(code(&run(&["verify", "--config", unknown.to_str().unwrap()])), 3);
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&run(&["verify", "--config", missing.to_str().unwrap()])), 3);
    let garbage = write_config(&dir, "garbage.json", "{");
    assert_eq!(code(&run(&["verify", "--config", garbage.to_str().unwrap()])), 3);
    let empty = write_config(
        &dir,
        "empty.json",
        r#"{"model": {"kind": "analytic_harmonic", "mass": 1.0, "omega0": 1.0}, "temperatures": {"log_range": {"t_min": 1.0, "t_max": 2.0, "count": 0}}}"#,
    );
    assert_eq!(code(&run(&["verify", "--config", empty.to_str().unwrap()])), 3);
}

#[test]
fn verify_numerical_failure_exits_4() {
    let dir = TempDir::new().unwrap();
    // the zero-point spread underflows to zero and the moments overflow
    let config = write_config(
        &dir,
        "overflow.json",
        r#"{"model": {"kind": "analytic_harmonic", "mass": 1e-300, "omega0": 1e300}, "temperatures": {"list": [1.0]}}"#,
    );
    let out_path = dir.path().join("out.csv");
    let out = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    assert!(!out_path.exists());
}

#[test]
fn verify_lattice_oscillator_reports_violations_with_exit_2() {
    // the finite-difference oscillator undershoots the continuum bound at low
    // temperature; the report is still written
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "lattice.json",
        r#"{"model": {"kind": "grid", "mass": 1.0, "grid": {"x_min": -8.0, "x_max": 8.0, "n_points": 300},
            "potential": {"kind": "harmonic", "mass": 1.0, "omega0": 1.0}}, "temperatures": {"list": [0.1, 1.0]}}"#,
    );
    let out_path = dir.path().join("out.csv");
    let out = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let (_, rows) = csv_rows(&text);
    assert!(rows.iter().all(|r| r.last().unwrap().contains("boltzmann_violated")));
}

#[test]
fn verify_double_well_holds() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "dw.json",
        r#"{"model": {"kind": "grid", "mass": 1.0, "grid": {"x_min": -4.5, "x_max": 4.5, "n_points": 1500},
            "potential": {"kind": "polynomial", "coefficients": [0.0, 0.0, -2.0, 0.0, 1.0]}},
            "temperatures": {"log_range": {"t_min": 0.05, "t_max": 2.0, "count": 6}}}"#,
    );
    let out = run(&["verify", "--config", config.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    for (lhs, rhs) in column(&header, &rows, "product_lhs")
        .iter()
        .zip(column(&header, &rows, "boltzmann_rhs"))
    {
        assert!(*lhs >= rhs);
    }
}

#[test]
fn verify_output_section_and_extension_pick_format() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("report.json");
    let body = format!(
        r#"{{"model": {{"kind": "analytic_harmonic", "mass": 1.0, "omega0": 1.0}}, "temperatures": {{"list": [1.0]}},
            "output": {{"path": {}}}}}"#,
        serde_json::to_string(out_path.to_str().unwrap()).unwrap()
    );
    let config = write_config(&dir, "cfg.json", &body);
    assert_eq!(code(&run(&["verify", "--config", config.to_str().unwrap()])), 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_reads_tabulated_file_relative_to_config() {
    let dir = TempDir::new().unwrap();
    let mut table = String::from("# x V\n");
    for i in 0..=200 {
        let x = -6.0 + 12.0 * i as f64 / 200.0;
        table.push_str(&format!("{x} {}\n", 0.5 * x * x));
    }
    std::fs::write(dir.path().join("v.dat"), table).unwrap();
    let config = write_config(
        &dir,
        "tab.json",
        r#"{"model": {"kind": "grid", "mass": 1.0, "grid": {"x_min": -6.0, "x_max": 6.0, "n_points": 200},
            "potential": {"kind": "tabulated_file", "path": "v.dat"}}, "temperatures": {"list": [1.0]}}"#,
    );
    let out = run(&["verify", "--config", config.to_str().unwrap(), "--no-timestamp"]);
    assert!(matches!(code(&out), 0 | 2), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    let db = column(&header, &rows, "db_residual");
    assert!(db[0] <= 1e-10);
}

#[test]
fn spectrum_harmonic_has_two_atoms() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "ho.json", HARMONIC);
    let out = run(&[
        "spectrum",
        "--config",
        config.to_str().unwrap(),
        "--temperature",
        "1",
        "--no-timestamp",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["omega", "mass_p", "mass_q", "db_residual"]);
    let omega = column(&header, &rows, "omega");
    assert!(omega.windows(2).all(|p| p[0] < p[1]));
    let heavy: Vec<f64> = omega
        .iter()
        .zip(column(&header, &rows, "mass_p"))
        .filter(|(_, m)| *m > 1e-13)
        .map(|(o, _)| *o)
        .collect();
    assert_eq!(heavy.len(), 2);
    assert!((heavy[0] + 1.0).abs() <= 1e-12 && (heavy[1] - 1.0).abs() <= 1e-12);
    assert!(footer(&text, "moment1_residual") <= 1e-8);
}

#[test]
fn spectrum_box_satisfies_detailed_balance() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "box.json",
        r#"{"model": {"kind": "analytic_box", "mass": 1.0, "length": 3.141592653589793}, "temperatures": {"list": [1.0]}}"#,
    );
    let out = run(&["spectrum", "--config", config.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let (_, rows) = csv_rows(&text);
    let worst = rows
        .iter()
        .filter(|r| !r[3].is_empty())
        .map(|r| r[3].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst}");
    assert!(footer(&text, "db_max_residual") <= 1e-10);
    assert!(footer(&text, "moment1_residual") <= 1e-8);
}

#[test]
fn spectrum_json_has_atoms_and_summary() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "ho.json", HARMONIC);
    let out = run(&[
        "spectrum",
        "--config",
        config.to_str().unwrap(),
        "--temperature",
        "1",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["summary"]["temperature"], 1.0);
    assert!(doc["atoms"].as_array().unwrap().len() >= 2);
    assert_eq!(
        code(&run(&[
            "spectrum",
            "--config",
            config.to_str().unwrap(),
            "--temperature",
            "-2"
        ])),
        3
    );
}
