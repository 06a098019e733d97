//! End-to-end tests of the `squeezecool` binary: exit codes, config
//! validation, output determinism, file formats, and the figure datasets.

use std::collections::HashMap;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_squeezecool"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn squeezecool")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

/// Parse a CSV document into (metadata lines, header, rows of cells).
fn parse_csv(text: &str) -> (Vec<String>, Vec<String>, Vec<Vec<String>>) {
    let mut meta = Vec::new();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') {
            meta.push(line.to_string());
        } else if header.is_empty() {
            header = line.split(',').map(str::to_string).collect();
        } else {
            rows.push(line.split(',').map(str::to_string).collect());
        }
    }
    (meta, header, rows)
}

fn column_index(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column `{name}` missing from {header:?}"))
}

fn cell_f64(row: &[String], idx: usize) -> f64 {
    row[idx]
        .parse()
        .unwrap_or_else(|_| panic!("cell `{}` is not numeric", row[idx]))
}

#[test]
fn unknown_config_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "delta = -2\nchirality = 7\n").unwrap();
    let out = run(&[
        "limits",
        "--config",
        cfg.to_str().unwrap(),
        "--kappa",
        "4",
        "--g",
        "0.2",
        "--nth",
        "10",
        "--qm",
        "1e5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("chirality"),
        "stderr must name the offending key: {}",
        stderr(&out)
    );
}

#[test]
fn missing_required_key_exits_2() {
    let out = run(&["limits", "--kappa", "4", "--g", "0.2", "--nth", "10", "--qm", "1e5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("delta"), "stderr: {}", stderr(&out));
}

#[test]
fn identical_runs_are_byte_identical_across_jobs() {
    let args = |jobs: &'static str| {
        vec![
            "sweep", "--kappa", "4", "--nth", "10", "--qm", "1e5", "--grid",
            "delta,-3,-0.5,16,lin", "--grid", "g,0.05,0.4,3,log", "--jobs", jobs,
        ]
    };
    let a = run(&args("4"));
    let b = run(&args("2"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "outputs must be byte-identical");
}

#[test]
fn sweep_keeps_unstable_rows_and_full_cardinality() {
    // The delta axis crosses the stability boundary near -omega_m/2, so some
    // points are unstable; every grid point must still be a row.
    let out = run(&[
        "sweep", "--kappa", "4", "--nth", "10", "--qm", "1e5", "--g", "0.3", "--grid",
        "delta,-3,-0.2,6,lin",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, header, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 6, "row count must equal the grid cardinality");
    let status = column_index(&header, "status");
    let statuses: Vec<&str> = rows.iter().map(|r| r[status].as_str()).collect();
    assert!(statuses.contains(&"ok"), "statuses: {statuses:?}");
    assert!(statuses.contains(&"unstable"), "statuses: {statuses:?}");
    let n_mech = column_index(&header, "n_mech");
    for row in &rows {
        if row[status] == "unstable" {
            assert!(row[n_mech].is_empty(), "unstable rows carry no occupancy");
        } else {
            assert!(cell_f64(row, n_mech) > 0.0);
        }
    }
}

#[test]
fn flag_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "delta = -9\nkappa = 4\ng = 0.2\nn_th = 1000\nq_m = 1e5\n",
    )
    .unwrap();
    let out = run(&[
        "limits",
        "--config",
        cfg.to_str().unwrap(),
        "--delta",
        "-2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("# param delta = -2"),
        "header must record the flag value: {text}"
    );
    let (_, header, rows) = parse_csv(&text);
    assert_eq!(cell_f64(&rows[0], column_index(&header, "delta")), -2.0);
}

#[test]
fn limits_kappa_grid_hits_squeezed_drive_unity() {
    // At kappa = 4 q_m/(5 n_th) = 80 the squeezed-drive minimum is exactly 1.
    let out = run(&[
        "limits", "--nth", "1000", "--qm", "1e5", "--grid", "kappa,80,160,2,lin",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, header, rows) = parse_csv(&stdout(&out));
    let n_sd = cell_f64(&rows[0], column_index(&header, "n_sd"));
    assert!((n_sd - 1.0).abs() <= 1e-12, "n_sd(80) = {n_sd}");
    // All three schemes appear with their optimizing couplings.
    for col in ["n_sb", "n_is", "g_opt_sb", "g_opt_sd", "g_opt_is"] {
        column_index(&header, col);
    }
}

#[test]
fn limits_kappa_grid_shorthand_matches_example_shape() {
    let out = run(&[
        "limits", "--scheme", "all", "--nth", "1000", "--qm", "1e5", "--kappa-grid",
        "4..4000x9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (meta, header, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 9);
    assert_eq!(cell_f64(&rows[0], 0), 4.0);
    assert_eq!(cell_f64(&rows[8], 0), 4000.0);
    assert!(meta.iter().any(|m| m.contains("grid kappa")));
    // Three curves, as in the minimum-occupancy figure.
    for col in ["n_sb", "n_sd", "n_is"] {
        column_index(&header, col);
    }
}

#[test]
fn json_mirrors_csv_columns() {
    let args = [
        "limits", "--delta", "-2", "--kappa", "4", "--g", "0.2", "--nth", "1000", "--qm",
        "1e5",
    ];
    let csv = run(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let json_out = run(&json_args);
    assert_eq!(json_out.status.code(), Some(0));
    let (_, header, rows) = parse_csv(&stdout(&csv));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json_out)).expect("valid JSON");
    let order: Vec<String> = doc["column_order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(order, header, "JSON column order must match the CSV header");
    let n_f_csv = cell_f64(&rows[0], column_index(&header, "n_f"));
    let n_f_json = doc["columns"]["n_f"][0].as_f64().unwrap();
    assert_eq!(n_f_csv, n_f_json);
    assert_eq!(doc["metadata"]["command"], "limits");
    assert!(doc["metadata"]["params"]["delta"].is_string());
}

#[test]
fn stdout_is_the_default_sink() {
    let out = run(&[
        "spectrum", "--delta", "-2", "--kappa", "4", "--g", "0.1", "--nth", "1", "--qm",
        "1e4", "--grid", "omega,-2,2,5,lin",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# tool: squeezecool"), "got: {text}");
    let (_, header, rows) = parse_csv(&text);
    assert_eq!(header, vec!["omega", "s_ff"]);
    assert_eq!(rows.len(), 5);
}

#[test]
fn backaction_spectrum_vanishes_at_red_sideband() {
    // IS scheme with the auto pump: exact zero at omega = -omega_m.
    let out = run(&[
        "spectrum", "--delta", "-2", "--kappa", "4", "--g", "0.1", "--nth", "1", "--qm",
        "1e4", "--grid", "omega,-2,2,5,lin",
    ]);
    let (_, header, rows) = parse_csv(&stdout(&out));
    let w = column_index(&header, "omega");
    let s = column_index(&header, "s_ff");
    let row = rows
        .iter()
        .find(|r| cell_f64(r, w) == -1.0)
        .expect("omega = -1 grid point");
    assert_eq!(cell_f64(row, s), 0.0);
}

#[test]
fn unstable_single_point_exits_3() {
    let out = run(&[
        "squeeze", "--delta", "1", "--kappa", "0.1", "--g", "0.2", "--nth", "1", "--qm",
        "1e3", "--eps-re", "0", "--eps-im", "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("unstable"), "stderr: {}", stderr(&out));
}

#[test]
fn reduce3_reduction_matches_full_model() {
    let out = run(&[
        "reduce3", "--delta-1", "-1.88", "--delta-2", "-30", "--nu-re", "5e-5", "--g-1",
        "1e-4", "--g-2", "1e-5", "--kappa-1", "2", "--kappa-2", "1", "--eps-1-re", "2000",
        "--eps-2-re", "-20000", "--gamma", "1e-5", "--n-th", "100",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let (_, header, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[column_index(&header, "status")], "ok");
    assert_eq!(cell_f64(row, column_index(&header, "valid")), 1.0);
    let n_full = cell_f64(row, column_index(&header, "n_mech_full"));
    let n_reduced = cell_f64(row, column_index(&header, "n_mech_reduced"));
    assert!(
        ((n_full - n_reduced) / n_full).abs() < 0.02,
        "full {n_full} vs reduced {n_reduced}"
    );
}

#[test]
fn cool_trajectory_relaxes_toward_steady_state() {
    let out = run(&[
        "cool", "--delta", "-1", "--kappa", "4", "--g", "0.2", "--nth", "1.5", "--qm",
        "1e4", "--t-max", "200", "--samples", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, header, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 5);
    let t = column_index(&header, "t");
    let n = column_index(&header, "n_mech");
    assert_eq!(cell_f64(&rows[0], t), 0.0);
    assert_eq!(cell_f64(&rows[0], n), 1.5);
    // Cooling: the occupancy decreases monotonically on this trajectory.
    let occ: Vec<f64> = rows.iter().map(|r| cell_f64(r, n)).collect();
    assert!(occ.windows(2).all(|w| w[1] < w[0]), "occupancies: {occ:?}");
}

#[test]
fn regions_squeezed_drive_boundary_is_exact() {
    let out = run(&["regions", "--grid", "n_th,1000,2000,2,log"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, header, rows) = parse_csv(&stdout(&out));
    let sd = cell_f64(&rows[0], column_index(&header, "sd_kappa_ratio"));
    assert_eq!(sd, 20.0, "q_m/(5 n_th) at the defaults");
    let is = cell_f64(&rows[0], column_index(&header, "is_achievable"));
    assert_eq!(is, 1.0);
}

#[test]
fn fig2a_dataset_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("fig2a.csv");
    let out = run(&[
        "figure", "--id", "fig2a", "--density", "13", "--out",
        data.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&data).unwrap();
    let (_, header, rows) = parse_csv(&text);
    assert_eq!(header, vec!["omega", "s_sb", "s_sd", "s_is"]);
    assert_eq!(rows.len(), 13);
    let w = column_index(&header, "omega");
    let s_is = column_index(&header, "s_is");
    let row = rows
        .iter()
        .find(|r| cell_f64(r, w) == -1.0)
        .expect("omega = -1 grid point");
    assert!(
        cell_f64(row, s_is) <= 1e-12,
        "IS spectrum must vanish at the red sideband"
    );
    // All spectra are nonnegative everywhere.
    for r in &rows {
        for c in 1..4 {
            assert!(cell_f64(r, c) >= 0.0);
        }
    }

    let manifest_path = dir.path().join("fig2a.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap())
            .expect("manifest is valid JSON");
    assert_eq!(manifest["figure"], "fig2a");
    let cols = manifest["columns"].as_object().unwrap();
    for name in &header {
        let entry = cols
            .get(name)
            .unwrap_or_else(|| panic!("manifest missing column `{name}`"));
        assert!(entry["description"].is_string());
        assert!(entry["units"].is_string());
    }
}

#[test]
fn fig4b_markers_are_sparse_and_track_curves() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("fig4b.csv");
    let out = run(&[
        "figure", "--id", "fig4b", "--density", "13", "--out",
        data.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let (_, header, rows) = parse_csv(&std::fs::read_to_string(&data).unwrap());
    assert_eq!(rows.len(), 13);
    let curve_sd = column_index(&header, "curve_sd");
    let marker_sd = column_index(&header, "marker_sd");
    let marker_rows: Vec<&Vec<String>> = rows
        .iter()
        .filter(|r| !r[marker_sd].is_empty())
        .collect();
    let empty_rows = rows.len() - marker_rows.len();
    assert_eq!(marker_rows.len(), 7, "markers sit on a sparse subset");
    assert_eq!(empty_rows, 6, "non-marker rows leave the cells empty");
    // The exact steady-state marker validates the closed-form curve.
    for row in marker_rows {
        let curve = cell_f64(row, curve_sd);
        let marker = cell_f64(row, marker_sd);
        assert!(
            ((marker - curve) / curve).abs() < 0.05,
            "curve {curve} vs marker {marker}"
        );
    }
}

#[test]
fn out_dir_env_names_default_figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["figure", "--id", "fig4a", "--density", "3"])
        .env("SQUEEZECOOL_OUT_DIR", dir.path())
        .output()
        .expect("spawn squeezecool");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.path().join("fig4a.csv").is_file());
    assert!(dir.path().join("fig4a.manifest.json").is_file());
    let (_, header, rows) = parse_csv(
        &std::fs::read_to_string(dir.path().join("fig4a.csv")).unwrap(),
    );
    // Closed form and independent bisection agree along the boundary.
    let boundary_pairs: HashMap<&str, &str> =
        [("sb_closed", "sb_scan"), ("sd_closed", "sd_scan")].into();
    for row in &rows {
        for (closed, scan) in &boundary_pairs {
            let c = cell_f64(row, column_index(&header, closed));
            let s = cell_f64(row, column_index(&header, scan));
            assert!(((c - s) / c).abs() < 1e-6, "{closed} {c} vs {scan} {s}");
        }
    }
}

#[test]
fn relative_out_path_honors_out_dir_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "limits", "--delta", "-2", "--kappa", "4", "--g", "0.2", "--nth", "10",
            "--qm", "1e5", "--out", "report.csv",
        ])
        .env("SQUEEZECOOL_OUT_DIR", dir.path())
        .output()
        .expect("spawn squeezecool");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.path().join("report.csv").is_file());
}

#[test]
fn grid_axis_rejects_bad_spacing() {
    let out = run(&[
        "sweep", "--kappa", "4", "--nth", "10", "--qm", "1e5", "--grid",
        "delta,-3,-0.5,8,cubic",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lin"), "stderr: {}", stderr(&out));
}
