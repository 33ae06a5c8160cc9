use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn thetawave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetawave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn params_reports_periods_from_its_own_constants() {
    let out = thetawave(&["params"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ap = v["constants"]["a_plus"].as_f64().unwrap();
    let am = v["constants"]["a_minus"].as_f64().unwrap();
    assert!((v["x_period"].as_f64().unwrap() - ap / 2.0).abs() < 1e-12);
    assert!((v["t_period"].as_f64().unwrap() - am / 4.0).abs() < 1e-12);
    assert!(v["t_prime"].is_null());
    assert_eq!(v["reality"]["real"], Value::Bool(true));
    assert!(v["h_minus"].as_f64().unwrap() > 0.0);
}

#[test]
fn commensurate_lambda0_reports_equal_periods() {
    let v = json(&thetawave(&["params"]));
    let lambda0 = v["constants"]["a_plus"].as_f64().unwrap() / (2.0 * v["constants"]["a_minus"].as_f64().unwrap());
    let out = thetawave(&["params", "--lambda0", &lambda0.to_string()]);
    let v = json(&out);
    let (t, tp) = (v["t_period"].as_f64().unwrap(), v["t_prime"].as_f64().unwrap());
    assert!((t - tp).abs() < 1e-12 * t);
}

#[test]
fn invalid_ordering_exits_2_with_one_line() {
    let out = thetawave(&["params", "--a", "8", "--b", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn two_by_two_grid_has_four_rows() {
    let out = thetawave(&["grid", "--nx", "2", "--nt", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,t,abs_p");
    assert_eq!(lines.len(), 5);
}

#[test]
fn csv_round_trips_and_repeats_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = thetawave(&["grid", "--nx", "9", "--nt", "7", "--format", "csv", "--complex", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());

    let cfg = thetawave::cli::RunConfig::resolve(thetawave::cli::Opts {
        nx: Some(9),
        nt: Some(7),
        ..Default::default()
    })
    .unwrap();
    let field = thetawave::cli::grid_field(&cfg).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,t,abs_p,re_p,im_p"));
    for (row, p) in lines.zip(&field.values) {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[2], p.norm());
        assert_eq!((cells[3], cells[4]), (p.re, p.im));
    }
}

#[test]
fn pgm_heatmap_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cell.pgm");
    let out = thetawave(&["grid", "--nx", "40", "--nt", "30", "--format", "pgm", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = fs::read(&path).unwrap();
    let header = b"P5\n40 30\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 40 * 30);
    assert!(bytes[header.len()..].contains(&255) && bytes[header.len()..].contains(&0));
    let side: Value = serde_json::from_str(&fs::read_to_string(Path::new(&format!("{}.json", path.display()))).unwrap()).unwrap();
    assert!(side["max"].as_f64().unwrap() > side["min"].as_f64().unwrap());
    assert_eq!(side["width"], 40);
}

#[test]
fn grid_peak_matches_amplitude_form() {
    let cfg = thetawave::cli::RunConfig::resolve(thetawave::cli::Opts {
        nx: Some(33),
        nt: Some(33),
        ..Default::default()
    })
    .unwrap();
    let field = thetawave::cli::grid_field(&cfg).unwrap();
    let sp = cfg.solution_params().unwrap();
    let g = field.grid;
    let mut peak2 = 0.0f64;
    for i in 0..g.nx {
        for j in 0..g.nt {
            peak2 = peak2.max(thetawave::solution::eval_amp2(g.x(i), g.t(j), &sp).unwrap());
        }
    }
    assert!((field.max_abs() - peak2.sqrt()).abs() < 1e-9 * field.max_abs());
}

#[test]
fn three_nine_configuration_writes_files() {
    let v = json(&thetawave(&["params", "--a", "1", "--b", "3", "--c", "9"]));
    let lambda0 = v["constants"]["a_plus"].as_f64().unwrap() / (2.0 * v["constants"]["a_minus"].as_f64().unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sol3.csv");
    let out = thetawave(&[
        "grid", "--lambda0", &lambda0.to_string(), "--a", "1", "--b", "3", "--c", "9", "--nx", "16", "--nt", "16",
        "--format", "csv", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 257);
}

#[test]
fn scan_rows_and_ranges() {
    let out = thetawave(&["scan", "--vary", "a", "--from", "2", "--to", "2", "--points", "1", "--a", "4", "--b", "5", "--c", "6", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);

    let out = thetawave(&["scan", "--vary", "a", "--from", "1", "--to", "4.9", "--points", "12", "--a", "4", "--b", "5", "--c", "6", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let xs: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[1] > w[0]));

    let out = thetawave(&["scan", "--vary", "c", "--from", "4", "--to", "9", "--a", "4", "--b", "5", "--c", "6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes_and_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.json");
    let out = thetawave(&["verify", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["ledger"]["entries"].as_array().unwrap().len() >= 10);

    assert_eq!(thetawave(&["verify", "--corrupt-k2"]).status.code(), Some(1));
}

#[test]
fn verify_with_limit_adds_convergence_entries() {
    let out = thetawave(&["verify", "--limit", "c_to_b", "--eps", "1e-4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let names: Vec<&str> = v["ledger"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"c_to_b_monotone"));
    assert_eq!(names.iter().filter(|n| n.starts_with("c_to_b_distance")).count(), 3);
}

#[test]
fn limits_report_all_three() {
    let v = json(&thetawave(&["limits", "--eps", "1e-4"]));
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        assert!(r["limit_residual"].as_f64().unwrap() < 1e-6, "{r}");
    }
    assert_eq!(thetawave(&["limits", "--limit", "b_to_a"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"a": 3.0, "b": 4.0, "c": 5.0, "format": "csv", "nx": 3, "nt": 2}"#).unwrap();
    let out = thetawave(&["grid", "--config", cfg.to_str().unwrap(), "--nx", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);
}

#[test]
fn unwritable_output_exits_3() {
    let out = thetawave(&["params", "--out", "/nonexistent-dir/p.json"]);
    assert_eq!(out.status.code(), Some(3));
}
