use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singlet-pump"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows of a CSV document as header-keyed maps.
fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn f(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn pump_q(args: &[&str]) -> f64 {
    let v: Value = serde_json::from_str(&stdout(&run(args))).unwrap();
    v["q_singlets"].as_f64().unwrap()
}

#[test]
fn green_below_band_is_real() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[green]\nenergies = [-6.0]\n");
    let rows = csv_rows(&stdout(&run(&["green", "--config", &cfg])));
    assert_eq!(rows.len(), 1);
    for key in ["im_g0_onsite", "im_g0_offdiag", "im_g0_plus", "im_g0_minus"] {
        assert!(f(&rows[0], key).abs() < 1e-5, "{key} = {}", rows[0][key]);
    }
    assert_eq!(rows[0]["err"], "");
}

#[test]
fn green_columns_are_fixed() {
    let text = stdout(&run(&["green"]));
    assert_eq!(
        text.lines().next().unwrap(),
        "E,eta,re_g0_onsite,im_g0_onsite,re_g0_offdiag,im_g0_offdiag,re_g0_plus,im_g0_plus,re_g0_minus,im_g0_minus,err"
    );
    assert_eq!(csv_rows(&text).len(), 21);
}

#[test]
fn green_with_oracle_agrees() {
    let rows = csv_rows(&stdout(&run(&["green", "--with-oracle"])));
    assert_eq!(rows.len(), 21);
    for row in &rows {
        assert!(f(row, "oracle_rel_err") < 1e-3, "E = {}: {}", row["E"], row["oracle_rel_err"]);
    }
}

#[test]
fn empty_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[green]\nenergies = []\n");
    let o = run(&["green", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flag_value_is_a_usage_error() {
    assert_eq!(run(&["pump", "--mode", "lukewarm"]).status.code(), Some(2));
    assert_eq!(run(&["pump", "--eta", "-1"]).status.code(), Some(2));
}

#[test]
fn pump_reference_regression() {
    let v: Value = serde_json::from_str(&stdout(&run(&["pump"]))).unwrap();
    let q = v["q_singlets"].as_f64().unwrap();
    assert!((q - -9.081450141265e-7).abs() < 1e-6 * 9.08e-7, "{q}");
    assert_eq!(v["mode"], "zero_T");
    assert_eq!(v["cycle"]["orientation"], "counterclockwise");
    assert_eq!(v["adiabaticity"]["dwell_length"], 3.0);
    assert_eq!(v["diagnostics"]["legs"].as_array().unwrap().len(), 4);
}

#[test]
fn pump_zero_area_and_reversal() {
    let dir = tempfile::tempdir().unwrap();
    let line = write_config(
        dir.path(),
        "[cycle]\nvertices = [[0.5, 0.5], [4.0, 2.0], [0.5, 0.5]]\n[distribution]\ne_max = 1.0\n",
    );
    assert!(pump_q(&["pump", "--config", &line]).abs() < 1e-12);

    let fwd = write_config(dir.path(), "[distribution]\ne_max = 1.0\n");
    let q = pump_q(&["pump", "--config", &fwd]);
    let rev = write_config(
        dir.path(),
        "[cycle]\nvertices = [[0.5, 0.5], [0.5, 4.0], [4.0, 4.0], [4.0, 0.5], [0.5, 0.5]]\n[distribution]\ne_max = 1.0\n",
    );
    let q_rev = pump_q(&["pump", "--config", &rev]);
    assert!(q.abs() > 0.1);
    assert!((q + q_rev).abs() < 1e-10, "{q} {q_rev}");
}

#[test]
fn pump_flags_override_config() {
    let v: Value =
        serde_json::from_str(&stdout(&run(&["pump", "--mode", "finite_T", "--beta", "10", "--sign-pairing", "alternate"])))
            .unwrap();
    assert_eq!(v["mode"], "finite_T");
    assert_eq!(v["beta"], 10.0);
    assert_eq!(v["sign_pairing"], "alternate");
    assert!(!v["diagnostics"]["energies"].as_array().unwrap().is_empty());
}

#[test]
fn fig2b_diagonal_is_zero_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[fig2b]\nu_min = [0.5, 1.0, 2.0]\nu_max = [0.5, 1.0, 2.0, 4.0]\n");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        stdout(&run(&["fig2b", "--config", &cfg, "--out", p.to_str().unwrap()]));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("u_min,u_max,q_singlets,"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 9);
    for row in &rows {
        assert_eq!(row["err"], "");
        if row["u_min"] == row["u_max"] {
            assert_eq!(f(row, "q_singlets"), 0.0);
        }
    }
}

#[test]
fn fig3_below_band_zero_and_separation_matters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[fig3]\ne_max = [-4.5, -4.25, -1.0, 0.5, 1.0, 2.0]\n");
    let rows = csv_rows(&stdout(&run(&["fig3", "--config", &cfg])));
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().filter(|r| f(r, "e_max") < -4.0).all(|r| f(r, "q_singlets").abs() < 1e-5));
    let q = |m: &str, e: f64| {
        rows.iter()
            .find(|r| r["m"] == m && f(r, "e_max") == e)
            .map(|r| f(r, "q_singlets"))
            .unwrap()
    };
    let diff = [-1.0, 0.5, 1.0, 2.0].iter().map(|&e| (q("1", e) - q("2", e)).abs()).fold(0.0, f64::max);
    assert!(diff > 1e-3, "{diff}");
}

#[test]
fn oracle_table_pairs_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[green]\nenergies = [-1.0, 2.5]\n[oracle]\nt_u = [2.0]\nt_energies = [1.0]\nt_sites = 4000\nt_eta = 0.01\nfermi_levels = [-1.0, 1.0]\n",
    );
    let rows = csv_rows(&stdout(&run(&["oracle", "--config", &cfg])));
    assert_eq!(rows.len(), 4 + 1 + 2);
    for row in &rows {
        assert_eq!(row["err"], "");
        assert!(f(row, "rel_err") < 1e-3, "{row:?}");
    }
}

#[test]
fn validate_subset_and_sensitivity_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let o = run(&["validate", "--only", "3,6", "--out", json.to_str().unwrap()]);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 2);

    // Antisymmetry is a property of the line integral and survives the
    // alternate sign pairing.
    let o = run(&["validate", "--only", "5", "--sign-pairing", "alternate", "--out", json.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["sign_pairing"], "alternate");
    assert_eq!(report["criteria"][0]["passed"], true);
}

#[test]
fn validate_rejects_corrupt_config_and_unknown_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[model\nm = ");
    assert_eq!(run(&["validate", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--only", "12"]).status.code(), Some(2));
}
