use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypo"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hypo-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn report(dir: &Path) -> Vec<Value> {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn compare_on_double_well_passes() {
    let out = scratch("compare");
    let st = bin()
        .args(["--profile", "fast", "--config"])
        .arg(config("double_well.toml"))
        .arg("--out-dir")
        .arg(&out)
        .arg("compare")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let r = report(&out);
    assert!(r[0]["parameters"]["admissibility"]["b_a4_c0"].as_bool().unwrap());
    let table = std::fs::read_to_string(out.join("compare_ratios.csv")).unwrap();
    assert!(table.lines().count() >= 9, "{table}");
}

#[test]
fn identity_on_flat_potential() {
    let out = scratch("flat");
    let st = bin().arg("--config").arg(config("flat.toml")).arg("--out-dir").arg(&out).arg("identity").status().unwrap();
    assert_eq!(st.code(), Some(0));
    let r = report(&out);
    let res = r[0]["metrics"]["max_residual"].as_f64().unwrap();
    assert!(res < 1e-13, "{res}");
}

#[test]
fn malformed_config_exits_two() {
    let out = scratch("bad");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("bad.toml");
    std::fs::write(&cfg, "[potential]\ncos_coeffs = [0, 1]\n[parameters]\nh = -1\n").unwrap();
    let o = bin().arg("--config").arg(&cfg).arg("--out-dir").arg(&out).arg("witten").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let rec: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec["error"], "ConfigInvalid");
    let file: Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(file, rec);
}

#[test]
fn missing_config_exits_two() {
    let o = bin().args(["--config", "/nonexistent/hypo.toml", "--out-dir"]).arg(scratch("missing")).arg("barcode").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn inadmissible_compare_is_refused() {
    let out = scratch("refuse");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("big_b.toml");
    let text = std::fs::read_to_string(config("double_well.toml")).unwrap().replace("b_factor = 0.02", "b = 0.9");
    std::fs::write(&cfg, text).unwrap();
    let o = bin().args(["--profile", "fast", "--config"]).arg(&cfg).arg("--out-dir").arg(&out).arg("compare").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let rec: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec["error"], "NotAdmissible");
}

#[test]
fn barcode_csv_marks_essential_bar() {
    let out = scratch("barcode");
    let st = bin().arg("--config").arg(config("double_well.toml")).arg("--out-dir").arg(&out).arg("barcode").status().unwrap();
    assert_eq!(st.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("barcode_bars.csv")).unwrap();
    assert!(csv.contains("inf"), "{csv}");
}

#[test]
fn sweep_writes_long_table() {
    let out = scratch("sweep");
    let st = bin()
        .args(["--profile", "fast", "--config"])
        .arg(config("double_well.toml"))
        .arg("--out-dir")
        .arg(&out)
        .args(["sweep", "identity", "--axis", "M", "--values", "8,12,16"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("sweep_identity_M_long.csv")).unwrap();
    assert!(csv.starts_with("experiment,axis,value,metric,number"));
    assert!(csv.lines().filter(|l| l.contains(",max_residual,")).count() == 3, "{csv}");
}

#[test]
fn dump_matrices_writes_matrix_market() {
    let out = scratch("dump");
    let st = bin()
        .args(["--profile", "fast", "--dump-matrices", "--config"])
        .arg(config("cos.toml"))
        .arg("--out-dir")
        .arg(&out)
        .arg("bismut")
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let text = std::fs::read_to_string(out.join("bismut_plus.mtx")).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate complex general"), "{}", &text[..80]);
}
