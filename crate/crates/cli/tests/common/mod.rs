#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn shipped_config() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/v_alpha_4h.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// The shipped config with coarse grids so every command runs quickly.
pub fn quick_config() -> Value {
    let mut v = shipped_config();
    v["sweep"]["n_points"] = 11.into();
    v["fit"]["eta_n"] = 7.into();
    v["fit"]["eta_min"] = (-0.7).into();
    v["fit"]["eta_max"] = (-0.1).into();
    v["fit"]["lambda_n"] = 5.into();
    v["fit"]["lambda_min_meV"] = 11.0.into();
    v["fit"]["lambda_max_meV"] = 19.0.into();
    v["fit"]["k_values"] = serde_json::json!([0.3]);
    v["effective"]["n_points"] = 11.into();
    v["wavefunction"]["n_theta"] = 19.into();
    v["wavefunction"]["n_phi"] = 36.into();
    v
}

pub fn write_config(dir: &Path, v: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

pub fn run(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmspin"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

pub const COMMANDS: [(&str, &[&str]); 6] = [
    ("sweep", &["sweep.csv"]),
    ("transitions", &["transitions_Bpar.csv"]),
    ("matrixmap", &["matrixmap_nohf.csv", "matrixmap_hf.csv"]),
    ("fit", &["fit_scan.csv", "fit_summary.json"]),
    ("effective", &["effective.json", "effective_comparison.csv"]),
    ("wavefunction", &["wavefunction.csv"]),
];
