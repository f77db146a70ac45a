mod common;

use common::*;
use serde_json::{json, Value};
use tempfile::tempdir;

#[test]
fn every_command_writes_its_files() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), &quick_config());
    for (cmd, files) in COMMANDS {
        let out = dir.path().join(cmd);
        let o = run(&cfg, &out, &[cmd]);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        for f in files {
            assert!(out.join(f).is_file(), "{cmd} did not write {f}");
        }
    }
}

#[test]
fn two_point_sweep_has_two_rows() {
    let dir = tempdir().unwrap();
    let mut v = quick_config();
    v["sweep"]["n_points"] = 2.into();
    let cfg = write_config(dir.path(), &v);
    let o = run(&cfg, dir.path(), &["sweep"]);
    assert!(o.status.success());
    let rows = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].len(), 13);
    assert_eq!(rows[2][0], "1.00000000000e-1");
    assert!(stdout(&o).contains("12 levels"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), &quick_config());
    for cmd in ["sweep", "transitions", "effective"] {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        assert!(run(&cfg, &a, &[cmd]).status.success());
        assert!(run(&cfg, &b, &[cmd]).status.success());
        for entry in std::fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name:?}");
        }
    }
}

#[test]
fn dumped_config_round_trips() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), &shipped_config());
    let o = run(&cfg, dir.path(), &["--dump-config"]);
    assert!(o.status.success());
    let dumped = stdout(&o);
    let reparsed: Value = serde_json::from_str(&dumped).unwrap();
    assert_eq!(reparsed, shipped_config());
    let again = dir.path().join("again.json");
    std::fs::write(&again, &dumped).unwrap();
    assert_eq!(stdout(&run(&again, dir.path(), &["--dump-config"])), dumped);
}

#[test]
fn defaults_are_filled_in_dump() {
    let dir = tempdir().unwrap();
    let v = json!({ "model": shipped_config()["model"] });
    let cfg = write_config(dir.path(), &v);
    let o = run(&cfg, dir.path(), &["--dump-config"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dumped: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(dumped["sweep"]["n_points"], 101);
    assert_eq!(dumped["field"]["b_drive_uT"], 100.0);
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempdir().unwrap();
    let mut v = quick_config();
    v["model"]["lambda_eV"] = 0.015.into();
    let cfg = write_config(dir.path(), &v);
    let o = run(&cfg, dir.path(), &["sweep"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));
    assert!(!dir.path().join("sweep.csv").exists());
}

type Edit = Box<dyn Fn(&mut Value)>;

#[test]
fn invalid_inputs_exit_nonzero() {
    let dir = tempdir().unwrap();
    let cases: Vec<(&str, Edit)> = vec![
        ("sweep", Box::new(|v| v["sweep"]["n_points"] = 0.into())),
        ("sweep", Box::new(|v| v["sweep"]["b_max_mT"] = 0.0.into())),
        ("sweep", Box::new(|v| v["model"]["nuclear_spin"] = 1.3.into())),
        ("sweep", Box::new(|v| v["model"]["k"] = 0.0.into())),
        ("fit", Box::new(|v| v["fit"]["eta_n"] = 0.into())),
        ("fit", Box::new(|v| v.as_object_mut().unwrap().remove("targets").map(|_| ()).unwrap())),
        ("effective", Box::new(|v| v["effective"]["doublet"] = 0.into())),
        ("transitions", Box::new(|v| {
            v["transitions"]["drive"] = "Ez".into();
            v["field"]["delta_eta"] = 0.0.into();
        })),
    ];
    for (k, (cmd, edit)) in cases.iter().enumerate() {
        let mut v = quick_config();
        edit(&mut v);
        let cfg = write_config(dir.path(), &v);
        let out = dir.path().join(format!("case{k}"));
        let o = run(&cfg, &out, &[cmd]);
        assert!(!o.status.success(), "case {k} ({cmd}) should fail");
        assert!(stderr(&o).starts_with("error:"), "case {k}: {}", stderr(&o));
    }
    let missing = run(&dir.path().join("missing.json"), dir.path(), &["sweep"]);
    assert!(!missing.status.success());
}

#[test]
fn pure_m0_wavefunction_has_no_winding() {
    let dir = tempdir().unwrap();
    let mut v = quick_config();
    v["wavefunction"]["coefficients"] = json!([[0, 0], [0, 0], [1, 0], [0, 0], [0, 0]]);
    v["wavefunction"]["n_theta"] = 7.into();
    v["wavefunction"]["n_phi"] = 12.into();
    let cfg = write_config(dir.path(), &v);
    let o = run(&cfg, dir.path(), &["wavefunction"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("winding 0 (no winding phase)"), "{}", stdout(&o));
    assert_eq!(read_csv(&dir.path().join("wavefunction.csv")).len(), 1 + 7 * 12);
}

#[test]
fn ground_state_wavefunction_winds() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), &quick_config());
    let o = run(&cfg, dir.path(), &["wavefunction"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("winding phase detected"), "{}", stdout(&o));
    assert_eq!(read_csv(&dir.path().join("wavefunction.csv")).len(), 1 + 19 * 36);
}

#[test]
fn fit_without_overlap_still_succeeds() {
    let dir = tempdir().unwrap();
    let mut v = quick_config();
    v["targets"]["delta_gs_GHz"] = 5000.0.into();
    v["fit"]["k_values"] = json!([0.18, 0.3, 0.37]);
    let cfg = write_config(dir.path(), &v);
    let o = run(&cfg, dir.path(), &["fit"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("no overlap").count(), 3);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit_summary.json")).unwrap()).unwrap();
    let regions = summary.as_array().unwrap();
    assert_eq!(regions.len(), 3);
    assert!(regions.iter().all(|r| r["overlap"] == false && r["centroid_eta"].is_null()));
}

#[test]
fn second_doublet_is_gamma56() {
    let dir = tempdir().unwrap();
    let mut v = quick_config();
    v["effective"]["doublet"] = 2.into();
    let cfg = write_config(dir.path(), &v);
    let o = run(&cfg, dir.path(), &["effective"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ep: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("effective.json")).unwrap()).unwrap();
    assert_eq!(ep["irrep"], "Gamma56");
    assert_eq!(ep["g_perp"], 0.0);
    assert!(ep.get("residual_alt_Hz").is_none());
}

#[test]
fn zero_hyperfine_reports_zeros() {
    let dir = tempdir().unwrap();
    let mut v = quick_config();
    v["model"]["a_hf_MHz"] = 0.0.into();
    let cfg = write_config(dir.path(), &v);
    let o = run(&cfg, dir.path(), &["effective"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("note:"));
    let ep: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("effective.json")).unwrap()).unwrap();
    assert_eq!(ep["a_par_Hz"], 0.0);
    assert_eq!(ep["a_perp_Hz"], 0.0);
    for key in ["irrep", "a_par_Hz", "a_perp_Hz", "g_par", "g_perp", "residual_Hz"] {
        assert!(ep.get(key).is_some(), "missing {key}");
    }
}

fn map(path: &std::path::Path) -> Vec<Vec<f64>> {
    read_csv(path)[1..].iter().map(|r| r[2..].iter().map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn matrix_maps_show_symmetry_protection_and_hyperfine_mixing() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), &quick_config());
    assert!(run(&cfg, dir.path(), &["matrixmap"]).status.success());
    let off = map(&dir.path().join("matrixmap_nohf.csv"));
    let on = map(&dir.path().join("matrixmap_hf.csv"));
    assert_eq!(off.len(), 24);
    assert!(off.iter().all(|r| r.len() == 24));
    let scale = tmspin::units::BOHR_MAGNETON_HZ_PER_T * 100e-6;
    for i in 12..18 {
        for j in 18..24 {
            assert!(off[i][j] <= 1e-10 * scale, "par ({i},{j}) = {}", off[i][j]);
            assert!(off[j][i] <= 1e-10 * scale, "perp ({j},{i}) = {}", off[j][i]);
        }
    }
    let mixed = (0..12).flat_map(|i| (i + 1..12).map(move |j| (i, j))).filter(|&(i, j)| on[i][j] > 1e3).count();
    assert!(mixed > 0);
    let mixed_off = (0..12).flat_map(|i| (i + 1..12).map(move |j| (i, j))).filter(|&(i, j)| off[i][j] > 1e3).count();
    assert_eq!(mixed_off, 0);
}
