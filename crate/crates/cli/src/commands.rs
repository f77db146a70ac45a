use std::path::Path;

use anyhow::{bail, Result};
use log::warn;
use serde::Serialize;
use tmspin::angular::C64;
use tmspin::effective::{compare_with_full, doublet_amplitudes, extract};
use tmspin::fitting::scan_k_range;
use tmspin::spectra::{dominant_winding, matrix_map, sweep_field, transition_sweep, wavefunction_grid, Drive, MatrixMap};
use tmspin::units::hz_to_mev;

use crate::config::RunConfig;
use crate::output::{num, write_json, Csv};

pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.params()?;
    let r = sweep_field(&p, &cfg.sweep_spec())?;
    let n = r.levels[0].len();
    let mut header = vec!["B_T".to_string()];
    header.extend((0..n).map(|k| format!("level_{k:02}")));
    let mut csv = Csv::new(out, "sweep.csv", &header)?;
    for (b, levels) in r.fields.iter().zip(&r.levels) {
        csv.row(std::iter::once(num(*b)).chain(levels.iter().map(|&e| num(e))))?;
    }
    let path = csv.finish()?;
    println!(
        "sweep: {n} levels, {} points, B {} .. {} T along {:?}, hyperfine {}",
        r.fields.len(),
        r.fields[0],
        r.fields[r.fields.len() - 1],
        r.axis,
        if p.hf_active() { "on" } else { "off" }
    );
    println!("wrote {}", path.display());
    Ok(())
}

pub fn transitions(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.params()?;
    let drive = cfg.transitions.drive;
    let amplitude = match drive {
        Drive::Bpar | Drive::Bperp => cfg.field.b_drive_ut * 1e-6,
        Drive::Ez => cfg.field.delta_eta,
    };
    let spec = cfg.sweep_spec();
    let tables = transition_sweep(&p, &spec, drive, amplitude, cfg.transitions.rabi_floor_hz)?;
    let name = format!("transitions_{}.csv", drive.as_str());
    let mut csv = Csv::new(out, &name, &["i", "f", "freq_Hz", "rabi_Hz", "drive", "B_T"])?;
    let mut rows = 0;
    let mut strongest: f64 = 0.0;
    for table in &tables {
        for t in &table.rows {
            csv.row([t.i.to_string(), t.f.to_string(), num(t.frequency), num(t.rabi), drive.as_str().to_string(), num(t.b_static)])?;
            rows += 1;
            strongest = strongest.max(t.rabi);
        }
    }
    let path = csv.finish()?;
    if drive == Drive::Ez {
        println!("electric drive: trigonal change delta_eta * delta = {:.6} meV", hz_to_mev(amplitude * p.delta));
    }
    println!("transitions ({}): {rows} rows over {} field points, strongest Rabi {:.4e} Hz", drive.as_str(), tables.len(), strongest);
    println!("wrote {}", path.display());
    Ok(())
}

fn write_map(out: &Path, name: &str, map: &MatrixMap) -> Result<()> {
    let n = map.energies.len();
    let mut header = vec!["i".to_string(), "energy_Hz".to_string()];
    header.extend((0..n).map(|j| format!("j{j:02}")));
    let mut csv = Csv::new(out, name, &header)?;
    for (i, row) in map.magnitudes.iter().enumerate() {
        let cells = [i.to_string(), num(map.energies[i])].into_iter().chain(row.iter().map(|&x| num(x)));
        csv.row(cells)?;
    }
    let path = csv.finish()?;
    println!("wrote {} ({n}x{n})", path.display());
    Ok(())
}

pub fn matrixmap(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.params()?;
    let field = cfg.field();
    if field.b_static[0] != 0.0 || field.b_static[1] != 0.0 {
        warn!("matrixmap uses only the z component of the static field");
    }
    let (b0, b1) = (field.b_static[2], field.b_drive[2]);
    write_map(out, "matrixmap_nohf.csv", &matrix_map(&p.with_hf(false), b0, b1)?)?;
    if p.nuclear_spin.is_zero() {
        warn!("nuclear spin is zero; skipping the hyperfine variant");
    } else {
        write_map(out, "matrixmap_hf.csv", &matrix_map(&p.with_hf(true), b0, b1)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RegionSummary {
    k: f64,
    n_cells: usize,
    n_match: usize,
    overlap: bool,
    centroid_eta: Option<f64>,
    #[serde(rename = "centroid_lambda_meV")]
    centroid_lambda_mev: Option<f64>,
}

pub fn fit(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.params()?;
    let targets = cfg.targets()?;
    let ks = if cfg.fit.k_values.is_empty() { vec![p.k] } else { cfg.fit.k_values.clone() };
    let summaries = scan_k_range(&p, &targets, &cfg.grid(), &ks)?;
    let header = [
        "k", "eta", "lambda_meV", "delta_gs_Hz", "g_par", "g_perp", "match_dgs", "match_gpar", "match_gperp", "match_all",
    ];
    let mut csv = Csv::new(out, "fit_scan.csv", &header)?;
    let mut regions = Vec::new();
    for s in &summaries {
        for c in &s.grid.cells {
            csv.row([
                num(s.k),
                num(c.eta),
                num(hz_to_mev(c.lambda)),
                num(c.delta_gs),
                num(c.g_par),
                num(c.g_perp),
                c.match_dgs.to_string(),
                c.match_gpar.to_string(),
                c.match_gperp.to_string(),
                c.match_all().to_string(),
            ])?;
        }
        let region = RegionSummary {
            k: s.k,
            n_cells: s.grid.cells.len(),
            n_match: s.n_match,
            overlap: s.n_match > 0,
            centroid_eta: s.centroid.map(|c| c.0),
            centroid_lambda_mev: s.centroid.map(|c| hz_to_mev(c.1)),
        };
        match (region.centroid_eta, region.centroid_lambda_mev) {
            (Some(e), Some(l)) => println!("k = {}: {} matching cells, centroid eta = {e:.4}, lambda = {l:.3} meV", s.k, s.n_match),
            _ => println!("k = {}: no overlap", s.k),
        }
        regions.push(region);
    }
    let scan_path = csv.finish()?;
    let summary_path = write_json(out, "fit_summary.json", &regions)?;
    println!("wrote {} and {}", scan_path.display(), summary_path.display());
    Ok(())
}

pub fn effective(cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = cfg.params()?;
    let Some(doublet) = cfg.effective.doublet.checked_sub(1) else { bail!("doublet index is 1-based") };
    let ep = extract(&p, doublet)?;
    if !p.hf_active() || p.a_hf == 0.0 {
        println!("note: hyperfine coupling is off or zero; hyperfine constants are zero");
    }
    let n = cfg.effective.n_points.max(2);
    let b_max = cfg.effective.b_max_mt * 1e-3;
    let fields: Vec<f64> = (0..n).map(|i| b_max * i as f64 / (n - 1) as f64).collect();
    let cmp = compare_with_full(&p, doublet, &fields)?;
    let json = write_json(out, "effective.json", &ep)?;
    let mut csv = Csv::new(out, "effective_comparison.csv", &["B_T", "level", "full_Hz", "effective_Hz"])?;
    for (k, b) in cmp.fields.iter().enumerate() {
        for (level, (f, e)) in cmp.full[k].iter().zip(&cmp.effective[k]).enumerate() {
            csv.row([num(*b), level.to_string(), num(*f), num(*e)])?;
        }
    }
    let path = csv.finish()?;
    println!(
        "doublet {} ({}): a_par = {:.4e} Hz, a_perp = {:.4e} Hz, g_par = {:.6}, g_perp = {:.6}",
        doublet + 1,
        ep.irrep,
        ep.a_par,
        ep.a_perp,
        ep.g_par,
        ep.g_perp
    );
    println!("effective vs full: rms {:.4e} Hz over zero-field span {:.4e} Hz", cmp.rms, cmp.span);
    println!("wrote {} and {}", json.display(), path.display());
    Ok(())
}

pub fn wavefunction(cfg: &RunConfig, out: &Path) -> Result<()> {
    let w = &cfg.wavefunction;
    let coeffs = match w.coefficients {
        Some(c) => c.map(|[re, im]| C64::new(re, im)),
        None => {
            let Some(doublet) = w.doublet.checked_sub(1) else { bail!("doublet index is 1-based") };
            doublet_amplitudes(&cfg.params()?, doublet)?
        }
    };
    let grid = wavefunction_grid(&coeffs, w.n_theta, w.n_phi)?;
    let mut csv = Csv::new(out, "wavefunction.csv", &["theta", "phi", "density", "phase"])?;
    for g in &grid {
        csv.row([num(g.theta), num(g.phi), num(g.density), num(g.phase)])?;
    }
    let path = csv.finish()?;
    let winding = dominant_winding(&coeffs, w.n_theta, w.n_phi);
    println!(
        "azimuthal winding {winding} ({})",
        if winding == 0 { "no winding phase" } else { "winding phase detected" }
    );
    println!("wrote {} ({} rows)", path.display(), grid.len());
    Ok(())
}
