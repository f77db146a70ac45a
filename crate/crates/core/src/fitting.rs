//! Grid scans of (eta, lambda) against measured ground-state splittings, and
//! calibration of the hyperfine scale.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective::extract;
use crate::error::{Error, Result};
use crate::hamiltonian::ModelParams;
use crate::spectra::{doublet_g, gs_splitting};

/// A measured value with its symmetric tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub value: f64,
    pub tol: f64,
}

impl Window {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalTargets {
    /// Hz.
    pub delta_gs: Window,
    pub g_par: Window,
    pub g_perp_max: f64,
    /// Evaluation field for the g-factors, tesla.
    pub b0: f64,
}

impl ExperimentalTargets {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_gs.tol > 0.0 && self.g_par.tol > 0.0 && self.g_perp_max > 0.0 && self.b0 > 0.0) {
            return Err(Error::InvalidParams("target tolerances and b0 must be positive".into()));
        }
        Ok(())
    }
}

/// Inclusive, evenly spaced axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Span {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let last = self.n - 1;
        (0..self.n)
            .map(|i| if i == last { self.max } else { self.min + (self.max - self.min) * i as f64 / last as f64 })
            .collect()
    }
}

/// `eta` axis and `lambda` axis (Hz).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub eta: Span,
    pub lambda: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub eta: f64,
    /// Hz.
    pub lambda: f64,
    /// Hz; NaN when the evaluation failed.
    pub delta_gs: f64,
    pub g_par: f64,
    pub g_perp: f64,
    pub match_dgs: bool,
    pub match_gpar: bool,
    pub match_gperp: bool,
}

impl Cell {
    pub fn match_all(&self) -> bool {
        self.match_dgs && self.match_gpar && self.match_gperp
    }
}

/// Cells in `eta`-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub k: f64,
    pub spec: GridSpec,
    pub cells: Vec<Cell>,
}

impl ScanGrid {
    pub fn matches(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.match_all())
    }

    /// Mean `(eta, lambda)` of the matching cells.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (n, se, sl) = self.matches().fold((0usize, 0.0, 0.0), |(n, se, sl), c| (n + 1, se + c.eta, sl + c.lambda));
        (n > 0).then(|| (se / n as f64, sl / n as f64))
    }

    /// Cell nearest to `(eta, lambda)`.
    pub fn nearest(&self, eta: f64, lambda: f64) -> Option<&Cell> {
        let de = (self.spec.eta.max - self.spec.eta.min).abs().max(f64::MIN_POSITIVE);
        let dl = (self.spec.lambda.max - self.spec.lambda.min).abs().max(f64::MIN_POSITIVE);
        self.cells.iter().min_by(|a, b| {
            let da = ((a.eta - eta) / de).powi(2) + ((a.lambda - lambda) / dl).powi(2);
            let db = ((b.eta - eta) / de).powi(2) + ((b.lambda - lambda) / dl).powi(2);
            da.total_cmp(&db)
        })
    }
}

/// Evaluate one parameter point against the targets.
pub fn evaluate(p: &ModelParams, targets: &ExperimentalTargets) -> Cell {
    let delta_gs = gs_splitting(p).unwrap_or(f64::NAN);
    let (g_par, g_perp) = doublet_g(p, targets.b0, 0).unwrap_or((f64::NAN, f64::NAN));
    Cell {
        eta: p.eta,
        lambda: p.lambda_soc,
        delta_gs,
        g_par,
        g_perp,
        match_dgs: targets.delta_gs.contains(delta_gs),
        match_gpar: targets.g_par.contains(g_par),
        match_gperp: g_perp.abs() <= targets.g_perp_max,
    }
}

/// Scan the grid at `p_base.k`. Cells are evaluated in parallel and stored in
/// grid order.
pub fn scan(p_base: &ModelParams, targets: &ExperimentalTargets, grid: &GridSpec) -> Result<ScanGrid> {
    targets.validate()?;
    if grid.eta.n == 0 || grid.lambda.n == 0 {
        return Err(Error::EmptyGrid);
    }
    let base = p_base.electronic();
    base.validate()?;
    let points: Vec<(f64, f64)> = grid
        .eta
        .values()
        .into_iter()
        .flat_map(|e| grid.lambda.values().into_iter().map(move |l| (e, l)))
        .collect();
    let cells = points
        .par_iter()
        .map(|&(eta, lambda_soc)| evaluate(&ModelParams { eta, lambda_soc, ..base.clone() }, targets))
        .collect();
    Ok(ScanGrid { k: base.k, spec: *grid, cells })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSummary {
    pub k: f64,
    pub n_match: usize,
    pub centroid: Option<(f64, f64)>,
    pub grid: ScanGrid,
}

pub fn scan_k_range(p_base: &ModelParams, targets: &ExperimentalTargets, grid: &GridSpec, k_values: &[f64]) -> Result<Vec<KSummary>> {
    k_values
        .iter()
        .map(|&k| {
            let grid = scan(&ModelParams { k, ..p_base.clone() }, targets, grid)?;
            Ok(KSummary { k, n_match: grid.matches().count(), centroid: grid.centroid(), grid })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Hz.
    pub a_hf: f64,
    pub a_par: f64,
    pub a_perp: f64,
}

/// Hyperfine scale giving `a_perp = target` for the lowest doublet, using the
/// linearity of the hyperfine constants in `A`.
pub fn calibrate_a(p: &ModelParams, target_a_perp: f64) -> Result<Calibration> {
    let a_ref = if p.a_hf != 0.0 { p.a_hf } else { 1e8 };
    let reference = extract(&ModelParams { a_hf: a_ref, include_hf: true, ..p.clone() }, 0)?;
    if reference.a_perp == 0.0 {
        return Err(Error::ZeroExtraction);
    }
    let a_hf = a_ref * target_a_perp / reference.a_perp;
    let check = extract(&ModelParams { a_hf, include_hf: true, ..p.clone() }, 0)?;
    Ok(Calibration { a_hf, a_par: check.a_par, a_perp: check.a_perp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::Spin;
    use crate::units::{ev_to_hz, mev_to_hz, G_ELECTRON};

    fn base() -> ModelParams {
        ModelParams {
            delta: ev_to_hz(1.0),
            eta: -0.4,
            delta_a1: mev_to_hz(10.0),
            k: 0.3,
            lambda_soc: mev_to_hz(15.0),
            a_hf: 4e8,
            g_e: G_ELECTRON,
            g_n: 1.4711,
            nuclear_spin: Spin::new(2.5).unwrap(),
            include_hf: true,
        }
    }

    fn targets() -> ExperimentalTargets {
        ExperimentalTargets {
            delta_gs: Window { value: 458e9, tol: 30e9 },
            g_par: Window { value: 1.75, tol: 0.05 },
            g_perp_max: 0.1,
            b0: 0.1,
        }
    }

    #[test]
    fn span_endpoints() {
        let s = Span { min: -1.0, max: 0.0, n: 11 };
        let v = s.values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[10], 0.0);
        assert!((v[6] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn zero_soc_row_never_matches() {
        let grid = GridSpec { eta: Span { min: -1.0, max: 0.0, n: 5 }, lambda: Span { min: 0.0, max: 0.0, n: 1 } };
        let g = scan(&base(), &targets(), &grid).unwrap();
        assert!(g.cells.iter().all(|c| !c.match_dgs && c.delta_gs.abs() < 1.0));
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = GridSpec { eta: Span { min: -1.0, max: 0.0, n: 0 }, lambda: Span { min: 0.0, max: 1.0, n: 3 } };
        assert_eq!(scan(&base(), &targets(), &grid).unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn calibration_round_trip() {
        let c = calibrate_a(&base(), 332e6).unwrap();
        assert!((c.a_perp / 332e6 - 1.0).abs() < 1e-3);
        let d = calibrate_a(&base(), 664e6).unwrap();
        assert!((d.a_hf / c.a_hf - 2.0).abs() < 1e-9);
    }
}
