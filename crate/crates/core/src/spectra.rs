//! Field sweeps, drive matrix elements, transition tables, g-factors and
//! angular wavefunction grids.

use std::f64::consts::PI;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{kron_embed, CMatrix, ProductSpace, Slot, C64, ORBITAL_DIM};
use crate::eigen::{classify_doublet, eig_hermitian, eig_matrix, EigenSystem, Irrep, SPECTRUM_TOL_HZ};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, drive_electric, h_zeeman, FieldConfig, ModelParams};
use crate::units::BOHR_MAGNETON_HZ_PER_T;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn vector(self, magnitude: f64) -> [f64; 3] {
        let mut b = [0.0; 3];
        b[self as usize] = magnitude;
        b
    }
}

/// Oscillating drive channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Drive {
    /// Magnetic, along the symmetry axis.
    Bpar,
    /// Magnetic, along x.
    Bperp,
    /// Electric, through a modulation of `eta`.
    Ez,
}

impl Drive {
    pub fn as_str(self) -> &'static str {
        match self {
            Drive::Bpar => "Bpar",
            Drive::Bperp => "Bperp",
            Drive::Ez => "Ez",
        }
    }
}

/// Drive operator for a channel. `amplitude` is the oscillating field in
/// tesla for magnetic channels and `delta_eta` for the electric one.
pub fn drive_operator(p: &ModelParams, drive: Drive, amplitude: f64) -> Result<CMatrix> {
    match drive {
        Drive::Bpar => Ok(h_zeeman(p, Axis::Z.vector(amplitude)).into_entries()),
        Drive::Bperp => Ok(h_zeeman(p, Axis::X.vector(amplitude)).into_entries()),
        Drive::Ez => {
            let f = FieldConfig { delta_eta: amplitude, ..Default::default() };
            Ok(drive_electric(p, &f)?.into_entries())
        }
    }
}

/// Field sweep request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    /// Start and stop field, tesla.
    pub b_range: (f64, f64),
    pub n_points: usize,
    /// Keep only the lowest `2(2I+1)` levels.
    pub ground_only: bool,
    /// Order columns by eigenvector overlap with the previous point instead
    /// of by energy.
    pub track: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.b_range;
        if self.n_points < 2 {
            return Err(Error::InvalidRange(format!("n_points = {} (need at least 2)", self.n_points)));
        }
        if !a.is_finite() || !b.is_finite() || a == b {
            return Err(Error::InvalidRange(format!("field range ({a}, {b})")));
        }
        Ok(())
    }

    pub fn fields(&self) -> Vec<f64> {
        let (a, b) = self.b_range;
        let n = self.n_points - 1;
        (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: Axis,
    /// Field values, tesla.
    pub fields: Vec<f64>,
    /// Level energies per field point, Hz.
    pub levels: Vec<Vec<f64>>,
    pub params: ModelParams,
}

fn level_count(p: &ModelParams, ground_only: bool) -> usize {
    if ground_only {
        2 * p.space().nuclear_dim()
    } else {
        p.space().dim()
    }
}

/// Diagonalise `assemble` at every field point; points run in parallel and
/// are merged in field order.
pub fn sweep_eigensystems(p: &ModelParams, spec: &SweepSpec) -> Result<Vec<EigenSystem>> {
    spec.validate()?;
    p.validate()?;
    spec.fields()
        .par_iter()
        .map(|&b| eig_hermitian(&assemble(p, &FieldConfig::static_field(spec.axis.vector(b)))?))
        .collect()
}

/// Reorder columns `0..n` of each point so that column `j` has maximal
/// overlap with column `j` of the previous point.
fn track_levels(systems: &[EigenSystem], n: usize) -> Vec<Vec<usize>> {
    let mut orders: Vec<Vec<usize>> = Vec::with_capacity(systems.len());
    orders.push((0..n).collect());
    for w in 1..systems.len() {
        let prev_order = &orders[w - 1];
        let prev = &systems[w - 1].vectors;
        let cur = &systems[w].vectors;
        let mut pairs = Vec::with_capacity(n * n);
        for (slot, &pj) in prev_order.iter().enumerate() {
            for k in 0..n {
                let ov = prev.column(pj).dotc(&cur.column(k)).norm_sqr();
                pairs.push((ov, slot, k));
            }
        }
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut order = vec![usize::MAX; n];
        let mut taken = vec![false; n];
        for (_, slot, k) in pairs {
            if order[slot] == usize::MAX && !taken[k] {
                order[slot] = k;
                taken[k] = true;
            }
        }
        orders.push(order);
    }
    orders
}

/// Energy levels versus static field along one axis.
pub fn sweep_field(p: &ModelParams, spec: &SweepSpec) -> Result<SweepResult> {
    let systems = sweep_eigensystems(p, spec)?;
    let n = level_count(p, spec.ground_only);
    let orders = if spec.track { track_levels(&systems, n) } else { vec![(0..n).collect(); systems.len()] };
    let levels = systems
        .iter()
        .zip(&orders)
        .map(|(es, order)| order.iter().map(|&k| es.values[k]).collect())
        .collect();
    Ok(SweepResult { axis: spec.axis, fields: spec.fields(), levels, params: p.clone() })
}

/// `|⟨f|V|i⟩|` for two non-degenerate levels.
pub fn rabi(es: &EigenSystem, v: &CMatrix, i: usize, f: usize) -> Result<f64> {
    for level in [i, f] {
        if es.cluster_of(level).is_some_and(|c| es.clusters[c].len() > 1) {
            return Err(Error::DegenerateLevel { index: level });
        }
    }
    Ok(es.vectors.column(f).dotc(&(v * es.vectors.column(i))).norm())
}

fn largest_eigenvalue(m: &CMatrix) -> Result<f64> {
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    Ok(eig_matrix(&herm)?.values.last().copied().unwrap_or(0.0))
}

/// Gauge-invariant drive strength between two clusters: the largest singular
/// value of the inter-cluster block. Within one cluster: half the spread of
/// the block eigenvalues.
pub fn block_rabi(es: &EigenSystem, v: &CMatrix, cluster_i: usize, cluster_f: usize) -> Result<f64> {
    let vi = es.subspace(es.clusters[cluster_i].clone());
    if cluster_i == cluster_f {
        let block = vi.adjoint() * v * &vi;
        let inner = eig_matrix(&(&block + block.adjoint()).map(|z| z * 0.5))?;
        let (lo, hi) = (inner.values[0], inner.values[inner.values.len() - 1]);
        return Ok(0.5 * (hi - lo));
    }
    let vf = es.subspace(es.clusters[cluster_f].clone());
    let block = vf.adjoint() * v * &vi;
    Ok(largest_eigenvalue(&(block.adjoint() * &block))?.max(0.0).sqrt())
}

/// Largest singular value of the block between two explicit level ranges.
pub fn range_rabi(es: &EigenSystem, v: &CMatrix, from: Range<usize>, to: Range<usize>) -> Result<f64> {
    let block = es.subspace(to).adjoint() * v * es.subspace(from);
    Ok(largest_eigenvalue(&(block.adjoint() * &block))?.max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub i: usize,
    pub f: usize,
    /// Hz.
    pub frequency: f64,
    /// Hz.
    pub rabi: f64,
    pub drive: Drive,
    /// Tesla, magnitude along the sweep axis.
    pub b_static: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub rows: Vec<Transition>,
}

impl TransitionTable {
    pub fn max_rabi(&self) -> f64 {
        self.rows.iter().map(|t| t.rabi).fold(0.0, f64::max)
    }
}

/// Transitions between the clusters of the lowest `n_levels` levels, with
/// Rabi frequency at or above `floor`. `i`, `f` are the first level index of
/// each cluster; rows are sorted by frequency.
pub fn transitions(
    es: &EigenSystem,
    v: &CMatrix,
    drive: Drive,
    b_static: f64,
    n_levels: usize,
    floor: f64,
) -> Result<TransitionTable> {
    let clusters: Vec<usize> = (0..es.clusters.len()).filter(|&c| es.clusters[c].start < n_levels).collect();
    let mut rows = Vec::new();
    for (a, &ci) in clusters.iter().enumerate() {
        for &cf in &clusters[a + 1..] {
            let rabi = block_rabi(es, v, ci, cf)?;
            if rabi < floor {
                continue;
            }
            rows.push(Transition {
                i: es.clusters[ci].start,
                f: es.clusters[cf].start,
                frequency: (es.cluster_centroid(cf) - es.cluster_centroid(ci)).abs(),
                rabi,
                drive,
                b_static,
            });
        }
    }
    rows.sort_by(|a, b| a.frequency.total_cmp(&b.frequency).then(a.i.cmp(&b.i)).then(a.f.cmp(&b.f)));
    Ok(TransitionTable { rows })
}

/// Transition tables along a field sweep for one drive channel.
pub fn transition_sweep(
    p: &ModelParams,
    spec: &SweepSpec,
    drive: Drive,
    amplitude: f64,
    floor: f64,
) -> Result<Vec<TransitionTable>> {
    let v = drive_operator(p, drive, amplitude)?;
    let systems = sweep_eigensystems(p, spec)?;
    let n = level_count(p, spec.ground_only);
    systems
        .into_par_iter()
        .zip(spec.fields().into_par_iter())
        .map(|(es, b)| transitions(&es.with_clusters(SPECTRUM_TOL_HZ), &v, drive, b, n, floor))
        .collect()
}

/// Drive matrix-element map over the lowest `4(2I+1)` states at a static field along
/// z: `|⟨i|V∥|j⟩|` on and above the diagonal, `|⟨i|V⊥|j⟩|` below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixMap {
    pub energies: Vec<f64>,
    pub magnitudes: Vec<Vec<f64>>,
}

pub fn matrix_map(p: &ModelParams, b_static: f64, b_drive: f64) -> Result<MatrixMap> {
    let space = p.space();
    let n = 4 * space.nuclear_dim();
    let h = assemble(p, &FieldConfig::static_field(Axis::Z.vector(b_static)))?;
    let mut es = eig_hermitian(&h)?.with_clusters(SPECTRUM_TOL_HZ);
    let iz = kron_embed(space.nuclear_ops().component(2), Slot::Nuclear, space)?;
    es.refine_clusters(iz.entries())?;
    let par = es.in_eigenbasis(&drive_operator(p, Drive::Bpar, b_drive)?);
    let perp = es.in_eigenbasis(&drive_operator(p, Drive::Bperp, b_drive)?);
    let magnitudes = (0..n)
        .map(|i| (0..n).map(|j| if j >= i { par[(i, j)].norm() } else { perp[(i, j)].norm() }).collect())
        .collect();
    Ok(MatrixMap { energies: es.values[..n].to_vec(), magnitudes })
}

/// Effective g-factors of one electronic doublet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubletG {
    pub irrep: Irrep,
    pub g_par: f64,
    pub g_perp: f64,
}

/// Electronic eigensystem (no nucleus) at a field.
fn electronic_system(p: &ModelParams, b: [f64; 3]) -> Result<EigenSystem> {
    eig_hermitian(&assemble(&p.electronic(), &FieldConfig::static_field(b))?)
}

/// Splitting of doublet `d` at field `b`, checking that both levels still
/// belong to the zero-field doublet.
fn doublet_splitting(p: &ModelParams, zero: &EigenSystem, d: usize, b: [f64; 3]) -> Result<f64> {
    let es = electronic_system(p, b)?;
    let span = zero.subspace(2 * d..2 * d + 2);
    for k in [2 * d, 2 * d + 1] {
        let weight = (span.adjoint() * es.vector(k)).norm_squared();
        if weight < 0.9 {
            return Err(Error::DoubletTracking(format!("level {k} keeps weight {weight:.3} on doublet {d}")));
        }
    }
    Ok(es.values[2 * d + 1] - es.values[2 * d])
}

/// Splitting-based g along one axis, with the B² correction removed by
/// Richardson extrapolation between `b0` and `b0/2`.
fn g_along(p: &ModelParams, zero: &EigenSystem, d: usize, axis: Axis, b0: f64) -> Result<f64> {
    let full = doublet_splitting(p, zero, d, axis.vector(b0))? / (BOHR_MAGNETON_HZ_PER_T * b0);
    let half = doublet_splitting(p, zero, d, axis.vector(0.5 * b0))? / (BOHR_MAGNETON_HZ_PER_T * 0.5 * b0);
    Ok((4.0 * half - full) / 3.0)
}

/// `(g∥, g⊥)` of the two lowest Kramers doublets from their Zeeman
/// splittings along z and x at `b0` (tesla). Hyperfine is ignored.
pub fn g_factors(p: &ModelParams, b0: f64) -> Result<Vec<DoubletG>> {
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(Error::InvalidRange(format!("b0 = {b0}")));
    }
    let zero = electronic_system(p, [0.0; 3])?;
    let space = ProductSpace::electronic();
    (0..2)
        .map(|d| {
            Ok(DoubletG {
                irrep: classify_doublet(&zero, 2 * d..2 * d + 2, space)?,
                g_par: g_along(p, &zero, d, Axis::Z, b0)?,
                g_perp: g_along(p, &zero, d, Axis::X, b0)?,
            })
        })
        .collect()
}

/// Zero-field gap between the centroids of the two lowest doublets, Hz.
pub fn gs_splitting(p: &ModelParams) -> Result<f64> {
    let es = electronic_system(p, [0.0; 3])?;
    let v = &es.values;
    Ok(0.5 * (v[2] + v[3]) - 0.5 * (v[0] + v[1]))
}

/// Orbital amplitudes (m = -2..2) of an electronic state (dimension 10),
/// taken from its dominant spin component and normalised.
pub fn orbital_amplitudes(state: &CMatrix) -> Result<[C64; ORBITAL_DIM]> {
    if state.len() != 2 * ORBITAL_DIM {
        return Err(Error::DimensionMismatch { expected: 2 * ORBITAL_DIM, found: state.len() });
    }
    let weight = |s: usize| (0..ORBITAL_DIM).map(|m| state[2 * m + s].norm_sqr()).sum::<f64>();
    let s = if weight(1) >= weight(0) { 1 } else { 0 };
    let norm = weight(s).sqrt();
    let mut out = [C64::new(0.0, 0.0); ORBITAL_DIM];
    for (m, amp) in out.iter_mut().enumerate() {
        *amp = state[2 * m + s] / norm;
    }
    Ok(out)
}

/// `(g∥, g⊥)` of doublet `d` without classification.
pub fn doublet_g(p: &ModelParams, b0: f64, d: usize) -> Result<(f64, f64)> {
    let zero = electronic_system(p, [0.0; 3])?;
    Ok((g_along(p, &zero, d, Axis::Z, b0)?, g_along(p, &zero, d, Axis::X, b0)?))
}

/// Spherical harmonic `Y_2^m(θ, φ)`, Condon–Shortley phase.
pub fn y2(m: i32, theta: f64, phi: f64) -> C64 {
    let (st, ct) = theta.sin_cos();
    let a = match m.abs() {
        0 => (5.0 / (16.0 * PI)).sqrt() * (3.0 * ct * ct - 1.0),
        1 => (15.0 / (8.0 * PI)).sqrt() * st * ct,
        2 => (15.0 / (32.0 * PI)).sqrt() * st * st,
        _ => return C64::new(0.0, 0.0),
    };
    let sign = if m == 1 { -1.0 } else { 1.0 };
    C64::from_polar(a * sign, m as f64 * phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub theta: f64,
    pub phi: f64,
    pub density: f64,
    pub phase: f64,
}

fn psi(coeffs: &[C64; ORBITAL_DIM], theta: f64, phi: f64) -> C64 {
    coeffs.iter().enumerate().map(|(k, c)| c * y2(k as i32 - 2, theta, phi)).sum()
}

/// `ψ(θ, φ) = Σ c_m Y_2^m` on `θ_i = π i/(n_θ-1)`, `φ_j = 2π j/n_φ`,
/// θ-major.
pub fn wavefunction_grid(coeffs: &[C64; ORBITAL_DIM], n_theta: usize, n_phi: usize) -> Result<Vec<GridPoint>> {
    if n_theta < 2 || n_phi < 1 {
        return Err(Error::InvalidRange(format!("grid {n_theta} x {n_phi}")));
    }
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!("coefficients have norm² {norm}")));
    }
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = PI * i as f64 / (n_theta - 1) as f64;
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            let z = psi(coeffs, theta, phi);
            out.push(GridPoint { theta, phi, density: z.norm_sqr(), phase: z.arg() });
        }
    }
    Ok(out)
}

/// Net number of 2π windings of `arg ψ` around the azimuthal circle at
/// `theta`, sampled with `n_phi` points.
pub fn azimuthal_winding(coeffs: &[C64; ORBITAL_DIM], theta: f64, n_phi: usize) -> i64 {
    let n = n_phi.max(3);
    let mut total = 0.0;
    let mut prev = psi(coeffs, theta, 0.0).arg();
    for j in 1..=n {
        let cur = psi(coeffs, theta, 2.0 * PI * j as f64 / n as f64).arg();
        let mut d = cur - prev;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        total += d;
        prev = cur;
    }
    (total / (2.0 * PI)).round() as i64
}

/// Winding on the azimuthal circle of highest mean density.
pub fn dominant_winding(coeffs: &[C64; ORBITAL_DIM], n_theta: usize, n_phi: usize) -> i64 {
    let rows = n_theta.max(3);
    let mut best = (f64::MIN, PI / 2.0);
    for i in 1..rows - 1 {
        let theta = PI * i as f64 / (rows - 1) as f64;
        let mean = (0..n_phi.max(1))
            .map(|j| psi(coeffs, theta, 2.0 * PI * j as f64 / n_phi.max(1) as f64).norm_sqr())
            .sum::<f64>();
        if mean > best.0 {
            best = (mean, theta);
        }
    }
    azimuthal_winding(coeffs, best.1, n_phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{c, Spin};
    use crate::units::{ev_to_hz, mev_to_hz, G_ELECTRON};

    fn fitted(i: f64) -> ModelParams {
        ModelParams {
            delta: ev_to_hz(1.0),
            eta: -0.4,
            delta_a1: mev_to_hz(10.0),
            k: 0.3,
            lambda_soc: mev_to_hz(15.0),
            a_hf: 480e6,
            g_e: G_ELECTRON,
            g_n: 1.4711,
            nuclear_spin: Spin::new(i).unwrap(),
            include_hf: true,
        }
    }

    #[test]
    fn identity_drive_has_no_transitions() {
        let p = fitted(0.0);
        let es = electronic_system(&p, [0.0, 0.0, 0.05]).unwrap();
        let id = CMatrix::identity(10, 10);
        assert!(rabi(&es, &id, 0, 3).unwrap() < 1e-12);
    }

    #[test]
    fn rabi_rejects_degenerate_levels() {
        let p = fitted(0.0);
        let es = electronic_system(&p, [0.0; 3]).unwrap().with_clusters(SPECTRUM_TOL_HZ);
        let v = drive_operator(&p, Drive::Bpar, 1e-4).unwrap();
        assert_eq!(rabi(&es, &v, 0, 2).unwrap_err(), Error::DegenerateLevel { index: 0 });
        assert!(block_rabi(&es, &v, 0, 1).is_ok());
    }

    #[test]
    fn sweep_shapes_and_endpoint() {
        let p = fitted(2.5);
        let spec = SweepSpec { axis: Axis::Z, b_range: (0.0, 0.1), n_points: 3, ground_only: true, track: false };
        let r = sweep_field(&p, &spec).unwrap();
        assert_eq!(r.fields, vec![0.0, 0.05, 0.1]);
        assert!(r.levels.iter().all(|l| l.len() == 12));
        let direct = eig_hermitian(&assemble(&p, &FieldConfig::default()).unwrap()).unwrap();
        assert_eq!(r.levels[0], direct.values[..12].to_vec());
        let bad = SweepSpec { n_points: 1, ..spec };
        assert!(matches!(sweep_field(&p, &bad), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn gs_splitting_vanishes_without_soc() {
        let p = ModelParams { lambda_soc: 0.0, ..fitted(0.0) };
        assert!(gs_splitting(&p).unwrap().abs() < 1.0);
    }

    #[test]
    fn pure_m0_winding_zero_and_m1_winding_one() {
        let mut d0 = [c(0.0); 5];
        d0[2] = c(1.0);
        assert_eq!(azimuthal_winding(&d0, 1.0, 64), 0);
        let mut d1 = [c(0.0); 5];
        d1[3] = c(1.0);
        assert_eq!(azimuthal_winding(&d1, 1.0, 64), 1);
        let grid = wavefunction_grid(&d0, 5, 8).unwrap();
        assert_eq!(grid.len(), 40);
        for row in grid.chunks(8) {
            assert!(row.iter().all(|g| (g.density - row[0].density).abs() < 1e-14));
        }
    }
}
