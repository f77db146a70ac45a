//! Effective spin-1/2 ⊗ nuclear Hamiltonians of the ground Kramers doublets.
//!
//! Forms, with `S` the effective spin and `n = 2I+1`:
//!
//! Γ4:  `a_par Sz Iz + (a_perp/2)(S+ I+ + S- I-) - μB (g_par Bz Sz + g_perp (Bx Sx + By Sy)) - g_n μN B·I`
//!
//! Γ56: `(a_par Sz + a_perp Sy) Iz - μB g_par Bz Sz - g_n μN B·I`
//!
//! The doublet basis is fixed as follows: `|↑⟩` has the larger
//! `⟨k Lz + g_e Sz⟩`, `|↓⟩ = Θ|↑⟩`, and the remaining phase makes `a_perp`
//! real and positive.

use serde::{Deserialize, Serialize};

use crate::angular::{c, spin_matrices, time_reversal_unitary, BasisTag, CMatrix, OperatorMatrix, Spin, C64};
use crate::eigen::{classify_doublet, eig_hermitian, eig_matrix, fix_phase, Irrep};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, h_hyperfine, FieldConfig, ModelParams};
use crate::units::{BOHR_MAGNETON_HZ_PER_T, NUCLEAR_MAGNETON_HZ_PER_T};

/// Parameters of one effective Hamiltonian. Hyperfine constants in Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub irrep: Irrep,
    #[serde(rename = "a_par_Hz")]
    pub a_par: f64,
    #[serde(rename = "a_perp_Hz")]
    pub a_perp: f64,
    pub g_par: f64,
    pub g_perp: f64,
    /// RMS entry deviation of the projected hyperfine block from the fitted form.
    #[serde(rename = "residual_Hz")]
    pub fit_residual: f64,
    /// Γ4 only: RMS deviation of the best `a Sz Iz + b S+ I- + h.c.` fit.
    #[serde(rename = "residual_alt_Hz", skip_serializing_if = "Option::is_none", default)]
    pub alt_residual: Option<f64>,
}

/// Gauge-fixed basis `|σ⟩ ⊗ |m_I⟩` of one doublet, columns ordered
/// `σ·(2I+1) + m_I` with `σ = ↓, ↑` and `m_I` ascending.
#[derive(Clone, Debug)]
pub struct DoubletBasis {
    pub irrep: Irrep,
    pub doublet: usize,
    pub nuclear_spin: Spin,
    /// Electronic up/down states (dimension 10).
    pub up: CMatrix,
    pub down: CMatrix,
    /// Zero-field centroid of the doublet without hyperfine, Hz.
    pub centroid: f64,
    pub vectors: CMatrix,
}

fn moment_z(p: &ModelParams) -> CMatrix {
    let space = p.electronic().space();
    let l = space.orbital_ops().component(2).entries().kronecker(&CMatrix::identity(2, 2));
    let s = CMatrix::identity(5, 5).kronecker(space.spin_ops().component(2).entries());
    l.map(|z| z * p.k) + s.map(|z| z * p.g_e)
}

fn moment(p: &ModelParams, axis: usize) -> CMatrix {
    let space = p.electronic().space();
    let l = space.orbital_ops().component(axis).entries().kronecker(&CMatrix::identity(2, 2));
    let s = CMatrix::identity(5, 5).kronecker(space.spin_ops().component(axis).entries());
    l.map(|z| z * p.k) + s.map(|z| z * p.g_e)
}

fn with_nucleus(up: &CMatrix, down: &CMatrix, nuclear: Spin) -> CMatrix {
    let n = nuclear.dim();
    let mut out = CMatrix::zeros(10 * n, 2 * n);
    for (sigma, e) in [down, up].into_iter().enumerate() {
        for m in 0..n {
            for a in 0..10 {
                out[(a * n + m, sigma * n + m)] = e[(a, 0)];
            }
        }
    }
    out
}

fn time_reverse(v: &CMatrix) -> CMatrix {
    let u = time_reversal_unitary(crate::angular::ProductSpace::electronic());
    &u * v.map(|z| z.conj())
}

/// Identify doublet `doublet` at zero field without hyperfine, check that it
/// is isolated against the hyperfine scale, and build its gauge-fixed basis.
pub fn doublet_basis(p: &ModelParams, doublet: usize) -> Result<DoubletBasis> {
    let el = p.electronic();
    let es = eig_hermitian(&assemble(&el, &FieldConfig::default())?)?;
    let range = 2 * doublet..2 * doublet + 2;
    if range.end > es.dim() {
        return Err(Error::InvalidRange(format!("doublet index {doublet}")));
    }
    let irrep = classify_doublet(&es, range.clone(), el.space())?;
    let centroid = 0.5 * (es.values[range.start] + es.values[range.start + 1]);
    let gap = es
        .values
        .iter()
        .enumerate()
        .filter(|(k, _)| !range.contains(k))
        .map(|(_, v)| (v - centroid).abs())
        .fold(f64::INFINITY, f64::min);
    let scale = if p.hf_active() { h_hyperfine(p).max_abs() } else { 0.0 };
    if gap < 10.0 * scale {
        return Err(Error::DoubletNotIsolated { gap, scale });
    }

    let w = es.subspace(range);
    let m = w.adjoint() * moment_z(p) * &w;
    let inner = eig_matrix(&(&m + m.adjoint()).map(|z| z * 0.5))?;
    let mut up = &w * inner.vectors.columns(1, 1);
    fix_phase(up.as_mut_slice());
    let down = time_reverse(&up);

    let mut basis = DoubletBasis {
        irrep,
        doublet,
        nuclear_spin: p.nuclear_spin,
        vectors: with_nucleus(&up, &down, p.nuclear_spin),
        up,
        down,
        centroid,
    };
    if p.hf_active() && p.a_hf != 0.0 {
        let block = project(&basis, &h_hyperfine(p));
        if let Some(phase) = perp_phase(irrep, &block, p.nuclear_spin) {
            // |↑⟩ -> e^{iφ}|↑⟩, |↓⟩ -> e^{-iφ}|↓⟩ rotates the transverse
            // coefficient by e^{-2iφ}.
            let rot = C64::from_polar(1.0, 0.5 * phase);
            basis.up = basis.up.map(|z| z * rot);
            basis.down = time_reverse(&basis.up);
            basis.vectors = with_nucleus(&basis.up, &basis.down, p.nuclear_spin);
        }
    }
    Ok(basis)
}

/// Argument of the transverse hyperfine coefficient in the current gauge,
/// measured against its target direction.
fn perp_phase(irrep: Irrep, block: &CMatrix, nuclear: Spin) -> Option<f64> {
    let ops = EffectiveOps::new(nuclear);
    let coeff = match irrep {
        // coefficient of S+ I+
        Irrep::Gamma4 => inner(&ops.sp_ip, block) / inner(&ops.sp_ip, &ops.sp_ip).re,
        // coefficient of S+ Iz, target -i a_perp/2
        Irrep::Gamma56 => inner(&ops.sp_iz, block) / inner(&ops.sp_iz, &ops.sp_iz).re * C64::new(0.0, 1.0),
    };
    (coeff.norm() > 1e-12 * block.iter().fold(0.0, |a: f64, z| a.max(z.norm()))).then(|| coeff.arg())
}

fn inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `P op P` in the doublet basis.
fn project(basis: &DoubletBasis, op: &OperatorMatrix) -> CMatrix {
    basis.vectors.adjoint() * op.entries() * &basis.vectors
}

/// Project a composite operator onto the doublet ⊗ nucleus space.
pub fn project_block(basis: &DoubletBasis, op: &OperatorMatrix) -> Result<OperatorMatrix> {
    if op.dim() != basis.vectors.nrows() {
        return Err(Error::DimensionMismatch { expected: basis.vectors.nrows(), found: op.dim() });
    }
    OperatorMatrix::new(BasisTag::Composite, project(basis, op))
}

/// Effective spin and nuclear operators on the `2(2I+1)` space.
struct EffectiveOps {
    sx: CMatrix,
    sy: CMatrix,
    sz: CMatrix,
    ix: CMatrix,
    iy: CMatrix,
    iz: CMatrix,
    sp_ip: CMatrix,
    sp_im: CMatrix,
    sp_iz: CMatrix,
    sz_iz: CMatrix,
}

impl EffectiveOps {
    fn new(nuclear: Spin) -> Self {
        let n = nuclear.dim();
        let s = spin_matrices(Spin::HALF, BasisTag::Spin);
        let i = spin_matrices(nuclear, BasisTag::Nuclear);
        let id_s = CMatrix::identity(2, 2);
        let id_n = CMatrix::identity(n, n);
        let on_s = |m: &OperatorMatrix| m.entries().kronecker(&id_n);
        let on_i = |m: &OperatorMatrix| id_s.kronecker(m.entries());
        let (sx, sy, sz) = (on_s(&s.x), on_s(&s.y), on_s(&s.z));
        let (ix, iy, iz) = (on_i(&i.x), on_i(&i.y), on_i(&i.z));
        let sp = s.raising().entries().kronecker(&id_n);
        let ip = id_s.kronecker(i.raising().entries());
        let im = id_s.kronecker(i.lowering().entries());
        Self {
            sp_ip: &sp * &ip,
            sp_im: &sp * &im,
            sp_iz: &sp * &iz,
            sz_iz: &sz * &iz,
            sx,
            sy,
            sz,
            ix,
            iy,
            iz,
        }
    }
}

fn rms(m: &CMatrix) -> f64 {
    (m.iter().map(|z| z.norm_sqr()).sum::<f64>() / m.len() as f64).sqrt()
}

fn coefficient(op: &CMatrix, block: &CMatrix) -> C64 {
    let norm = inner(op, op).re;
    if norm == 0.0 {
        c(0.0)
    } else {
        inner(op, block) / norm
    }
}

/// Least-squares fit of a projected hyperfine block to the form of `irrep`.
/// Returns `(a_par, a_perp, residual, alt_residual)`.
fn fit_hyperfine(irrep: Irrep, block: &CMatrix, nuclear: Spin) -> (f64, f64, f64, Option<f64>) {
    let ops = EffectiveOps::new(nuclear);
    let a_par = coefficient(&ops.sz_iz, block).re;
    match irrep {
        Irrep::Gamma4 => {
            let cp = coefficient(&ops.sp_ip, block);
            let a_perp = 2.0 * cp.re;
            let model = ops.sz_iz.map(|z| z * a_par) + (&ops.sp_ip + ops.sp_ip.adjoint()).map(|z| z * (0.5 * a_perp));
            let cm = coefficient(&ops.sp_im, block);
            let alt = ops.sz_iz.map(|z| z * a_par) + ops.sp_im.map(|z| z * cm) + ops.sp_im.adjoint().map(|z| z * cm.conj());
            (a_par, a_perp, rms(&(block - model)), Some(rms(&(block - alt))))
        }
        Irrep::Gamma56 => {
            let a_perp = coefficient(&(&ops.sy * &ops.iz), block).re;
            let model = ops.sz_iz.map(|z| z * a_par) + (&ops.sy * &ops.iz).map(|z| z * a_perp);
            (a_par, a_perp, rms(&(block - model)), None)
        }
    }
}

/// `(g_par, g_perp)` from the first-order Zeeman blocks of the electronic
/// doublet.
fn fit_g(p: &ModelParams, basis: &DoubletBasis) -> (f64, f64) {
    let elem = |op: &CMatrix, a: &CMatrix, b: &CMatrix| (a.adjoint() * op * b)[(0, 0)];
    let mz = moment_z(p);
    let g_par = (elem(&mz, &basis.up, &basis.up) - elem(&mz, &basis.down, &basis.down)).re;
    let g_perp = match basis.irrep {
        Irrep::Gamma56 => 0.0,
        Irrep::Gamma4 => 2.0 * elem(&moment(p, 0), &basis.up, &basis.down).norm(),
    };
    (g_par, g_perp)
}

/// Transverse Zeeman matrix element `|⟨↑|kLx + g_e Sx|↓⟩|` of a doublet,
/// without the symmetry-imposed zero for Γ56.
pub fn transverse_moment(p: &ModelParams, basis: &DoubletBasis) -> f64 {
    let m = moment(p, 0);
    (basis.up.adjoint() * m * &basis.down)[(0, 0)].norm()
}

/// Effective parameters of doublet `doublet` (0 = lowest).
pub fn extract(p: &ModelParams, doublet: usize) -> Result<EffectiveParams> {
    let basis = doublet_basis(p, doublet)?;
    let (g_par, g_perp) = fit_g(p, &basis);
    let (a_par, a_perp, fit_residual, alt_residual) = if p.hf_active() {
        let block = project(&basis, &h_hyperfine(p));
        let fit = fit_hyperfine(basis.irrep, &block, p.nuclear_spin);
        let scale = block.iter().fold(0.0, |a: f64, z| a.max(z.norm()));
        let threshold = 1e-6 * scale;
        if fit.2 > threshold {
            return Err(Error::FormMismatch { residual: fit.2, threshold });
        }
        fit
    } else {
        (0.0, 0.0, 0.0, matches!(basis.irrep, Irrep::Gamma4).then_some(0.0))
    };
    Ok(EffectiveParams { irrep: basis.irrep, a_par, a_perp, g_par, g_perp, fit_residual, alt_residual })
}

/// Effective Hamiltonian on `|σ⟩ ⊗ |m_I⟩` for field `b` (tesla), Hz.
pub fn effective_hamiltonian(ep: &EffectiveParams, nuclear: Spin, g_n: f64, b: [f64; 3]) -> CMatrix {
    let o = EffectiveOps::new(nuclear);
    let hf = match ep.irrep {
        Irrep::Gamma4 => o.sz_iz.map(|z| z * ep.a_par) + (&o.sp_ip + o.sp_ip.adjoint()).map(|z| z * (0.5 * ep.a_perp)),
        Irrep::Gamma56 => o.sz_iz.map(|z| z * ep.a_par) + (&o.sy * &o.iz).map(|z| z * ep.a_perp),
    };
    let mu_b = BOHR_MAGNETON_HZ_PER_T;
    let zee_el = o.sz.map(|z| z * (-mu_b * ep.g_par * b[2]))
        + o.sx.map(|z| z * (-mu_b * ep.g_perp * b[0]))
        + o.sy.map(|z| z * (-mu_b * ep.g_perp * b[1]));
    let nu = -g_n * NUCLEAR_MAGNETON_HZ_PER_T;
    let zee_n = o.ix.map(|z| z * (nu * b[0])) + o.iy.map(|z| z * (nu * b[1])) + o.iz.map(|z| z * (nu * b[2]));
    hf + zee_el + zee_n
}

/// Ascending eigenvalues of the effective Hamiltonian for a field along z.
pub fn effective_energies(ep: &EffectiveParams, nuclear: Spin, b_z: f64, g_n: f64) -> Result<Vec<f64>> {
    Ok(eig_matrix(&effective_hamiltonian(ep, nuclear, g_n, [0.0, 0.0, b_z]))?.values)
}

/// Full-model and effective-model levels of one doublet along a z sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub fields: Vec<f64>,
    /// Full-model levels relative to the zero-field doublet centroid, Hz.
    pub full: Vec<Vec<f64>>,
    pub effective: Vec<Vec<f64>>,
    /// RMS of `effective - full` over all points and levels, Hz.
    pub rms: f64,
    /// Zero-field spread of the full-model levels, Hz.
    pub span: f64,
}

pub fn compare_with_full(p: &ModelParams, doublet: usize, fields: &[f64]) -> Result<Comparison> {
    use rayon::prelude::*;
    let ep = extract(p, doublet)?;
    let basis = doublet_basis(p, doublet)?;
    let n = 2 * p.nuclear_spin.dim();
    let range = doublet * n..(doublet + 1) * n;
    let full: Vec<Vec<f64>> = fields
        .par_iter()
        .map(|&b| {
            let es = eig_hermitian(&assemble(p, &FieldConfig::static_field([0.0, 0.0, b]))?)?;
            Ok(es.values[range.clone()].iter().map(|v| v - basis.centroid).collect())
        })
        .collect::<Result<_>>()?;
    let effective: Vec<Vec<f64>> = fields
        .iter()
        .map(|&b| effective_energies(&ep, p.nuclear_spin, b, p.g_n))
        .collect::<Result<_>>()?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (f, e) in full.iter().zip(&effective) {
        for (a, b) in f.iter().zip(e) {
            sum += (a - b).powi(2);
            count += 1;
        }
    }
    let zero = eig_hermitian(&assemble(p, &FieldConfig::default())?)?;
    let span = zero.values[range.end - 1] - zero.values[range.start];
    Ok(Comparison { fields: fields.to_vec(), full, effective, rms: (sum / count as f64).sqrt(), span })
}

/// Outcome of the linear-level test on an effective model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    /// Some but not all levels are exactly linear in B through B = 0.
    pub present: bool,
    /// Level indices (ascending order at the reference field) of the linear pair.
    pub pair: Option<(usize, usize)>,
    /// Every level is linear.
    pub degenerate: bool,
    pub linear_levels: Vec<usize>,
}

/// Detect levels whose eigenvector does not depend on a z field in
/// `[-b_max, b_max]`; their energies are exactly linear in B.
pub fn spectral_fingerprint(ep: &EffectiveParams, nuclear: Spin, g_n: f64, b_max: f64, n_points: usize) -> Result<Fingerprint> {
    let h = |b: f64| effective_hamiltonian(ep, nuclear, g_n, [0.0, 0.0, b]);
    let b_ref = 0.7 * b_max;
    let es = eig_matrix(&h(b_ref))?;
    let n = n_points.max(3);
    let fields: Vec<f64> = (0..n).map(|j| -b_max + 2.0 * b_max * j as f64 / (n - 1) as f64).collect();
    let scale = fields.iter().map(|&b| h(b).iter().fold(0.0, |a: f64, z| a.max(z.norm()))).fold(0.0, f64::max);
    let linear_levels: Vec<usize> = (0..es.dim())
        .filter(|&k| {
            let v = es.vector(k);
            fields.iter().all(|&b| {
                let hv = h(b) * &v;
                let e = v.dotc(&hv);
                (hv - v.map(|z| z * e)).norm() <= 1e-9 * scale
            })
        })
        .collect();
    let degenerate = linear_levels.len() == es.dim();
    let present = !degenerate && linear_levels.len() >= 2;
    let pair = present.then(|| (linear_levels[0], linear_levels[1]));
    Ok(Fingerprint { present, pair, degenerate, linear_levels })
}

/// Slopes of the zero-field non-degenerate levels of one doublet in the full
/// model, along z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockLevel {
    /// Level index at B = 0.
    pub level: usize,
    /// Forward-difference slope at B = 0, Hz/T.
    pub slope_zero: f64,
    /// Slope between the last two points of a tracked sweep, Hz/T.
    pub slope_high: f64,
}

pub fn clock_levels(p: &ModelParams, doublet: usize, b_high: f64, step: f64, n_sweep: usize) -> Result<Vec<ClockLevel>> {
    use crate::eigen::{cluster_ranges, SPECTRUM_TOL_HZ};
    use crate::spectra::{sweep_field, Axis, SweepSpec};
    let n = 2 * p.nuclear_spin.dim();
    let range = doublet * n..(doublet + 1) * n;
    let spec = SweepSpec { axis: Axis::Z, b_range: (0.0, b_high), n_points: n_sweep, ground_only: false, track: true };
    let sweep = sweep_field(p, &spec)?;
    let zero = &sweep.levels[0];
    let at_step = eig_hermitian(&assemble(p, &FieldConfig::static_field([0.0, 0.0, step]))?)?;
    let last = sweep.levels.len() - 1;
    let db = sweep.fields[last] - sweep.fields[last - 1];
    let singles = cluster_ranges(&zero[range.clone()], SPECTRUM_TOL_HZ)
        .into_iter()
        .filter(|r| r.len() == 1)
        .map(|r| r.start + range.start);
    Ok(singles
        .map(|level| ClockLevel {
            level,
            slope_zero: (at_step.values[level] - zero[level]) / step,
            slope_high: (sweep.levels[last][level] - sweep.levels[last - 1][level]) / db,
        })
        .collect())
}

/// Orbital amplitudes of the gauge-fixed `|↑⟩` state of a doublet.
pub fn doublet_amplitudes(p: &ModelParams, doublet: usize) -> Result<[C64; crate::angular::ORBITAL_DIM]> {
    crate::spectra::orbital_amplitudes(&doublet_basis(&p.electronic(), doublet)?.up)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ev_to_hz, mev_to_hz, G_ELECTRON};

    fn fitted(i: f64, a: f64) -> ModelParams {
        ModelParams {
            delta: ev_to_hz(1.0),
            eta: -0.4,
            delta_a1: mev_to_hz(10.0),
            k: 0.3,
            lambda_soc: mev_to_hz(15.0),
            a_hf: a,
            g_e: G_ELECTRON,
            g_n: 1.4711,
            nuclear_spin: Spin::new(i).unwrap(),
            include_hf: true,
        }
    }

    #[test]
    fn identity_projects_to_identity() {
        let p = fitted(2.5, 480e6);
        let basis = doublet_basis(&p, 0).unwrap();
        let id = OperatorMatrix::identity(BasisTag::Composite, 60);
        let blk = project_block(&basis, &id).unwrap();
        assert!((blk.entries() - CMatrix::identity(12, 12)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn gamma4_printed_form_fits() {
        let ep = extract(&fitted(2.5, 480e6), 0).unwrap();
        assert_eq!(ep.irrep, Irrep::Gamma4);
        assert!(ep.a_perp > 0.0 && ep.a_par < 0.0);
        assert!(ep.fit_residual < 1e-3 * ep.a_perp);
        assert!(ep.alt_residual.unwrap() > 0.1 * ep.a_perp);
    }

    #[test]
    fn gamma56_form_fits_with_zero_g_perp() {
        let p = fitted(2.5, 480e6);
        let ep = extract(&p, 1).unwrap();
        assert_eq!(ep.irrep, Irrep::Gamma56);
        assert_eq!(ep.g_perp, 0.0);
        assert!(ep.fit_residual < 1e-3 * ep.a_par.abs().max(ep.a_perp.abs()));
        let basis = doublet_basis(&p, 1).unwrap();
        assert!(transverse_moment(&p, &basis) < 1e-10);
    }

    #[test]
    fn zero_coupling_gives_zero_constants() {
        let ep = extract(&fitted(2.5, 0.0), 0).unwrap();
        assert_eq!((ep.a_par, ep.a_perp), (0.0, 0.0));
    }

    #[test]
    fn effective_levels_without_transverse_coupling() {
        let ep = EffectiveParams {
            irrep: Irrep::Gamma4,
            a_par: 100e6,
            a_perp: 0.0,
            g_par: 1.7,
            g_perp: 0.0,
            fit_residual: 0.0,
            alt_residual: None,
        };
        let e = effective_energies(&ep, Spin::new(1.5).unwrap(), 0.0, 0.0).unwrap();
        let mut expected: Vec<f64> = [-1.5, -0.5, 0.5, 1.5]
            .iter()
            .flat_map(|m| [0.5 * m * 100e6, -0.5 * m * 100e6])
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-3);
        }
    }
}
