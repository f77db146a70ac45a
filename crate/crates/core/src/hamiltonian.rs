//! The four static terms (crystal field, spin-orbit, hyperfine, Zeeman) and
//! the magnetic and electric drive operators. All energies in Hz.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::angular::{
    c, dipolar_tensor, embed_electronic, kron_embed, wigner_d_l2, BasisTag, CMatrix, EulerAngles,
    OperatorMatrix, ProductSpace, Slot, Spin, ORBITAL_DIM,
};
use crate::error::{Error, Result};
use crate::units::{BOHR_MAGNETON_HZ_PER_T, NUCLEAR_MAGNETON_HZ_PER_T};

/// Microscopic model configuration. Energies are stored in Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Tetrahedral splitting between the e doublet and the t2 triplet.
    pub delta: f64,
    /// Trigonal-to-tetrahedral ratio; the d(±1) orbitals sit at `eta * delta`.
    pub eta: f64,
    /// Offset of the trigonal a1 singlet above the upper doublet.
    pub delta_a1: f64,
    /// Orbital reduction factor.
    pub k: f64,
    /// Spin-orbit reduced matrix element.
    pub lambda_soc: f64,
    /// Hyperfine scale `A`.
    pub a_hf: f64,
    pub g_e: f64,
    pub g_n: f64,
    pub nuclear_spin: Spin,
    pub include_hf: bool,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.delta, self.eta, self.delta_a1, self.k, self.lambda_soc, self.a_hf, self.g_e, self.g_n];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.delta <= 0.0 {
            return Err(Error::InvalidParams(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.k > 0.0 && self.k <= 1.0) {
            return Err(Error::InvalidParams(format!("k must lie in (0, 1], got {}", self.k)));
        }
        Ok(())
    }

    pub fn space(&self) -> ProductSpace {
        ProductSpace::new(self.nuclear_spin)
    }

    /// The same model without nucleus and hyperfine coupling (dimension 10).
    pub fn electronic(&self) -> Self {
        Self { nuclear_spin: Spin::ZERO, include_hf: false, ..self.clone() }
    }

    pub fn with_hf(&self, include_hf: bool) -> Self {
        Self { include_hf, ..self.clone() }
    }

    /// Whether the hyperfine term contributes.
    pub fn hf_active(&self) -> bool {
        self.include_hf && !self.nuclear_spin.is_zero()
    }
}

/// Static and oscillating fields.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Static field, tesla.
    pub b_static: [f64; 3],
    /// Oscillating field amplitude, tesla.
    pub b_drive: [f64; 3],
    /// Electric-drive modulation of `eta`.
    pub delta_eta: f64,
}

impl FieldConfig {
    pub fn static_field(b: [f64; 3]) -> Self {
        Self { b_static: b, ..Default::default() }
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        let all = self.b_static.iter().chain(&self.b_drive).chain(std::iter::once(&self.delta_eta));
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite field component".into()));
        }
        if self.delta_eta.abs() > 0.5 * p.eta.abs() {
            warn!(
                "|delta_eta| = {} exceeds half of |eta| = {}; the small-modulation picture no longer holds",
                self.delta_eta.abs(),
                p.eta.abs()
            );
        }
        Ok(())
    }
}

/// Tetrahedral term in its cubic frame: the e pair (d_z², d_x²-y²) at 0 and
/// the t2 triplet (d_xy, d_xz, d_yz) at `delta`.
fn tetrahedral_cubic_frame(delta: f64) -> CMatrix {
    let mut h = CMatrix::zeros(ORBITAL_DIM, ORBITAL_DIM);
    // m = ±1 are pure t2; (|2⟩ - |-2⟩)/√2 is t2, (|2⟩ + |-2⟩)/√2 is e.
    h[(1, 1)] = c(delta);
    h[(3, 3)] = c(delta);
    h[(0, 0)] = c(0.5 * delta);
    h[(4, 4)] = c(0.5 * delta);
    h[(0, 4)] = c(-0.5 * delta);
    h[(4, 0)] = c(-0.5 * delta);
    h
}

/// Trigonal term, diagonal in the trigonal `m` basis.
fn trigonal(delta: f64, eta: f64, delta_a1: f64) -> CMatrix {
    let e_doublet = eta * delta;
    let e_singlet = e_doublet.max(0.0) + delta_a1;
    let diag = [0.0, e_doublet, e_singlet, e_doublet, 0.0];
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(5, diag.iter().map(|&x| c(x))))
}

/// Drop entries below `1e-15` of the largest one; these are rounding noise
/// from the frame rotation.
fn chop(mut m: CMatrix) -> CMatrix {
    let scale = m.iter().fold(0.0, |a: f64, z| a.max(z.norm()));
    for z in m.iter_mut() {
        if z.re.abs() < 1e-15 * scale {
            z.re = 0.0;
        }
        if z.im.abs() < 1e-15 * scale {
            z.im = 0.0;
        }
    }
    m
}

/// The tetrahedral term rotated into the trigonal frame.
pub fn h_tetrahedral(p: &ModelParams) -> OperatorMatrix {
    // D† H D re-expresses H in the frame whose z axis is R ẑ = [111].
    let d = wigner_d_l2(EulerAngles::cubic_to_trigonal());
    let rotated = d.entries().adjoint() * tetrahedral_cubic_frame(p.delta) * d.entries();
    let herm = (&rotated + rotated.adjoint()).map(|z| z * 0.5);
    OperatorMatrix::from_square(BasisTag::OrbitalL2, chop(herm))
}

/// Crystal field (tetrahedral + trigonal) on the orbital slot.
pub fn h_crystal(p: &ModelParams) -> OperatorMatrix {
    h_crystal_at_eta(p, p.eta)
}

pub fn h_crystal_at_eta(p: &ModelParams, eta: f64) -> OperatorMatrix {
    let tet = h_tetrahedral(p);
    OperatorMatrix::from_square(
        BasisTag::OrbitalL2,
        tet.entries() + trigonal(p.delta, eta, p.delta_a1),
    )
}

/// `λ k L·S` on orbital ⊗ spin.
pub fn h_soc(p: &ModelParams) -> OperatorMatrix {
    let space = ProductSpace::electronic();
    let (l, s) = (space.orbital_ops(), space.spin_ops());
    let mut out = OperatorMatrix::zeros(BasisTag::Composite, space.dim());
    for axis in 0..3 {
        let term = l.component(axis).entries().kronecker(s.component(axis).entries());
        out += &OperatorMatrix::from_square(BasisTag::Composite, term);
    }
    out.scaled(p.lambda_soc * p.k)
}

fn three_slot(orb: &CMatrix, spin: &CMatrix, nuc: &CMatrix) -> CMatrix {
    orb.kronecker(spin).kronecker(nuc)
}

/// `A (k L·I + Σ_ij S_i T_ij I_j)` on the composite space. A spin-zero
/// nucleus yields the zero operator.
pub fn h_hyperfine(p: &ModelParams) -> OperatorMatrix {
    let space = p.space();
    if p.nuclear_spin.is_zero() {
        warn!("hyperfine term requested for a spin-zero nucleus; returning zero operator");
        return OperatorMatrix::zeros(BasisTag::Composite, space.dim());
    }
    let (l, s, i) = (space.orbital_ops(), space.spin_ops(), space.nuclear_ops());
    let t = dipolar_tensor();
    let id_spin = CMatrix::identity(2, 2);
    let mut m = CMatrix::zeros(space.dim(), space.dim());
    for a in 0..3 {
        m += three_slot(l.component(a).entries(), &id_spin, i.component(a).entries()).map(|z| z * p.k);
        for b in 0..3 {
            m += three_slot(t.component(a, b).entries(), s.component(a).entries(), i.component(b).entries());
        }
    }
    OperatorMatrix::from_square(BasisTag::Composite, m.map(|z| z * p.a_hf))
}

/// Electronic Zeeman term `-(μB/h) B·(kL + g_e S)` on the composite space.
pub fn h_zeeman_electronic(p: &ModelParams, b: [f64; 3]) -> OperatorMatrix {
    let space = p.space();
    let (l, s) = (space.orbital_ops(), space.spin_ops());
    let mut el = l.dot(b).scaled(p.k).into_entries().kronecker(&CMatrix::identity(2, 2));
    el += CMatrix::identity(ORBITAL_DIM, ORBITAL_DIM).kronecker(s.dot(b).scaled(p.g_e).entries());
    let el = OperatorMatrix::from_square(BasisTag::Composite, el.map(|z| z * -BOHR_MAGNETON_HZ_PER_T));
    embed_electronic(&el, space).expect("electronic operator has dimension 10")
}

/// Nuclear Zeeman term `-(g_n μN/h) B·I`.
pub fn h_zeeman_nuclear(p: &ModelParams, b: [f64; 3]) -> OperatorMatrix {
    let space = p.space();
    let i = space.nuclear_ops();
    let op = i.dot(b).scaled(-p.g_n * NUCLEAR_MAGNETON_HZ_PER_T);
    kron_embed(&op, Slot::Nuclear, space).expect("nuclear operator matches its slot")
}

/// Full Zeeman term for field `b` (tesla).
pub fn h_zeeman(p: &ModelParams, b: [f64; 3]) -> OperatorMatrix {
    &h_zeeman_electronic(p, b) + &h_zeeman_nuclear(p, b)
}

/// Static Hamiltonian: crystal field + SOC (+ hyperfine) + Zeeman(b_static).
pub fn assemble(p: &ModelParams, f: &FieldConfig) -> Result<OperatorMatrix> {
    p.validate()?;
    let space = p.space();
    let cf = kron_embed(&h_crystal(p), Slot::Orbital, space)?;
    let mut h = &cf + &embed_electronic(&h_soc(p), space)?;
    if p.hf_active() {
        h += &h_hyperfine(p);
    }
    if f.b_static.iter().any(|&x| x != 0.0) {
        h += &h_zeeman(p, f.b_static);
    }
    Ok(h)
}

/// Zeeman operator at the oscillating amplitude.
pub fn drive_magnetic(p: &ModelParams, f: &FieldConfig) -> OperatorMatrix {
    h_zeeman(p, f.b_drive)
}

/// Change of the crystal field under `eta -> eta + delta_eta`, embedded in
/// the composite space.
pub fn drive_electric(p: &ModelParams, f: &FieldConfig) -> Result<OperatorMatrix> {
    if f.delta_eta == 0.0 {
        return Err(Error::ZeroDrive);
    }
    f.validate(p)?;
    let diff = trigonal(p.delta, p.eta + f.delta_eta, p.delta_a1) - trigonal(p.delta, p.eta, p.delta_a1);
    kron_embed(&OperatorMatrix::from_square(BasisTag::OrbitalL2, diff), Slot::Orbital, p.space())
}

/// `μB |B_drive| / h`, the natural scale of the magnetic drive, Hz.
pub fn magnetic_drive_scale(f: &FieldConfig) -> f64 {
    BOHR_MAGNETON_HZ_PER_T * f.b_drive.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `|delta_eta| * delta`, the natural scale of the electric drive, Hz.
pub fn electric_drive_scale(p: &ModelParams, f: &FieldConfig) -> f64 {
    f.delta_eta.abs() * p.delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{c3_orbital, c3_rotation};
    use crate::eigen::eig_hermitian;
    use crate::units::{ev_to_hz, mev_to_hz, G_ELECTRON};

    pub(crate) fn fitted(nuclear: f64) -> ModelParams {
        ModelParams {
            delta: ev_to_hz(1.0),
            eta: -0.4,
            delta_a1: mev_to_hz(10.0),
            k: 0.3,
            lambda_soc: mev_to_hz(15.0),
            a_hf: 500e6,
            g_e: G_ELECTRON,
            g_n: 1.4711,
            nuclear_spin: Spin::new(nuclear).unwrap(),
            include_hf: true,
        }
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    #[test]
    fn pure_tetrahedral_spectrum() {
        let p = ModelParams { eta: 0.0, delta_a1: 0.0, ..fitted(0.0) };
        let es = eig_hermitian(&h_crystal(&p)).unwrap();
        let expected = [0.0, 0.0, p.delta, p.delta, p.delta];
        for (v, e) in es.values.iter().zip(expected) {
            assert!((v - e).abs() <= 1e-12 * p.delta, "{v} vs {e}");
        }
    }

    #[test]
    fn fitted_crystal_field_has_two_doublets_and_singlet() {
        let p = fitted(0.0);
        let es = eig_hermitian(&h_crystal(&p)).unwrap();
        let v = &es.values;
        assert!((v[1] - v[0]).abs() < 1e-9 * p.delta);
        assert!((v[3] - v[2]).abs() < 1e-9 * p.delta);
        assert!(v[2] - v[1] > 0.1 * p.delta);
        assert!(v[4] - v[3] > 1e-3 * p.delta);
    }

    #[test]
    fn crystal_field_commutes_with_c3() {
        let p = fitted(0.0);
        let comm = h_crystal(&p).commutator(&c3_orbital());
        assert!(comm.max_abs() <= 1e-10 * p.delta);
    }

    #[test]
    fn soc_zero_and_traceless() {
        let p = ModelParams { lambda_soc: 0.0, ..fitted(0.0) };
        assert_eq!(h_soc(&p).max_abs(), 0.0);
        assert!(h_soc(&fitted(0.0)).trace().norm() < 1e-3);
    }

    #[test]
    fn hyperfine_zero_for_zero_a_and_spinless_nucleus() {
        let p = ModelParams { a_hf: 0.0, ..fitted(2.5) };
        assert_eq!(h_hyperfine(&p).max_abs(), 0.0);
        let q = fitted(0.0);
        assert_eq!(h_hyperfine(&q).dim(), 10);
        assert_eq!(h_hyperfine(&q).max_abs(), 0.0);
    }

    #[test]
    fn hyperfine_dipolar_diagonal_element() {
        // <m_l=0, m_s=1/2, m_I=1/2| A Σ S_i T_ij I_j |same> = A (4/7)(1/2)(1/2)
        let p = ModelParams { k: 1e-300, ..fitted(0.5) };
        let h = h_hyperfine(&p);
        let space = p.space();
        let idx = space.index(2, 1, 1);
        assert!((h.entries()[(idx, idx)] - c(p.a_hf / 7.0)).norm() < 1e-6);
    }

    #[test]
    fn hyperfine_is_c3_invariant() {
        let p = fitted(2.5);
        let h = h_hyperfine(&p);
        let u = c3_rotation(true, p.space());
        assert!(h.commutator(&u).max_abs() <= 1e-12 * h.max_abs());
    }

    #[test]
    fn zeeman_axial_field() {
        let p = fitted(2.5);
        assert_eq!(h_zeeman(&p, [0.0; 3]).max_abs(), 0.0);
        let h = h_zeeman(&p, [0.0, 0.0, 0.3]);
        let u = c3_rotation(true, p.space());
        assert!(h.commutator(&u).max_abs() <= 1e-12 * h.max_abs());
        // electron-only part on |m_l = 0, m_s = ±1/2⟩
        let q = fitted(0.0);
        let hz = h_zeeman_electronic(&q, [0.0, 0.0, 1.0]);
        let space = q.space();
        let up = hz.entries()[(space.index(2, 1, 0), space.index(2, 1, 0))].re;
        let dn = hz.entries()[(space.index(2, 0, 0), space.index(2, 0, 0))].re;
        let oracle = G_ELECTRON * BOHR_MAGNETON_HZ_PER_T;
        assert!(((dn - up) - oracle).abs() < 1e-3);
        assert!((oracle - 28.02e9).abs() < 0.01e9);
    }

    #[test]
    fn assemble_dimensions_and_hermiticity() {
        let p = fitted(2.5);
        let f = FieldConfig::static_field([0.01, 0.0, 0.02]);
        let h = assemble(&p, &f).unwrap();
        assert_eq!(h.dim(), 60);
        assert!(h.hermiticity_defect() <= 1e-14);
    }

    #[test]
    fn crystal_field_only_degeneracy() {
        let p = ModelParams { lambda_soc: 0.0, include_hf: false, ..fitted(2.5) };
        let es = eig_hermitian(&assemble(&p, &FieldConfig::default()).unwrap()).unwrap();
        let cf = eig_hermitian(&h_crystal(&p)).unwrap();
        for (k, v) in es.values.iter().enumerate() {
            assert!((v - cf.values[k / 12]).abs() < 1e-9 * p.delta);
        }
    }

    #[test]
    fn electric_drive_on_d_pm1() {
        let p = fitted(0.0);
        let f = FieldConfig { delta_eta: mev_to_hz(1.0) / p.delta, ..Default::default() };
        let v = drive_electric(&p, &f).unwrap();
        let space = p.space();
        let expected = mev_to_hz(1.0);
        for idx in 0..space.dim() {
            let (ml, _, _) = space.projections(idx);
            let want = if ml.abs() == 1.0 { expected } else { 0.0 };
            assert!((v.entries()[(idx, idx)].re - want).abs() < 1e-3 * expected);
        }
        assert!((v.max_abs() - 241.8e9).abs() < 0.1e9);
        let neg = drive_electric(&p, &FieldConfig { delta_eta: -f.delta_eta, ..Default::default() }).unwrap();
        assert!(max_abs(&(v.entries() + neg.entries())) == 0.0);
        assert_eq!(drive_electric(&p, &FieldConfig::default()).unwrap_err(), Error::ZeroDrive);
        assert!(v.commutator(&c3_rotation(false, space)).max_abs() < 1e-6);
    }

    #[test]
    fn magnetic_drive_scale_and_noncommuting_polarizations() {
        let p = fitted(2.5);
        let par = FieldConfig { b_drive: [0.0, 0.0, 100e-6], ..Default::default() };
        let perp = FieldConfig { b_drive: [100e-6, 0.0, 0.0], ..Default::default() };
        let scale = magnetic_drive_scale(&par);
        assert!((scale - 1.3996e6).abs() < 1e3);
        let vpar = drive_magnetic(&p, &par);
        let vperp = drive_magnetic(&p, &perp);
        assert!(vpar.max_abs() > 0.1 * scale && vpar.max_abs() < 10.0 * scale);
        assert!(vpar.commutator(&vperp).max_abs() > 1e-3 * scale * scale);
        assert_eq!(drive_magnetic(&p, &FieldConfig::default()).max_abs(), 0.0);
    }
}
