//! Angular-momentum algebra on the `l = 2` orbital, electron-spin and
//! nuclear-spin slots.
//!
//! Conventions: Condon-Shortley phases, every basis ordered by ascending
//! projection `m = -j..=j`, and the composite space is always ordered
//! orbital ⊗ spin ⊗ nuclear.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ORBITAL_L: u32 = 2;
pub const ORBITAL_DIM: usize = 5;
pub const SPIN_DIM: usize = 2;

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A non-negative half-integer angular momentum, stored as `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(u32);

impl Spin {
    pub const ZERO: Spin = Spin(0);
    pub const HALF: Spin = Spin(1);

    pub fn new(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !value.is_finite() || value < 0.0 || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::InvalidSpin(value));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub const fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Projections `m` in basis order.
    pub fn projections(self) -> impl Iterator<Item = f64> {
        let j = self.value();
        (0..self.dim()).map(move |k| -j + k as f64)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl Serialize for Spin {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Spin {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Spin::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisTag {
    OrbitalL2,
    Spin,
    Nuclear,
    Composite,
}

/// Square complex matrix with a label for the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    basis: BasisTag,
    entries: CMatrix,
}

impl OperatorMatrix {
    pub fn new(basis: BasisTag, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        Ok(Self { basis, entries })
    }

    pub(crate) fn from_square(basis: BasisTag, entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        Self { basis, entries }
    }

    pub fn zeros(basis: BasisTag, dim: usize) -> Self {
        Self::from_square(basis, CMatrix::zeros(dim, dim))
    }

    pub fn identity(basis: BasisTag, dim: usize) -> Self {
        Self::from_square(basis, CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self::from_square(self.basis, self.entries.adjoint())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `max|M - M†| / max|M|`, or zero for the zero matrix.
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let diff = &self.entries - self.entries.adjoint();
        diff.iter().fold(0.0, |m: f64, z| m.max(z.norm())) / scale
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_square(self.basis, self.entries.map(|z| z * factor))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::from_square(self.basis, &self.entries * &other.entries)
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self::from_square(
            self.basis,
            &self.entries * &other.entries - &other.entries * &self.entries,
        )
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, unitary: &Self) -> Self {
        Self::from_square(
            self.basis,
            &unitary.entries * &self.entries * unitary.entries.adjoint(),
        )
    }
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::from_square(self.basis, &self.entries + &rhs.entries)
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::from_square(self.basis, &self.entries - &rhs.entries)
    }
}

impl std::ops::AddAssign<&OperatorMatrix> for OperatorMatrix {
    fn add_assign(&mut self, rhs: &OperatorMatrix) {
        self.entries += &rhs.entries;
    }
}

/// Cartesian components of an angular-momentum operator.
#[derive(Clone, Debug)]
pub struct AngularMomentum {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    pub z: OperatorMatrix,
}

impl AngularMomentum {
    pub fn component(&self, axis: usize) -> &OperatorMatrix {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }

    pub fn components(&self) -> [&OperatorMatrix; 3] {
        [&self.x, &self.y, &self.z]
    }

    /// `J+ = Jx + iJy`.
    pub fn raising(&self) -> OperatorMatrix {
        OperatorMatrix::from_square(
            self.x.basis,
            &self.x.entries + self.y.entries.map(|z| z * C64::i()),
        )
    }

    /// `J- = Jx - iJy`.
    pub fn lowering(&self) -> OperatorMatrix {
        OperatorMatrix::from_square(
            self.x.basis,
            &self.x.entries - self.y.entries.map(|z| z * C64::i()),
        )
    }

    /// `n · J` for a real vector `n`.
    pub fn dot(&self, n: [f64; 3]) -> OperatorMatrix {
        let mut out = self.x.scaled(n[0]);
        out += &self.y.scaled(n[1]);
        out += &self.z.scaled(n[2]);
        out
    }

    pub fn casimir(&self) -> OperatorMatrix {
        let mut out = self.x.matmul(&self.x);
        out += &self.y.matmul(&self.y);
        out += &self.z.matmul(&self.z);
        out
    }
}

fn angular_momentum(j: Spin, basis: BasisTag) -> AngularMomentum {
    let n = j.dim();
    let jv = j.value();
    let ms: Vec<f64> = j.projections().collect();
    let mut plus = CMatrix::zeros(n, n);
    for (col, &m) in ms.iter().enumerate().take(n.saturating_sub(1)) {
        plus[(col + 1, col)] = c((jv * (jv + 1.0) - m * (m + 1.0)).sqrt());
    }
    let minus = plus.adjoint();
    let x = (&plus + &minus).map(|z| z * 0.5);
    let y = (&plus - &minus).map(|z| z * C64::new(0.0, -0.5));
    let z = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, ms.iter().map(|&m| c(m))));
    AngularMomentum {
        x: OperatorMatrix::from_square(basis, x),
        y: OperatorMatrix::from_square(basis, y),
        z: OperatorMatrix::from_square(basis, z),
    }
}

/// `Lx, Ly, Lz` for `l = 2` in the basis `|m = -2..2⟩`.
pub fn l2_operators() -> AngularMomentum {
    angular_momentum(Spin::from_twice(2 * ORBITAL_L), BasisTag::OrbitalL2)
}

/// Spin matrices for spin `s` in the basis `|m = -s..s⟩`.
pub fn spin_operators(s: f64) -> Result<AngularMomentum> {
    Ok(spin_matrices(Spin::new(s)?, BasisTag::Spin))
}

pub(crate) fn spin_matrices(s: Spin, basis: BasisTag) -> AngularMomentum {
    angular_momentum(s, basis)
}

/// Euler angles in the z-y-z convention: `R = Rz(alpha) Ry(beta) Rz(gamma)`,
/// applied as an active rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        rot_z(self.alpha) * rot_y(self.beta) * rot_z(self.gamma)
    }

    /// Inverse of [`EulerAngles::rotation_matrix`], with `beta ∈ [0, π]`.
    pub fn from_rotation_matrix(r: &Matrix3<f64>) -> Self {
        let beta = r[(2, 2)].clamp(-1.0, 1.0).acos();
        if beta.sin().abs() > 1e-9 {
            let alpha = r[(1, 2)].atan2(r[(0, 2)]);
            let gamma = r[(2, 1)].atan2(-r[(2, 0)]);
            Self { alpha, beta, gamma }
        } else if r[(2, 2)] > 0.0 {
            // Gimbal lock: only alpha + gamma is defined.
            Self { alpha: r[(1, 0)].atan2(r[(0, 0)]), beta: 0.0, gamma: 0.0 }
        } else {
            Self { alpha: (-r[(1, 0)]).atan2(-r[(0, 0)]), beta: PI, gamma: 0.0 }
        }
    }

    /// Euler angles of the rotation taking `z` to the cubic `[111]` axis,
    /// relating the tetrahedral frame to the trigonal frame.
    pub fn cubic_to_trigonal() -> Self {
        Self::new(PI / 4.0, (1.0 / 3f64.sqrt()).acos(), 0.0)
    }
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Wigner small-d element `d^2_{m'm}(beta)`.
pub fn small_d_l2(m_prime: i64, m: i64, beta: f64) -> f64 {
    let j = ORBITAL_L as i64;
    let (sh, ch) = (beta / 2.0).sin_cos();
    let pref = (factorial(j + m_prime) * factorial(j - m_prime) * factorial(j + m) * factorial(j - m)).sqrt();
    let k_min = 0.max(m - m_prime);
    let k_max = (j + m).min(j - m_prime);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let sign = if (k - m + m_prime) % 2 == 0 { 1.0 } else { -1.0 };
        let den = factorial(j + m - k) * factorial(k) * factorial(j - k - m_prime) * factorial(k - m + m_prime);
        sum += sign * ch.powi((2 * j - 2 * k + m - m_prime) as i32) * sh.powi((2 * k - m + m_prime) as i32) / den;
    }
    pref * sum
}

/// Rotation operator `D(α,β,γ) = exp(-iαLz) exp(-iβLy) exp(-iγLz)` on the
/// `l = 2` manifold; `D[m', m] = e^{-im'α} d_{m'm}(β) e^{-imγ}`.
pub fn wigner_d_l2(angles: EulerAngles) -> OperatorMatrix {
    let mut d = CMatrix::zeros(ORBITAL_DIM, ORBITAL_DIM);
    for (row, mp) in (-2i64..=2).enumerate() {
        for (col, m) in (-2i64..=2).enumerate() {
            let phase = C64::from_polar(1.0, -(mp as f64) * angles.alpha - (m as f64) * angles.gamma);
            d[(row, col)] = phase * small_d_l2(mp, m, angles.beta);
        }
    }
    OperatorMatrix::from_square(BasisTag::OrbitalL2, d)
}

/// Matrix elements of the traceless symmetric tensor `3 n_i n_j - δ_ij`
/// within the `l = 2` manifold.
#[derive(Clone, Debug)]
pub struct DipolarTensor {
    components: [[OperatorMatrix; 3]; 3],
}

impl DipolarTensor {
    pub fn component(&self, i: usize, j: usize) -> &OperatorMatrix {
        &self.components[i][j]
    }

    /// `(T_xx, T_yy, T_zz, T_xy, T_xz, T_yz)`.
    pub fn six(&self) -> [&OperatorMatrix; 6] {
        let t = &self.components;
        [&t[0][0], &t[1][1], &t[2][2], &t[0][1], &t[0][2], &t[1][2]]
    }
}

/// Operator-equivalent form
/// `T_ij = -2/((2l-1)(2l+3)) [3/2 (L_i L_j + L_j L_i) - δ_ij l(l+1)]`.
pub fn dipolar_tensor() -> DipolarTensor {
    let l = l2_operators();
    let lf = ORBITAL_L as f64;
    let pref = -2.0 / ((2.0 * lf - 1.0) * (2.0 * lf + 3.0));
    let id = CMatrix::identity(ORBITAL_DIM, ORBITAL_DIM);
    let build = |i: usize, j: usize| {
        let (li, lj) = (l.component(i).entries(), l.component(j).entries());
        let mut m = (li * lj + lj * li).map(|z| z * 1.5);
        if i == j {
            m -= id.map(|z| z * lf * (lf + 1.0));
        }
        OperatorMatrix::from_square(BasisTag::OrbitalL2, m.map(|z| z * pref))
    };
    DipolarTensor {
        components: std::array::from_fn(|i| std::array::from_fn(|j| build(i, j))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Orbital,
    Spin,
    Nuclear,
}

/// The composite space `|m_l⟩ ⊗ |m_s⟩ ⊗ |m_I⟩` for a given nuclear spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductSpace {
    pub nuclear: Spin,
}

impl ProductSpace {
    pub fn new(nuclear: Spin) -> Self {
        Self { nuclear }
    }

    pub fn electronic() -> Self {
        Self { nuclear: Spin::ZERO }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (ORBITAL_DIM, SPIN_DIM, self.nuclear.dim())
    }

    pub fn dim(&self) -> usize {
        ORBITAL_DIM * SPIN_DIM * self.nuclear.dim()
    }

    pub fn nuclear_dim(&self) -> usize {
        self.nuclear.dim()
    }

    pub fn slot_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::Orbital => ORBITAL_DIM,
            Slot::Spin => SPIN_DIM,
            Slot::Nuclear => self.nuclear.dim(),
        }
    }

    /// Composite index of `(orbital, spin, nuclear)` basis indices.
    pub fn index(&self, orbital: usize, spin: usize, nuclear: usize) -> usize {
        (orbital * SPIN_DIM + spin) * self.nuclear.dim() + nuclear
    }

    /// Inverse of [`ProductSpace::index`].
    pub fn split_index(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.nuclear.dim();
        (idx / (SPIN_DIM * n), (idx / n) % SPIN_DIM, idx % n)
    }

    /// `(m_l, m_s, m_I)` of a composite basis index.
    pub fn projections(&self, idx: usize) -> (f64, f64, f64) {
        let (o, s, n) = self.split_index(idx);
        (o as f64 - 2.0, s as f64 - 0.5, n as f64 - self.nuclear.value())
    }

    pub fn orbital_ops(&self) -> AngularMomentum {
        l2_operators()
    }

    pub fn spin_ops(&self) -> AngularMomentum {
        spin_matrices(Spin::HALF, BasisTag::Spin)
    }

    pub fn nuclear_ops(&self) -> AngularMomentum {
        spin_matrices(self.nuclear, BasisTag::Nuclear)
    }
}

/// Embed a single-slot operator into the composite space with identities on
/// the other slots.
pub fn kron_embed(op: &OperatorMatrix, slot: Slot, space: ProductSpace) -> Result<OperatorMatrix> {
    let expected = space.slot_dim(slot);
    if op.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: op.dim() });
    }
    let (no, ns, nn) = space.dims();
    let m = op.entries();
    let out = match slot {
        Slot::Orbital => m.kronecker(&CMatrix::identity(ns * nn, ns * nn)),
        Slot::Spin => CMatrix::identity(no, no)
            .kronecker(m)
            .kronecker(&CMatrix::identity(nn, nn)),
        Slot::Nuclear => CMatrix::identity(no * ns, no * ns).kronecker(m),
    };
    Ok(OperatorMatrix::from_square(BasisTag::Composite, out))
}

/// Embed an orbital ⊗ spin operator (dimension 10) into the composite space.
pub fn embed_electronic(op: &OperatorMatrix, space: ProductSpace) -> Result<OperatorMatrix> {
    let expected = ORBITAL_DIM * SPIN_DIM;
    if op.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: op.dim() });
    }
    let nn = space.nuclear_dim();
    Ok(OperatorMatrix::from_square(
        BasisTag::Composite,
        op.entries().kronecker(&CMatrix::identity(nn, nn)),
    ))
}

/// `exp(-i 2π/3 J_z)` with `J_z = L_z + S_z` (and `+ I_z` when `total`).
/// Diagonal in the product basis.
pub fn c3_rotation(total: bool, space: ProductSpace) -> OperatorMatrix {
    let n = space.dim();
    let mut u = CMatrix::zeros(n, n);
    for idx in 0..n {
        let (ml, ms, mi) = space.projections(idx);
        let jz = ml + ms + if total { mi } else { 0.0 };
        u[(idx, idx)] = C64::from_polar(1.0, -2.0 * PI / 3.0 * jz);
    }
    OperatorMatrix::from_square(BasisTag::Composite, u)
}

/// `exp(-i 2π/3 L_z)` on the orbital slot alone.
pub fn c3_orbital() -> OperatorMatrix {
    let mut u = CMatrix::zeros(ORBITAL_DIM, ORBITAL_DIM);
    for (k, m) in (-2i64..=2).enumerate() {
        u[(k, k)] = C64::from_polar(1.0, -2.0 * PI / 3.0 * m as f64);
    }
    OperatorMatrix::from_square(BasisTag::OrbitalL2, u)
}

/// Unitary part `U` of the time-reversal operator `Θ = U K` on the composite
/// space, built from `Θ|j m⟩ = (-1)^{j-m} |j -m⟩` on every slot.
pub fn time_reversal_unitary(space: ProductSpace) -> CMatrix {
    let slot = |j: Spin| {
        let n = j.dim();
        let mut u = CMatrix::zeros(n, n);
        for (col, m) in j.projections().enumerate() {
            let sign = if ((j.value() - m).round() as i64) % 2 == 0 { 1.0 } else { -1.0 };
            u[(n - 1 - col, col)] = c(sign);
        }
        u
    };
    slot(Spin::from_twice(2 * ORBITAL_L))
        .kronecker(&slot(Spin::HALF))
        .kronecker(&slot(space.nuclear))
}
