//! Dense complex-Hermitian eigensolver (cyclic Jacobi with complex
//! rotations), degeneracy clustering and double-group labelling of
//! Kramers doublets.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::angular::{c3_rotation, time_reversal_unitary, CMatrix, OperatorMatrix, ProductSpace, C64};
use crate::error::{Error, Result};

/// Default degeneracy tolerance for zero-field spectra, Hz.
pub const SPECTRUM_TOL_HZ: f64 = 1e3;
/// Default tolerance when grouping hyperfine-resolved levels by electronic
/// doublet, Hz.
pub const LABEL_TOL_HZ: f64 = 1e6;

const MAX_SWEEPS: usize = 60;
const HERMITIAN_TOL: f64 = 1e-12;

/// Irreducible representation of a Kramers doublet under the double group C̄3v.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Irrep {
    #[serde(rename = "Gamma4")]
    Gamma4,
    #[serde(rename = "Gamma56")]
    Gamma56,
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Irrep::Gamma4 => f.write_str("Gamma4"),
            Irrep::Gamma56 => f.write_str("Gamma56"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: CMatrix,
    /// Contiguous index ranges of (near-)degenerate levels.
    pub clusters: Vec<Range<usize>>,
    pub labels: Vec<Option<Irrep>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> CMatrix {
        self.vectors.columns(k, 1).into_owned()
    }

    /// Columns of the given index range.
    pub fn subspace(&self, range: Range<usize>) -> CMatrix {
        self.vectors.columns(range.start, range.len()).into_owned()
    }

    pub fn cluster_of(&self, level: usize) -> Option<usize> {
        self.clusters.iter().position(|r| r.contains(&level))
    }

    /// `max |V†V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let g = self.vectors.adjoint() * &self.vectors - CMatrix::identity(n, n);
        g.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max_k ||H v_k - λ_k v_k||`.
    pub fn max_residual(&self, h: &CMatrix) -> f64 {
        (0..self.dim())
            .map(|k| {
                let v = self.vector(k);
                (h * &v - v.map(|z| z * self.values[k])).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Matrix of `op` in the eigenbasis, `V† op V`.
    pub fn in_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * op * &self.vectors
    }

    /// Group contiguous eigenvalues whose neighbours lie within `tol_hz`.
    pub fn with_clusters(mut self, tol_hz: f64) -> Self {
        self.clusters = cluster_ranges(&self.values, tol_hz);
        self.labels = vec![None; self.clusters.len()];
        self
    }

    /// Mean eigenvalue of a cluster.
    pub fn cluster_centroid(&self, cluster: usize) -> f64 {
        let r = &self.clusters[cluster];
        self.values[r.clone()].iter().sum::<f64>() / r.len() as f64
    }

    /// Re-diagonalise `op` inside every multi-level cluster, fixing the basis
    /// of degenerate subspaces deterministically (ascending eigenvalue of
    /// `op`).
    pub fn refine_clusters(&mut self, op: &CMatrix) -> Result<()> {
        for r in self.clusters.clone() {
            if r.len() < 2 {
                continue;
            }
            let sub = self.subspace(r.clone());
            let block = sub.adjoint() * op * &sub;
            let inner = eig_matrix(&hermitize(&block))?;
            let rotated = &sub * &inner.vectors;
            for (k, col) in r.clone().enumerate() {
                let mut v = rotated.column(k).into_owned();
                fix_phase(v.as_mut_slice());
                self.vectors.set_column(col, &v);
            }
        }
        Ok(())
    }
}

/// Contiguous degeneracy groups of an ascending sequence.
pub fn cluster_ranges(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            if k > start {
                out.push(start..k);
            }
            start = k;
        }
    }
    out
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Diagonalise a Hermitian operator.
pub fn eig_hermitian(h: &OperatorMatrix) -> Result<EigenSystem> {
    eig_matrix(h.entries())
}

/// Diagonalise a Hermitian matrix. Eigenvalues ascending, each eigenvector's
/// largest component real and positive; clusters start as singletons.
pub fn eig_matrix(h: &CMatrix) -> Result<EigenSystem> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::NotSquare { rows: n, cols: h.ncols() });
    }
    let scale = h.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    if scale > 0.0 {
        let defect = (h - h.adjoint()).iter().fold(0.0, |m: f64, z| m.max(z.norm())) / scale;
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
    }

    // Row-major working copy.
    let mut a: Vec<C64> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            (h[(i, j)] + h[(j, i)].conj()) * 0.5
        })
        .collect();
    let mut v: Vec<C64> = (0..n * n)
        .map(|idx| if idx / n == idx % n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
        .collect();
    jacobi(&mut a, &mut v, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&k| a[k * n + k].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut column: Vec<C64> = (0..n).map(|row| v[row * n + k]).collect();
        fix_phase(&mut column);
        for (row, z) in column.into_iter().enumerate() {
            vectors[(row, col)] = z;
        }
    }
    Ok(EigenSystem {
        clusters: (0..n).map(|k| k..k + 1).collect(),
        labels: vec![None; n],
        values,
        vectors,
    })
}

/// Rotate a vector's global phase so its largest component (first one
/// within a relative 1e-9 of the maximum) is real and positive.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

fn jacobi(a: &mut [C64], v: &mut [C64], n: usize) -> Result<()> {
    for sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                if sweep > 3 && app.abs() + 100.0 * r == app.abs() && aqq.abs() + 100.0 * r == aqq.abs() {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let theta = (aqq - app) / (2.0 * r);
                if !theta.is_finite() {
                    a[p * n + q] = C64::new(0.0, 0.0);
                    a[q * n + p] = C64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                let e = apq / r;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let ec = e.conj();
                // Columns: A <- A J, with J[:,p] = c e_p - s e^{-iφ} e_q,
                // J[:,q] = s e_p + c e^{-iφ} e_q.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * cs - akq * ec * sn;
                    a[k * n + q] = akp * sn + akq * ec * cs;
                }
                // Rows: A <- J† A.
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * cs - aqk * e * sn;
                    a[q * n + k] = apk * sn + aqk * e * cs;
                }
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                a[p * n + p] = C64::new(app - t * r, 0.0);
                a[q * n + q] = C64::new(aqq + t * r, 0.0);
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * cs - vkq * ec * sn;
                    v[k * n + q] = vkp * sn + vkq * ec * cs;
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    let residual = (0..n)
        .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
        .map(|(p, q)| a[p * n + q].norm_sqr())
        .sum::<f64>()
        .sqrt();
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS, residual })
}

/// Eigenvalues of the C̄3 rotation restricted to a cluster, as phases in
/// units of π.
pub fn c3_phases(es: &EigenSystem, cluster: Range<usize>, space: ProductSpace) -> Result<Vec<f64>> {
    let u = c3_rotation(false, space);
    let sub = es.subspace(cluster);
    let m = sub.adjoint() * u.entries() * &sub;
    // M is unitary and normal: its Hermitian and anti-Hermitian parts commute
    // and share eigenvectors.
    let herm = hermitize(&m);
    let anti = (&m - m.adjoint()).map(|z| z * C64::new(0.0, -0.5));
    let es_h = eig_matrix(&herm)?;
    let anti_diag = es_h.in_eigenbasis(&anti);
    let mut phases: Vec<f64> = (0..m.nrows())
        .map(|k| anti_diag[(k, k)].re.atan2(es_h.values[k]) / PI)
        .collect();
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

/// Classify an electronic doublet (or a doublet ⊗ spectator nucleus) as Γ4
/// (C̄3 phases e^{∓iπ/3}) or Γ5,6 (phase -1), to 1e-6.
pub fn classify_doublet(es: &EigenSystem, cluster: Range<usize>, space: ProductSpace) -> Result<Irrep> {
    let size = cluster.len();
    if size == 0 || !size.is_multiple_of(2) || size != 2 * space.nuclear_dim() {
        return Err(Error::ClusterSize {
            expected: format!("2 x {}", space.nuclear_dim()),
            found: size,
        });
    }
    let phases = c3_phases(es, cluster, space)?;
    let tol = 1e-6;
    let half = size / 2;
    let gamma4 = phases[..half].iter().all(|p| (p + 1.0 / 3.0).abs() < tol)
        && phases[half..].iter().all(|p| (p - 1.0 / 3.0).abs() < tol);
    let gamma56 = phases.iter().all(|p| (p.abs() - 1.0).abs() < tol);
    if gamma4 {
        Ok(Irrep::Gamma4)
    } else if gamma56 {
        Ok(Irrep::Gamma56)
    } else {
        Err(Error::UnclassifiedDoublet { phases })
    }
}

/// Label every cluster that classifies cleanly.
pub fn label_clusters(es: &mut EigenSystem, space: ProductSpace) {
    let labels = es
        .clusters
        .iter()
        .map(|r| classify_doublet(es, r.clone(), space).ok())
        .collect();
    es.labels = labels;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KramersCheck {
    pub is_partner: bool,
    /// Norm of the component of Θv outside the cluster span, maximised over
    /// cluster members.
    pub residual: f64,
}

/// Check that the time-reversed image of every cluster member lies in the
/// cluster span.
pub fn kramers_partner_check(es: &EigenSystem, cluster: Range<usize>, space: ProductSpace) -> KramersCheck {
    let u = time_reversal_unitary(space);
    let sub = es.subspace(cluster.clone());
    let proj = &sub * sub.adjoint();
    let residual = cluster
        .map(|k| {
            let theta_v = &u * es.vector(k).map(|z| z.conj());
            (&theta_v - &proj * &theta_v).norm()
        })
        .fold(0.0, f64::max);
    KramersCheck { is_partner: residual <= 1e-8, residual }
}
