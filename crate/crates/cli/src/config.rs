use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tmspin::fitting::{ExperimentalTargets, GridSpec, Span, Window};
use tmspin::spectra::{Axis, Drive, SweepSpec};
use tmspin::units::{ev_to_hz, mev_to_hz, G_ELECTRON};
use tmspin::{FieldConfig, ModelParams, Spin};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub model: ModelSection,
    #[serde(default)]
    pub field: FieldSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetsSection>,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub transitions: TransitionsSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub effective: EffectiveSection,
    #[serde(default)]
    pub wavefunction: WavefunctionSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "delta_eV")]
    pub delta_ev: f64,
    pub eta: f64,
    #[serde(rename = "delta_a1_meV")]
    pub delta_a1_mev: f64,
    pub k: f64,
    #[serde(rename = "lambda_meV")]
    pub lambda_mev: f64,
    #[serde(rename = "a_hf_MHz")]
    pub a_hf_mhz: f64,
    #[serde(default = "default_g_e")]
    pub g_e: f64,
    pub g_n: f64,
    pub nuclear_spin: f64,
    #[serde(default = "yes")]
    pub include_hf: bool,
}

fn default_g_e() -> f64 {
    G_ELECTRON
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(rename = "b_static_mT")]
    pub b_static_mt: [f64; 3],
    #[serde(rename = "b_drive_uT")]
    pub b_drive_ut: f64,
    /// Electric modulation of eta; the trigonal energy change is `delta_eta * delta`.
    pub delta_eta: f64,
}

impl Default for FieldSection {
    fn default() -> Self {
        Self { b_static_mt: [0.0; 3], b_drive_ut: 100.0, delta_eta: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(rename = "delta_gs_GHz")]
    pub delta_gs_ghz: f64,
    #[serde(rename = "delta_gs_tol_GHz")]
    pub delta_gs_tol_ghz: f64,
    pub g_par: f64,
    pub g_par_tol: f64,
    pub g_perp_max: f64,
    #[serde(rename = "b0_mT")]
    pub b0_mt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    #[serde(rename = "b_min_mT")]
    pub b_min_mt: f64,
    #[serde(rename = "b_max_mT")]
    pub b_max_mt: f64,
    pub n_points: usize,
    pub ground_only: bool,
    pub track: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { axis: Axis::Z, b_min_mt: 0.0, b_max_mt: 100.0, n_points: 101, ground_only: true, track: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionsSection {
    pub drive: Drive,
    #[serde(rename = "rabi_floor_Hz")]
    pub rabi_floor_hz: f64,
}

impl Default for TransitionsSection {
    fn default() -> Self {
        Self { drive: Drive::Bpar, rabi_floor_hz: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_n: usize,
    #[serde(rename = "lambda_min_meV")]
    pub lambda_min_mev: f64,
    #[serde(rename = "lambda_max_meV")]
    pub lambda_max_mev: f64,
    pub lambda_n: usize,
    /// Empty: use the model's `k` only.
    pub k_values: Vec<f64>,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            eta_min: -1.5,
            eta_max: 0.0,
            eta_n: 151,
            lambda_min_mev: 0.0,
            lambda_max_mev: 30.0,
            lambda_n: 61,
            k_values: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveSection {
    /// 1-based doublet index.
    pub doublet: usize,
    #[serde(rename = "b_max_mT")]
    pub b_max_mt: f64,
    pub n_points: usize,
}

impl Default for EffectiveSection {
    fn default() -> Self {
        Self { doublet: 1, b_max_mt: 100.0, n_points: 51 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefunctionSection {
    /// 1-based doublet index.
    pub doublet: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Optional explicit amplitudes `[re, im]` for m = -2..2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<[[f64; 2]; 5]>,
}

impl Default for WavefunctionSection {
    fn default() -> Self {
        Self { doublet: 1, n_theta: 91, n_phi: 180, coefficients: None }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.params()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let p = ModelParams {
            delta: ev_to_hz(m.delta_ev),
            eta: m.eta,
            delta_a1: mev_to_hz(m.delta_a1_mev),
            k: m.k,
            lambda_soc: mev_to_hz(m.lambda_mev),
            a_hf: m.a_hf_mhz * 1e6,
            g_e: m.g_e,
            g_n: m.g_n,
            nuclear_spin: Spin::new(m.nuclear_spin)?,
            include_hf: m.include_hf,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn field(&self) -> FieldConfig {
        let f = &self.field;
        FieldConfig {
            b_static: f.b_static_mt.map(|b| b * 1e-3),
            b_drive: [0.0, 0.0, f.b_drive_ut * 1e-6],
            delta_eta: f.delta_eta,
        }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        let s = &self.sweep;
        SweepSpec {
            axis: s.axis,
            b_range: (s.b_min_mt * 1e-3, s.b_max_mt * 1e-3),
            n_points: s.n_points,
            ground_only: s.ground_only,
            track: s.track,
        }
    }

    pub fn targets(&self) -> Result<ExperimentalTargets> {
        let Some(t) = &self.targets else { bail!("the fit command needs a `targets` section") };
        Ok(ExperimentalTargets {
            delta_gs: Window { value: t.delta_gs_ghz * 1e9, tol: t.delta_gs_tol_ghz * 1e9 },
            g_par: Window { value: t.g_par, tol: t.g_par_tol },
            g_perp_max: t.g_perp_max,
            b0: t.b0_mt * 1e-3,
        })
    }

    pub fn grid(&self) -> GridSpec {
        let f = &self.fit;
        GridSpec {
            eta: Span { min: f.eta_min, max: f.eta_max, n: f.eta_n },
            lambda: Span { min: mev_to_hz(f.lambda_min_mev), max: mev_to_hz(f.lambda_max_mev), n: f.lambda_n },
        }
    }
}
