#![allow(dead_code)]

use tmspin::angular::CMatrix;
use tmspin::units::{ev_to_hz, mev_to_hz, G_ELECTRON};
use tmspin::{ModelParams, Spin};

/// Reference point: k = 0.3, eta = -0.4, lambda = 15 meV, delta = 1 eV.
pub fn fitted(nuclear: f64, a_hf: f64) -> ModelParams {
    ModelParams {
        delta: ev_to_hz(1.0),
        eta: -0.4,
        delta_a1: mev_to_hz(10.0),
        k: 0.3,
        lambda_soc: mev_to_hz(15.0),
        a_hf,
        g_e: G_ELECTRON,
        g_n: 1.4711,
        nuclear_spin: Spin::new(nuclear).unwrap(),
        include_hf: true,
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a: f64, z| a.max(z.norm()))
}

pub fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}
