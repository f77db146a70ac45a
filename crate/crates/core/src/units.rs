//! Physical constants (CODATA 2018) and energy-unit conversions.
//!
//! Every energy inside the crate is a frequency in Hz.

/// Electron volt expressed as a frequency, e/h in Hz per eV.
pub const HZ_PER_EV: f64 = 2.417_989_242e14;

/// Bohr magneton over Planck's constant, Hz per tesla.
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 1.399_624_493_61e10;

/// Nuclear magneton over Planck's constant, Hz per tesla.
pub const NUCLEAR_MAGNETON_HZ_PER_T: f64 = 7.622_593_229e6;

/// Free-electron g-factor (magnitude).
pub const G_ELECTRON: f64 = 2.002_319_304_36;

#[inline]
pub fn ev_to_hz(ev: f64) -> f64 {
    ev * HZ_PER_EV
}

#[inline]
pub fn mev_to_hz(mev: f64) -> f64 {
    mev * 1e-3 * HZ_PER_EV
}

#[inline]
pub fn hz_to_ev(hz: f64) -> f64 {
    hz / HZ_PER_EV
}

#[inline]
pub fn hz_to_mev(hz: f64) -> f64 {
    hz / HZ_PER_EV * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn electron_zeeman_scale() {
        // g_e * mu_B / h at 1 T, about 28.02 GHz.
        let f = G_ELECTRON * BOHR_MAGNETON_HZ_PER_T;
        assert!((f - 28.025e9).abs() < 0.01e9, "{f}");
    }

    #[test]
    fn round_trip() {
        assert!((hz_to_mev(mev_to_hz(15.0)) - 15.0).abs() < 1e-12);
        assert!((hz_to_ev(ev_to_hz(1.0)) - 1.0).abs() < 1e-15);
        // 1 meV is about 241.8 GHz.
        assert!((mev_to_hz(1.0) - 241.8e9).abs() < 0.1e9);
    }
}
