//! Pump-strength calibration and the Raman vs. six-wave rate comparison.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;

pub const CROSSOVER_LO: f64 = 1e-3;
pub const CROSSOVER_HI: f64 = 1e5;
const SCAN_POINTS: usize = 4000;
const BISECT_REL_TOL: f64 = 1e-10;

/// Transmon Stark shift `2 |xi|^2 chi_bb` (MHz) from a single pump.
pub fn transmon_stark_shift(params: &SystemParams, xi: f64) -> f64 {
    2.0 * xi * xi * params.chi_bb
}

/// Resonator Stark shift `|xi|^2 chi_ab` (MHz). Cross-check only.
pub fn resonator_stark_shift(params: &SystemParams, xi: f64) -> f64 {
    xi * xi * params.chi_ab
}

/// Pump strength from the measured transmon Stark shift (MHz) of a single
/// pump. Returns the positive root.
pub fn xi_from_stark(params: &SystemParams, shift: f64) -> Result<f64> {
    if !(shift >= 0.0) || !shift.is_finite() {
        return Err(Error::param("shift", "Stark shift must be nonnegative"));
    }
    Ok((shift / (2.0 * params.chi_bb)).sqrt())
}

/// Six-wave-mixing rate `(phi_a^2 / 24) chi_ab xi0` (MHz).
pub fn six_wave_rate(params: &SystemParams, xi0: f64) -> f64 {
    params.phi_a_sq / 24.0 * params.chi_ab * xi0
}

/// Raman-assisted rate with `g1 = g2 = chi_ab xi / 2` and
/// `Delta = 5 chi_ab xi` (MHz).
pub fn raman_rate(params: &SystemParams, xi: f64) -> Result<f64> {
    let x = 5.0 * params.chi_ab * xi;
    let den = params.raman_offset() + x;
    if den == 0.0 {
        return Err(Error::ResonanceCollision(format!(
            "chi_bb - 4 chi_ab + 5 chi_ab xi = 0 at xi = {xi}"
        )));
    }
    Ok(params.chi_ab * xi / 20.0 * (1.0 - x / den))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateComparison {
    pub xi: f64,
    pub g_six_wave: f64,
    pub g_raman: f64,
    pub ratio: f64,
}

pub fn compare_rates(params: &SystemParams, xi: f64) -> Result<RateComparison> {
    let g_six_wave = six_wave_rate(params, xi);
    let g_raman = raman_rate(params, xi)?;
    Ok(RateComparison {
        xi,
        g_six_wave,
        g_raman,
        ratio: g_raman / g_six_wave,
    })
}

/// Smallest `xi` in `[1e-3, 1e5]` where the six-wave rate reaches the Raman
/// rate. Points where the Raman expression is negative or singular are
/// skipped. A log-spaced scan brackets the first sign change, then
/// bisection refines it.
pub fn crossover_xi(params: &SystemParams) -> Result<f64> {
    let gap = |xi: f64| -> Option<f64> {
        let r = raman_rate(params, xi).ok()?;
        (r >= 0.0).then(|| six_wave_rate(params, xi) - r)
    };
    let ratio = (CROSSOVER_HI / CROSSOVER_LO).powf(1.0 / SCAN_POINTS as f64);
    let mut prev: Option<(f64, f64)> = None;
    let mut xi = CROSSOVER_LO;
    for _ in 0..=SCAN_POINTS {
        match gap(xi) {
            Some(g) if g >= 0.0 => {
                let Some((mut lo, _)) = prev else {
                    return Ok(xi);
                };
                let mut hi = xi;
                while (hi - lo) > BISECT_REL_TOL * hi {
                    let mid = 0.5 * (lo + hi);
                    match gap(mid) {
                        Some(g) if g < 0.0 => lo = mid,
                        _ => hi = mid,
                    }
                }
                return Ok(hi);
            }
            Some(g) => prev = Some((xi, g)),
            None => prev = None,
        }
        xi *= ratio;
    }
    Err(Error::NoCrossover {
        lo: CROSSOVER_LO,
        hi: CROSSOVER_HI,
    })
}
