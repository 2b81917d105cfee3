//! Device Hamiltonians and closed-form rates for the `|f0> <-> |g4>` process.
//!
//! Every frequency here is an ordinary frequency: MHz for shifts, Kerrs,
//! couplings and detunings, GHz for bare mode and pump frequencies. Nothing
//! is multiplied by 2 pi until the integrator runs.
//!
//! Kerr constants are stored positive and enter the Hamiltonian with explicit
//! minus signs:
//!
//! ```text
//! H0 = w_a a^dag a + w_b b^dag b - chi_ab a^dag a b^dag b
//!      - (chi_aa/2) a^dag^2 a^2 - (chi_bb/2) b^dag^2 b^2
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{c, ModeSpace, QOperator, C64, RESONATOR, TRANSMON};
use crate::rwa::{RwaTermSet, Tone};

/// Minimum resonator truncation accepted by the driven-Hamiltonian builder.
pub const MIN_RESONATOR_DIM: usize = 8;
/// Transmon levels g, e, f.
pub const MIN_TRANSMON_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// GHz
    pub omega_a: f64,
    /// GHz
    pub omega_b: f64,
    /// MHz
    pub chi_aa: f64,
    /// MHz
    pub chi_bb: f64,
    /// MHz
    pub chi_ab: f64,
    pub phi_a_sq: f64,
    pub phi_b_sq: f64,
    /// us
    #[serde(rename = "T1_a")]
    pub t1_a: f64,
    #[serde(rename = "T2_a")]
    pub t2_a: f64,
    #[serde(rename = "T1_b")]
    pub t1_b: f64,
    #[serde(rename = "T2_b")]
    pub t2_b: f64,
    /// Tomography transmon dispersive shift (MHz). Carried for reference;
    /// the tomography transmon is not simulated.
    pub chi_tomo: f64,
    /// Selective pulse width (us). Reference only.
    pub sigma_sel: f64,
}

impl Default for SystemParams {
    /// Measured device record.
    fn default() -> Self {
        Self {
            omega_a: 8.03,
            omega_b: 5.78,
            chi_aa: 0.122,
            chi_bb: 122.6,
            chi_ab: 7.4,
            phi_a_sq: 0.002,
            phi_b_sq: 0.1,
            t1_a: 72.0,
            t2_a: 56.0,
            t1_b: 50.0,
            t2_b: 7.6,
            chi_tomo: 1.1,
            sigma_sel: 0.48,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("chi_aa", self.chi_aa),
            ("chi_bb", self.chi_bb),
            ("chi_ab", self.chi_ab),
            ("phi_a_sq", self.phi_a_sq),
            ("phi_b_sq", self.phi_b_sq),
            ("T1_a", self.t1_a),
            ("T2_a", self.t2_a),
            ("T1_b", self.t1_b),
            ("T2_b", self.t2_b),
            ("chi_tomo", self.chi_tomo),
            ("sigma_sel", self.sigma_sel),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        for (name, v) in [
            ("chi_aa", self.chi_aa),
            ("chi_bb", self.chi_bb),
            ("chi_ab", self.chi_ab),
        ] {
            if v <= 0.0 {
                return Err(Error::param(name, "Kerr constants are stored positive"));
            }
        }
        for (name, v) in [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("T1_a", self.t1_a),
            ("T2_a", self.t2_a),
            ("T1_b", self.t1_b),
            ("T2_b", self.t2_b),
        ] {
            if v <= 0.0 {
                return Err(Error::param(name, "must be positive"));
            }
        }
        for (name, v) in [("phi_a_sq", self.phi_a_sq), ("phi_b_sq", self.phi_b_sq)] {
            if v < 0.0 {
                return Err(Error::param(name, "must be nonnegative"));
            }
        }
        if self.t2_a > 2.0 * self.t1_a {
            return Err(Error::param("T2_a", "must not exceed 2*T1_a"));
        }
        if self.t2_b > 2.0 * self.t1_b {
            return Err(Error::param("T2_b", "must not exceed 2*T1_b"));
        }
        Ok(())
    }

    /// `chi_bb - 4 chi_ab`, the spacing that sets the second virtual detuning.
    pub fn raman_offset(&self) -> f64 {
        self.chi_bb - 4.0 * self.chi_ab
    }

    /// Second virtual detuning `D = chi_bb - 4 chi_ab + Delta`.
    pub fn far_detuning(&self, delta_big: f64) -> f64 {
        self.raman_offset() + delta_big
    }

    /// Constant pump-frequency difference `w_p1 - w_p2` (MHz).
    pub fn pump_difference(&self, delta_big: f64) -> f64 {
        self.chi_bb - 4.0 * self.chi_ab + 2.0 * delta_big
    }

    /// Single-tone resonance of `|f0> <-> |e2>` relative to `2 w_a - w_b`
    /// (MHz), in the pure-Kerr frame.
    pub fn nu_fe(&self) -> f64 {
        self.chi_bb - 2.0 * self.chi_ab - self.chi_aa
    }
}

/// Stark-shifted mode frequencies (GHz).
pub fn stark_shifted_freqs(params: &SystemParams, xi1: C64, xi2: C64) -> (f64, f64) {
    let s = xi1.norm_sqr() + xi2.norm_sqr();
    (
        params.omega_a - s * params.chi_ab * 1e-3,
        params.omega_b - 2.0 * s * params.chi_bb * 1e-3,
    )
}

/// Pump frequencies (GHz) for detuning `delta_big` and common shift `delta`,
/// both in MHz.
pub fn pump_frequencies(
    params: &SystemParams,
    xi1: C64,
    xi2: C64,
    delta_big: f64,
    delta: f64,
) -> (f64, f64) {
    let (wa, wb) = stark_shifted_freqs(params, xi1, xi2);
    let base = 2.0 * wa - wb;
    let p1 = params.chi_bb - 2.0 * params.chi_ab + delta_big + delta;
    let p2 = 2.0 * params.chi_ab - delta_big + delta;
    (base + p1 * 1e-3, base + p2 * 1e-3)
}

/// Four-wave-mixing rate `g = -chi_ab xi / 2` (MHz).
pub fn pump_rate(params: &SystemParams, xi: C64) -> C64 {
    xi * (-0.5 * params.chi_ab)
}

/// Inverse of [`pump_rate`].
pub fn xi_for_rate(params: &SystemParams, g: C64) -> C64 {
    g * (-2.0 / params.chi_ab)
}

fn check_denominators(params: &SystemParams, delta_big: f64) -> Result<f64> {
    if delta_big == 0.0 || !delta_big.is_finite() {
        return Err(Error::ResonanceCollision(
            "Delta = 0 puts the intermediate level on resonance".into(),
        ));
    }
    let d = params.far_detuning(delta_big);
    if d == 0.0 {
        return Err(Error::ResonanceCollision(format!(
            "chi_bb - 4 chi_ab + Delta = 0 at Delta = {delta_big}"
        )));
    }
    Ok(d)
}

/// Effective `|f0> <-> |g4>` coupling (MHz).
pub fn g4ph(params: &SystemParams, g1: f64, g2: f64, delta_big: f64) -> Result<f64> {
    let d = check_denominators(params, delta_big)?;
    Ok(48f64.sqrt() * g1 * g2 * (1.0 / delta_big - 1.0 / d))
}

/// Common pump shift that puts `|f0>` and `|g4>` on resonance (MHz).
pub fn delta_correction(params: &SystemParams, g1: f64, g2: f64, delta_big: f64) -> Result<f64> {
    let d = check_denominators(params, delta_big)?;
    let (s1, s2) = (g1 * g1, g2 * g2);
    Ok(3.0 * params.chi_aa + (2.0 * s1 - 6.0 * s2) / delta_big + (6.0 * s1 - 2.0 * s2) / d)
}

/// Basis index of `|g4>` in the three-level Raman space.
pub const IDX_G4: usize = 0;
pub const IDX_E2: usize = 1;
pub const IDX_F0: usize = 2;

/// The three-level space `(|g4>, |e2>, |f0>)`.
pub fn raman_space() -> ModeSpace {
    ModeSpace::single("raman", 3).expect("dim 3 is valid")
}

/// Second-order effective Hamiltonian on `(|g4>, |e2>, |f0>)` (MHz).
pub fn effective_block(
    params: &SystemParams,
    g1: C64,
    g2: C64,
    delta_big: f64,
    delta: f64,
) -> Result<QOperator> {
    let d = check_denominators(params, delta_big)?;
    let (s1, s2) = (g1.norm_sqr(), g2.norm_sqr());
    let chi = params.chi_aa;
    let space = raman_space();
    let mut h = QOperator::zeros(&space).into_matrix();
    h[(IDX_G4, IDX_G4)] = c(-6.0 * chi + 12.0 * s2 / delta_big - 12.0 * s1 / d);
    h[(IDX_E2, IDX_E2)] =
        c(-(chi + delta) - (4.0 * s1 + 12.0 * s2) / delta_big + (12.0 * s1 + 4.0 * s2) / d);
    h[(IDX_F0, IDX_F0)] = c(-2.0 * delta + 4.0 * s1 / delta_big - 4.0 * s2 / d);
    let coupling = g1 * g2 * (48f64.sqrt() * (1.0 / delta_big - 1.0 / d));
    h[(IDX_F0, IDX_G4)] = coupling;
    h[(IDX_G4, IDX_F0)] = coupling.conj();
    QOperator::new(space, h)
}

/// Interaction-picture Hamiltonian on `(|g4>, |e2>, |f0>)`.
#[allow(non_snake_case)]
pub fn build_H_I(
    params: &SystemParams,
    g1: C64,
    g2: C64,
    delta_big: f64,
    delta: f64,
) -> Result<RwaTermSet> {
    let d = check_denominators(params, delta_big)?;
    let space = raman_space();
    let chi = params.chi_aa;
    let stat = QOperator::diagonal(&space, |occ| match occ[0] {
        IDX_G4 => c(-6.0 * chi),
        IDX_E2 => c(-(chi + delta)),
        _ => c(-2.0 * delta),
    });
    let fe = QOperator::outer(&space, &[IDX_F0], &[IDX_E2])?;
    let eg = QOperator::outer(&space, &[IDX_E2], &[IDX_G4])?;
    let s4 = 2.0;
    let s12 = 12f64.sqrt();
    RwaTermSet::new(
        stat,
        vec![
            Tone::new(g1 * s4, delta_big, fe.clone()),
            Tone::new(g2 * s4, -d, fe),
            Tone::new(g1 * s12, d, eg.clone()),
            Tone::new(g2 * s12, -delta_big, eg),
        ],
    )
}

/// Pump settings with derived rates and frequencies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PumpConfig {
    pub xi1: C64,
    pub xi2: C64,
    /// Detuning from the intermediate level (MHz).
    #[serde(rename = "Delta")]
    pub delta_big: f64,
    /// Common pump shift (MHz).
    pub delta: f64,
    pub g1: C64,
    pub g2: C64,
    /// GHz
    pub omega_p1: f64,
    /// GHz
    pub omega_p2: f64,
}

impl PumpConfig {
    /// Derives rates and pump frequencies. With `delta = None` the common
    /// shift comes from [`delta_correction`].
    pub fn new(
        params: &SystemParams,
        xi1: C64,
        xi2: C64,
        delta_big: f64,
        delta: Option<f64>,
    ) -> Result<Self> {
        check_denominators(params, delta_big)?;
        let g1 = pump_rate(params, xi1);
        let g2 = pump_rate(params, xi2);
        let delta = match delta {
            Some(d) => d,
            None => delta_correction(params, g1.norm(), g2.norm(), delta_big)?,
        };
        let (omega_p1, omega_p2) = pump_frequencies(params, xi1, xi2, delta_big, delta);
        Ok(Self {
            xi1,
            xi2,
            delta_big,
            delta,
            g1,
            g2,
            omega_p1,
            omega_p2,
        })
    }

    pub fn from_rates(
        params: &SystemParams,
        g1: C64,
        g2: C64,
        delta_big: f64,
        delta: Option<f64>,
    ) -> Result<Self> {
        Self::new(
            params,
            xi_for_rate(params, g1),
            xi_for_rate(params, g2),
            delta_big,
            delta,
        )
    }

    /// `|g4ph|` for these pumps (MHz).
    pub fn g4ph(&self, params: &SystemParams) -> Result<f64> {
        Ok(g4ph(params, self.g1.norm(), self.g2.norm(), self.delta_big)?.abs())
    }

    pub fn effective_block(&self, params: &SystemParams) -> Result<QOperator> {
        effective_block(params, self.g1, self.g2, self.delta_big, self.delta)
    }

    #[allow(non_snake_case)]
    pub fn build_H_I(&self, params: &SystemParams) -> Result<RwaTermSet> {
        build_H_I(params, self.g1, self.g2, self.delta_big, self.delta)
    }
}

/// Rotating frame used for a [`DrivenHamiltonian`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Frame {
    /// Resonator frame frequency (GHz).
    pub resonator_ghz: f64,
    /// Transmon frame frequency (GHz).
    pub transmon_ghz: f64,
    pub description: String,
}

/// Time-dependent device Hamiltonian in a mode-rotating frame. Tones act on
/// `a^2 b^dag` (plus conjugates); amplitudes and frequencies in MHz.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    pub tones: RwaTermSet,
    pub frame: Frame,
}

impl DrivenHamiltonian {
    pub fn static_part(&self) -> &QOperator {
        self.tones.static_part()
    }

    pub fn space(&self) -> &ModeSpace {
        self.tones.space()
    }

    /// Builds from an arbitrary term set (MHz) with a free-form frame note.
    pub fn new(tones: RwaTermSet, frame: Frame) -> Self {
        Self { tones, frame }
    }

    /// Undriven Hamiltonian `h` (MHz).
    pub fn time_independent(h: QOperator) -> Result<Self> {
        Ok(Self {
            tones: RwaTermSet::new(h, vec![])?,
            frame: Frame {
                resonator_ghz: 0.0,
                transmon_ghz: 0.0,
                description: "static".into(),
            },
        })
    }

    /// `H(t)` in MHz at `t` in us; tone phases are `e^{i 2 pi nu t}`.
    pub fn at(&self, t: f64) -> QOperator {
        self.tones.at(std::f64::consts::TAU * t)
    }

    /// Largest |tone frequency| (MHz), zero when undriven.
    pub fn max_frequency(&self) -> f64 {
        self.tones
            .terms()
            .iter()
            .map(|t| t.frequency.abs())
            .fold(0.0, f64::max)
    }
}

fn check_space(space: &ModeSpace) -> Result<(usize, usize)> {
    if space.labels() != [RESONATOR, TRANSMON] {
        return Err(Error::param(
            "space",
            format!("expected modes ({RESONATOR}, {TRANSMON}), got {space}"),
        ));
    }
    let (na, nb) = (space.dims()[0], space.dims()[1]);
    if na < MIN_RESONATOR_DIM {
        return Err(Error::InvalidDimension {
            dim: na,
            min: MIN_RESONATOR_DIM,
        });
    }
    if nb < MIN_TRANSMON_DIM {
        return Err(Error::InvalidDimension {
            dim: nb,
            min: MIN_TRANSMON_DIM,
        });
    }
    Ok((na, nb))
}

/// Kerr Hamiltonian in a mode-rotating frame, plus `-shift_b * b^dag b`.
pub fn kerr_static(params: &SystemParams, space: &ModeSpace, shift_b: f64) -> QOperator {
    QOperator::diagonal(space, |occ| {
        let (na, nb) = (occ[0] as f64, occ[1] as f64);
        c(-params.chi_ab * na * nb
            - 0.5 * params.chi_aa * na * (na - 1.0)
            - 0.5 * params.chi_bb * nb * (nb - 1.0)
            - shift_b * nb)
    })
}

/// `a^2 b^dag` on the joint space.
pub fn conversion_operator(space: &ModeSpace) -> Result<QOperator> {
    let mut m = QOperator::zeros(space).into_matrix();
    let (na, nb) = (space.dims()[0], space.dims()[1]);
    for ia in 2..na {
        for ib in 0..nb - 1 {
            let from = space.index(&[ia, ib])?;
            let to = space.index(&[ia - 2, ib + 1])?;
            let amp = ((ia * (ia - 1)) as f64).sqrt() * ((ib + 1) as f64).sqrt();
            m[(to, from)] = c(amp);
        }
    }
    QOperator::new(space.clone(), m)
}

/// Pumped Hamiltonian with arbitrary tones `(g, nu)` on `a^2 b^dag`, in the
/// frame rotating at the Stark-shifted mode frequencies with the transmon
/// frame offset by `shift_b` (MHz). A tone at `nu` corresponds to a lab pump
/// at `2 w_a - w_b + nu` in that frame.
pub fn build_pumped_hamiltonian(
    params: &SystemParams,
    space: &ModeSpace,
    tones: &[(C64, f64)],
    shift_b: f64,
    frame: Frame,
) -> Result<DrivenHamiltonian> {
    check_space(space)?;
    let stat = kerr_static(params, space, shift_b);
    let conv = conversion_operator(space)?;
    let list = tones
        .iter()
        .map(|&(g, nu)| Tone::new(g, nu, conv.clone()))
        .collect();
    Ok(DrivenHamiltonian {
        tones: RwaTermSet::new(stat, list)?,
        frame,
    })
}

/// Driven device Hamiltonian for the given pumps.
///
/// Frame: resonator at `w~_a`, transmon at `w~_b + delta`. The static part is
/// the Kerr Hamiltonian minus `delta b^dag b`, and the two pumps appear as
/// `g_k e^{i nu_k t} a^2 b^dag + h.c.` with `nu_1 = chi_bb - 2 chi_ab + Delta`
/// and `nu_2 = 2 chi_ab - Delta`. Restricted to `(|g4>, |e2>, |f0>)` and moved
/// into the interaction picture of its diagonal, this is exactly
/// [`build_H_I`].
pub fn build_driven_hamiltonian(
    params: &SystemParams,
    pumps: &PumpConfig,
    space: &ModeSpace,
) -> Result<DrivenHamiltonian> {
    check_denominators(params, pumps.delta_big)?;
    let (wa, wb) = stark_shifted_freqs(params, pumps.xi1, pumps.xi2);
    let nu1 = params.chi_bb - 2.0 * params.chi_ab + pumps.delta_big;
    let nu2 = 2.0 * params.chi_ab - pumps.delta_big;
    if nu1 == nu2 {
        return Err(Error::ResonanceCollision(
            "both pumps land on the same tone frequency".into(),
        ));
    }
    let frame = Frame {
        resonator_ghz: wa,
        transmon_ghz: wb + pumps.delta * 1e-3,
        description: format!(
            "resonator at Stark-shifted w_a, transmon at Stark-shifted w_b + delta \
             (delta = {} MHz); tones at {nu1} and {nu2} MHz on a^2 b^dag",
            pumps.delta
        ),
    };
    build_pumped_hamiltonian(
        params,
        space,
        &[(pumps.g1, nu1), (pumps.g2, nu2)],
        pumps.delta,
        frame,
    )
}
