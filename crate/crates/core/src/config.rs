//! Experiment configuration: a JSON document with `system`, `pumps` and
//! `run` sections. Unknown keys are rejected everywhere.
//!
//! `system` may be omitted entirely, in which case the shipped device record
//! is used; when present, every field must be given. `run` fields are
//! individually optional. Pump strengths are seeded by exactly one of the
//! pairs `stark_shift_1/2` (MHz), `xi1/2` or `g1/2` (MHz).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::xi_from_stark;
use crate::dynamics::{DephasingConvention, IntegratorConfig, DEFAULT_STEPS_PER_PERIOD};
use crate::error::{Error, Result};
use crate::hilbert::{c, ModeSpace};
use crate::model::{PumpConfig, SystemParams, MIN_RESONATOR_DIM, MIN_TRANSMON_DIM};
use crate::tomography::{WignerGrid, WignerOptions};

pub const DEFAULT_CONFIG_JSON: &str = include_str!("../config/default.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSeeds {
    /// MHz
    #[serde(rename = "Delta")]
    pub delta_big: f64,
    /// Common pump shift (MHz); computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stark_shift_1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stark_shift_2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
}

impl Default for PumpSeeds {
    fn default() -> Self {
        Self {
            delta_big: 5.1,
            delta: None,
            stark_shift_1: Some(5.15),
            stark_shift_2: Some(4.26),
            xi1: None,
            xi2: None,
            g1: None,
            g2: None,
        }
    }
}

impl PumpSeeds {
    pub fn resolve(&self, params: &SystemParams) -> Result<PumpConfig> {
        let pairs = [
            ("stark_shift", self.stark_shift_1, self.stark_shift_2),
            ("xi", self.xi1, self.xi2),
            ("g", self.g1, self.g2),
        ];
        let mut chosen = None;
        for (kind, a, b) in pairs {
            match (a, b) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    if chosen.is_some() {
                        return Err(Error::Config(
                            "pumps: stark_shift, xi and g seeds are mutually exclusive".into(),
                        ));
                    }
                    chosen = Some((kind, a, b));
                }
                _ => {
                    return Err(Error::Config(format!(
                        "pumps: both {kind}1 and {kind}2 are required"
                    )))
                }
            }
        }
        let (kind, a, b) = chosen.ok_or_else(|| {
            Error::Config("pumps: give one of stark_shift_1/2, xi1/2 or g1/2".into())
        })?;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::param(kind, "pump seeds must be finite"));
        }
        if !self.delta_big.is_finite() {
            return Err(Error::param("Delta", "must be finite"));
        }
        if let Some(d) = self.delta {
            if !d.is_finite() {
                return Err(Error::param("delta", "must be finite"));
            }
        }
        match kind {
            "stark_shift" => {
                let x1 = xi_from_stark(params, a).map_err(|_| {
                    Error::param("stark_shift_1", "Stark shift must be nonnegative")
                })?;
                let x2 = xi_from_stark(params, b).map_err(|_| {
                    Error::param("stark_shift_2", "Stark shift must be nonnegative")
                })?;
                PumpConfig::new(params, c(x1), c(x2), self.delta_big, self.delta)
            }
            "xi" => PumpConfig::new(params, c(a), c(b), self.delta_big, self.delta),
            _ => PumpConfig::from_rates(params, c(a), c(b), self.delta_big, self.delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChevronGrid {
    /// Pump-1 detuning from the `|f0> <-> |e2>` line (MHz).
    pub detuning_min: f64,
    pub detuning_max: f64,
    pub detuning_steps: usize,
    /// us
    pub duration_max: f64,
    pub duration_steps: usize,
}

impl Default for ChevronGrid {
    fn default() -> Self {
        Self {
            detuning_min: -2.5,
            detuning_max: 7.5,
            detuning_steps: 21,
            duration_max: 3.0,
            duration_steps: 41,
        }
    }
}

impl ChevronGrid {
    pub fn detunings(&self) -> Vec<f64> {
        linspace(self.detuning_min, self.detuning_max, self.detuning_steps)
    }

    pub fn durations(&self) -> Vec<f64> {
        linspace(0.0, self.duration_max, self.duration_steps)
    }

    pub fn detuning_step(&self) -> f64 {
        if self.detuning_steps > 1 {
            (self.detuning_max - self.detuning_min) / (self.detuning_steps - 1) as f64
        } else {
            0.0
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerRunConfig {
    pub half_width: f64,
    pub steps: usize,
    /// Displacement working dimension; `null` pads automatically.
    pub working_dim: Option<usize>,
    /// Evolution time before tomography (us); `null` uses the first time
    /// `P0` drops to 1/2.
    pub evolution_time: Option<f64>,
}

impl Default for WignerRunConfig {
    fn default() -> Self {
        Self {
            half_width: 2.5,
            steps: 81,
            working_dim: None,
            evolution_time: None,
        }
    }
}

impl WignerRunConfig {
    pub fn grid(&self) -> WignerGrid {
        WignerGrid::square(self.half_width, self.steps)
    }

    pub fn options(&self) -> WignerOptions {
        WignerOptions {
            working_dim: self.working_dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesSweep {
    pub xi_min: f64,
    pub xi_max: f64,
    pub steps: usize,
}

impl Default for RatesSweep {
    fn default() -> Self {
        Self {
            xi_min: 0.01,
            xi_max: 1e4,
            steps: 61,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub resonator_dim: usize,
    pub transmon_dim: usize,
    pub wigner_resonator_dim: usize,
    pub steps_per_period: f64,
    pub dephasing: String,
    pub ramp: bool,
    /// us
    pub ramp_time: f64,
    /// us
    pub output_interval: f64,
    /// us
    pub timetrace_duration: f64,
    pub chevron: ChevronGrid,
    pub wigner: WignerRunConfig,
    pub rates: RatesSweep,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            resonator_dim: 12,
            transmon_dim: 3,
            wigner_resonator_dim: 20,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            dephasing: "standard".into(),
            ramp: true,
            ramp_time: 0.192,
            output_interval: 0.004,
            timetrace_duration: 3.0,
            chevron: ChevronGrid::default(),
            wigner: WignerRunConfig::default(),
            rates: RatesSweep::default(),
            out_dir: "results".into(),
        }
    }
}

impl RunConfig {
    pub fn dephasing_convention(&self) -> Result<DephasingConvention> {
        self.dephasing.parse()
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            steps_per_period: self.steps_per_period,
            max_step: None,
        }
    }

    pub fn space(&self) -> Result<ModeSpace> {
        ModeSpace::resonator_transmon(self.resonator_dim, self.transmon_dim)
    }

    pub fn wigner_space(&self) -> Result<ModeSpace> {
        ModeSpace::resonator_transmon(self.wigner_resonator_dim, self.transmon_dim)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be positive"))
            }
        };
        for (name, v, min) in [
            ("resonator_dim", self.resonator_dim, MIN_RESONATOR_DIM),
            (
                "wigner_resonator_dim",
                self.wigner_resonator_dim,
                MIN_RESONATOR_DIM,
            ),
            ("transmon_dim", self.transmon_dim, MIN_TRANSMON_DIM),
        ] {
            if v < min {
                return Err(Error::param(name, format!("must be at least {min}")));
            }
        }
        pos("steps_per_period", self.steps_per_period)?;
        pos("ramp_time", self.ramp_time)?;
        pos("output_interval", self.output_interval)?;
        pos("timetrace_duration", self.timetrace_duration)?;
        self.dephasing_convention()?;

        let ch = &self.chevron;
        pos("chevron.duration_max", ch.duration_max)?;
        if ch.detuning_steps == 0 {
            return Err(Error::param("chevron.detuning_steps", "must be positive"));
        }
        if ch.duration_steps < 2 {
            return Err(Error::param("chevron.duration_steps", "must be at least 2"));
        }
        if !ch.detuning_min.is_finite()
            || !ch.detuning_max.is_finite()
            || ch.detuning_max < ch.detuning_min
        {
            return Err(Error::param(
                "chevron.detuning_min",
                "detuning range must be finite and increasing",
            ));
        }

        let w = &self.wigner;
        pos("wigner.half_width", w.half_width)?;
        if w.steps == 0 {
            return Err(Error::param("wigner.steps", "must be positive"));
        }
        if let Some(t) = w.evolution_time {
            pos("wigner.evolution_time", t)?;
        }
        w.grid().validate()?;

        let r = &self.rates;
        pos("rates.xi_min", r.xi_min)?;
        if !(r.xi_max > r.xi_min) || !r.xi_max.is_finite() {
            return Err(Error::param("rates.xi_max", "must exceed xi_min"));
        }
        if r.steps < 2 {
            return Err(Error::param("rates.steps", "must be at least 2"));
        }
        if self.out_dir.is_empty() {
            return Err(Error::param("out_dir", "must not be empty"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub system: SystemParams,
    pub pumps: PumpSeeds,
    pub run: RunConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    system: Option<SystemParams>,
    pumps: PumpSeeds,
    #[serde(default)]
    run: RunConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.run.validate()?;
        self.pumps.resolve(&self.system)?;
        Ok(())
    }

    pub fn resolve_pumps(&self) -> Result<PumpConfig> {
        self.pumps.resolve(&self.system)
    }

    /// Canonical JSON of the fully resolved config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = serde_json::from_str(text)?;
    let cfg = ExperimentConfig {
        system: raw.system.unwrap_or_default(),
        pumps: raw.pumps,
        run: raw.run,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// The shipped default configuration.
pub fn default_config() -> ExperimentConfig {
    parse_config(DEFAULT_CONFIG_JSON).expect("shipped config is valid")
}
