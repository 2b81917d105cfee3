//! Experiment runners: chevron spectroscopy, population time traces,
//! conditional Wigner tomography, calibration and rate tables.

use std::f64::consts::TAU;
use std::ops::ControlFlow;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::calibration::{
    compare_rates, crossover_xi, resonator_stark_shift, transmon_stark_shift,
};
use crate::config::ExperimentConfig;
use crate::dynamics::{
    device_collapse_ops, evolve_populations, evolve_trajectory, evolve_with, populations_of,
    step_size, uniform_grid, Envelope, LindbladSpec, TimeSeries,
};
use crate::error::{Error, Result};
use crate::hilbert::{ModeSpace, QState, C64};
use crate::model::{
    build_driven_hamiltonian, build_pumped_hamiltonian, stark_shifted_freqs, Frame, PumpConfig,
};
use crate::rwa::{effective_hamiltonian, leakage_ratios, rwa_warnings, LEAKAGE_WARN_THRESHOLD};
use crate::table::{Column, ResultTable};
use crate::tomography::{
    align_coherence, postselect, selective_disentangle, wigner, TransmonLevel, WignerMap,
};

fn envelope(cfg: &ExperimentConfig) -> Envelope {
    if cfg.run.ramp {
        Envelope::TanhRise {
            ramp_time: cfg.run.ramp_time,
        }
    } else {
        Envelope::Constant
    }
}

/// Lindblad problem for the resonant pumps on `space`.
pub fn device_spec(
    cfg: &ExperimentConfig,
    pumps: &PumpConfig,
    space: &ModeSpace,
) -> Result<LindbladSpec> {
    let h = build_driven_hamiltonian(&cfg.system, pumps, space)?;
    let hi = pumps.build_H_I(&cfg.system)?;
    for (k, r) in rwa_warnings(&hi)
        .into_iter()
        .filter(|(k, _)| *k < hi.num_listed())
    {
        log::warn!("interaction term {k}: |g/w|^2 = {r:.4} exceeds {LEAKAGE_WARN_THRESHOLD}");
    }
    let ops = device_collapse_ops(&cfg.system, space, cfg.run.dephasing_convention()?)?;
    LindbladSpec::new(h, ops)?.with_envelope(envelope(cfg))
}

fn initial_f0(space: &ModeSpace) -> Result<QState> {
    QState::fock(space, &[0, 2])
}

fn output_grid(duration: f64, interval: f64) -> Vec<f64> {
    let n = (duration / interval).round().max(1.0) as usize;
    uniform_grid(duration, n)
}

/// Populations `P0..P5, Pg, Pe, Pf` from `|f0>` with resonant pumps.
pub fn simulate_timetrace(cfg: &ExperimentConfig) -> Result<TimeSeries> {
    let pumps = cfg.resolve_pumps()?;
    let space = cfg.run.space()?;
    let spec = device_spec(cfg, &pumps, &space)?;
    let grid = output_grid(cfg.run.timetrace_duration, cfg.run.output_interval);
    evolve_populations(&spec, &initial_f0(&space)?, &grid, &cfg.run.integrator())
}

pub const TIMETRACE_CHANNELS: [&str; 8] = ["P0", "P1", "P2", "P3", "P4", "Pg", "Pe", "Pf"];

pub fn run_timetrace(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let start = Instant::now();
    let ts = simulate_timetrace(cfg)?;
    let mut columns = vec![Column::new("time", "us")];
    columns.extend(TIMETRACE_CHANNELS.iter().map(|n| Column::new(n, "1")));
    let mut table = ResultTable::new("timetrace", columns, &cfg.canonical_json())?;
    let chans: Vec<&[f64]> = TIMETRACE_CHANNELS
        .iter()
        .map(|n| ts.channel(n).expect("population channel"))
        .collect();
    for (i, &t) in ts.times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(chans.iter().map(|c| c[i]));
        table.push_row(row)?;
    }
    let pumps = cfg.resolve_pumps()?;
    table.note("g4ph_MHz", pumps.g4ph(&cfg.system)?);
    table.note("delta_MHz", pumps.delta);
    table.note(
        "first_half_transfer_us",
        first_crossing_below(&ts.times, ts.channel("P0").expect("P0"), 0.5),
    );
    table.metadata.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(table)
}

/// Pump-1 tone frequency (MHz, relative to `2 w_a - w_b`) for a chevron
/// detuning, and the matching pump-2 tone at the fixed difference.
pub fn chevron_tones(cfg: &ExperimentConfig, pumps: &PumpConfig, detuning: f64) -> (f64, f64) {
    let nu1 = cfg.system.nu_fe() + detuning;
    (nu1, nu1 - cfg.system.pump_difference(pumps.delta_big))
}

fn chevron_trace(
    cfg: &ExperimentConfig,
    pumps: &PumpConfig,
    space: &ModeSpace,
    detuning: f64,
) -> Result<Vec<f64>> {
    let (nu1, nu2) = chevron_tones(cfg, pumps, detuning);
    let (wa, wb) = stark_shifted_freqs(&cfg.system, pumps.xi1, pumps.xi2);
    let frame = Frame {
        resonator_ghz: wa,
        transmon_ghz: wb,
        description: format!(
            "Stark-shifted mode frame; pump 1 at 2w_a - w_b + {nu1} MHz, pump 2 at +{nu2} MHz"
        ),
    };
    let h = build_pumped_hamiltonian(
        &cfg.system,
        space,
        &[(pumps.g1, nu1), (pumps.g2, nu2)],
        0.0,
        frame,
    )?;
    let ops = device_collapse_ops(&cfg.system, space, cfg.run.dephasing_convention()?)?;
    let spec = LindbladSpec::new(h, ops)?.with_envelope(envelope(cfg))?;
    let durations = cfg.run.chevron.durations();
    let ts = evolve_populations(
        &spec,
        &initial_f0(space)?,
        &durations,
        &cfg.run.integrator(),
    )?;
    Ok(ts.channel("P0").expect("P0").to_vec())
}

/// `P0` over (pump-1 detuning from `|f0> <-> |e2>`, pump duration) with the
/// pump difference held fixed. Only the rising pump edge is simulated, so a
/// single trajectory per detuning serves every duration.
pub fn run_chevron(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let start = Instant::now();
    let pumps = cfg.resolve_pumps()?;
    let space = cfg.run.space()?;
    let detunings = cfg.run.chevron.detunings();
    let durations = cfg.run.chevron.durations();
    let traces: Vec<Vec<f64>> = detunings
        .par_iter()
        .map(|&x| {
            chevron_trace(cfg, &pumps, &space, x).map_err(|e| Error::AtGridPoint {
                context: format!("detuning {x} MHz"),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut table = ResultTable::new(
        "chevron",
        vec![
            Column::new("detuning", "MHz"),
            Column::new("duration", "us"),
            Column::new("P0", "1"),
        ],
        &cfg.canonical_json(),
    )?;
    for (x, trace) in detunings.iter().zip(&traces) {
        for (t, p) in durations.iter().zip(trace) {
            table.push_row(vec![*x, *t, *p])?;
        }
    }
    if let Ok(a) = analyze_chevron(&table) {
        table.note("left_center_MHz", a.left_center);
        table.note("right_center_MHz", a.right_center);
        table.note("left_rabi_MHz", a.left_rabi);
        table.note("right_rabi_MHz", a.right_rabi);
    }
    table.metadata.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChevronAnalysis {
    pub detunings: Vec<f64>,
    /// `min_t P0` per detuning.
    pub min_p0: Vec<f64>,
    pub left_center: f64,
    pub right_center: f64,
    /// Dominant `P0` oscillation frequency at each center (MHz).
    pub left_rabi: f64,
    pub right_rabi: f64,
}

/// Locates the two deepest local minima of `min_t P0` along the detuning
/// axis and fits the oscillation frequency at each.
pub fn analyze_chevron(table: &ResultTable) -> Result<ChevronAnalysis> {
    let x = table
        .column("detuning")
        .ok_or_else(|| Error::param("table", "no detuning"))?;
    let t = table
        .column("duration")
        .ok_or_else(|| Error::param("table", "no duration"))?;
    let p = table
        .column("P0")
        .ok_or_else(|| Error::param("table", "no P0"))?;
    let mut detunings: Vec<f64> = Vec::new();
    let mut traces: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for i in 0..x.len() {
        if detunings.last() != Some(&x[i]) {
            detunings.push(x[i]);
            traces.push((Vec::new(), Vec::new()));
        }
        let tr = traces.last_mut().expect("pushed");
        tr.0.push(t[i]);
        tr.1.push(p[i]);
    }
    let min_p0: Vec<f64> = traces
        .iter()
        .map(|(_, v)| v.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    let n = min_p0.len();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || min_p0[i] <= min_p0[i - 1];
            let right = i + 1 == n || min_p0[i] < min_p0[i + 1];
            left && right
        })
        .collect();
    if minima.len() < 2 {
        return Err(Error::param("chevron", "fewer than two resonance features"));
    }
    minima.sort_by(|&a, &b| min_p0[a].total_cmp(&min_p0[b]));
    let (mut l, mut r) = (minima[0], minima[1]);
    if l > r {
        std::mem::swap(&mut l, &mut r);
    }
    let rabi = |i: usize| {
        let (tt, vv) = &traces[i];
        dominant_frequency(tt, vv, 0.05, nyquist(tt))
    };
    Ok(ChevronAnalysis {
        left_center: detunings[l],
        right_center: detunings[r],
        left_rabi: rabi(l),
        right_rabi: rabi(r),
        detunings,
        min_p0,
    })
}

fn nyquist(times: &[f64]) -> f64 {
    if times.len() < 2 {
        return 0.0;
    }
    0.5 / (times[1] - times[0])
}

/// First time `values` drops to `level`, linearly interpolated.
pub fn first_crossing_below(times: &[f64], values: &[f64], level: f64) -> Option<f64> {
    if values.first().is_some_and(|&v| v <= level) {
        return times.first().copied();
    }
    for i in 1..values.len() {
        if values[i] <= level {
            let (t0, t1, v0, v1) = (times[i - 1], times[i], values[i - 1], values[i]);
            return Some(t0 + (t1 - t0) * (v0 - level) / (v0 - v1));
        }
    }
    None
}

/// Frequency in `[f_lo, f_hi]` (MHz) whose least-squares sinusoid
/// `c + a cos(2 pi f t) + b sin(2 pi f t)` explains the most variance,
/// scanned at 1 kHz resolution.
pub fn dominant_frequency(times: &[f64], values: &[f64], f_lo: f64, f_hi: f64) -> f64 {
    let steps = ((f_hi - f_lo) / 1e-3).ceil().max(1.0) as usize;
    let mut best = (f_lo, f64::NEG_INFINITY);
    for k in 0..=steps {
        let f = f_lo + (f_hi - f_lo) * k as f64 / steps as f64;
        let mut gram = nalgebra::Matrix3::<f64>::zeros();
        let mut rhs = nalgebra::Vector3::<f64>::zeros();
        for (&t, &v) in times.iter().zip(values) {
            let (s, c) = (TAU * f * t).sin_cos();
            let basis = nalgebra::Vector3::new(1.0, c, s);
            gram += basis * basis.transpose();
            rhs += basis * v;
        }
        let Some(coef) = gram.lu().solve(&rhs) else {
            continue;
        };
        let explained = coef.dot(&rhs);
        if explained > best.1 {
            best = (f, explained);
        }
    }
    best.0
}

/// Largest discrete Fourier transform bin at or above `f_min` (MHz) for a
/// uniformly sampled signal. Returns `(frequency, bin_width)`.
pub fn dft_peak(times: &[f64], values: &[f64], f_min: f64) -> (f64, f64) {
    let n = values.len();
    let dt = times[1] - times[0];
    let bin = 1.0 / (n as f64 * dt);
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut best = (0.0, -1.0);
    for k in 1..=n / 2 {
        let f = k as f64 * bin;
        if f < f_min {
            continue;
        }
        let s: C64 = values
            .iter()
            .enumerate()
            .map(|(j, &v)| C64::from_polar(v - mean, -TAU * (k * j) as f64 / n as f64))
            .sum();
        if s.norm_sqr() > best.1 {
            best = (f, s.norm_sqr());
        }
    }
    (best.0, bin)
}

/// Affine map of every channel onto `[target_min, target_max]`.
pub fn rescale_trace(sim: &TimeSeries, target_min: f64, target_max: f64) -> Result<TimeSeries> {
    let mut out = TimeSeries::new(sim.times.clone());
    for (name, v) in &sim.channels {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(Error::DegenerateScaling(name.clone()));
        }
        let s = (target_max - target_min) / (hi - lo);
        out.push_channel(
            name.clone(),
            v.iter().map(|x| target_min + (x - lo) * s).collect(),
        )?;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct WignerRun {
    /// Evolution time before tomography (us).
    pub evolution_time: f64,
    /// Outcome probabilities: post-g, post-f, disentangled then post-g.
    pub probabilities: [f64; 3],
    /// Phase-space rotation applied to the disentangled map (rad).
    pub alignment_phase: f64,
    pub states: Vec<QState>,
    pub maps: Vec<WignerMap>,
    pub tables: Vec<ResultTable>,
}

pub const WIGNER_TABLES: [&str; 3] = ["wigner_post_g", "wigner_post_f", "wigner_disentangled"];

/// Time at which `P0` first reaches 1/2 from `|f0>`.
pub fn half_transfer_time(cfg: &ExperimentConfig, spec: &LindbladSpec) -> Result<f64> {
    let space = spec.space().clone();
    let grid = output_grid(cfg.run.timetrace_duration, cfg.run.output_interval);
    let mut trace = Vec::new();
    evolve_with(
        spec,
        &initial_f0(&space)?,
        &grid,
        &cfg.run.integrator(),
        |_, t, rho| {
            let p0 = populations_of(&space, rho)?[0];
            trace.push((t, p0));
            Ok(if p0 <= 0.5 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            })
        },
    )?;
    let (t, v): (Vec<f64>, Vec<f64>) = trace.into_iter().unzip();
    first_crossing_below(&t, &v, 0.5).ok_or_else(|| {
        Error::Config(format!(
            "P0 never reaches 1/2 within {} us; set run.wigner.evolution_time",
            cfg.run.timetrace_duration
        ))
    })
}

/// Evolves `|f0>` to the half-transfer point and emits the post-selected
/// `g`, post-selected `f` and disentangled (then post-selected `g`) Wigner
/// maps. The disentangled map is rotated in phase space so that
/// `<4|rho|0>` is real and positive.
pub fn run_wigner(cfg: &ExperimentConfig) -> Result<WignerRun> {
    let start = Instant::now();
    let pumps = cfg.resolve_pumps()?;
    let space = cfg.run.wigner_space()?;
    let spec = device_spec(cfg, &pumps, &space)?;
    let t_evo = match cfg.run.wigner.evolution_time {
        Some(t) => t,
        None => half_transfer_time(cfg, &spec)?,
    };
    let grid_t = output_grid(t_evo, cfg.run.output_interval);
    let traj = evolve_trajectory(&spec, &initial_f0(&space)?, &grid_t, &cfg.run.integrator())?;
    let rho = traj.last();

    let (post_g, pg) = postselect(&rho, TransmonLevel::G)?;
    let (post_f, pf) = postselect(&rho, TransmonLevel::F)?;
    let (dis, pd) = postselect(&selective_disentangle(&rho)?, TransmonLevel::G)?;
    let (dis, phase) = align_coherence(&dis, 4, 0)?;

    let grid = cfg.run.wigner.grid();
    let opts = cfg.run.wigner.options();
    let states = vec![post_g, post_f, dis];
    let maps: Vec<WignerMap> = states
        .iter()
        .map(|s| wigner(s, &grid, &opts))
        .collect::<Result<_>>()?;
    let probabilities = [pg, pf, pd];
    let mut tables = Vec::new();
    for ((name, map), p) in WIGNER_TABLES.iter().zip(&maps).zip(probabilities) {
        let mut t = ResultTable::new(
            name,
            vec![
                Column::new("re_beta", "1"),
                Column::new("im_beta", "1"),
                Column::new("W", "1"),
            ],
            &cfg.canonical_json(),
        )?;
        for (b, w) in grid.points().iter().zip(&map.values) {
            t.push_row(vec![b.re, b.im, *w])?;
        }
        t.note("evolution_time_us", t_evo);
        t.note("outcome_probability", p);
        if *name == "wigner_disentangled" {
            t.note("phase_space_rotation_rad", phase);
        }
        t.metadata.wall_clock_s = start.elapsed().as_secs_f64();
        tables.push(t);
    }
    Ok(WignerRun {
        evolution_time: t_evo,
        probabilities,
        alignment_phase: phase,
        states,
        maps,
        tables,
    })
}

/// Stark shift -> xi -> g for both pumps.
pub fn run_calibrate(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let pumps = cfg.resolve_pumps()?;
    let mut t = ResultTable::new(
        "calibrate",
        vec![
            Column::new("pump", "index"),
            Column::new("transmon_stark_shift", "MHz"),
            Column::new("resonator_stark_shift", "MHz"),
            Column::new("xi", "1"),
            Column::new("g", "MHz"),
            Column::new("pump_frequency", "GHz"),
        ],
        &cfg.canonical_json(),
    )?;
    for (k, (xi, g, wp)) in [
        (pumps.xi1, pumps.g1, pumps.omega_p1),
        (pumps.xi2, pumps.g2, pumps.omega_p2),
    ]
    .into_iter()
    .enumerate()
    {
        let x = xi.norm();
        t.push_row(vec![
            (k + 1) as f64,
            transmon_stark_shift(&cfg.system, x),
            resonator_stark_shift(&cfg.system, x),
            x,
            g.norm(),
            wp,
        ])?;
    }
    t.note("delta_MHz", pumps.delta);
    t.note("g4ph_MHz", pumps.g4ph(&cfg.system)?);
    Ok(t)
}

/// Six-wave vs. Raman rates over a log-spaced xi sweep.
pub fn run_rates(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let r = &cfg.run.rates;
    let mut t = ResultTable::new(
        "rates",
        vec![
            Column::new("xi", "1"),
            Column::new("g_six_wave", "MHz"),
            Column::new("g_raman", "MHz"),
            Column::new("ratio", "1"),
        ],
        &cfg.canonical_json(),
    )?;
    let q = (r.xi_max / r.xi_min).powf(1.0 / (r.steps - 1) as f64);
    for k in 0..r.steps {
        let c = compare_rates(&cfg.system, r.xi_min * q.powi(k as i32))?;
        t.push_row(vec![c.xi, c.g_six_wave, c.g_raman, c.ratio])?;
    }
    match crossover_xi(&cfg.system) {
        Ok(x) => t.note("crossover_xi", x),
        Err(e) => t.note("crossover_xi", e.to_string()),
    }
    Ok(t)
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectiveReport {
    pub pumps: PumpConfig,
    pub g4ph: f64,
    /// Diagonal of the effective block, order `(g4, e2, f0)` (MHz).
    pub diagonal: [f64; 3],
    /// Largest deviation between the averaging engine and the closed form.
    pub engine_deviation: f64,
    /// `|g1/Delta|^2`, `|g2/Delta|^2`
    pub pump_leakage: [f64; 2],
    /// `|g/w|^2` for each interaction-picture term.
    pub term_leakage: Vec<f64>,
    pub warnings: Vec<String>,
}

pub fn effective_report(cfg: &ExperimentConfig) -> Result<EffectiveReport> {
    let pumps = cfg.resolve_pumps()?;
    let block = pumps.effective_block(&cfg.system)?;
    let set = pumps.build_H_I(&cfg.system)?;
    let eff = effective_hamiltonian(&set)?;
    let term_leakage = leakage_ratios(&set);
    let d = pumps.delta_big;
    let pump_leakage = [(pumps.g1.norm() / d).powi(2), (pumps.g2.norm() / d).powi(2)];
    let mut warnings = Vec::new();
    for (k, r) in pump_leakage.iter().enumerate() {
        if *r > LEAKAGE_WARN_THRESHOLD {
            warnings.push(format!(
                "|g{}/Delta|^2 = {r:.4} exceeds {LEAKAGE_WARN_THRESHOLD}",
                k + 1
            ));
        }
    }
    for (k, r) in term_leakage.iter().enumerate().take(set.num_listed()) {
        if *r > LEAKAGE_WARN_THRESHOLD {
            let tone = &set.terms()[k];
            warnings.push(format!(
                "term {k} (|amplitude| {:.4} MHz at {:.4} MHz): |g/w|^2 = {r:.4} exceeds {LEAKAGE_WARN_THRESHOLD}",
                tone.amplitude.norm(),
                tone.frequency
            ));
        }
    }
    Ok(EffectiveReport {
        g4ph: pumps.g4ph(&cfg.system)?,
        diagonal: [
            block.element(0, 0).re,
            block.element(1, 1).re,
            block.element(2, 2).re,
        ],
        engine_deviation: eff.matrix.max_abs_diff(&block),
        pump_leakage,
        term_leakage,
        warnings,
        pumps,
    })
}

/// Step size the integrator will use for the resonant-pump run (us).
pub fn device_step_size(cfg: &ExperimentConfig) -> Result<f64> {
    let pumps = cfg.resolve_pumps()?;
    let space = cfg.run.space()?;
    step_size(&device_spec(cfg, &pumps, &space)?, &cfg.run.integrator())
}
