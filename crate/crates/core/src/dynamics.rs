//! Lindblad master-equation integration.
//!
//! ```text
//! d rho/dt = -i [H(t), rho] + sum_k rate_k (L rho L^dag - {L^dag L, rho}/2)
//! ```
//!
//! `H` is in MHz (ordinary frequency) and is multiplied by 2 pi here; times are
//! in us and rates in 1/us. The integrator is classical fixed-step RK4 on a
//! row-major density matrix. Operators are applied as sparse triplet lists,
//! which at these dimensions is several times faster than dense products.

use std::f64::consts::TAU;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    c, destroy, embed, number, CMatrix, ModeSpace, QOperator, QState, C64, RESONATOR, TRANSMON,
};
use crate::model::{DrivenHamiltonian, SystemParams};

/// Drift limits checked at every output point; exceeding them aborts.
pub const TRACE_ABORT: f64 = 1e-6;
pub const HERMITICITY_ABORT: f64 = 1e-8;

/// Default RK4 resolution of the fastest tone period.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 500.0;

/// Largest `h * |lambda|` allowed; RK4 is stable up to 2.83 on the imaginary
/// axis.
const STABILITY_MARGIN: f64 = 2.5;

#[derive(Clone, Debug)]
pub struct CollapseOp {
    pub name: String,
    pub operator: QOperator,
    /// Prefactor of `D[L]` (1/us).
    pub rate: f64,
}

impl CollapseOp {
    pub fn new(name: impl Into<String>, operator: QOperator, rate: f64) -> Self {
        Self {
            name: name.into(),
            operator,
            rate,
        }
    }
}

/// Amplitude envelope applied to every tone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Envelope {
    Constant,
    /// `tanh(t / ramp_time)` for `t >= 0`. Only the rising edge is modeled.
    TanhRise {
        ramp_time: f64,
    },
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::TanhRise { ramp_time } => {
                if t <= 0.0 {
                    0.0
                } else {
                    (t / ramp_time).tanh()
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct LindbladSpec {
    pub hamiltonian: DrivenHamiltonian,
    pub collapse: Vec<CollapseOp>,
    pub envelope: Envelope,
}

impl LindbladSpec {
    pub fn new(hamiltonian: DrivenHamiltonian, collapse: Vec<CollapseOp>) -> Result<Self> {
        let space = hamiltonian.space();
        for op in &collapse {
            if op.operator.space() != space {
                return Err(Error::SpaceMismatch);
            }
            if !(op.rate >= 0.0) || !op.rate.is_finite() {
                return Err(Error::param(
                    "rate",
                    format!("collapse `{}` has rate {}", op.name, op.rate),
                ));
            }
        }
        Ok(Self {
            hamiltonian,
            collapse,
            envelope: Envelope::Constant,
        })
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Result<Self> {
        if let Envelope::TanhRise { ramp_time } = envelope {
            if !(ramp_time > 0.0) || !ramp_time.is_finite() {
                return Err(Error::param("ramp_time", "must be positive"));
            }
        }
        self.envelope = envelope;
        Ok(self)
    }

    pub fn space(&self) -> &ModeSpace {
        self.hamiltonian.space()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegratorConfig {
    /// RK4 steps per period of the fastest tone.
    pub steps_per_period: f64,
    /// Optional hard cap on the step (us).
    pub max_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            max_step: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DephasingConvention {
    /// `Gamma_phi = 1/T2 - 1/(2 T1)`, applied as `2 Gamma_phi D[n]` so that
    /// coherences decay as `exp(-Gamma_phi t)`.
    Standard,
    /// `Gamma_phi = 1/(2 T1) + 1/T2`, applied as `Gamma_phi D[n]`.
    SiLiteral,
}

impl std::str::FromStr for DephasingConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "si-literal" => Ok(Self::SiLiteral),
            other => Err(Error::param(
                "dephasing",
                format!("`{other}` is not one of standard, si-literal"),
            )),
        }
    }
}

fn pure_dephasing(t1: f64, t2: f64, convention: DephasingConvention) -> f64 {
    match convention {
        DephasingConvention::Standard => (1.0 / t2 - 0.5 / t1).max(0.0),
        DephasingConvention::SiLiteral => 0.5 / t1 + 1.0 / t2,
    }
}

/// Pure-dephasing rates `(Gamma_phi_a, Gamma_phi_b)` in 1/us.
pub fn dephasing_rates(
    params: &SystemParams,
    convention: DephasingConvention,
) -> Result<(f64, f64)> {
    for (name, v) in [
        ("T1_a", params.t1_a),
        ("T2_a", params.t2_a),
        ("T1_b", params.t1_b),
        ("T2_b", params.t2_b),
    ] {
        if !(v > 0.0) {
            return Err(Error::param(name, "must be positive"));
        }
    }
    Ok((
        pure_dephasing(params.t1_a, params.t2_a, convention),
        pure_dephasing(params.t1_b, params.t2_b, convention),
    ))
}

/// Relaxation and dephasing of both modes on a `(a, b)` space.
pub fn device_collapse_ops(
    params: &SystemParams,
    space: &ModeSpace,
    convention: DephasingConvention,
) -> Result<Vec<CollapseOp>> {
    let (gpa, gpb) = dephasing_rates(params, convention)?;
    let weight = match convention {
        DephasingConvention::Standard => 2.0,
        DephasingConvention::SiLiteral => 1.0,
    };
    let na = space.dim_of(RESONATOR)?;
    let nb = space.dim_of(TRANSMON)?;
    Ok(vec![
        CollapseOp::new(
            "a",
            embed(&destroy(na)?, space, RESONATOR)?,
            1.0 / params.t1_a,
        ),
        CollapseOp::new(
            "b",
            embed(&destroy(nb)?, space, TRANSMON)?,
            1.0 / params.t1_b,
        ),
        CollapseOp::new("n_a", embed(&number(na)?, space, RESONATOR)?, weight * gpa),
        CollapseOp::new("n_b", embed(&number(nb)?, space, TRANSMON)?, weight * gpb),
    ])
}

/// Named real channels sampled on a common time grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub channels: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            channels: Vec::new(),
        }
    }

    pub fn push_channel(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch {
                expected: self.times.len(),
                found: values.len(),
            });
        }
        self.channels.push((name.into(), values));
        Ok(())
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Density matrices at the output times.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub space: ModeSpace,
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
}

impl Trajectory {
    pub fn state(&self, i: usize) -> QState {
        QState::density_unchecked(self.space.clone(), self.states[i].clone())
    }

    pub fn last(&self) -> QState {
        self.state(self.states.len() - 1)
    }
}

// ---------------------------------------------------------------------------
// sparse kernel

#[derive(Clone, Debug)]
struct Sparse {
    entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    fn from_matrix(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                let v = m[(r, col)];
                if v != C64::new(0.0, 0.0) {
                    entries.push((r, col, v));
                }
            }
        }
        Self { entries }
    }

    /// `out += coef * self * x` for row-major `n x n` buffers.
    #[inline]
    fn mul_acc(&self, coef: C64, x: &[C64], out: &mut [C64], n: usize) {
        for &(r, col, v) in &self.entries {
            let w = coef * v;
            let src = &x[col * n..col * n + n];
            let dst = &mut out[r * n..r * n + n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
}

/// Tones sharing one operator, combined into a single time-dependent
/// coefficient.
#[derive(Clone, Debug)]
struct ToneGroup {
    op: Sparse,
    /// `(amplitude * 2 pi, angular frequency)`
    tones: Vec<(C64, f64)>,
}

struct Kernel {
    n: usize,
    k_static: Sparse,
    groups: Vec<ToneGroup>,
    jumps: Vec<(Sparse, f64)>,
    envelope: Envelope,
    y: Vec<C64>,
}

impl Kernel {
    fn new(spec: &LindbladSpec) -> Self {
        let n = spec.space().total_dim();
        let h = &spec.hamiltonian;
        let mut k = h.static_part().matrix() * c(TAU);
        for j in &spec.collapse {
            if j.rate > 0.0 {
                let m = j.operator.matrix();
                k -= (m.adjoint() * m) * C64::new(0.0, 0.5 * j.rate);
            }
        }
        let mut groups: Vec<(QOperator, ToneGroup)> = Vec::new();
        for t in h.tones.terms() {
            let entry = (t.amplitude * TAU, t.frequency * TAU);
            match groups
                .iter_mut()
                .find(|(op, _)| op.max_abs_diff(&t.operator) == 0.0)
            {
                Some((_, g)) => g.tones.push(entry),
                None => groups.push((
                    t.operator.clone(),
                    ToneGroup {
                        op: Sparse::from_matrix(t.operator.matrix()),
                        tones: vec![entry],
                    },
                )),
            }
        }
        let jumps = spec
            .collapse
            .iter()
            .filter(|j| j.rate > 0.0)
            .map(|j| (Sparse::from_matrix(j.operator.matrix()), j.rate))
            .collect();
        Self {
            n,
            k_static: Sparse::from_matrix(&k),
            groups: groups.into_iter().map(|(_, g)| g).collect(),
            jumps,
            envelope: spec.envelope,
            y: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    /// `out = L(t) rho`.
    fn rhs(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let n = self.n;
        let zero = C64::new(0.0, 0.0);
        self.y.fill(zero);
        self.k_static.mul_acc(c(1.0), rho, &mut self.y, n);
        let s = self.envelope.value(t);
        for g in &self.groups {
            let coef: C64 = g
                .tones
                .iter()
                .map(|&(amp, w)| amp * C64::from_polar(1.0, w * t))
                .sum::<C64>()
                * s;
            if coef != zero {
                g.op.mul_acc(coef, rho, &mut self.y, n);
            }
        }
        // -i (K rho - rho K^dag) with rho K^dag = (K rho)^dag
        for i in 0..n {
            for j in 0..n {
                let d = self.y[i * n + j] - self.y[j * n + i].conj();
                out[i * n + j] = C64::new(d.im, -d.re);
            }
        }
        // L rho L^dag summed directly over pairs of nonzeros
        for (l, rate) in &self.jumps {
            for &(i, k, v) in &l.entries {
                let vr = v * *rate;
                let src = &rho[k * n..k * n + n];
                let dst = &mut out[i * n..i * n + n];
                for &(j, m, w) in &l.entries {
                    dst[j] += vr * w.conj() * src[m];
                }
            }
        }
    }

    /// Largest angular rate entering the generator, for the stability bound.
    fn spectral_bound(&self, h: &DrivenHamiltonian, collapse: &[CollapseOp]) -> f64 {
        let stat = h.static_part().hermitian_eigenvalues();
        let spread = stat.iter().cloned().fold(f64::MIN, f64::max)
            - stat.iter().cloned().fold(f64::MAX, f64::min);
        let drive: f64 = h
            .tones
            .terms()
            .iter()
            .map(|t| t.amplitude.norm() * op_norm_bound(t.operator.matrix()))
            .sum();
        let decay: f64 = collapse
            .iter()
            .map(|j| j.rate * op_norm_bound(j.operator.matrix()).powi(2))
            .sum();
        TAU * (spread + 2.0 * drive) + decay
    }
}

/// Cheap upper bound on the spectral norm: sqrt(max row sum * max col sum).
fn op_norm_bound(m: &CMatrix) -> f64 {
    let rows = (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let cols = (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    (rows * cols).sqrt()
}

/// Step size for the given spec: the tone resolution or the stability limit,
/// whichever is smaller.
pub fn step_size(spec: &LindbladSpec, cfg: &IntegratorConfig) -> Result<f64> {
    if !(cfg.steps_per_period > 0.0) {
        return Err(Error::param("steps_per_period", "must be positive"));
    }
    let kernel = Kernel::new(spec);
    let bound = kernel.spectral_bound(&spec.hamiltonian, &spec.collapse);
    let nu = spec.hamiltonian.max_frequency();
    // without tones, resolve the fastest generator scale instead
    let nu = if nu > 0.0 { nu } else { (bound / TAU).max(1.0) };
    let mut h = 1.0 / (cfg.steps_per_period * nu);
    if bound > 0.0 {
        h = h.min(STABILITY_MARGIN / bound);
    }
    if let Some(cap) = cfg.max_step {
        if !(cap > 0.0) {
            return Err(Error::param("max_step", "must be positive"));
        }
        h = h.min(cap);
    }
    Ok(h)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::param("t_grid", "must not be empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("t_grid", "must be finite"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("t_grid", "must be strictly increasing"));
    }
    Ok(())
}

fn drift(rho: &[C64], n: usize) -> (f64, f64) {
    let mut tr = 0.0;
    let mut herm: f64 = 0.0;
    for i in 0..n {
        tr += rho[i * n + i].re;
        for j in i..n {
            herm = herm.max((rho[i * n + j] - rho[j * n + i].conj()).norm());
        }
    }
    ((tr - 1.0).abs(), herm)
}

/// Integrates from `rho0` at `t_grid[0]` and calls `visit(index, time,
/// rho_row_major)` at every grid point, including the first. Returning
/// `ControlFlow::Break` from `visit` stops the run early.
pub fn evolve_with<F>(
    spec: &LindbladSpec,
    rho0: &QState,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, f64, &[C64]) -> Result<ControlFlow<()>>,
{
    if rho0.space() != spec.space() {
        return Err(Error::SpaceMismatch);
    }
    check_grid(t_grid)?;
    let h_max = step_size(spec, cfg)?;
    let mut kernel = Kernel::new(spec);
    let n = kernel.n;
    let dm = rho0.density_matrix();
    let mut rho: Vec<C64> = (0..n * n).map(|k| dm[(k / n, k % n)]).collect();
    let zero = C64::new(0.0, 0.0);
    let mut k1 = vec![zero; n * n];
    let mut k2 = vec![zero; n * n];
    let mut k3 = vec![zero; n * n];
    let mut k4 = vec![zero; n * n];
    let mut tmp = vec![zero; n * n];

    if visit(0, t_grid[0], &rho)?.is_break() {
        return Ok(());
    }
    for (idx, w) in t_grid.windows(2).enumerate() {
        let span = w[1] - w[0];
        let steps = (span / h_max).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            let t = w[0] + s as f64 * h;
            kernel.rhs(t, &rho, &mut k1);
            for k in 0..n * n {
                tmp[k] = rho[k] + k1[k] * (0.5 * h);
            }
            kernel.rhs(t + 0.5 * h, &tmp, &mut k2);
            for k in 0..n * n {
                tmp[k] = rho[k] + k2[k] * (0.5 * h);
            }
            kernel.rhs(t + 0.5 * h, &tmp, &mut k3);
            for k in 0..n * n {
                tmp[k] = rho[k] + k3[k] * h;
            }
            kernel.rhs(t + h, &tmp, &mut k4);
            let h6 = h / 6.0;
            for k in 0..n * n {
                rho[k] += (k1[k] + (k2[k] + k3[k]) * 2.0 + k4[k]) * h6;
            }
        }
        let (tr, herm) = drift(&rho, n);
        if !(tr < TRACE_ABORT) || !(herm < HERMITICITY_ABORT) {
            return Err(Error::Instability {
                time_us: w[1],
                trace_drift: tr,
                hermiticity: herm,
            });
        }
        if visit(idx + 1, w[1], &rho)?.is_break() {
            break;
        }
    }
    Ok(())
}

fn to_matrix(rho: &[C64], n: usize) -> CMatrix {
    CMatrix::from_row_slice(n, n, rho)
}

/// Expectation values `tr(O rho(t))` of Hermitian observables.
pub fn evolve(
    spec: &LindbladSpec,
    rho0: &QState,
    t_grid: &[f64],
    observables: &[(String, QOperator)],
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    for (name, op) in observables {
        if op.space() != spec.space() {
            return Err(Error::SpaceMismatch);
        }
        if !op.is_hermitian(1e-12 * op.max_abs().max(1.0)) {
            return Err(Error::NonHermitian(format!("observable `{name}`")));
        }
    }
    let n = spec.space().total_dim();
    let ops: Vec<Sparse> = observables
        .iter()
        .map(|(_, o)| Sparse::from_matrix(o.matrix()))
        .collect();
    let mut values = (0..observables.len())
        .map(|_| Vec::with_capacity(t_grid.len()))
        .collect::<Vec<Vec<f64>>>();
    evolve_with(spec, rho0, t_grid, cfg, |_, _, rho| {
        for (o, out) in ops.iter().zip(values.iter_mut()) {
            // tr(O rho) = sum_{r,c} O_rc rho_cr
            let v: f64 = o
                .entries
                .iter()
                .map(|&(r, col, x)| (x * rho[col * n + r]).re)
                .sum();
            out.push(v);
        }
        Ok(ControlFlow::Continue(()))
    })?;
    let mut ts = TimeSeries::new(t_grid.to_vec());
    for ((name, _), v) in observables.iter().zip(values) {
        ts.push_channel(name.clone(), v)?;
    }
    Ok(ts)
}

/// Stores `rho(t)` at every grid point.
pub fn evolve_trajectory(
    spec: &LindbladSpec,
    rho0: &QState,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let n = spec.space().total_dim();
    let mut states = Vec::with_capacity(t_grid.len());
    evolve_with(spec, rho0, t_grid, cfg, |_, _, rho| {
        states.push(to_matrix(rho, n));
        Ok(ControlFlow::Continue(()))
    })?;
    Ok(Trajectory {
        space: spec.space().clone(),
        times: t_grid.to_vec(),
        states,
    })
}

/// Number of resonator Fock populations reported by [`populations`].
pub const RESONATOR_CHANNELS: usize = 6;
pub const TRANSMON_LABELS: [&str; 3] = ["g", "e", "f"];

/// Populations from the diagonal of a row-major joint density matrix:
/// `P0..P5` (transmon traced out) then `Pg, Pe, Pf` (resonator traced out).
pub fn populations_of(space: &ModeSpace, rho: &[C64]) -> Result<Vec<f64>> {
    let slot_a = space.slot(RESONATOR)?;
    let slot_b = space.slot(TRANSMON)?;
    let n = space.total_dim();
    let mut out = vec![0.0; RESONATOR_CHANNELS + TRANSMON_LABELS.len()];
    for i in 0..n {
        let occ = space.occupations(i);
        let p = rho[i * n + i].re;
        if occ[slot_a] < RESONATOR_CHANNELS {
            out[occ[slot_a]] += p;
        }
        if occ[slot_b] < TRANSMON_LABELS.len() {
            out[RESONATOR_CHANNELS + occ[slot_b]] += p;
        }
    }
    Ok(out)
}

pub fn population_names() -> Vec<String> {
    (0..RESONATOR_CHANNELS)
        .map(|k| format!("P{k}"))
        .chain(TRANSMON_LABELS.iter().map(|l| format!("P{l}")))
        .collect()
}

/// Population channels of a stored trajectory.
pub fn populations(traj: &Trajectory) -> Result<TimeSeries> {
    let n = traj.space.total_dim();
    let mut cols = (0..RESONATOR_CHANNELS + 3)
        .map(|_| Vec::with_capacity(traj.times.len()))
        .collect::<Vec<Vec<f64>>>();
    for m in &traj.states {
        let row_major: Vec<C64> = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
        for (col, v) in cols
            .iter_mut()
            .zip(populations_of(&traj.space, &row_major)?)
        {
            col.push(v);
        }
    }
    let mut ts = TimeSeries::new(traj.times.clone());
    for (name, v) in population_names().into_iter().zip(cols) {
        ts.push_channel(name, v)?;
    }
    Ok(ts)
}

/// Population channels computed on the fly, without storing states.
pub fn evolve_populations(
    spec: &LindbladSpec,
    rho0: &QState,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    let space = spec.space().clone();
    let mut cols = (0..RESONATOR_CHANNELS + 3)
        .map(|_| Vec::with_capacity(t_grid.len()))
        .collect::<Vec<Vec<f64>>>();
    evolve_with(spec, rho0, t_grid, cfg, |_, _, rho| {
        for (col, v) in cols.iter_mut().zip(populations_of(&space, rho)?) {
            col.push(v);
        }
        Ok(ControlFlow::Continue(()))
    })?;
    let mut ts = TimeSeries::new(t_grid.to_vec());
    for (name, v) in population_names().into_iter().zip(cols) {
        ts.push_channel(name, v)?;
    }
    Ok(ts)
}

/// `n + 1` evenly spaced points on `[0, duration]`.
pub fn uniform_grid(duration: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| duration * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_decay(rate: f64) -> (LindbladSpec, QState) {
        let space = ModeSpace::single("mode", 4).unwrap();
        let a = destroy(4).unwrap();
        let h = DrivenHamiltonian::time_independent(QOperator::zeros(&space)).unwrap();
        let spec = LindbladSpec::new(h, vec![CollapseOp::new("a", a, rate)]).unwrap();
        (spec, QState::fock(&space, &[1]).unwrap())
    }

    #[test]
    fn envelope_values() {
        assert_eq!(Envelope::Constant.value(-1.0), 1.0);
        let e = Envelope::TanhRise { ramp_time: 0.192 };
        assert_eq!(e.value(0.0), 0.0);
        assert!((e.value(0.192) - 1f64.tanh()).abs() < 1e-15);
        assert!(e.value(3.0) > 0.999_999);
    }

    #[test]
    fn dephasing_rate_values() {
        let p = SystemParams::default();
        let (_, b) = dephasing_rates(&p, DephasingConvention::Standard).unwrap();
        assert!((b - 0.121_578_947).abs() < 1e-6);
        let (_, b) = dephasing_rates(&p, DephasingConvention::SiLiteral).unwrap();
        assert!((b - 0.141_578_947).abs() < 1e-6);
        let mut q = p.clone();
        q.t2_b = 2.0 * q.t1_b;
        assert_eq!(
            dephasing_rates(&q, DephasingConvention::Standard)
                .unwrap()
                .1,
            0.0
        );
        q.t1_b = 0.0;
        assert!(dephasing_rates(&q, DephasingConvention::Standard).is_err());
    }

    #[test]
    fn convention_parses() {
        assert_eq!(
            "si-literal".parse::<DephasingConvention>().unwrap(),
            DephasingConvention::SiLiteral
        );
        assert!("bogus".parse::<DephasingConvention>().is_err());
    }

    #[test]
    fn energy_decay_is_exponential() {
        let kappa = 0.7;
        let (spec, rho0) = qubit_decay(kappa);
        let n = number(4).unwrap();
        let grid = uniform_grid(2.0, 20);
        let ts = evolve(
            &spec,
            &rho0,
            &grid,
            &[("n".into(), n)],
            &IntegratorConfig::default(),
        )
        .unwrap();
        for (t, v) in grid.iter().zip(ts.channel("n").unwrap()) {
            assert!((v - (-kappa * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_must_increase() {
        let (spec, rho0) = qubit_decay(1.0);
        let cfg = IntegratorConfig::default();
        assert!(evolve(&spec, &rho0, &[0.0, 0.0], &[], &cfg).is_err());
        assert!(evolve(&spec, &rho0, &[], &[], &cfg).is_err());
    }

    #[test]
    fn negative_rate_rejected() {
        let space = ModeSpace::single("mode", 3).unwrap();
        let h = DrivenHamiltonian::time_independent(QOperator::zeros(&space)).unwrap();
        let res = LindbladSpec::new(h, vec![CollapseOp::new("a", destroy(3).unwrap(), -1.0)]);
        assert!(res.is_err());
    }

    #[test]
    fn drift_measures_trace_and_asymmetry() {
        let n = 2;
        let mut rho = vec![c(0.5), c(0.0), c(0.0), c(0.5)];
        assert_eq!(drift(&rho, n), (0.0, 0.0));
        rho[1] = C64::new(0.0, 1e-3);
        rho[3] = c(0.6);
        let (tr, herm) = drift(&rho, n);
        assert!((tr - 0.1).abs() < 1e-12);
        assert!((herm - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn step_respects_cap_and_stability() {
        let (spec, _) = qubit_decay(1.0);
        let coarse = IntegratorConfig {
            steps_per_period: 1e-9,
            max_step: None,
        };
        let h = step_size(&spec, &coarse).unwrap();
        assert!(h * 1.0 <= STABILITY_MARGIN + 1e-12);
        let capped = IntegratorConfig {
            steps_per_period: 1e-9,
            max_step: Some(1e-3),
        };
        assert_eq!(step_size(&spec, &capped).unwrap(), 1e-3);
    }
}
