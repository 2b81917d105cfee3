//! Displaced-parity Wigner functions, transmon post-selection and the
//! number-selective disentangling unitary.
//!
//! The parity measurement (unselective pi/2, wait pi/chi_tomo, pi/2 on the
//! tomography transmon) is represented by the ideal parity observable, and
//! the selective pi pulses by instantaneous permutations. With
//! sigma_sel = 480 ns the selective pulse bandwidth (about 332 kHz) sits well
//! below the 7.4 MHz cross-Kerr that separates the photon-number peaks.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    displacement_guard, CMatrix, DisplacementFactory, ModeSpace, QOperator, QState, C64, RESONATOR,
    TRANSMON,
};

/// Post-selection below this probability is refused.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransmonLevel {
    G,
    E,
    F,
}

impl TransmonLevel {
    pub fn index(self) -> usize {
        match self {
            TransmonLevel::G => 0,
            TransmonLevel::E => 1,
            TransmonLevel::F => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TransmonLevel::G => "g",
            TransmonLevel::E => "e",
            TransmonLevel::F => "f",
        }
    }
}

/// Rectangular grid of displacements `beta = re + i im`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WignerGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub re_steps: usize,
    pub im_min: f64,
    pub im_max: f64,
    pub im_steps: usize,
}

impl Default for WignerGrid {
    fn default() -> Self {
        Self::square(2.5, 81)
    }
}

impl WignerGrid {
    /// `steps x steps` points over `[-half_width, half_width]^2`.
    pub fn square(half_width: f64, steps: usize) -> Self {
        Self {
            re_min: -half_width,
            re_max: half_width,
            re_steps: steps,
            im_min: -half_width,
            im_max: half_width,
            im_steps: steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi, n) in [
            ("re", self.re_min, self.re_max, self.re_steps),
            ("im", self.im_min, self.im_max, self.im_steps),
        ] {
            if n == 0 {
                return Err(Error::param(name, "grid needs at least one point"));
            }
            if !lo.is_finite() || !hi.is_finite() || hi < lo || (n > 1 && hi == lo) {
                return Err(Error::param(
                    name,
                    "grid bounds must be finite and increasing",
                ));
            }
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn re_axis(&self) -> Vec<f64> {
        Self::axis(self.re_min, self.re_max, self.re_steps)
    }

    pub fn im_axis(&self) -> Vec<f64> {
        Self::axis(self.im_min, self.im_max, self.im_steps)
    }

    /// Points ordered with `re` varying fastest.
    pub fn points(&self) -> Vec<C64> {
        let re = self.re_axis();
        self.im_axis()
            .into_iter()
            .flat_map(|y| re.iter().map(move |&x| C64::new(x, y)))
            .collect()
    }

    pub fn max_beta_sq(&self) -> f64 {
        let re = self.re_min.abs().max(self.re_max.abs());
        let im = self.im_min.abs().max(self.im_max.abs());
        re * re + im * im
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WignerMap {
    pub grid: WignerGrid,
    /// Same order as [`WignerGrid::points`].
    pub values: Vec<f64>,
}

impl WignerMap {
    pub fn at(&self, re_index: usize, im_index: usize) -> f64 {
        self.values[im_index * self.grid.re_steps + re_index]
    }

    /// Riemann sum of `W` over the grid.
    pub fn integral(&self) -> f64 {
        let dx = if self.grid.re_steps > 1 {
            (self.grid.re_max - self.grid.re_min) / (self.grid.re_steps - 1) as f64
        } else {
            0.0
        };
        let dy = if self.grid.im_steps > 1 {
            (self.grid.im_max - self.grid.im_min) / (self.grid.im_steps - 1) as f64
        } else {
            0.0
        };
        self.values.iter().sum::<f64>() * dx * dy
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct WignerOptions {
    /// Dimension in which `D(beta)` is built. `None` pads the state to
    /// `dim + ceil(4 |beta|^2_max)`, which keeps displacements far from the
    /// truncation edge.
    pub working_dim: Option<usize>,
}

/// Working dimension used for a state of dimension `dim` on `grid`.
pub fn working_dim(dim: usize, grid: &WignerGrid, opts: &WignerOptions) -> Result<usize> {
    let m = match opts.working_dim {
        Some(m) => m,
        None => dim + (4.0 * grid.max_beta_sq()).ceil() as usize,
    };
    if m < dim {
        return Err(Error::InvalidDimension { dim: m, min: dim });
    }
    let re = grid.re_min.abs().max(grid.re_max.abs());
    let im = grid.im_min.abs().max(grid.im_max.abs());
    displacement_guard(m, C64::new(re, im))?;
    Ok(m)
}

/// `W(beta) = (2/pi) tr(rho D(beta) P D(beta)^dag)` on every grid point.
///
/// With `D(r e^{i t}) = R V E V^dag R^dag`, `R = e^{i t n}`, `E = e^{-i r L}` and
/// `R` commuting with parity, each point reduces to
/// `sum_jk X_jk Y_kj e^{i r (l_j - l_k)}` where `Y = V^dag P V` is fixed and
/// `X = V^dag R^dag rho R V` only touches the unpadded block of `rho`.
pub fn wigner(rho: &QState, grid: &WignerGrid, opts: &WignerOptions) -> Result<WignerMap> {
    if rho.space().num_modes() != 1 {
        return Err(Error::param(
            "rho",
            "Wigner function needs a single-mode state",
        ));
    }
    grid.validate()?;
    let n = rho.space().total_dim();
    let m = working_dim(n, grid, opts)?;
    let factory = DisplacementFactory::new(m)?;
    let v = factory.eigvecs();
    let lam = factory.eigvals();
    let mut y = v.adjoint();
    for col in 0..m {
        if col % 2 == 1 {
            for row in 0..m {
                y[(row, col)] = -y[(row, col)];
            }
        }
    }
    let y = y * v;
    let v_top = v.rows(0, n).into_owned();
    let v_top_adj = v_top.adjoint();
    let dm = rho.density_matrix();

    let values = grid
        .points()
        .par_iter()
        .map(|&beta| {
            let (r, theta) = beta.to_polar();
            let mut rot = dm.clone();
            for a in 0..n {
                for b in 0..n {
                    rot[(a, b)] *= C64::from_polar(1.0, -theta * (a as f64 - b as f64));
                }
            }
            let x = &v_top_adj * (rot * &v_top);
            let phase: Vec<C64> = lam.iter().map(|&l| C64::from_polar(1.0, r * l)).collect();
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                let mut row = C64::new(0.0, 0.0);
                for k in 0..m {
                    row += x[(j, k)] * y[(k, j)] * phase[k].conj();
                }
                acc += row * phase[j];
            }
            2.0 / PI * acc.re
        })
        .collect();
    Ok(WignerMap {
        grid: grid.clone(),
        values,
    })
}

fn joint_dims(space: &ModeSpace) -> Result<(usize, usize, usize, usize)> {
    let sa = space.slot(RESONATOR)?;
    let sb = space.slot(TRANSMON)?;
    Ok((sa, sb, space.dims()[sa], space.dims()[sb]))
}

/// Resonator state conditioned on the transmon outcome `level`, with the
/// outcome probability.
pub fn postselect(rho: &QState, level: TransmonLevel) -> Result<(QState, f64)> {
    let space = rho.space();
    if space.num_modes() != 2 {
        return Err(Error::param(
            "rho",
            "post-selection needs the joint (a, b) space",
        ));
    }
    let (sa, _, na, nb) = joint_dims(space)?;
    let l = level.index();
    if l >= nb {
        return Err(Error::param("level", "transmon truncation too small"));
    }
    let dm = rho.density_matrix();
    let idx = |k: usize| -> Result<usize> {
        let mut occ = [0usize; 2];
        occ[sa] = k;
        occ[1 - sa] = l;
        space.index(&occ)
    };
    let rows: Vec<usize> = (0..na).map(idx).collect::<Result<_>>()?;
    let mut out = CMatrix::zeros(na, na);
    for (i, &ri) in rows.iter().enumerate() {
        for (j, &rj) in rows.iter().enumerate() {
            out[(i, j)] = dm[(ri, rj)];
        }
    }
    let p: f64 = (0..na).map(|i| out[(i, i)].re).sum();
    if !(p > MIN_OUTCOME_PROBABILITY) {
        return Err(Error::ZeroProbability {
            level: level.label().into(),
            probability: p,
        });
    }
    out /= C64::new(p, 0.0);
    Ok((
        QState::density_unchecked(ModeSpace::single(RESONATOR, na)?, out),
        p,
    ))
}

/// Two ideal number-selective pi pulses on the zero-photon subspace:
/// `f0 -> e0` then `e0 -> g0`. Net action `|f0> -> |g0> -> |e0> -> |f0>`,
/// identity elsewhere.
pub fn selective_unitary(space: &ModeSpace) -> Result<QOperator> {
    let (sa, _, _, nb) = joint_dims(space)?;
    if nb < 3 {
        return Err(Error::InvalidDimension { dim: nb, min: 3 });
    }
    let idx = |level: usize| -> Result<usize> {
        let mut occ = [0usize; 2];
        occ[sa] = 0;
        occ[1 - sa] = level;
        space.index(&occ)
    };
    let (g0, e0, f0) = (idx(0)?, idx(1)?, idx(2)?);
    let mut u = QOperator::identity(space).into_matrix();
    for k in [g0, e0, f0] {
        u[(k, k)] = C64::new(0.0, 0.0);
    }
    u[(g0, f0)] = C64::new(1.0, 0.0);
    u[(e0, g0)] = C64::new(1.0, 0.0);
    u[(f0, e0)] = C64::new(1.0, 0.0);
    QOperator::new(space.clone(), u)
}

pub fn selective_disentangle(rho: &QState) -> Result<QState> {
    let u = selective_unitary(rho.space())?;
    let dm = rho.density_matrix();
    let out = u.matrix() * dm * u.matrix().adjoint();
    Ok(QState::density_unchecked(rho.space().clone(), out))
}

/// Rotates a single-mode state in phase space, `rho -> e^{-i phi n} rho
/// e^{i phi n}`, with `phi` chosen so `<m|rho|n>` becomes real and
/// nonnegative. Returns the rotated state and `phi`.
pub fn align_coherence(rho: &QState, m: usize, n: usize) -> Result<(QState, f64)> {
    if rho.space().num_modes() != 1 {
        return Err(Error::param(
            "rho",
            "phase alignment needs a single-mode state",
        ));
    }
    let dim = rho.space().total_dim();
    if m >= dim || n >= dim || m == n {
        return Err(Error::param(
            "coherence",
            "indices must differ and fit the space",
        ));
    }
    let mut dm = rho.density_matrix();
    let phi = dm[(m, n)].arg() / (m as f64 - n as f64);
    for a in 0..dim {
        for b in 0..dim {
            dm[(a, b)] *= C64::from_polar(1.0, -phi * (a as f64 - b as f64));
        }
    }
    Ok((QState::density_unchecked(rho.space().clone(), dm), phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{c, CVector};

    #[test]
    fn vacuum_at_origin() {
        let space = ModeSpace::single("a", 10).unwrap();
        let vac = QState::fock(&space, &[0]).unwrap();
        let grid = WignerGrid::square(0.0, 1);
        let w = wigner(&vac, &grid, &WignerOptions::default()).unwrap();
        assert!((w.values[0] - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn explicit_working_dim_is_guarded() {
        let space = ModeSpace::single("a", 10).unwrap();
        let vac = QState::fock(&space, &[0]).unwrap();
        let grid = WignerGrid::square(2.5, 3);
        let opts = WignerOptions {
            working_dim: Some(20),
        };
        assert!(matches!(
            wigner(&vac, &grid, &opts),
            Err(Error::TruncationRisk { .. })
        ));
        assert_eq!(
            working_dim(10, &grid, &WignerOptions::default()).unwrap(),
            60
        );
    }

    #[test]
    fn grid_layout() {
        let g = WignerGrid {
            re_min: -1.0,
            re_max: 1.0,
            re_steps: 3,
            im_min: 0.0,
            im_max: 1.0,
            im_steps: 2,
        };
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[1], C64::new(0.0, 0.0));
        assert_eq!(p[3], C64::new(-1.0, 1.0));
        let mut bad = g.clone();
        bad.re_steps = 0;
        assert!(bad.validate().is_err());
    }

    fn f0_g4(space: &ModeSpace) -> QState {
        let mut v = CVector::zeros(space.total_dim());
        v[space.index(&[0, 2]).unwrap()] = c(0.5f64.sqrt());
        v[space.index(&[4, 0]).unwrap()] = c(0.5f64.sqrt());
        QState::pure(space.clone(), v).unwrap()
    }

    #[test]
    fn postselection_of_superposition() {
        let space = ModeSpace::resonator_transmon(8, 3).unwrap();
        let st = f0_g4(&space);
        let (g, pg) = postselect(&st, TransmonLevel::G).unwrap();
        assert!((pg - 0.5).abs() < 1e-12);
        assert!((g.density_matrix()[(4, 4)].re - 1.0).abs() < 1e-12);
        let (f, pf) = postselect(&st, TransmonLevel::F).unwrap();
        assert!((pf - 0.5).abs() < 1e-12);
        assert!((f.density_matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(matches!(
            postselect(&st, TransmonLevel::E),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn disentangling_superposition() {
        let space = ModeSpace::resonator_transmon(8, 3).unwrap();
        let out = selective_disentangle(&f0_g4(&space)).unwrap();
        let dm = out.density_matrix();
        let g0 = space.index(&[0, 0]).unwrap();
        let g4 = space.index(&[4, 0]).unwrap();
        assert!((dm[(g0, g0)].re - 0.5).abs() < 1e-12);
        assert!((dm[(g4, g4)].re - 0.5).abs() < 1e-12);
        assert!((dm[(g0, g4)].re - 0.5).abs() < 1e-12);
        let u = selective_unitary(&space).unwrap();
        assert!(u.is_unitary(1e-12));
        let only_g4 = QState::fock(&space, &[4, 0]).unwrap();
        let same = selective_disentangle(&only_g4).unwrap();
        assert!((same.density_matrix()[(g4, g4)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn alignment_makes_coherence_real() {
        let space = ModeSpace::single("a", 6).unwrap();
        let mut v = CVector::zeros(6);
        v[0] = c(0.5f64.sqrt());
        v[4] = C64::from_polar(0.5f64.sqrt(), 1.234);
        let st = QState::pure(space, v).unwrap();
        let (rot, _) = align_coherence(&st, 4, 0).unwrap();
        let z = rot.density_matrix()[(4, 0)];
        assert!(z.im.abs() < 1e-14 && (z.re - 0.5).abs() < 1e-14);
    }
}
