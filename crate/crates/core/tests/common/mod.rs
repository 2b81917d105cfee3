//! Closed-form Wigner oracles shared by integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_2_PI;

use sixquanta_core::hilbert::{CMatrix, C64};
use sixquanta_core::tomography::WignerGrid;

/// Generalized Laguerre polynomial by upward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Wigner function of `|m><n|` (m <= n).
pub fn cross_wigner(m: usize, n: usize, beta: C64) -> C64 {
    let r2 = beta.norm_sqr();
    let k = n - m;
    let sign = (-1f64).powi(m as i32);
    (beta * 2.0).powu(k as u32)
        * (FRAC_2_PI
            * sign
            * (factorial(m) / factorial(n)).sqrt()
            * (-2.0 * r2).exp()
            * laguerre(m, k as f64, 4.0 * r2))
}

/// Wigner function of a density matrix at `beta` from the cross terms.
pub fn analytic_value(rho: &CMatrix, beta: C64) -> f64 {
    let dim = rho.nrows();
    let mut w = 0.0;
    for m in 0..dim {
        for n in m..dim {
            let x = rho[(m, n)] * cross_wigner(m, n, beta);
            w += if m == n { x.re } else { 2.0 * x.re };
        }
    }
    w
}

pub fn analytic_map(rho: &CMatrix, grid: &WignerGrid) -> Vec<f64> {
    grid.points()
        .iter()
        .map(|&b| analytic_value(rho, b))
        .collect()
}

/// `(|0> + |4>) / sqrt(2)` as a 5x5 density matrix.
pub fn zero_four_superposition() -> CMatrix {
    let mut rho = CMatrix::zeros(5, 5);
    for i in [0, 4] {
        for j in [0, 4] {
            rho[(i, j)] = C64::new(0.5, 0.0);
        }
    }
    rho
}
