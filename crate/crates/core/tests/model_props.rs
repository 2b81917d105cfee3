use proptest::prelude::*;

use sixquanta_core::hilbert::{ModeSpace, C64};
use sixquanta_core::model::{
    build_H_I, build_driven_hamiltonian, delta_correction, effective_block, g4ph, PumpConfig,
    SystemParams, IDX_E2, IDX_F0, IDX_G4,
};
use sixquanta_core::rwa::effective_hamiltonian;

fn params(chi_ab: f64, chi_bb: f64, chi_aa: f64) -> SystemParams {
    SystemParams {
        chi_ab,
        chi_bb,
        chi_aa,
        ..SystemParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn engine_reproduces_effective_block(
        chi_ab in 3.0f64..10.0,
        chi_bb in 80.0f64..160.0,
        chi_aa in 0.005f64..0.05,
        big in 2.0f64..10.0,
        small in -1.0f64..1.0,
        g1 in (0.1f64..1.0, 0.0f64..std::f64::consts::TAU),
        g2 in (0.1f64..1.0, 0.0f64..std::f64::consts::TAU),
    ) {
        let p = params(chi_ab, chi_bb, chi_aa);
        let g1 = C64::from_polar(g1.0, g1.1);
        let g2 = C64::from_polar(g2.0, g2.1);
        let eff = effective_hamiltonian(&build_H_I(&p, g1, g2, big, small).unwrap()).unwrap();
        let block = effective_block(&p, g1, g2, big, small).unwrap();
        prop_assert!(eff.matrix.max_abs_diff(&block) < 1e-10);
    }

    #[test]
    fn coupling_is_symmetric_in_the_pumps(
        g1 in 0.0f64..1.0,
        g2 in 0.0f64..1.0,
        big in 2.0f64..10.0,
    ) {
        let p = SystemParams::default();
        let a = g4ph(&p, g1, g2, big).unwrap();
        let b = g4ph(&p, g2, g1, big).unwrap();
        prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
    }

    #[test]
    fn correction_makes_f0_and_g4_resonant(
        g1 in 0.0f64..1.0,
        g2 in 0.0f64..1.0,
        big in 2.0f64..10.0,
    ) {
        let p = SystemParams::default();
        let delta = delta_correction(&p, g1, g2, big).unwrap();
        let h = effective_block(&p, C64::new(g1, 0.0), C64::new(g2, 0.0), big, delta).unwrap();
        prop_assert!((h.element(IDX_F0, IDX_F0) - h.element(IDX_G4, IDX_G4)).norm() < 1e-12);
    }

    #[test]
    fn pump_difference_ignores_common_shift(delta in -2.0f64..2.0) {
        let p = SystemParams::default();
        let xi = (C64::new(0.14, 0.0), C64::new(0.13, 0.0));
        let a = PumpConfig::new(&p, xi.0, xi.1, 5.1, Some(0.0)).unwrap();
        let b = PumpConfig::new(&p, xi.0, xi.1, 5.1, Some(delta)).unwrap();
        let diff = |c: &PumpConfig| c.omega_p1 - c.omega_p2;
        prop_assert!((diff(&a) - diff(&b)).abs() < 1e-12);
        prop_assert!((diff(&a) * 1e3 - p.pump_difference(5.1)).abs() < 1e-9);
    }
}

#[test]
fn zero_pump_gives_zero_coupling() {
    let p = SystemParams::default();
    assert_eq!(g4ph(&p, 0.0, 0.48, 5.1).unwrap(), 0.0);
}

/// The device Hamiltonian restricted to `(g4, e2, f0)` becomes the
/// interaction-picture Hamiltonian after removing the difference of the
/// diagonals: each tone moves by `O_i - O_j` with `O = E - S`.
#[test]
fn device_hamiltonian_reduces_to_interaction_picture() {
    let p = SystemParams::default();
    let pumps =
        PumpConfig::new(&p, C64::new(0.1449, 0.0), C64::new(0.1318, 0.0), 5.1, None).unwrap();
    let space = ModeSpace::resonator_transmon(8, 3).unwrap();
    let device = build_driven_hamiltonian(&p, &pumps, &space).unwrap();
    let hi = pumps.build_H_I(&p).unwrap();

    let full_idx = |k: usize| match k {
        IDX_G4 => space.index(&[4, 0]).unwrap(),
        IDX_E2 => space.index(&[2, 1]).unwrap(),
        _ => space.index(&[0, 2]).unwrap(),
    };
    let offset = |k: usize| {
        let e = device.static_part().element(full_idx(k), full_idx(k)).re;
        e - hi.static_part().element(k, k).re
    };

    for tone in &hi.terms()[..hi.num_listed()] {
        let (i, j) = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .find(|&(i, j)| tone.operator.element(i, j).norm() > 0.5)
            .unwrap();
        let target = tone.amplitude * tone.operator.element(i, j);
        let (fi, fj) = (full_idx(i), full_idx(j));
        let found = device.tones.terms().iter().any(|t| {
            let amp = t.amplitude * t.operator.element(fi, fj);
            let freq = t.frequency + offset(i) - offset(j);
            (amp - target).norm() < 1e-12 && (freq - tone.frequency).abs() < 1e-9
        });
        assert!(
            found,
            "no device tone for H_I term at {} on ({i}, {j})",
            tone.frequency
        );
    }
}
