use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sixquanta_core::hilbert::{CMatrix, ModeSpace, QOperator, C64};
use sixquanta_core::rwa::{effective_hamiltonian, second_order_static, RwaTermSet, Tone};
use sixquanta_core::Error;

fn random_op(rng: &mut ChaCha8Rng, space: &ModeSpace) -> QOperator {
    let n = space.total_dim();
    let m = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    QOperator::new(space.clone(), m).unwrap()
}

fn random_static(rng: &mut ChaCha8Rng, space: &ModeSpace) -> QOperator {
    let n = space.total_dim();
    let d: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.random_range(-2.0..2.0), 0.0))
        .collect();
    QOperator::new(space.clone(), CMatrix::from_diagonal(&d.into())).unwrap()
}

struct Instance {
    stat: QOperator,
    tones: Vec<(C64, f64, QOperator)>,
}

fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = ModeSpace::single("x", 8).unwrap();
    let w1 = rng.random_range(1.0..10.0);
    let w2 = w1 + rng.random_range(0.5..10.0);
    let mut tones = Vec::new();
    for w in [w1, w2] {
        let g = C64::from_polar(
            rng.random_range(0.05..0.5),
            rng.random_range(0.0..std::f64::consts::TAU),
        );
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        tones.push((g, sign * w, random_op(&mut rng, &space)));
    }
    Instance {
        stat: random_static(&mut rng, &space),
        tones,
    }
}

fn set_of(inst: &Instance) -> RwaTermSet {
    RwaTermSet::new(
        inst.stat.clone(),
        inst.tones
            .iter()
            .map(|(g, w, a)| Tone::new(*g, *w, a.clone()))
            .collect(),
    )
    .unwrap()
}

// sum_k |g_k|^2 [A_k, A_k^dag] / w_k for non-degenerate tones
fn closed_form(inst: &Instance) -> CMatrix {
    let mut h = inst.stat.matrix().clone();
    for (g, w, a) in &inst.tones {
        let m = a.matrix();
        h += (m * m.adjoint() - m.adjoint() * m) * C64::new(g.norm_sqr() / w, 0.0);
    }
    h
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn two_tone_engine_matches_closed_form() {
    for seed in 0..100 {
        let inst = instance(seed);
        let eff = effective_hamiltonian(&set_of(&inst)).unwrap();
        let err = max_diff(eff.matrix.matrix(), &closed_form(&inst));
        assert!(err < 1e-11, "seed {seed}: {err:e}");
    }
}

proptest! {
    #[test]
    fn reordering_tones_changes_nothing(seed in 0u64..1000) {
        let inst = instance(seed);
        let forward = effective_hamiltonian(&set_of(&inst)).unwrap();
        let mut rev = Instance { stat: inst.stat.clone(), tones: inst.tones.clone() };
        rev.tones.reverse();
        let backward = effective_hamiltonian(&set_of(&rev)).unwrap();
        prop_assert!(forward.matrix.max_abs_diff(&backward.matrix) < 1e-13);
    }

    #[test]
    fn second_order_scales_quadratically(seed in 0u64..1000, s in 0.1f64..5.0) {
        let inst = instance(seed);
        let base = effective_hamiltonian(&set_of(&inst)).unwrap().order2;
        let scaled_inst = Instance {
            stat: inst.stat.clone(),
            tones: inst.tones.iter().map(|(g, w, a)| (g * s, *w, a.clone())).collect(),
        };
        let scaled = effective_hamiltonian(&set_of(&scaled_inst)).unwrap().order2;
        let expect = &base * (s * s);
        prop_assert!(scaled.max_abs_diff(&expect) < 1e-11 * expect.max_abs().max(1.0));
    }

    #[test]
    fn listing_the_conjugate_partner_is_equivalent(seed in 0u64..1000) {
        let inst = instance(seed);
        let flipped = Instance {
            stat: inst.stat.clone(),
            tones: inst.tones.iter().map(|(g, w, a)| (g.conj(), -w, a.dagger())).collect(),
        };
        let a = effective_hamiltonian(&set_of(&inst)).unwrap();
        let b = effective_hamiltonian(&set_of(&flipped)).unwrap();
        prop_assert!(a.matrix.max_abs_diff(&b.matrix) < 1e-12);
    }
}

#[test]
fn zero_frequency_tone_is_first_order_only() {
    let space = ModeSpace::single("x", 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_op(&mut rng, &space);
    let set = RwaTermSet::new(
        QOperator::zeros(&space),
        vec![Tone::new(C64::new(0.1, 0.0), 0.0, a.clone())],
    )
    .unwrap();
    assert!(matches!(
        second_order_static(&set),
        Err(Error::ZeroFrequencyTerm { .. })
    ));
    let eff = effective_hamiltonian(&set).unwrap();
    let expect = &(&a + &a.dagger()) * 0.1;
    assert!(eff.matrix.max_abs_diff(&expect) < 1e-15);
}
