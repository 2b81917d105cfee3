use proptest::prelude::*;

use sixquanta_core::hilbert::{
    commutator, create, destroy, displacement, embed, number, parity, CMatrix, ModeSpace,
    QOperator, QState, C64,
};
use sixquanta_core::model::conversion_operator;

fn random_hermitian(n: usize, seed: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let re = seed[k % seed.len()];
            let im = if i == j {
                0.0
            } else {
                seed[(k + 1) % seed.len()]
            };
            m[(i, j)] = C64::new(re, im);
            m[(j, i)] = C64::new(re, -im);
            k += 2;
        }
    }
    m
}

proptest! {
    #[test]
    fn embedding_preserves_spectrum(
        dims in (2usize..5, 2usize..4),
        seed in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let space = ModeSpace::resonator_transmon(dims.0, dims.1).unwrap();
        let local = QOperator::new(
            ModeSpace::single("a", dims.0).unwrap(),
            random_hermitian(dims.0, &seed),
        )
        .unwrap();
        let mut e_local = local.hermitian_eigenvalues();
        let mut e_full = embed(&local, &space, "a").unwrap().hermitian_eigenvalues();
        e_local.sort_by(f64::total_cmp);
        e_full.sort_by(f64::total_cmp);
        // each local eigenvalue appears dim_b times
        for (k, v) in e_full.iter().enumerate() {
            prop_assert!((v - e_local[k / dims.1]).abs() < 1e-10);
        }
    }

    #[test]
    fn displaced_vacuum_is_poissonian(re in -1.5f64..1.5, im in -1.5f64..1.5) {
        let dim = 40;
        let beta = C64::new(re, im);
        let d = displacement(dim, beta).unwrap();
        let space = ModeSpace::single("a", dim).unwrap();
        let v = d.apply(&QState::fock(&space, &[0]).unwrap().vector().unwrap().clone());
        let mean = beta.norm_sqr();
        let mut poisson = (-mean).exp();
        for n in 0..12 {
            prop_assert!((v[n].norm_sqr() - poisson).abs() < 1e-9, "n = {}", n);
            poisson *= mean / (n + 1) as f64;
        }
    }

    #[test]
    fn parity_anticommutes_with_ladder(dim in 2usize..12) {
        let a = destroy(dim).unwrap();
        let p = parity(dim);
        let anti = &(&p * &a) + &(&a * &p);
        prop_assert!(anti.max_abs() < 1e-14);
        prop_assert!((&p * &p).max_abs_diff(&QOperator::identity(p.space())) < 1e-14);
    }
}

#[test]
fn ladder_algebra() {
    let a = destroy(6).unwrap();
    let ad = create(6).unwrap();
    let n = number(6).unwrap();
    assert!((&ad * &a).max_abs_diff(&n) < 1e-14);
    let comm = commutator(&a, &ad).unwrap();
    // [a, a^dag] = 1 except at the truncation edge
    for k in 0..5 {
        assert!((comm.element(k, k) - C64::new(1.0, 0.0)).norm() < 1e-14);
    }
    assert!((comm.element(5, 5) - C64::new(-5.0, 0.0)).norm() < 1e-12);
}

#[test]
fn conversion_commutator_matches_dense_oracle() {
    let (na, nb) = (7, 3);
    let space = ModeSpace::resonator_transmon(na, nb).unwrap();
    let op = conversion_operator(&space).unwrap();
    let comm = commutator(&op, &op.dagger()).unwrap();

    // [a^2 b^dag, a^dag^2 b] from truncated ladder matrices built by hand
    let ladder = |d: usize| {
        let mut m = CMatrix::zeros(d, d);
        for k in 1..d {
            m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
        m
    };
    let (a, b) = (ladder(na), ladder(nb));
    let a_full = a.kronecker(&CMatrix::identity(nb, nb));
    let b_full = CMatrix::identity(na, na).kronecker(&b);
    let x = &a_full * &a_full * b_full.adjoint();
    let expect = &x * x.adjoint() - x.adjoint() * &x;
    let diff = (comm.matrix() - expect)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(diff < 1e-12);
}

#[test]
fn partial_trace_of_product_state() {
    let space = ModeSpace::resonator_transmon(4, 3).unwrap();
    let s = QState::fock(&space, &[2, 1]).unwrap();
    assert_eq!(s.populations("a").unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    assert_eq!(s.populations("b").unwrap(), vec![0.0, 1.0, 0.0]);
}
