mod common;

use std::f64::consts::FRAC_1_SQRT_2;

use common::{epr, part, random_rank_one};
use proptest::prelude::*;
use prodnorm_core::linalg::{kron, random_matrix, random_unitary};
use prodnorm_core::norms::{
    hj_product_bound, product_norm_lb, product_norm_positivity_witness, product_norm_rank1, product_norm_seesaw,
    sandwich_bounds, trace_norm,
};
use prodnorm_core::{Bipartition, ComplexMatrix, SeesawOptions};

fn ket(i: usize) -> ComplexMatrix {
    ComplexMatrix::basis(4, i)
}

fn outer(u: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    u * &v.adjoint()
}

#[test]
fn trace_norm_examples() {
    assert!((trace_norm(&ComplexMatrix::identity(5)).unwrap() - 5.0).abs() < 1e-12);
    let phi = &ket(0) + &ket(3);
    assert!((trace_norm(&outer(&phi, &phi)).unwrap() - 2.0).abs() < 1e-12);
    let (a, _, _) = random_rank_one(part(2, 3), 3);
    assert!((trace_norm(&a).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn rank1_examples() {
    let p = part(2, 2);
    assert!((product_norm_rank1(&epr(), &ket(0), p).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((product_norm_rank1(&ket(0), &ket(3), p).unwrap() - 1.0).abs() < 1e-12);
    assert!((product_norm_rank1(&epr(), &epr(), p).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn seesaw_examples() {
    let p = part(2, 2);
    let opts = SeesawOptions::default();
    let c = product_norm_lb(&outer(&epr(), &ket(0)), p, &opts).unwrap();
    assert!((c.value - FRAC_1_SQRT_2).abs() < 1e-7);
    let c = product_norm_lb(&ComplexMatrix::identity(4), p, &opts).unwrap();
    assert!((c.value - 4.0).abs() < 1e-12);
    assert_eq!(c.restart_index, 0);
}

#[test]
fn sandwich_examples() {
    let p = part(2, 2);
    let (lo, hi) = sandwich_bounds(&outer(&ket(0), &ket(3)), p).unwrap();
    assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    let (lo, hi) = sandwich_bounds(&ComplexMatrix::identity(4), p).unwrap();
    assert!((lo - 4.0).abs() < 1e-12 && (hi - 4.0).abs() < 1e-12);
    let (lo, hi) = sandwich_bounds(&outer(&epr(), &ket(0)), p).unwrap();
    assert!((lo - FRAC_1_SQRT_2).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
}

#[test]
fn hj_examples() {
    let i2 = ComplexMatrix::identity(2);
    let (l, r) = hj_product_bound(&i2, &i2).unwrap();
    assert!((l - 2.0).abs() < 1e-12 && (r - 2.0).abs() < 1e-12);
    let b = ComplexMatrix::real_diag(&[2.0, 1.0]);
    let c = ComplexMatrix::real_diag(&[3.0, 1.0]);
    let (l, r) = hj_product_bound(&b, &c).unwrap();
    assert!((l - 7.0).abs() < 1e-12 && (r - 7.0).abs() < 1e-12);
    for d in [2, 3, 5] {
        for k in 0..100 {
            let (l, r) = hj_product_bound(&random_matrix(d, d, 2 * k), &random_matrix(d, d, 2 * k + 1)).unwrap();
            assert!(l <= r + 1e-10);
        }
    }
}

/// Commuting normal matrices whose eigenvalue moduli are paired in opposite
/// order are not tight: the bound needs the singular values co-ordered.
#[test]
fn hj_commuting_but_anti_ordered_is_strict() {
    let b = ComplexMatrix::real_diag(&[2.0, 1.0]);
    let c = ComplexMatrix::real_diag(&[1.0, 3.0]);
    let (l, r) = hj_product_bound(&b, &c).unwrap();
    assert!((l - 5.0).abs() < 1e-12 && (r - 7.0).abs() < 1e-12);
}

#[test]
fn positivity_witness_examples() {
    let p = part(2, 2);
    let w = product_norm_positivity_witness(&ComplexMatrix::identity(4), p).unwrap();
    assert!((w.value - 4.0).abs() < 1e-12);
    let w = product_norm_positivity_witness(&outer(&ket(0), &ket(3)), p).unwrap();
    assert!((w.value - 1.0).abs() < 1e-12);
    for seed in 0..20 {
        assert!(product_norm_positivity_witness(&random_matrix(4, 4, seed), p).unwrap().value > 0.0);
    }
    assert!(product_norm_positivity_witness(&ComplexMatrix::zeros(4, 4), p).unwrap().zero_input);
}

#[test]
fn rank_one_equivalence() {
    let opts = SeesawOptions::default();
    for p in [part(2, 2), part(2, 3)] {
        for seed in 0..50 {
            let (a, u, v) = random_rank_one(p, 100 + seed);
            let exact = product_norm_rank1(&u, &v, p).unwrap();
            let lb = product_norm_lb(&a, p, &opts).unwrap();
            assert!((lb.value - exact).abs() < 1e-6, "{p:?} seed {seed}: {} vs {exact}", lb.value);
        }
    }
}

#[test]
fn sandwich_contains_certificates() {
    let opts = SeesawOptions { restarts: 4, ..SeesawOptions::default() };
    for (i, p) in [part(2, 2), part(2, 3), part(3, 3)].into_iter().enumerate() {
        for k in 0..67 {
            let a = random_matrix(p.dim(), p.dim(), 1000 * i as u64 + k);
            let (lo, hi) = sandwich_bounds(&a, p).unwrap();
            let c = product_norm_lb(&a, p, &opts).unwrap();
            assert!(lo - 1e-8 <= c.value && c.value <= hi + 1e-8, "{lo} {} {hi}", c.value);
            assert!((c.evaluate(&a).unwrap() - c.value).abs() < 1e-8);
        }
    }
}

#[test]
fn errors() {
    let p = part(2, 2);
    assert!(product_norm_lb(&ComplexMatrix::identity(5), p, &SeesawOptions::default()).is_err());
    let bad = SeesawOptions { tol: 0.0, ..SeesawOptions::default() };
    assert!(product_norm_lb(&ComplexMatrix::identity(4), p, &bad).is_err());
    assert!(product_norm_rank1(&ComplexMatrix::identity(4), &ket(0), p).is_err());
    assert!(hj_product_bound(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).is_err());
    assert!(Bipartition::new(0, 2).is_err());
}

fn partitions() -> impl Strategy<Value = Bipartition> {
    prop::sample::select(vec![part(2, 2), part(2, 3), part(3, 2), part(3, 3)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn seesaw_is_monotone(p in partitions(), seed in any::<u64>()) {
        let a = random_matrix(p.dim(), p.dim(), seed);
        let t = product_norm_seesaw(&a, p, random_unitary(p.d1, seed ^ 1), random_unitary(p.d2, seed ^ 2), 300, 1e-12)
            .unwrap();
        for w in t.objective.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10 * w[0].max(1.0), "{:?}", w);
        }
        prop_assert!((t.certificate.evaluate(&a).unwrap() - t.certificate.value).abs() < 1e-8);
        prop_assert!(t.certificate.value <= trace_norm(&a).unwrap() + 1e-8);
    }

    #[test]
    fn local_unitary_invariance_on_rank_one(p in partitions(), seed in any::<u64>()) {
        // rank-one inputs, where the seesaw reaches the exact value
        let (a, _, _) = random_rank_one(p, seed);
        let w = kron(&random_unitary(p.d1, seed ^ 3), &random_unitary(p.d2, seed ^ 4)).unwrap();
        let y = kron(&random_unitary(p.d1, seed ^ 5), &random_unitary(p.d2, seed ^ 6)).unwrap();
        let opts = SeesawOptions::default();
        let base = product_norm_lb(&a, p, &opts).unwrap().value;
        let moved = product_norm_lb(&(&(&w * &a) * &y), p, &opts).unwrap().value;
        prop_assert!((base - moved).abs() < 1e-6, "{} vs {}", base, moved);
    }

    #[test]
    fn homogeneity(p in partitions(), seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let (a, u, v) = random_rank_one(p, seed);
        let s = prodnorm_core::C64::new(re, im);
        let exact = product_norm_rank1(&u, &v, p).unwrap();
        let scaled = product_norm_lb(&a.scale(s), p, &SeesawOptions::default()).unwrap().value;
        prop_assert!((scaled - s.norm() * exact).abs() < 1e-6 * (1.0 + s.norm()));
    }

    #[test]
    fn triangle_upper_direction(p in partitions(), seed in any::<u64>()) {
        // the certificate of A + B is feasible for both summands
        let a = random_matrix(p.dim(), p.dim(), seed);
        let b = random_matrix(p.dim(), p.dim(), seed ^ 9);
        let opts = SeesawOptions { restarts: 4, ..SeesawOptions::default() };
        let c = product_norm_lb(&(&a + &b), p, &opts).unwrap();
        let split = c.evaluate(&a).unwrap() + c.evaluate(&b).unwrap();
        prop_assert!(c.value <= split + 1e-8);
        let (_, ha) = sandwich_bounds(&a, p).unwrap();
        let (_, hb) = sandwich_bounds(&b, p).unwrap();
        prop_assert!(c.value <= ha + hb + 1e-8);
    }
}
