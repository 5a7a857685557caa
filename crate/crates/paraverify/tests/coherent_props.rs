use paraverify::coherent::{exponent, mapping_checks, overlap_check, Variant, SERIES_CUTOFF};
use paraverify::govorkov::{build, LambdaPolicy, Realization};
use paraverify::kernel::{exp_nilpotent, ComplexMatrix, C64, I, ONE};
use proptest::prelude::*;

/// `max |(op − z·ξ_k)·exp(X)·V|` with the exponential taken by Padé.
fn eigen_residual(r: &Realization, variant: Variant, op: &str, z: C64, set: usize) -> f64 {
    let e = exponent(r, variant, set).unwrap().expm().unwrap();
    (1..=r.m())
        .map(|k| {
            let x = r.generator("xi", &[set, k]).unwrap();
            let diff: ComplexMatrix = &(r.generator(op, &[k]).unwrap() * &e) - &(&x.scale(z) * &e);
            r.vacuum_block_max(&diff)
        })
        .fold(0.0, f64::max)
}

#[test]
fn eigenrelations_against_dense_exponentials() {
    for sets in [1, 2] {
        let r = build(1, sets, 1, LambdaPolicy::Auto).unwrap();
        for set in 1..=sets {
            assert!(eigen_residual(&r, Variant::AField, "a", ONE, set) <= 1e-9);
            assert!(eigen_residual(&r, Variant::BField, "b", ONE, set) <= 1e-9);
            assert!(eigen_residual(&r, Variant::DualB, "b", ONE, set) <= 1e-9);
            assert!(eigen_residual(&r, Variant::DualPhase(1), "b", I, set) <= 1e-9);
            assert!(eigen_residual(&r, Variant::DualPhase(-1), "b", -I, set) <= 1e-9);
            assert!(eigen_residual(&r, Variant::DualPhase(1), "b", -I, set) >= 0.1);
        }
    }
}

#[test]
fn overlap_suite_at_two_sets() {
    let r = build(1, 2, 1, LambdaPolicy::Auto).unwrap();
    assert!(overlap_check(&r).unwrap().all_ok());
}

#[test]
fn mapping_suite_holds_at_both_sizes() {
    for m in [1, 2] {
        let r = build(m, 1, 1, LambdaPolicy::Auto).unwrap();
        let rep = mapping_checks(&r).unwrap();
        assert!(rep.all_ok(), "M = {m}: {:?}", rep.failures().map(|e| &e.source).collect::<Vec<_>>());
    }
}

fn variants() -> impl Strategy<Value = Variant> {
    prop_oneof![
        Just(Variant::AField),
        Just(Variant::BField),
        Just(Variant::DualB),
        Just(Variant::DualPhase(1)),
        Just(Variant::DualPhase(-1)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn every_exponent_series_terminates(v in variants(), m in 1usize..3, kappa in prop_oneof![Just(1i8), Just(-1)]) {
        let r = build(m, 1, kappa, LambdaPolicy::Auto).unwrap();
        let s = exp_nilpotent(&exponent(&r, v, 1).unwrap()).unwrap();
        prop_assert!(s.next_term <= SERIES_CUTOFF);
    }
}
