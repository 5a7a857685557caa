use paraverify::kernel::{acomm, comm, exp_nilpotent, kron, verify_b_identities, ComplexMatrix, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(dim: usize, seed: u64) -> ComplexMatrix {
    ComplexMatrix::random(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Small Gaussian-integer entries, so every product is exact.
fn integral(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(dim, |_, _| C64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64))
}

fn dims() -> impl Strategy<Value = usize> {
    prop_oneof![Just(1usize), Just(2), Just(3), Just(4), Just(8)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commutator_is_antisymmetric(d in dims(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (x, y) = (random(d, s1), random(d, s2));
        let sum = &comm(&x, &y) + &comm(&y, &x);
        let scale = (&x * &y).max_abs().max(1.0);
        prop_assert!(sum.max_abs() <= 1e-15 * scale);
    }

    #[test]
    fn anticommutator_is_symmetric(d in dims(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (x, y) = (random(d, s1), random(d, s2));
        prop_assert_eq!(acomm(&x, &y), acomm(&y, &x));
    }

    #[test]
    fn kron_is_associative(d1 in 1usize..4, d2 in 1usize..4, d3 in 1usize..4, seed in any::<u64>()) {
        let (a, b, c) = (integral(d1, seed), integral(d2, seed ^ 1), integral(d3, seed ^ 2));
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn nilpotent_exponential_matches_pade(d in 2usize..7, seed in any::<u64>()) {
        let r = random(d, seed);
        let upper = ComplexMatrix::from_fn(d, |i, j| if j > i { r.get(i, j) } else { C64::new(0.0, 0.0) });
        let series = exp_nilpotent(&upper).unwrap();
        prop_assert_eq!(series.next_term, 0.0);
        let dense = upper.expm().unwrap();
        prop_assert!((&series.value - &dense).max_abs() <= 1e-11);
    }
}

#[test]
fn bracket_identities_hold_on_every_sampled_dimension() {
    for d in [2, 4, 8, 16] {
        for seed in 0..4 {
            let rep = verify_b_identities(d, seed).unwrap();
            assert_eq!(rep.entries.len(), 11, "dim {d}");
            for e in &rep.entries {
                assert!(e.ok(), "dim {d} seed {seed}: {} deviates by {:e}", e.source, e.max_deviation);
            }
        }
    }
}
