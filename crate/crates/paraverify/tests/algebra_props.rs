use num_rational::Rational64;
use paraverify::dkp::{build_dkp, inconsistency_report, permutation_sign, permutations};
use paraverify::govorkov::{build, LambdaPolicy, Realization};
use paraverify::kernel::{comm, ComplexMatrix};
use paraverify::report::Expectation;
use paraverify::su_unitary::{build_su, para_vacuum_search, sectors_with_p, verify_relation_set};
use paraverify::supertriple::{p_map, triple_product, BilinearFormTable, Combination, GeneratorTag, Kind, LAMBDA, LISTED_PATTERNS};
use proptest::prelude::*;

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

#[test]
fn unitary_generators_close_under_commutation() {
    for m in [1, 2] {
        let su = build_su(m).unwrap();
        let n = su.n();
        let mut worst = 0.0_f64;
        for mu in 0..n {
            for nu in 0..n {
                for rho in 0..n {
                    for sg in 0..n {
                        let lhs = comm(su.x(mu, nu), su.x(rho, sg));
                        let rhs = &su.x(mu, sg).scale_real(delta(nu, rho)) - &su.x(rho, nu).scale_real(delta(sg, mu));
                        worst = worst.max((&lhs - &rhs).max_abs());
                    }
                }
            }
        }
        assert!(worst <= 1e-11, "M = {m}: {worst:e}");
    }
}

#[test]
fn corrected_antisymmetric_part_holds_with_zero_indices() {
    for m in [1, 2] {
        let su = build_su(m).unwrap();
        let n = su.n();
        for mu in 0..n {
            for nu in 0..n {
                let lhs = &comm(su.zeta(mu), su.beta(nu)) - &comm(su.zeta(nu), su.beta(mu));
                let rhs =
                    (&su.zeta(mu).scale_real(delta(0, nu)) - &su.zeta(nu).scale_real(delta(0, mu))).scale(paraverify::kernel::I * 2.0);
                assert!((&lhs - &rhs).max_abs() <= 1e-11, "M = {m}, ({mu}, {nu})");
            }
        }
    }
}

#[test]
fn unitary_relation_set_has_its_expected_failures() {
    for m in [1, 2] {
        let rep = verify_relation_set(&build_su(m).unwrap());
        assert!(rep.all_ok(), "M = {m}: {:?}", rep.failures().map(|e| &e.source).collect::<Vec<_>>());
        let negatives: Vec<_> = rep.entries.iter().filter(|e| e.expect == Expectation::Fail).collect();
        assert!(negatives.len() >= 3);
        for e in negatives {
            assert!(e.max_deviation >= 0.5, "{}", e.source);
        }
    }
}

#[test]
fn para_vacua_sit_in_the_half_filled_sectors() {
    for m in [1, 2] {
        let found = para_vacuum_search(&build_su(m).unwrap());
        assert_eq!(sectors_with_p(&found, 2.0), vec![m, m + 1]);
    }
}

#[test]
fn exchange_map_is_antisymmetric_and_squares_to_lambda() {
    for m in [1, 2, 3] {
        let form = BilinearFormTable::two_field(m);
        let tags = GeneratorTag::all(m);
        for &x in &tags {
            let (s1, px) = p_map(x);
            let (s2, ppx) = p_map(px);
            assert_eq!(ppx, x);
            assert_eq!(s1 * s2, Rational64::from(LAMBDA));
            for &y in &tags {
                let (sy, py) = p_map(y);
                assert_eq!(sy * form.get(x, py) + s1 * form.get(px, y), Rational64::from(0), "{x:?} {y:?}");
            }
        }
    }
}

fn matrix(r: &Realization, t: GeneratorTag) -> &ComplexMatrix {
    r.generator(t.kind.name(), &[t.index]).unwrap()
}

#[test]
fn listed_triple_products_are_double_commutators() {
    for m in [1, 2] {
        let r = build(m, 0, 1, LambdaPolicy::Auto).unwrap();
        let form = BilinearFormTable::two_field(m);
        for &(a, b, c) in &LISTED_PATTERNS {
            for i in 1..=m {
                for j in 1..=m {
                    for k in 1..=m {
                        let (x, y, z) = (GeneratorTag::new(a, i), GeneratorTag::new(b, j), GeneratorTag::new(c, k));
                        let direct = comm(&comm(matrix(&r, x), matrix(&r, y)), matrix(&r, z));
                        let symbolic = triple_product(&form, x, y, z).realize(&r);
                        assert!((&direct - &symbolic).max_abs() <= 1e-12, "{x:?} {y:?} {z:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn listed_coefficients_are_exact() {
    let m = 2;
    let form = BilinearFormTable::two_field(m);
    let t = GeneratorTag::new;
    let d = |i: usize, j: usize| Rational64::from(if i == j { 1 } else { 0 });
    let same = |got: Combination, want: Combination| assert_eq!(got.to_string(), want.to_string());
    for k in 1..=m {
        for l in 1..=m {
            for n in 1..=m {
                let mut want = Combination::zero();
                want.add(d(k, n) * -2, t(Kind::B, l));
                same(triple_product(&form, t(Kind::Ad, k), t(Kind::A, l), t(Kind::B, n)), want);

                let mut want = Combination::zero();
                want.add(d(k, l) * 2, t(Kind::B, n));
                want.add(d(k, n) * 4, t(Kind::B, l));
                same(triple_product(&form, t(Kind::B, n), t(Kind::Ad, k), t(Kind::A, l)), want);

                let mut want = Combination::zero();
                want.add(d(k, l) * -2, t(Kind::B, n));
                want.add(d(k, n) * -2, t(Kind::B, l));
                same(triple_product(&form, t(Kind::A, l), t(Kind::B, n), t(Kind::Ad, k)), want);

                let mut want = Combination::zero();
                want.add(d(k, n) * -2, t(Kind::A, l));
                same(triple_product(&form, t(Kind::Ad, k), t(Kind::A, l), t(Kind::A, n)), want);
            }
        }
    }
}

fn dkp_trilinear(x: &[ComplexMatrix]) -> f64 {
    let d = x.len();
    let mut worst = 0.0_f64;
    for mu in 0..d {
        for nu in 0..d {
            for la in 0..d {
                let lhs = &(&(&x[mu] * &x[nu]) * &x[la]) + &(&(&x[la] * &x[nu]) * &x[mu]);
                let rhs = &x[la].scale_real(delta(mu, nu)) + &x[mu].scale_real(delta(la, nu));
                worst = worst.max((&lhs - &rhs).max_abs());
            }
        }
    }
    worst
}

#[test]
fn beta_and_zeta_both_obey_the_dkp_algebra() {
    for d in [2, 4] {
        let k = build_dkp(d).unwrap();
        let beta: Vec<_> = (0..d).map(|mu| k.beta(mu).clone()).collect();
        let zeta: Vec<_> = (0..d).map(|mu| k.zeta(mu).clone()).collect();
        assert!(dkp_trilinear(&beta) <= 1e-12, "beta at d = {d}");
        assert!(dkp_trilinear(&zeta) <= 1e-12, "zeta at d = {d}");
        assert!((k.omega() - &k.omega().dagger()).max_abs() <= 1e-12);
        assert!(inconsistency_report(&k).all_ok());
    }
}

#[test]
fn two_dimensional_contraction_cancels_in_pairs() {
    let k = build_dkp(2).unwrap();
    let (b0, b1) = (k.beta(0), k.beta(1));
    let raw = paraverify::dkp::epsilon_contraction(&[b0.clone(), b1.clone()]);
    let swapped = paraverify::dkp::epsilon_contraction(&[b1.clone(), b0.clone()]);
    assert!((&raw + &swapped).max_abs() <= 1e-15);
    assert!((&raw - &comm(b0, b1)).max_abs() <= 1e-15);
}

proptest! {
    #[test]
    fn transposition_flips_the_sign(n in 2usize..6, pick in any::<prop::sample::Index>(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let perms = permutations(n);
        let mut p = perms[pick.index(perms.len())].clone();
        let (i, j) = (i.index(n), j.index(n));
        prop_assume!(i != j);
        let s = permutation_sign(&p);
        p.swap(i, j);
        prop_assert_eq!(permutation_sign(&p), -s);
    }
}
