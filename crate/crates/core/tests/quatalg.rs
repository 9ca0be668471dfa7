mod common;

use cofibered::exact::{int, prime_divisors, rat, Rational};
use cofibered::quatalg::{hilbert_symbol, split_2adic, split_real, Place, QuaternionAlgebra};
use num_traits::Signed;
use proptest::prelude::*;

fn nonzero(bound: i64) -> impl Strategy<Value = Rational> {
    (-bound..=bound, 1..=bound).prop_filter("nonzero", |(n, _)| *n != 0).prop_map(|(n, d)| rat(n, d))
}

fn places_of(a: &Rational, b: &Rational) -> Vec<Place> {
    let n = (a.numer() * a.denom()) * (b.numer() * b.denom()) * 2u32;
    let mut ps: Vec<Place> = prime_divisors(&n.abs()).unwrap().into_iter().map(Place::Prime).collect();
    ps.push(Place::Infinity);
    ps
}

fn coords() -> impl Strategy<Value = [Rational; 4]> {
    prop::array::uniform4((-50i64..50, 1i64..6).prop_map(|(n, d)| rat(n, d)))
}

proptest! {
    #[test]
    fn reduced_norm_is_multiplicative(a in nonzero(30), b in nonzero(30), x in coords(), y in coords()) {
        let alg = QuaternionAlgebra::new(a, b).unwrap();
        let (p, q) = (alg.element(x), alg.element(y));
        prop_assert_eq!(p.mul(&q).reduced_norm(), p.reduced_norm() * q.reduced_norm());
        prop_assert_eq!(p.add(&p.conjugate()).coords()[0].clone(), p.reduced_trace());
    }

    #[test]
    fn hilbert_symmetric_and_bilinear(a in nonzero(40), b1 in nonzero(40), b2 in nonzero(40), pi in 0usize..7) {
        let place = if pi == 6 { Place::Infinity } else { Place::Prime(common::primes()[pi]) };
        let s = |x: &Rational, y: &Rational| hilbert_symbol(x, y, place).unwrap();
        prop_assert_eq!(s(&a, &b1), s(&b1, &a));
        prop_assert_eq!(s(&a, &(&b1 * &b2)), s(&a, &b1) * s(&a, &b2));
        prop_assert_eq!(s(&a, &(&b1 * &b1)), 1);
    }

    #[test]
    fn product_formula(a in nonzero(500), b in nonzero(500)) {
        let product: i8 = places_of(&a, &b).into_iter().map(|v| hilbert_symbol(&a, &b, v).unwrap()).product();
        prop_assert_eq!(product, 1);
    }

    #[test]
    fn splittings_satisfy_relations(d in (1i64..400).prop_map(|k| 8 * k + 1), b in -60i64..60) {
        prop_assume!(b != 0 && !cofibered::exact::is_rational_square(&int(d)));
        let alg = QuaternionAlgebra::from_ints(d, b).unwrap();
        let split = split_2adic(&alg, 24).unwrap();
        for r in split.two_adic_residuals().unwrap() {
            prop_assert!(r.is_none_or(|v| v >= 24), "residual valuation {:?}", r);
        }
        prop_assert!(split_real(&alg, 64).unwrap().real_relations_hold().unwrap());
    }
}

#[test]
fn hilbert_matches_conic_oracle_small() {
    let vals: Vec<Rational> = (-8i64..=8)
        .flat_map(|n| (1i64..=8).map(move |d| (n, d)))
        .filter(|(n, _)| *n != 0)
        .map(|(n, d)| rat(n, d))
        .collect();
    for p in common::primes() {
        for a in &vals {
            for b in &vals {
                assert_eq!(
                    hilbert_symbol(a, b, Place::Prime(p)).unwrap(),
                    common::hilbert_oracle(a, b, p),
                    "({a}, {b})_{p}"
                );
            }
        }
    }
}

#[test]
fn conic_oracle_known_values() {
    // Hamilton quaternions ramify at 2 only among finite places
    assert!(!common::conic_solvable(-1, -1, 2, 8));
    assert!(common::conic_solvable(-1, -1, 3, 8));
    assert!(!common::conic_solvable(7, 17, 7, 8));
    assert!(common::conic_solvable(17, 7, 2, 8));
}
