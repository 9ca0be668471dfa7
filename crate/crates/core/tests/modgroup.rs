mod common;

use cofibered::modgroup::{closure, enumerate_group, group_order, index, ResidueMatrix};
use proptest::prelude::*;

fn prime_powers_to(limit: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for p in (2..=limit).filter(|n| (2..*n).all(|f| n % f != 0)) {
        let mut k = 1;
        while p.pow(k) <= limit {
            out.push((p, k));
            k += 1;
        }
    }
    out
}

#[test]
fn orders_match_exhaustive_count() {
    for (p, k) in prime_powers_to(64) {
        let n = p.pow(k);
        let expected = common::sl2_count(n);
        assert_eq!(group_order(p, k).unwrap(), expected as u128, "p^k = {n}");
        if n <= 32 {
            assert_eq!(enumerate_group(p, k).unwrap().order(), expected, "enumeration at {n}");
        }
    }
}

#[test]
fn small_levels() {
    let g = enumerate_group(2, 1).unwrap();
    assert_eq!(g.order(), 6);
    assert!(!g.is_abelian());
    // an element of order 3 and one of order 2 that do not commute
    let r = ResidueMatrix::new([0, 1, 1, 1], 2).unwrap();
    let s = ResidueMatrix::new([0, 1, 1, 0], 2).unwrap();
    assert!(r.mul(&r).mul(&r).is_identity());
    assert_ne!(r.mul(&s), s.mul(&r));
    assert_eq!(enumerate_group(2, 2).unwrap().order(), 48);
}

/// A random element of SL2(Z/m) with `a` a unit.
fn element(m: u64) -> impl Strategy<Value = ResidueMatrix> {
    (0..m, 0..m, 0..m).prop_filter_map("a must be a unit", move |(a, b, c)| {
        let ainv = (1..m).find(|x| a * x % m == 1 % m)?;
        let d = (1 + b * c) % m * ainv % m;
        Some(ResidueMatrix::new([a, b, c, d].map(i128::from), m).unwrap())
    })
}

fn level() -> impl Strategy<Value = (u64, u32)> {
    prop::sample::select(vec![(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (7, 1)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closures_are_subgroups(
        (p, k, gens) in level().prop_flat_map(|(p, k)| (Just(p), Just(k), prop::collection::vec(element(p.pow(k)), 1..3)))
    ) {
        let h = closure(&gens).unwrap();
        prop_assert!(gens.iter().all(|g| h.contains(g)));
        prop_assert!(h.is_closed());
        let g = enumerate_group(p, k).unwrap();
        prop_assert_eq!(g.order() % h.order(), 0);
        prop_assert_eq!(index(&h, &g).unwrap() * h.order(), g.order());
        let again = closure(&h.elements().copied().collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(again.order(), h.order());
    }

    #[test]
    fn multiplication_is_associative(x in element(27), y in element(27), z in element(27)) {
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert!(x.mul(&x.inverse()).is_identity());
        prop_assert_eq!(x.mul(&y).reduce(9), x.reduce(9).mul(&y.reduce(9)));
    }
}
