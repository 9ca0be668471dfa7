mod common;

use cofibered::exact::{int, rat};
use cofibered::quatalg::{split_2adic, QuaternionAlgebra};
use cofibered::units::{
    enumerate_units, find_example_algebra, reduce_quaternion, splitting_precision, surjects_at_level, torsion_check,
    unit_order, IntegralOrder,
};
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

fn doubled(q: &cofibered::quatalg::Quaternion) -> [i64; 4] {
    q.coords().clone().map(|x| (x * int(2)).to_integer().to_i64().unwrap())
}

#[test]
fn slices_match_cube_search() {
    let cases = [
        (17, 7, 6, IntegralOrder::HalfIntegral),
        (17, 7, 6, IntegralOrder::Standard),
        (5, 7, 5, IntegralOrder::HalfIntegral),
        (-1, -1, 3, IntegralOrder::Standard),
        (-3, -7, 4, IntegralOrder::Standard),
        (3, 5, 4, IntegralOrder::Standard),
        (-3, -1, 4, IntegralOrder::HalfIntegral),
    ];
    for (a, b, height, order) in cases {
        let alg = QuaternionAlgebra::from_ints(a, b).unwrap();
        let slice = enumerate_units(&alg, height, order).unwrap();
        let mut got: Vec<[i64; 4]> = slice.elements.iter().map(doubled).collect();
        got.sort();
        let expected = common::units_by_cube(a, b, height as i64, order == IntegralOrder::HalfIntegral);
        assert_eq!(got, expected, "({a}, {b}) height {height} {order}");
        assert!(slice.elements.iter().all(|q| q.reduced_norm().is_one() && order.contains(q)));
    }
}

#[test]
fn slices_grow_with_height() {
    let alg = QuaternionAlgebra::from_ints(17, 7).unwrap();
    let mut prev: Vec<_> = Vec::new();
    for height in 1..=8 {
        let slice = enumerate_units(&alg, height, IntegralOrder::HalfIntegral).unwrap();
        assert!(prev.iter().all(|q| slice.elements.contains(q)), "height {height}");
        prev = slice.elements;
    }
    assert!(prev.len() > 2);
}

#[test]
fn surjectivity_is_monotone_in_height() {
    let alg = QuaternionAlgebra::from_ints(17, 7).unwrap();
    for k in 1..=2 {
        let mut prev = 0;
        for height in [5, 10, 20] {
            let s = surjects_at_level(&enumerate_units(&alg, height, IntegralOrder::HalfIntegral).unwrap(), k).unwrap();
            assert!(s.image.order() >= prev);
            assert_eq!(s.full_order % s.image.order(), 0);
            prev = s.image.order();
        }
    }
    let s = surjects_at_level(&enumerate_units(&alg, 20, IntegralOrder::HalfIntegral).unwrap(), 1).unwrap();
    assert!(s.surjective);
    assert_eq!(s.achieved_index(), 1);
}

#[test]
fn torsion_in_the_hamilton_quaternions() {
    let h = QuaternionAlgebra::from_ints(-1, -1).unwrap();
    let r = torsion_check(&h, 1, IntegralOrder::Standard).unwrap();
    assert!(r.embeds_minus_one);
    assert!(!r.torsion_free());
    let i = h.from_int_coords([0, 1, 0, 0]);
    assert!(r.witnesses.iter().any(|w| w.unit == i && w.order == 4));
    assert_eq!(unit_order(&i), Some(4));
    // (-1 + i + j + ij)/2 has order 3 in the Hurwitz order
    let w = h.element([rat(-1, 2), rat(1, 2), rat(1, 2), rat(1, 2)]);
    assert_eq!(unit_order(&w), Some(3));
    let mut p = h.one();
    for _ in 0..3 {
        p = p.mul(&w);
    }
    assert_eq!(p, h.one());
}

#[test]
fn example_algebra_is_torsion_free() {
    let ex = find_example_algebra(17, 100).unwrap();
    let r = torsion_check(&ex.algebra, 10, IntegralOrder::HalfIntegral).unwrap();
    assert!(r.torsion_free());
    assert!(r.witnesses.is_empty());
    assert!(r.slice_size > 2);
}

fn unit_pairs() -> impl Strategy<Value = (usize, usize, u32)> {
    (0usize..1000, 0usize..1000, 1u32..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduction_is_a_homomorphism((x, y, k) in unit_pairs()) {
        let alg = QuaternionAlgebra::from_ints(17, 7).unwrap();
        let slice = enumerate_units(&alg, 12, IntegralOrder::HalfIntegral).unwrap();
        let (p, q) = (&slice.elements[x % slice.len()], &slice.elements[y % slice.len()]);
        let split = split_2adic(&alg, splitting_precision(k)).unwrap();
        let (rp, rq) = (reduce_quaternion(&split, p, k).unwrap(), reduce_quaternion(&split, q, k).unwrap());
        let [a, b, c, d] = rp.entries();
        let m = 1u64 << k;
        prop_assert_eq!((a * d + m - b * c % m) % m, 1 % m);
        prop_assert_eq!(reduce_quaternion(&split, &p.mul(q), k).unwrap(), rp.mul(&rq));
        prop_assert!(reduce_quaternion(&split, &p.conjugate(), k).unwrap().mul(&rp).is_identity());
    }
}
