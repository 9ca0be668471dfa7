use cofibered::exact::{int, rat, Rational};
use cofibered::fuchsian::{
    classify_trace, descend, enumerate_words, find_infinite_elliptic, find_jorgensen_pair, real_embed,
    reverify_elliptic, small_trace_elements, tree_displacement, Factor, Generator, TraceClass,
};
use cofibered::matrix::Mat2;
use cofibered::quatalg::{split_2adic, QuaternionAlgebra};
use cofibered::units::{enumerate_units, IntegralOrder};
use proptest::prelude::*;

fn m(a: i64, b: i64, c: i64, d: i64) -> Mat2<Rational> {
    Mat2::new(int(a), int(b), int(c), int(d))
}

fn modular_generators() -> Vec<Generator<Rational>> {
    vec![Generator::new("S", m(0, -1, 1, 0)).unwrap(), Generator::new("T", m(1, 1, 0, 1)).unwrap()]
}

/// Whether `[[t, -1], [1, 0]]` has a power equal to `±1` with exponent at most 12.
fn has_finite_order(t: &Rational) -> bool {
    let g = Mat2::new(t.clone(), int(-1), int(1), int(0));
    let mut p = g.clone();
    for _ in 0..12 {
        if p.b == int(0) && p.c == int(0) && p.a == p.d {
            return true;
        }
        p = p.mul(&g);
    }
    false
}

#[test]
fn modular_group_has_no_witness() {
    let gens = modular_generators();
    assert!(find_infinite_elliptic(&gens, 8, 20_000).is_none());
    assert!(find_jorgensen_pair(&gens, 3, 60).is_none());
    let with_identity = [gens.clone(), vec![Generator::new("h", m(1, 0, 0, 1)).unwrap()]].concat();
    assert!(find_infinite_elliptic(&with_identity, 6, 20_000).is_none());
}

#[test]
fn diagonal_conjugator_is_not_discrete() {
    let mut gens = modular_generators();
    gens.push(Generator::new("h", m(2, 0, 0, 1)).unwrap());
    let w = find_infinite_elliptic(&gens, 12, 200_000).expect("witness within length 12");
    assert!(w.element.word.len() <= 12);
    let t = reverify_elliptic(&gens, &w.element.word).unwrap();
    assert_eq!(t, w.trace);
    assert!(t > int(-2) && t < int(2));
    assert!(!has_finite_order(&t));
}

#[test]
fn quaternionic_descent_reverifies() {
    let alg = QuaternionAlgebra::from_ints(17, 7).unwrap();
    let h = alg.element([int(9), int(-8), rat(39, 4), rat(15, 4)]);
    let order = IntegralOrder::HalfIntegral;
    let split = split_2adic(&alg, 40).unwrap();
    let slice = enumerate_units(&alg, 10, order).unwrap();
    assert!(slice.elements.iter().all(|u| tree_displacement(&split, u).unwrap() == 0));
    assert_eq!(tree_displacement(&split, &h).unwrap(), 1);
    let units: Vec<_> = slice.non_central().cloned().collect();
    let x = small_trace_elements(&alg, 4, 8, 1).unwrap().remove(0);
    let d = descend(&x, &h, &units, order, &split).unwrap().expect("descent");
    let t = d.reverify(&h, order).unwrap();
    assert_eq!(t, x.reduced_trace());
    assert!(!has_finite_order(&t));

    let mut tampered = d.clone();
    let i = tampered.factors.iter().position(|f| matches!(f, Factor::Unit(_))).unwrap();
    tampered.factors[i] = Factor::Unit(alg.element([rat(1, 2), rat(1, 2), int(0), int(0)]));
    assert!(tampered.reverify(&h, order).is_err());
    let mut dropped = d.clone();
    dropped.factors.retain(|f| *f != Factor::H);
    assert!(dropped.reverify(&h, order).is_err());
}

fn algebra_element() -> impl Strategy<Value = [Rational; 4]> {
    prop::array::uniform4((-9i64..=9, 1i64..=4).prop_map(|(n, d)| rat(n, d)))
}

fn sl2z_matrix() -> impl Strategy<Value = Mat2<Rational>> {
    prop::collection::vec(prop::bool::ANY, 0..8).prop_map(|bits| {
        bits.iter().fold(m(1, 0, 0, 1), |acc, b| acc.mul(&if *b { m(0, -1, 1, 0) } else { m(1, 1, 0, 1) }))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_embedding_is_multiplicative(x in algebra_element(), y in algebra_element()) {
        let alg = QuaternionAlgebra::from_ints(17, 7).unwrap();
        let (p, q) = (alg.element(x), alg.element(y));
        let (ep, eq) = (real_embed(&p).unwrap(), real_embed(&q).unwrap());
        prop_assert_eq!(real_embed(&p.mul(&q)).unwrap(), ep.mul(&eq));
        prop_assert_eq!(ep.det().v().clone(), int(0));
        prop_assert_eq!(ep.det().u().clone(), p.reduced_norm());
        prop_assert_eq!(ep.trace().u().clone(), p.reduced_trace());
    }

    #[test]
    fn traces_are_conjugation_invariant(g in sl2z_matrix(), n in 1i64..6) {
        let h = m(n, 0, 0, 1);
        let h_inv = Mat2::new(rat(1, n), int(0), int(0), int(1));
        let mut gens = modular_generators();
        gens.push(Generator::new("h", h.clone()).unwrap());
        for w in enumerate_words(&gens, 3, 200) {
            prop_assert_eq!(g.mul(&w.matrix).mul(&g.adjugate()).trace(), w.trace());
            prop_assert_eq!(h.mul(&w.matrix).mul(&h_inv).trace(), w.trace());
        }
    }

    #[test]
    fn trace_classes_match_power_search(n in -60i64..=60, d in 1i64..=30) {
        let t = rat(n, d);
        let class = classify_trace(&t);
        if t <= int(-2) || t >= int(2) {
            prop_assert_eq!(class, TraceClass::NotElliptic);
        } else {
            prop_assert_eq!(class == TraceClass::FiniteOrder, has_finite_order(&t));
        }
    }
}
