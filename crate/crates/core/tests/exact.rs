mod common;

use cofibered::exact::{is_square_padic, rat, sqrt_padic, val_rational, PAdicApprox, Rational, RealInterval};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..10_000).prop_map(|(n, d)| rat(n, d))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    small_rational().prop_filter("nonzero", |r| !r.is_zero())
}

proptest! {
    #[test]
    fn addition_is_exact(a in small_rational(), b in small_rational()) {
        prop_assert_eq!((&a + &b) - &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&a * &b / &b, a);
        }
    }

    #[test]
    fn padic_squares_match_residue_search(n in 1i64..5000, d in 1i64..5000, neg in any::<bool>(), pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let r = rat(if neg { -n } else { n }, d);
        // n/d has the square class of n*d
        let mut s = (r.numer() * r.denom()).abs();
        let mut v = 0;
        while (&s % p).is_zero() {
            s /= p;
            v += 1;
        }
        let sign = if r.is_negative() { -1i64 } else { 1 };
        let e = common::root_exponent(p);
        let m = p.pow(e) as i64;
        let u = (sign * (s % m).to_string().parse::<i64>().unwrap()).rem_euclid(m) as u64;
        let expected = v % 2 == 0 && common::has_root_mod(u, p, e);
        prop_assert_eq!(is_square_padic(&r, p, 10).unwrap(), expected);
    }

    #[test]
    fn hensel_roots_square_to_input(r in nonzero_rational(), pi in 0usize..4, prec in 3u32..12) {
        let p = [2u64, 3, 5, 7][pi];
        prop_assume!(is_square_padic(&r, p, prec).unwrap());
        let s = sqrt_padic(&r, p, prec).unwrap().to_rational();
        let err = &s * &s - &r;
        if !err.is_zero() {
            let v = val_rational(&err, p).unwrap();
            prop_assert!(v >= prec as i64 + val_rational(&r, p).unwrap());
        }
    }

    #[test]
    fn intervals_contain_exact_values(a in small_rational(), b in small_rational(), c in small_rational(), bits in 4u32..40) {
        let iv = |x: &Rational| RealInterval::from_rational(x, bits);
        let composed = iv(&a).mul(&iv(&b)).sub(&iv(&c)).add(&iv(&a).mul(&iv(&c)));
        prop_assert!(composed.contains(&(&a * &b - &c + &a * &c)));
        let r = a.abs();
        let root = RealInterval::sqrt_of_rational(&r, bits);
        prop_assert!(root.lower() * root.lower() <= r && r <= root.upper() * root.upper());
    }

    #[test]
    fn padic_products_track_precision(a in nonzero_rational(), b in nonzero_rational()) {
        let x = PAdicApprox::from_rational(&a, 3, 8).unwrap();
        let y = PAdicApprox::from_rational(&b, 3, 8).unwrap();
        let exact = PAdicApprox::from_rational(&(&a * &b), 3, 8).unwrap();
        prop_assert_eq!(x.mul(&y), exact);
    }
}
