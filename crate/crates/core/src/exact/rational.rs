//! Rational helpers on top of `num-rational`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical `"num/den"` text form used in certificates.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"n"`, `"n/d"` or `"-n/d"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Exponent of `p` in a nonzero integer.
pub fn val_int(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a rational; `None` for zero.
pub fn val_rational(r: &Rational, p: u64) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    Some(val_int(r.numer(), p) as i64 - val_int(r.denom(), p) as i64)
}

/// Splits a nonzero rational as `p^v * u` with `u` a p-adic unit.
pub fn split_valuation(r: &Rational, p: u64) -> (i64, Rational) {
    let v = val_rational(r, p).expect("nonzero");
    (v, r / pow_rational(p, v))
}

pub fn pow_rational(p: u64, e: i64) -> Rational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from_integer(base)
    } else {
        Rational::new(BigInt::one(), base)
    }
}

/// Reduces a p-adically integral rational modulo `modulus` (a power of p).
pub fn reduce_mod(r: &Rational, modulus: u64) -> Option<u64> {
    let m = BigInt::from(modulus);
    let den = r.denom().mod_floor(&m);
    let inv = mod_inverse(&den, &m)?;
    let num = r.numer().mod_floor(&m);
    (num * inv).mod_floor(&m).to_u64()
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Integer square root if `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

pub fn is_rational_square(r: &Rational) -> bool {
    !r.is_negative() && exact_sqrt(r.numer()).is_some() && exact_sqrt(r.denom()).is_some()
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Distinct prime divisors of a nonzero integer, ascending.
pub fn prime_divisors(n: &BigInt) -> Result<Vec<u64>> {
    let mut n: BigUint = n.magnitude().clone();
    let mut out = Vec::new();
    if n.is_zero() {
        return Err(Error::Zero("integer to factor"));
    }
    let mut d = 2u64;
    while d <= TRIAL_LIMIT {
        let bd = BigUint::from(d);
        if &bd * &bd > n {
            break;
        }
        if (&n % &bd).is_zero() {
            out.push(d);
            while (&n % &bd).is_zero() {
                n /= &bd;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        let limit = BigUint::from(TRIAL_LIMIT);
        if n > &limit * &limit {
            return Err(Error::FactorizationTooLarge(n.to_string()));
        }
        out.push(n.to_u64().expect("below 10^12"));
    }
    out.sort_unstable();
    Ok(out)
}

/// Integer in the same square class as `r`: `num * den`.
pub fn square_class_integer(r: &Rational) -> BigInt {
    r.numer() * r.denom()
}

pub fn sign_of(r: &Rational) -> Sign {
    if r.is_zero() {
        Sign::NoSign
    } else if r.is_negative() {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("-1/2").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), rat(3, 2));
        assert_eq!(format_rational(&rat(4, -6)), "-2/3");
        assert_eq!(format_rational(&int(0)), "0/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn valuations() {
        assert_eq!(val_rational(&rat(12, 5), 2), Some(2));
        assert_eq!(val_rational(&rat(3, 8), 2), Some(-3));
        assert_eq!(val_rational(&int(0), 2), None);
        assert_eq!(reduce_mod(&rat(1, 3), 8), Some(3));
    }

    #[test]
    fn factoring() {
        assert_eq!(prime_divisors(&BigInt::from(-360)).unwrap(), vec![2, 3, 5]);
        assert_eq!(prime_divisors(&BigInt::from(1)).unwrap(), Vec::<u64>::new());
        assert_eq!(prime_divisors(&BigInt::from(999_983u64 * 2)).unwrap(), vec![2, 999_983]);
        assert!(is_prime(2) && is_prime(13) && !is_prime(1) && !is_prime(91));
    }
}
