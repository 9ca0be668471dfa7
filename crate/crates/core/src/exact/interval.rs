//! Closed real intervals with dyadic endpoints and outward rounding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;

/// `mantissa * 2^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        let mut d = Dyadic { mantissa, exponent };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        while self.mantissa.is_even() {
            self.mantissa >>= 1;
            self.exponent += 1;
        }
    }

    pub fn to_rational(&self) -> Rational {
        let m = Rational::from_integer(self.mantissa.clone());
        let two = BigInt::from(2).pow(self.exponent.unsigned_abs() as u32);
        if self.exponent >= 0 {
            m * Rational::from_integer(two)
        } else {
            m / Rational::from_integer(two)
        }
    }

    fn add(&self, other: &Self) -> Self {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        Dyadic::new(a + b, e)
    }

    fn mul(&self, other: &Self) -> Self {
        Dyadic::new(&self.mantissa * &other.mantissa, self.exponent + other.exponent)
    }

    fn neg(&self) -> Self {
        Dyadic { mantissa: -&self.mantissa, exponent: self.exponent }
    }

    /// Rounds to a multiple of `2^-bits`, downward or upward.
    fn round(&self, bits: u32, up: bool) -> Self {
        let shift = -(bits as i64) - self.exponent;
        if shift <= 0 {
            return self.clone();
        }
        let div = BigInt::one() << shift as usize;
        let (q, r) = self.mantissa.div_mod_floor(&div);
        let q = if up && !r.is_zero() { q + 1 } else { q };
        Dyadic::new(q, -(bits as i64))
    }

    fn floor_of_rational(r: &Rational, bits: u32, up: bool) -> Self {
        let scaled = r.numer() << bits as usize;
        let (q, rem) = scaled.div_mod_floor(r.denom());
        let q = if up && !rem.is_zero() { q + 1 } else { q };
        Dyadic::new(q, -(bits as i64))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as usize;
        let b = &other.mantissa << (other.exponent - e) as usize;
        a.cmp(&b)
    }
}

/// `[lower, upper]`, with endpoints kept to `bits` fractional bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealInterval {
    lower: Dyadic,
    upper: Dyadic,
    bits: u32,
}

impl RealInterval {
    pub fn from_rational(r: &Rational, bits: u32) -> Self {
        RealInterval {
            lower: Dyadic::floor_of_rational(r, bits, false),
            upper: Dyadic::floor_of_rational(r, bits, true),
            bits,
        }
    }

    /// Enclosure of `sqrt(r)` for `r >= 0`.
    pub fn sqrt_of_rational(r: &Rational, bits: u32) -> Self {
        assert!(!r.is_negative(), "sqrt of a negative rational");
        // floor(sqrt(floor(x))) = floor(sqrt(x)) for x >= 0
        let scaled = (r.numer() << (2 * bits) as usize).div_floor(r.denom());
        let root = scaled.sqrt();
        let exact = &root * &root == scaled && (r.numer() << (2 * bits) as usize) == &scaled * r.denom();
        let lower = Dyadic::new(root.clone(), -(bits as i64));
        let upper = if exact { lower.clone() } else { Dyadic::new(root + 1, -(bits as i64)) };
        RealInterval { lower, upper, bits }
    }

    pub fn lower(&self) -> Rational {
        self.lower.to_rational()
    }

    pub fn upper(&self) -> Rational {
        self.upper.to_rational()
    }

    pub fn width(&self) -> Rational {
        self.upper() - self.lower()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    fn rounded(lower: Dyadic, upper: Dyadic, bits: u32) -> Self {
        RealInterval { lower: lower.round(bits, false), upper: upper.round(bits, true), bits }
    }

    pub fn add(&self, other: &Self) -> Self {
        let bits = self.bits.min(other.bits);
        Self::rounded(self.lower.add(&other.lower), self.upper.add(&other.upper), bits)
    }

    pub fn neg(&self) -> Self {
        RealInterval { lower: self.upper.neg(), upper: self.lower.neg(), bits: self.bits }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let bits = self.bits.min(other.bits);
        let products = [
            self.lower.mul(&other.lower),
            self.lower.mul(&other.upper),
            self.upper.mul(&other.lower),
            self.upper.mul(&other.upper),
        ];
        let lo = products.iter().min().expect("nonempty").clone();
        let hi = products.iter().max().expect("nonempty").clone();
        Self::rounded(lo, hi, bits)
    }
}

impl fmt::Display for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower(), self.upper())
    }
}

impl std::ops::Add for &RealInterval {
    type Output = RealInterval;
    fn add(self, o: &RealInterval) -> RealInterval {
        RealInterval::add(self, o)
    }
}

impl std::ops::Sub for &RealInterval {
    type Output = RealInterval;
    fn sub(self, o: &RealInterval) -> RealInterval {
        RealInterval::sub(self, o)
    }
}

impl std::ops::Mul for &RealInterval {
    type Output = RealInterval;
    fn mul(self, o: &RealInterval) -> RealInterval {
        RealInterval::mul(self, o)
    }
}

impl std::ops::Neg for &RealInterval {
    type Output = RealInterval;
    fn neg(self) -> RealInterval {
        RealInterval::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};

    #[test]
    fn sqrt_enclosure() {
        let s = RealInterval::sqrt_of_rational(&int(17), 40);
        let sq = s.mul(&s);
        assert!(sq.contains(&int(17)));
        assert!(s.width() <= rat(1, 1 << 39));
        let four = RealInterval::sqrt_of_rational(&int(16), 10);
        assert_eq!(four.lower(), int(4));
        assert_eq!(four.upper(), int(4));
    }

    #[test]
    fn rounding_is_outward() {
        let third = RealInterval::from_rational(&rat(1, 3), 8);
        assert!(third.contains(&rat(1, 3)));
        let sum = third.add(&third).add(&third);
        assert!(sum.contains(&int(1)));
        let neg = third.neg().mul(&third);
        assert!(neg.contains(&rat(-1, 9)));
    }
}
