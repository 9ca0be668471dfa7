//! Fixed-precision p-adic numbers and square roots by Hensel lifting.
//!
//! A nonzero approximation is `p^valuation * u` where the unit `u` is known
//! modulo `p^precision`. Zero is flagged separately; a zero produced by
//! cancellation remembers the absolute precision it is known to.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{is_prime, reduce_mod, split_valuation, Rational};
use super::residue::ResidueElem;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicApprox {
    p: u64,
    /// For zero: the absolute precision (`i64::MAX` when exact).
    valuation: i64,
    unit_part: Option<ResidueElem>,
    precision: u32,
}

fn modulus_for(p: u64, precision: u32) -> Result<u64> {
    let m = (p as u128).checked_pow(precision).filter(|m| *m < (1u128 << 62));
    m.map(|m| m as u64).ok_or(Error::PrecisionTooHigh(precision))
}

impl PAdicApprox {
    pub fn exact_zero(p: u64) -> Self {
        PAdicApprox { p, valuation: i64::MAX, unit_part: None, precision: 0 }
    }

    fn zero_to(p: u64, absolute: i64) -> Self {
        PAdicApprox { p, valuation: absolute, unit_part: None, precision: 0 }
    }

    /// Approximates `r` with `precision` digits of unit part.
    pub fn from_rational(r: &Rational, p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if r.is_zero() {
            return Ok(Self::exact_zero(p));
        }
        let m = modulus_for(p, precision.max(1))?;
        let (v, u) = split_valuation(r, p);
        let unit = reduce_mod(&u, m).expect("unit is invertible");
        Ok(PAdicApprox {
            p,
            valuation: v,
            unit_part: Some(ResidueElem::new(unit as i128, m)),
            precision: precision.max(1),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.unit_part.is_none()
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn unit_part(&self) -> Option<ResidueElem> {
        self.unit_part
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Largest `A` with the value known modulo `p^A`; `None` when exact zero.
    pub fn absolute_precision(&self) -> Option<i64> {
        match self.unit_part {
            None if self.valuation == i64::MAX => None,
            None => Some(self.valuation),
            Some(_) => Some(self.valuation + self.precision as i64),
        }
    }

    /// The rational `p^v * unit` with unit's least nonnegative representative.
    pub fn to_rational(&self) -> Rational {
        match self.unit_part {
            None => Rational::zero(),
            Some(u) => {
                super::rational::pow_rational(self.p, self.valuation) * Rational::from_integer(BigInt::from(u.value()))
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        match (self.unit_part, other.unit_part) {
            (Some(a), Some(b)) => {
                let n = self.precision.min(other.precision);
                let m = modulus_for(self.p, n).expect("smaller than inputs");
                PAdicApprox {
                    p: self.p,
                    valuation: self.valuation + other.valuation,
                    unit_part: Some(a.reduce(m).mul(b.reduce(m))),
                    precision: n,
                }
            }
            (None, None) => match (self.absolute_precision(), other.absolute_precision()) {
                (None, _) | (_, None) => Self::exact_zero(self.p),
                (Some(x), Some(y)) => Self::zero_to(self.p, x + y),
            },
            (None, Some(_)) => self.scale_zero(other.valuation),
            (Some(_), None) => other.scale_zero(self.valuation),
        }
    }

    fn scale_zero(&self, by: i64) -> Self {
        match self.absolute_precision() {
            None => Self::exact_zero(self.p),
            Some(a) => Self::zero_to(self.p, a + by),
        }
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.unit_part = self.unit_part.map(ResidueElem::neg);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let p = self.p;
        let absolute = match (self.absolute_precision(), other.absolute_precision()) {
            (None, None) => return Self::exact_zero(p),
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.min(b),
        };
        let terms: Vec<(i64, u64)> =
            [self, other].iter().filter_map(|x| x.unit_part.map(|u| (x.valuation, u.value()))).collect();
        let Some(vmin) = terms.iter().map(|t| t.0).min() else {
            return Self::zero_to(p, absolute);
        };
        if absolute <= vmin {
            return Self::zero_to(p, absolute);
        }
        let digits = (absolute - vmin) as u32;
        let m = modulus_for(p, digits).expect("within input precision");
        let mut w = ResidueElem::new(0, m);
        for (v, u) in terms {
            let shift = ResidueElem::new(p as i128, m).pow((v - vmin) as u64);
            w = w.add(ResidueElem::new(u as i128, m).mul(shift));
        }
        if w.value() == 0 {
            return Self::zero_to(p, absolute);
        }
        let mut t = 0u32;
        let mut value = w.value();
        while value.is_multiple_of(p) {
            value /= p;
            t += 1;
        }
        let precision = digits - t;
        let m2 = modulus_for(p, precision).expect("smaller");
        PAdicApprox { p, valuation: vmin + t as i64, unit_part: Some(ResidueElem::new(value as i128, m2)), precision }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl fmt::Display for PAdicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit_part {
            None => match self.absolute_precision() {
                None => write!(f, "0"),
                Some(a) => write!(f, "O({}^{})", self.p, a),
            },
            Some(u) => write!(f, "{}^{} * {}", self.p, self.valuation, u),
        }
    }
}

fn check_args(r: &Rational, p: u64, precision: u32) -> Result<()> {
    if r.is_zero() {
        return Err(Error::Zero("p-adic square test needs r != 0"));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let minimum = if p == 2 { 3 } else { 1 };
    if precision < minimum {
        return Err(Error::PrecisionTooLow { p, precision, minimum });
    }
    Ok(())
}

/// Unit part of `r` (after removing `p^v`) reduced modulo `m`.
fn unit_residue(r: &Rational, p: u64, m: u64) -> (i64, u64) {
    let (v, u) = split_valuation(r, p);
    (v, reduce_mod(&u, m).expect("unit"))
}

/// Whether `r` is a square in `Q_p`: even valuation and a square unit part
/// (quadratic residue mod p for odd p, `1 mod 8` for p = 2).
pub fn is_square_padic(r: &Rational, p: u64, precision: u32) -> Result<bool> {
    check_args(r, p, precision)?;
    let m = if p == 2 { 8 } else { p };
    let (v, u) = unit_residue(r, p, m);
    if v % 2 != 0 {
        return Ok(false);
    }
    Ok(if p == 2 { u == 1 } else { ResidueElem::new(u as i128, p).pow((p - 1) / 2).value() == 1 })
}

/// Hensel-lifted square root of a p-adic square.
///
/// The canonical root is the one whose residue mod p (mod 8 for p = 2) is
/// the smallest nonnegative one. For odd p the unit part is returned mod
/// `p^precision` and squares to `r`'s unit mod `p^precision`. For p = 2 the
/// root is pinned one digit further, mod `2^(precision+1)`, which makes its
/// square agree with `r` mod `2^(precision+2)` (after the valuation shift).
pub fn sqrt_padic(r: &Rational, p: u64, precision: u32) -> Result<PAdicApprox> {
    if !is_square_padic(r, p, precision)? {
        return Err(Error::NotASquare(r.to_string(), p));
    }
    let (out_digits, square_digits) = if p == 2 { (precision + 1, precision + 2) } else { (precision, precision) };
    let m_square = modulus_for(p, square_digits)?;
    let (v, u) = unit_residue(r, p, m_square);
    let target = ResidueElem::new(u as i128, m_square);

    let root = if p == 2 {
        // Residues mod 8 of the two true roots are those x with x^2 = u mod 16.
        let u16 = u % 16;
        let base = (1u64..8).step_by(2).find(|x| (x * x) % 16 == u16).expect("u = 1 mod 8");
        let mut x = base;
        for n in 3..out_digits {
            let next = 1u64 << (n + 2);
            let modulus = 1u128 << n;
            let sq = (x as u128 * x as u128) % next as u128;
            if sq != (u as u128) % next as u128 {
                x += modulus as u64;
            }
        }
        x
    } else {
        let base = (1..p).find(|x| (x * x) % p == u % p).expect("quadratic residue");
        let mut x = ResidueElem::new(base as i128, m_square);
        let two = ResidueElem::new(2, m_square);
        for _ in 0..64 {
            let err = x.mul(x).sub(target);
            if err.value() == 0 {
                break;
            }
            let inv = two.mul(x).inv().expect("x is a unit");
            x = x.sub(err.mul(inv));
        }
        x.value()
    };
    let m_out = modulus_for(p, out_digits)?;
    Ok(PAdicApprox {
        p,
        valuation: v / 2,
        unit_part: Some(ResidueElem::new(root as i128, m_out)),
        precision: out_digits,
    })
}

/// Representative integer of a p-adic approximation with nonnegative valuation.
pub fn integer_representative(x: &PAdicApprox) -> Option<BigInt> {
    let v = x.valuation().to_u32()?;
    let u = x.unit_part()?;
    Some(BigInt::from(x.p()).pow(v) * BigInt::from(u.value()))
}

impl std::ops::Add for &PAdicApprox {
    type Output = PAdicApprox;
    fn add(self, o: &PAdicApprox) -> PAdicApprox {
        PAdicApprox::add(self, o)
    }
}

impl std::ops::Sub for &PAdicApprox {
    type Output = PAdicApprox;
    fn sub(self, o: &PAdicApprox) -> PAdicApprox {
        PAdicApprox::sub(self, o)
    }
}

impl std::ops::Mul for &PAdicApprox {
    type Output = PAdicApprox;
    fn mul(self, o: &PAdicApprox) -> PAdicApprox {
        PAdicApprox::mul(self, o)
    }
}

impl std::ops::Neg for &PAdicApprox {
    type Output = PAdicApprox;
    fn neg(self) -> PAdicApprox {
        PAdicApprox::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat, val_rational};

    #[test]
    fn square_examples() {
        assert!(is_square_padic(&int(17), 2, 3).unwrap());
        assert!(is_square_padic(&int(4), 2, 3).unwrap());
        assert!(!is_square_padic(&int(3), 2, 3).unwrap());
        assert!(!is_square_padic(&int(2), 2, 3).unwrap());
        assert!(is_square_padic(&rat(1, 4), 2, 3).unwrap());
        assert!(is_square_padic(&int(-1), 5, 1).unwrap());
        assert!(!is_square_padic(&int(-1), 7, 1).unwrap());
    }

    #[test]
    fn square_errors() {
        assert_eq!(is_square_padic(&int(0), 2, 3), Err(Error::Zero("p-adic square test needs r != 0")));
        assert_eq!(is_square_padic(&int(5), 4, 3), Err(Error::NotPrime(4)));
        assert!(matches!(is_square_padic(&int(17), 2, 2), Err(Error::PrecisionTooLow { .. })));
        assert!(matches!(sqrt_padic(&int(3), 2, 5), Err(Error::NotASquare(..))));
    }

    #[test]
    fn sqrt_examples() {
        let s = sqrt_padic(&int(17), 2, 5).unwrap();
        let sr = s.to_rational();
        assert!(val_rational(&(&sr * &sr - int(17)), 2).unwrap() >= 7);

        let one = sqrt_padic(&int(1), 2, 5).unwrap();
        assert_eq!(one.to_rational(), int(1));

        let three = sqrt_padic(&int(9), 5, 4).unwrap();
        // smallest base residue of x^2 = 4 mod 5 is 2, i.e. the root -3
        assert_eq!(three.unit_part().unwrap().value() % 5, 2);
        let t = three.to_rational();
        assert!(val_rational(&(&t * &t - int(9)), 5).unwrap() >= 4);
    }

    #[test]
    fn sqrt_negative_valuation() {
        let s = sqrt_padic(&rat(17, 16), 2, 6).unwrap();
        assert_eq!(s.valuation(), -2);
        let sr = s.to_rational();
        assert!(val_rational(&(&sr * &sr - rat(17, 16)), 2).unwrap() >= 6 - 4);
    }

    #[test]
    fn arithmetic_tracks_precision() {
        let a = PAdicApprox::from_rational(&int(12), 2, 6).unwrap();
        let b = PAdicApprox::from_rational(&int(4), 2, 6).unwrap();
        let d = a.sub(&b);
        assert_eq!(d.valuation(), 3);
        assert_eq!(d.absolute_precision(), Some(8));
        let z = a.sub(&a);
        assert!(z.is_zero());
        assert_eq!(z.absolute_precision(), Some(8));
        let prod = a.mul(&b);
        assert_eq!(prod.to_rational(), int(48));
        assert_eq!(PAdicApprox::exact_zero(2).absolute_precision(), None);
    }
}
