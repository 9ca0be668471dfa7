//! Rational quaternion algebras `(a, b | Q)`: element arithmetic, Hilbert
//! symbols and ramification, and explicit splittings at 2 and at infinity.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{
    format_rational, is_prime, is_rational_square, is_square_padic, prime_divisors, sqrt_padic, square_class_integer,
    val_int, PAdicApprox, Rational, RealInterval, ResidueElem,
};
use crate::matrix::Mat2;

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Place::Infinity),
            t => {
                let p: u64 = t.parse().map_err(|_| Error::InvalidInput(format!("bad place {t:?}")))?;
                if !is_prime(p) {
                    return Err(Error::NotPrime(p));
                }
                Ok(Place::Prime(p))
            }
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn legendre(u: &BigInt, p: u64) -> i8 {
    let r = u.mod_floor(&BigInt::from(p)).to_u64().expect("small");
    match ResidueElem::new(r as i128, p).pow((p - 1) / 2).value() {
        1 => 1,
        0 => 0,
        _ => -1,
    }
}

fn mod8(u: &BigInt) -> u64 {
    u.mod_floor(&BigInt::from(8)).to_u64().expect("small")
}

/// Hilbert symbol `(a, b)_v`: `+1` iff `z^2 = a x^2 + b y^2` has a nonzero
/// solution over the completion at `v`.
pub fn hilbert_symbol(a: &Rational, b: &Rational, place: Place) -> Result<i8> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::Zero("Hilbert symbol arguments"));
    }
    let p = match place {
        Place::Infinity => {
            return Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 });
        }
        Place::Prime(p) if !is_prime(p) => return Err(Error::NotPrime(p)),
        Place::Prime(p) => p,
    };
    // num * den lies in the same square class and is an integer
    let (a, b) = (square_class_integer(a), square_class_integer(b));
    let pb = BigInt::from(p);
    let split = |n: &BigInt| {
        let v = val_int(n, p);
        (v as u64, n / pb.pow(v))
    };
    let (alpha, u) = split(&a);
    let (beta, v) = split(&b);
    if p == 2 {
        let eps = |x: &BigInt| u64::from(mod8(x) % 4 == 3);
        let omega = |x: &BigInt| u64::from(matches!(mod8(x), 3 | 5));
        let e = eps(&u) * eps(&v) + alpha * omega(&v) + beta * omega(&u);
        Ok(if e % 2 == 0 { 1 } else { -1 })
    } else {
        let sign = if (alpha * beta * ((p - 1) / 2)) % 2 == 0 { 1 } else { -1 };
        let lu = if beta % 2 == 0 { 1 } else { legendre(&u, p) };
        let lv = if alpha % 2 == 0 { 1 } else { legendre(&v, p) };
        Ok(sign * lu * lv)
    }
}

/// `(a, b | Q)` with basis `1, i, j, ij`, `i^2 = a`, `j^2 = b`, `ij = -ji`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuaternionAlgebra {
    a: Rational,
    b: Rational,
}

impl QuaternionAlgebra {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::Zero("structure constants"));
        }
        Ok(QuaternionAlgebra { a, b })
    }

    pub fn from_ints(a: i64, b: i64) -> Result<Self> {
        Self::new(Rational::from_integer(a.into()), Rational::from_integer(b.into()))
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// Integer structure constants, if both are integral.
    pub fn integral_constants(&self) -> Result<(i64, i64)> {
        let conv = |r: &Rational| r.is_integer().then(|| r.to_integer().to_i64()).flatten();
        match (conv(&self.a), conv(&self.b)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::NonIntegralAlgebra(format_rational(&self.a), format_rational(&self.b))),
        }
    }

    pub fn element(&self, coords: [Rational; 4]) -> Quaternion {
        Quaternion { algebra: self.clone(), coords }
    }

    pub fn from_int_coords(&self, c: [i64; 4]) -> Quaternion {
        self.element(c.map(|x| Rational::from_integer(x.into())))
    }

    pub fn one(&self) -> Quaternion {
        self.from_int_coords([1, 0, 0, 0])
    }

    pub fn basis(&self, index: usize) -> Quaternion {
        let mut c = [0; 4];
        c[index] = 1;
        self.from_int_coords(c)
    }

    /// Places where the algebra ramifies: `inf` plus every prime dividing
    /// `2 num(a) den(a) num(b) den(b)` with Hilbert symbol `-1`.
    pub fn ramified_places(&self) -> Result<Vec<Place>> {
        let mut product = BigInt::from(2);
        for r in [&self.a, &self.b] {
            product *= r.numer() * r.denom();
        }
        let mut out = Vec::new();
        for p in prime_divisors(&product)? {
            if hilbert_symbol(&self.a, &self.b, Place::Prime(p))? == -1 {
                out.push(Place::Prime(p));
            }
        }
        if hilbert_symbol(&self.a, &self.b, Place::Infinity)? == -1 {
            out.push(Place::Infinity);
        }
        assert!(out.len() % 2 == 0, "Hilbert reciprocity violated for {self}");
        Ok(out)
    }

    pub fn is_division(&self) -> Result<bool> {
        Ok(!self.ramified_places()?.is_empty())
    }

    /// Whether `Q(sqrt e)` embeds: `e` must be a non-square at every
    /// ramified place (negative at infinity).
    pub fn quadratic_embeds(&self, e: &Rational) -> Result<bool> {
        if e.is_zero() {
            return Err(Error::Zero("quadratic field parameter"));
        }
        if is_rational_square(e) {
            return Err(Error::RationalSquare(format_rational(e)));
        }
        for place in self.ramified_places()? {
            let nonsquare = match place {
                Place::Infinity => e.is_negative(),
                Place::Prime(p) => !is_square_padic(e, p, if p == 2 { 3 } else { 1 })?,
            };
            if !nonsquare {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for QuaternionAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {} | Q)", self.a, self.b)
    }
}

/// `x0 + x1 i + x2 j + x3 ij` with rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quaternion {
    algebra: QuaternionAlgebra,
    coords: [Rational; 4],
}

impl Quaternion {
    pub fn algebra(&self) -> &QuaternionAlgebra {
        &self.algebra
    }

    pub fn coords(&self) -> &[Rational; 4] {
        &self.coords
    }

    pub fn reduced_norm(&self) -> Rational {
        let [x0, x1, x2, x3] = &self.coords;
        let (a, b) = (&self.algebra.a, &self.algebra.b);
        x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3
    }

    pub fn reduced_trace(&self) -> Rational {
        &self.coords[0] * Rational::from_integer(2.into())
    }

    pub fn conjugate(&self) -> Self {
        let [x0, x1, x2, x3] = &self.coords;
        self.algebra.element([x0.clone(), -x1, -x2, -x3])
    }

    pub fn scale(&self, s: &Rational) -> Self {
        self.algebra.element(self.coords.clone().map(|x| x * s))
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.reduced_norm();
        if n.is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(self.conjugate().scale(&n.recip()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.algebra, o.algebra);
        let (a, b) = (&self.algebra.a, &self.algebra.b);
        let [x0, x1, x2, x3] = &self.coords;
        let [y0, y1, y2, y3] = &o.coords;
        let ab = a * b;
        self.algebra.element([
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - &ab * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ])
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut c = self.coords.clone();
        for (x, y) in c.iter_mut().zip(&o.coords) {
            *x += y;
        }
        self.algebra.element(c)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn is_scalar(&self) -> bool {
        self.coords[1..].iter().all(Zero::is_zero)
    }

    /// Largest `-v_p` over the coordinates, floored at 0.
    pub fn denominator_valuation(&self, p: u64) -> u32 {
        self.coords.iter().filter(|x| !x.is_zero()).map(|x| val_int(x.denom(), p)).max().unwrap_or(0)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x0, x1, x2, x3] = &self.coords;
        write!(f, "{x0} + {x1}i + {x2}j + {x3}ij")
    }
}

/// Images of `i` and `j` under a splitting, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitImages<T> {
    pub i: Mat2<T>,
    pub j: Mat2<T>,
}

/// Explicit isomorphism `D (x) Q_v ~ M2(Q_v)` at `v = 2` or `v = inf`,
/// given by `i -> diag(s, -s)`, `j -> [[0, 1], [b, 0]]` with `s^2 = a`.
#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum SplittingMap {
    Real { algebra: QuaternionAlgebra, images: SplitImages<RealInterval>, bits: u32 },
    TwoAdic { algebra: QuaternionAlgebra, images: SplitImages<PAdicApprox>, precision: u32 },
}

/// Headroom kept on exact coordinates when they enter p-adic arithmetic.
const COORD_DIGITS: u32 = 48;

impl SplittingMap {
    pub fn place(&self) -> Place {
        match self {
            SplittingMap::Real { .. } => Place::Infinity,
            SplittingMap::TwoAdic { .. } => Place::Prime(2),
        }
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        match self {
            SplittingMap::Real { algebra, .. } | SplittingMap::TwoAdic { algebra, .. } => algebra,
        }
    }

    /// The 2-adic root `s` of `a` used for the image of `i`.
    pub fn two_adic_root(&self) -> Option<&PAdicApprox> {
        match self {
            SplittingMap::TwoAdic { images, .. } => Some(&images.i.a),
            SplittingMap::Real { .. } => None,
        }
    }

    /// Image of a quaternion as a 2-adic matrix with tracked precision.
    pub fn image_two_adic(&self, q: &Quaternion) -> Result<Mat2<PAdicApprox>> {
        let SplittingMap::TwoAdic { images, .. } = self else {
            return Err(Error::InvalidInput("not a 2-adic splitting".into()));
        };
        let scalar = |x: &Rational| -> Result<PAdicApprox> { PAdicApprox::from_rational(x, 2, COORD_DIGITS) };
        let id = Mat2::new(
            PAdicApprox::from_rational(&Rational::one(), 2, COORD_DIGITS)?,
            PAdicApprox::exact_zero(2),
            PAdicApprox::exact_zero(2),
            PAdicApprox::from_rational(&Rational::one(), 2, COORD_DIGITS)?,
        );
        let ij = images.i.mul(&images.j);
        let basis = [&id, &images.i, &images.j, &ij];
        let mut acc = Mat2::new(
            PAdicApprox::exact_zero(2),
            PAdicApprox::exact_zero(2),
            PAdicApprox::exact_zero(2),
            PAdicApprox::exact_zero(2),
        );
        for (x, m) in q.coords.iter().zip(basis) {
            if x.is_zero() {
                continue;
            }
            acc = acc.add(&m.scale(&scalar(x)?));
        }
        Ok(acc)
    }

    /// Image of a quaternion as a real interval matrix.
    pub fn image_real(&self, q: &Quaternion) -> Result<Mat2<RealInterval>> {
        let SplittingMap::Real { images, bits, .. } = self else {
            return Err(Error::InvalidInput("not a real splitting".into()));
        };
        let s = |x: &Rational| RealInterval::from_rational(x, *bits);
        let one = s(&Rational::one());
        let zero = s(&Rational::zero());
        let id = Mat2::new(one.clone(), zero.clone(), zero.clone(), one);
        let ij = images.i.mul(&images.j);
        let basis = [&id, &images.i, &images.j, &ij];
        let mut acc = Mat2::new(zero.clone(), zero.clone(), zero.clone(), zero);
        for (x, m) in q.coords.iter().zip(basis) {
            acc = acc.add(&m.scale(&s(x)));
        }
        Ok(acc)
    }

    /// Minimal 2-adic valuation certified for the residuals of
    /// `I^2 - a`, `J^2 - b` and `IJ + JI`. `None` entries are exact zeros.
    pub fn two_adic_residuals(&self) -> Result<[Option<i64>; 3]> {
        let SplittingMap::TwoAdic { algebra, images, .. } = self else {
            return Err(Error::InvalidInput("not a 2-adic splitting".into()));
        };
        let scalar = |r: &Rational| -> Result<Mat2<PAdicApprox>> {
            let x = PAdicApprox::from_rational(r, 2, COORD_DIGITS)?;
            Ok(Mat2::new(x.clone(), PAdicApprox::exact_zero(2), PAdicApprox::exact_zero(2), x))
        };
        let (i, j) = (&images.i, &images.j);
        let residuals =
            [i.mul(i).sub(&scalar(&algebra.a)?), j.mul(j).sub(&scalar(&algebra.b)?), i.mul(j).add(&j.mul(i))];
        Ok(residuals.map(|m| {
            m.entries().iter().map(|e| if e.is_zero() { e.absolute_precision() } else { Some(e.valuation()) }).fold(
                None,
                |acc: Option<i64>, v| match (acc, v) {
                    (None, v) => v,
                    (a, None) => a,
                    (Some(a), Some(b)) => Some(a.min(b)),
                },
            )
        }))
    }

    /// Whether all real relations hold within the interval enclosures.
    pub fn real_relations_hold(&self) -> Result<bool> {
        let SplittingMap::Real { algebra, images, .. } = self else {
            return Err(Error::InvalidInput("not a real splitting".into()));
        };
        let (i, j) = (&images.i, &images.j);
        let i2 = i.mul(i);
        let j2 = j.mul(j);
        let anti = i.mul(j).add(&j.mul(i));
        let zero = Rational::zero();
        let diag_ok = |m: &Mat2<RealInterval>, x: &Rational| {
            m.a.contains(x) && m.d.contains(x) && m.b.contains(&zero) && m.c.contains(&zero)
        };
        Ok(diag_ok(&i2, &algebra.a) && diag_ok(&j2, &algebra.b) && diag_ok(&anti, &zero))
    }
}

/// Splits `D (x) Q_2` through `i -> diag(s, -s)` with `s = sqrt(a)` in `Q_2`.
pub fn split_2adic(algebra: &QuaternionAlgebra, precision: u32) -> Result<SplittingMap> {
    if !is_square_padic(&algebra.a, 2, precision.max(3))? {
        return Err(Error::UnsupportedSplitting(format_rational(&algebra.a)));
    }
    let s = sqrt_padic(&algebra.a, 2, precision.max(3))?;
    let one = PAdicApprox::from_rational(&Rational::one(), 2, COORD_DIGITS)?;
    let b = PAdicApprox::from_rational(&algebra.b, 2, COORD_DIGITS)?;
    let z = PAdicApprox::exact_zero(2);
    let images =
        SplitImages { i: Mat2::new(s.clone(), z.clone(), z.clone(), s.neg()), j: Mat2::new(z.clone(), one, b, z) };
    Ok(SplittingMap::TwoAdic { algebra: algebra.clone(), images, precision: s.precision() })
}

/// Real splitting for `a > 0`, with `sqrt(a)` enclosed to `bits` fractional bits.
pub fn split_real(algebra: &QuaternionAlgebra, bits: u32) -> Result<SplittingMap> {
    if !algebra.a.is_positive() {
        return Err(Error::NotRealSplit(format_rational(&algebra.a)));
    }
    let s = RealInterval::sqrt_of_rational(&algebra.a, bits);
    let z = RealInterval::from_rational(&Rational::zero(), bits);
    let one = RealInterval::from_rational(&Rational::one(), bits);
    let b = RealInterval::from_rational(&algebra.b, bits);
    let images =
        SplitImages { i: Mat2::new(s.clone(), z.clone(), z.clone(), s.neg()), j: Mat2::new(z.clone(), one, b, z) };
    Ok(SplittingMap::Real { algebra: algebra.clone(), images, bits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn h(a: i64, b: i64, place: Place) -> i8 {
        hilbert_symbol(&int(a), &int(b), place).unwrap()
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(h(-1, -1, Place::Prime(2)), -1);
        assert_eq!(h(-1, -1, Place::Infinity), -1);
        for p in [2, 3, 5, 7] {
            assert_eq!(h(1, 6, Place::Prime(p)), 1);
            assert_eq!(h(-1, -1, Place::Prime(p)) == -1, p == 2);
        }
        assert_eq!(h(2, 3, Place::Prime(3)), -1);
        assert_eq!(hilbert_symbol(&rat(1, 2), &rat(3, 7), Place::Prime(7)).unwrap(), h(2, 21, Place::Prime(7)));
        assert!(hilbert_symbol(&int(0), &int(1), Place::Prime(2)).is_err());
        assert_eq!(hilbert_symbol(&int(2), &int(1), Place::Prime(9)), Err(Error::NotPrime(9)));
    }

    #[test]
    fn ramification() {
        let hamilton = QuaternionAlgebra::from_ints(-1, -1).unwrap();
        assert_eq!(hamilton.ramified_places().unwrap(), vec![Place::Prime(2), Place::Infinity]);
        assert!(hamilton.is_division().unwrap());
        let split = QuaternionAlgebra::from_ints(1, 5).unwrap();
        assert!(split.ramified_places().unwrap().is_empty());
        assert!(!split.is_division().unwrap());
        let d = QuaternionAlgebra::from_ints(17, 7).unwrap();
        assert_eq!(d.ramified_places().unwrap(), vec![Place::Prime(7), Place::Prime(17)]);
    }

    #[test]
    fn embeddings() {
        let hamilton = QuaternionAlgebra::from_ints(-1, -1).unwrap();
        assert!(hamilton.quadratic_embeds(&int(-1)).unwrap());
        let d = QuaternionAlgebra::from_ints(17, 7).unwrap();
        assert!(!d.quadratic_embeds(&int(-3)).unwrap());
        assert!(!d.quadratic_embeds(&int(-1)).unwrap());
        let split = QuaternionAlgebra::from_ints(4, 3).unwrap();
        for e in [-1, -3, 2, 5] {
            assert!(split.quadratic_embeds(&int(e)).unwrap());
        }
        assert_eq!(d.quadratic_embeds(&int(9)), Err(Error::RationalSquare("9/1".into())));
    }

    #[test]
    fn multiplication_table() {
        let d = QuaternionAlgebra::from_ints(17, 7).unwrap();
        let (i, j, k) = (d.basis(1), d.basis(2), d.basis(3));
        assert_eq!(i.mul(&i), d.from_int_coords([17, 0, 0, 0]));
        assert_eq!(j.mul(&j), d.from_int_coords([7, 0, 0, 0]));
        assert_eq!(i.mul(&j), k);
        assert_eq!(j.mul(&i), k.neg());
        assert_eq!(k.mul(&k), d.from_int_coords([-119, 0, 0, 0]));
        let q = d.from_int_coords([3, 1, -2, 5]);
        assert_eq!(q.mul(&q.inverse().unwrap()), d.one());
        assert_eq!(q.mul(&q.conjugate()), d.element([q.reduced_norm(), int(0), int(0), int(0)]));
    }

    #[test]
    fn two_adic_splitting() {
        let d = QuaternionAlgebra::from_ints(17, 7).unwrap();
        let split = split_2adic(&d, 6).unwrap();
        let [ri, rj, ranti] = split.two_adic_residuals().unwrap();
        assert!(ri.unwrap() >= 7);
        assert!(rj.is_none_or(|v| v >= 40));
        assert!(ranti.is_none_or(|v| v >= 7));

        let trivial = QuaternionAlgebra::from_ints(1, 3).unwrap();
        let s = split_2adic(&trivial, 4).unwrap();
        assert_eq!(s.two_adic_root().unwrap().to_rational(), int(1));

        let bad = QuaternionAlgebra::from_ints(3, 5).unwrap();
        assert!(matches!(split_2adic(&bad, 6), Err(Error::UnsupportedSplitting(_))));
    }

    #[test]
    fn real_splitting() {
        let d = QuaternionAlgebra::from_ints(17, 7).unwrap();
        let split = split_real(&d, 60).unwrap();
        assert!(split.real_relations_hold().unwrap());
        let q = d.from_int_coords([33, 8, 0, 0]);
        assert!(split.image_real(&q).unwrap().det().contains(&q.reduced_norm()));
        assert!(split_real(&QuaternionAlgebra::from_ints(-1, -1).unwrap(), 10).is_err());
    }
}
