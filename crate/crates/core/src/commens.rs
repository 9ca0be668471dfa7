//! Intersections `Gamma ∩ h Gamma h^-1` at finite 2-power (or prime-power)
//! level, computed by scanning `SL2(Z/p^K)`.
//!
//! For a conjugator `h` with local image `M`, let `H = p^e M` be primitive
//! integral and `delta = v_p(det H)`. Then `h^-1 x h = adj(H) x H / det H`, so
//! `x` is in the intersection exactly when `adj(H) x H = 0 mod p^delta`. This
//! depends only on `x mod p^delta`, and `delta <= K` for the working level.

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, int, mod_inverse, prime_divisors, val_int, val_rational, PAdicApprox, Rational};
use crate::matrix::Mat2;
use crate::modgroup::{enumerate_group, ResidueMatrix, SubgroupTable};
use crate::quatalg::{split_2adic, Quaternion, QuaternionAlgebra, SplittingMap};

/// Digits of 2-adic splitting used to localize quaternionic conjugators.
const LOCAL_PRECISION: u32 = 40;

#[derive(Clone, Debug, PartialEq)]
pub enum Conjugator {
    Matrix(Mat2<Rational>),
    Quaternion(Quaternion),
}

/// Integral data deciding membership, for one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalConjugator {
    pub p: u64,
    /// `H = p^shift * M` is primitive integral.
    pub shift: i64,
    /// `v_p(det H)`.
    pub delta: u32,
    /// `H mod p^delta`, row-major.
    pub h: [u64; 4],
    /// Largest `-v_p` over the entries of `M` and of `M^-1`, floored at 0.
    pub denominator_valuation: u32,
}

impl LocalConjugator {
    /// Whether `h^-1 x h` is p-integral, for any lift of `x`.
    pub fn conjugate_is_integral(&self, x: &ResidueMatrix) -> bool {
        if self.delta == 0 {
            return true;
        }
        let m = (self.p as u128).pow(self.delta);
        let [a, b, c, d] = x.entries().map(|v| v as u128 % m);
        let [ha, hb, hc, hd] = self.h.map(|v| v as u128);
        // adj(H) = [[hd, -hb], [-hc, ha]]
        let (na, nb, nc, nd) = (hd, m - hb, m - hc, ha);
        let r = |u: u128, v: u128, w: u128, z: u128| (u * v % m + w * z % m) % m;
        // adj(H) * X
        let (p, q) = (r(na, a, nb, c), r(na, b, nb, d));
        let (s, t) = (r(nc, a, nd, c), r(nc, b, nd, d));
        // (adj(H) X) * H
        r(p, ha, q, hc) == 0 && r(p, hb, q, hd) == 0 && r(s, ha, t, hc) == 0 && r(s, hb, t, hd) == 0
    }
}

fn local_from_padic(entries: [&PAdicApprox; 4], det_valuation: i64, p: u64) -> Result<LocalConjugator> {
    let shift = entries.iter().filter(|x| !x.is_zero()).map(|x| -x.valuation()).max().ok_or(Error::NotInvertible)?;
    let delta = det_valuation + 2 * shift;
    if delta < 0 {
        return Err(Error::InvalidInput("inconsistent determinant valuation".into()));
    }
    let delta = delta as u32;
    let modulus = (p as u128).pow(delta);
    let mut h = [0u64; 4];
    for (slot, x) in h.iter_mut().zip(entries) {
        if delta == 0 {
            break;
        }
        let available = x.absolute_precision().map_or(i64::MAX, |a| a.saturating_add(shift));
        if available < delta as i64 {
            return Err(Error::InsufficientPrecision { available, needed: delta as i64 });
        }
        if let Some(u) = x.unit_part() {
            let e = (x.valuation() + shift) as u32;
            let scaled = (u.value() as u128 % modulus) * ((p as u128).pow(e.min(delta)) % modulus) % modulus;
            *slot = scaled as u64;
        }
    }
    let denominator_valuation = shift.max(delta as i64 - shift).max(0) as u32;
    Ok(LocalConjugator { p, shift, delta, h, denominator_valuation })
}

impl Conjugator {
    pub fn matrix(m: Mat2<Rational>) -> Result<Self> {
        if m.det().is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Conjugator::Matrix(m))
    }

    pub fn quaternion(q: Quaternion) -> Result<Self> {
        if q.reduced_norm().is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(Conjugator::Quaternion(q))
    }

    pub fn inverse(&self) -> Result<Self> {
        match self {
            Conjugator::Matrix(m) => {
                let det = m.det();
                if det.is_zero() {
                    return Err(Error::NotInvertible);
                }
                Ok(Conjugator::Matrix(m.adjugate().map(|x| x / &det)))
            }
            Conjugator::Quaternion(q) => Ok(Conjugator::Quaternion(q.inverse()?)),
        }
    }

    /// Determinant of the local image (reduced norm for quaternions).
    pub fn determinant(&self) -> Rational {
        match self {
            Conjugator::Matrix(m) => m.det(),
            Conjugator::Quaternion(q) => q.reduced_norm(),
        }
    }

    /// Human-readable form used in certificates.
    pub fn describe(&self) -> String {
        match self {
            Conjugator::Matrix(m) => {
                let e = m.entries().map(format_rational);
                format!("[[{},{}],[{},{}]]", e[0], e[1], e[2], e[3])
            }
            Conjugator::Quaternion(q) => {
                let c: Vec<String> = q.coords().iter().map(format_rational).collect();
                format!("({})", c.join(","))
            }
        }
    }

    /// Primes at which `h` or `h^-1` fails to be integral.
    pub fn bad_primes(&self) -> Result<Vec<u64>> {
        let inv = self.inverse()?;
        let mut denominators = BigInt::one();
        let mut add = |xs: Vec<&Rational>| {
            for x in xs {
                denominators *= x.denom();
            }
        };
        match (self, &inv) {
            (Conjugator::Matrix(m), Conjugator::Matrix(n)) => {
                add(m.entries().to_vec());
                add(n.entries().to_vec());
            }
            (Conjugator::Quaternion(q), Conjugator::Quaternion(r)) => {
                add(q.coords().iter().collect());
                add(r.coords().iter().collect());
            }
            _ => unreachable!(),
        }
        prime_divisors(&denominators)
    }

    /// Local membership data at `p`.
    pub fn localize(&self, p: u64) -> Result<LocalConjugator> {
        match self {
            Conjugator::Matrix(m) => {
                let det_v = val_rational(&m.det(), p).ok_or(Error::NotInvertible)?;
                let spread = m.entries().iter().filter_map(|x| val_rational(x, p)).map(i64::abs).max().unwrap_or(0);
                let digits = (det_v.abs() + 2 * spread + 4) as u32;
                let entries: Vec<PAdicApprox> =
                    m.entries().iter().map(|x| PAdicApprox::from_rational(x, p, digits)).collect::<Result<_>>()?;
                local_from_padic([&entries[0], &entries[1], &entries[2], &entries[3]], det_v, p)
            }
            Conjugator::Quaternion(q) => {
                if p != 2 {
                    return Err(Error::UnsupportedPrime(p));
                }
                let split = split_2adic(q.algebra(), LOCAL_PRECISION)?;
                self.localize_with(&split)
            }
        }
    }

    /// Localizes a quaternionic conjugator through a given 2-adic splitting.
    pub fn localize_with(&self, split: &SplittingMap) -> Result<LocalConjugator> {
        let Conjugator::Quaternion(q) = self else {
            return self.localize(2);
        };
        check_two_local(q)?;
        let image = split.image_two_adic(q)?;
        let det_v = val_rational(&q.reduced_norm(), 2).ok_or(Error::NotInvertible)?;
        local_from_padic(image.entries(), det_v, 2)
    }
}

/// Rejects quaternions with denominators at odd primes.
fn check_two_local(q: &Quaternion) -> Result<()> {
    for x in q.coords() {
        let mut den = x.denom().clone();
        while (&den % 2u32).is_zero() {
            den /= 2u32;
        }
        if !den.is_one() {
            let odd = prime_divisors(&den)?;
            return Err(Error::UnsupportedPrime(odd[0]));
        }
    }
    Ok(())
}

/// The intersection at one prime, with indices in `Gamma` and in `Gamma_h`.
#[derive(Clone, Debug)]
pub struct IntersectionResult {
    pub prime: u64,
    pub k: u32,
    /// Working exponent `K = k + 2v`.
    pub level_exponent: u32,
    pub modulus: u64,
    /// `{x : h^-1 x h integral}`.
    pub subgroup: SubgroupTable,
    /// `{x : h x h^-1 integral}`, conjugate to `Gamma_h ∩ Gamma` inside `Gamma_h`.
    pub conjugate_subgroup: SubgroupTable,
    pub ambient_order: u64,
    pub index_in_gamma: u64,
    pub index_in_gamma_h: u64,
}

/// Working exponent for precision `k`.
pub fn working_exponent(local: &LocalConjugator, k: u32) -> u32 {
    k + 2 * local.denominator_valuation
}

fn filter_table(ambient: &[ResidueMatrix], modulus: u64, local: &LocalConjugator) -> SubgroupTable {
    let members: Vec<ResidueMatrix> = ambient.par_iter().filter(|x| local.conjugate_is_integral(x)).copied().collect();
    SubgroupTable::from_elements(modulus, members, Vec::new())
}

fn intersect_with(
    ambient: &[ResidueMatrix],
    modulus: u64,
    h: &Conjugator,
    p: u64,
    k: u32,
    level_exponent: u32,
) -> Result<IntersectionResult> {
    let local = h.localize(p)?;
    let local_inv = h.inverse()?.localize(p)?;
    if local.delta > level_exponent || local_inv.delta > level_exponent {
        return Err(Error::InsufficientPrecision {
            available: level_exponent as i64,
            needed: local.delta.max(local_inv.delta) as i64,
        });
    }
    let subgroup = filter_table(ambient, modulus, &local);
    let conjugate_subgroup = filter_table(ambient, modulus, &local_inv);
    let n = ambient.len() as u64;
    Ok(IntersectionResult {
        prime: p,
        k,
        level_exponent,
        modulus,
        index_in_gamma: n / subgroup.order(),
        index_in_gamma_h: n / conjugate_subgroup.order(),
        subgroup,
        conjugate_subgroup,
        ambient_order: n,
    })
}

/// Exhaustive scan of `SL2(Z/p^K)` for the elements whose conjugate by `h`
/// is integral.
pub fn local_intersection(h: &Conjugator, p: u64, k: u32) -> Result<IntersectionResult> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    let big_k = working_exponent(&h.localize(p)?, k);
    let g = enumerate_group(p, big_k)?;
    let ambient: Vec<ResidueMatrix> = g.elements().copied().collect();
    intersect_with(&ambient, g.modulus(), h, p, k, big_k)
}

/// As [`local_intersection`] with the ambient group replaced by a verified
/// finite-level image of `Gamma` at the working level.
pub fn intersect_images(image: &SubgroupTable, h: &Conjugator, p: u64, k: u32) -> Result<IntersectionResult> {
    let big_k = working_exponent(&h.localize(p)?, k);
    let expected = p.pow(big_k);
    if image.modulus() != expected {
        return Err(Error::LevelMismatch(image.modulus(), expected));
    }
    let ambient: Vec<ResidueMatrix> = image.elements().copied().collect();
    intersect_with(&ambient, expected, h, p, k, big_k)
}

/// `SL2(Z) ∩ h SL2(Z) h^-1` assembled prime by prime.
#[derive(Clone, Debug)]
pub struct CompositeIntersection {
    pub components: Vec<IntersectionResult>,
    pub modulus: u128,
    pub index_in_gamma: u64,
    pub index_in_gamma_h: u64,
}

/// The intersection for `SL2(Z)` at level `prod p^K`. By the Chinese
/// remainder theorem the reduction is a product over primes, so indices
/// multiply; primes where `h` is a local unit contribute 1.
pub fn sl2z_case(h: &Mat2<Rational>, primes: &[u64], k: u32) -> Result<CompositeIntersection> {
    let conj = Conjugator::matrix(h.clone())?;
    if let Some(p) = conj.bad_primes()?.into_iter().find(|p| !primes.contains(p)) {
        return Err(Error::UnsupportedPrime(p));
    }
    let mut components = Vec::new();
    let mut modulus = 1u128;
    let (mut ig, mut igh) = (1u64, 1u64);
    for &p in primes {
        let r = local_intersection(&conj, p, k)?;
        modulus *= r.modulus as u128;
        ig *= r.index_in_gamma;
        igh *= r.index_in_gamma_h;
        components.push(r);
    }
    Ok(CompositeIntersection { components, modulus, index_in_gamma: ig, index_in_gamma_h: igh })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelIndex {
    pub k: u32,
    pub level_exponent: u32,
    pub index_in_gamma: u64,
    pub index_in_gamma_h: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilization {
    pub levels: Vec<LevelIndex>,
    /// First `k` whose indices agree with those at `k - 1`.
    pub stabilized_at: Option<u32>,
}

impl Stabilization {
    pub fn final_indices(&self) -> Option<(u64, u64)> {
        self.levels.last().map(|l| (l.index_in_gamma, l.index_in_gamma_h))
    }
}

/// Computes indices at `k = k_min, k_min + 1, ...` until two consecutive
/// levels agree or `k_max` (or the group size cap) is reached.
pub fn stabilize(
    h: &Conjugator,
    p: u64,
    k_min: u32,
    k_max: u32,
    image_at: &dyn Fn(u32) -> Result<Option<SubgroupTable>>,
) -> Result<Stabilization> {
    let mut levels: Vec<LevelIndex> = Vec::new();
    for k in k_min..=k_max {
        let big_k = working_exponent(&h.localize(p)?, k);
        let r = match image_at(big_k)? {
            Some(image) => intersect_images(&image, h, p, k),
            None => local_intersection(h, p, k),
        };
        let r = match r {
            Err(Error::CapExceeded { .. }) if !levels.is_empty() => break,
            other => other?,
        };
        let level = LevelIndex {
            k,
            level_exponent: r.level_exponent,
            index_in_gamma: r.index_in_gamma,
            index_in_gamma_h: r.index_in_gamma_h,
        };
        let agrees = levels.last().is_some_and(|prev| {
            (prev.index_in_gamma, prev.index_in_gamma_h) == (level.index_in_gamma, level.index_in_gamma_h)
        });
        levels.push(level);
        if agrees {
            return Ok(Stabilization { levels, stabilized_at: Some(k) });
        }
    }
    Ok(Stabilization { levels, stabilized_at: None })
}

fn lift(x: &ResidueMatrix) -> Mat2<Rational> {
    let [a, b, c, d] = x.entries().map(|v| Rational::from_integer(BigInt::from(v)));
    Mat2::new(a, b, c, d)
}

fn padic_integral(x: &PAdicApprox) -> Result<bool> {
    if x.is_zero() {
        return match x.absolute_precision() {
            Some(a) if a < 0 => Err(Error::InsufficientPrecision { available: a, needed: 0 }),
            _ => Ok(true),
        };
    }
    Ok(x.valuation() >= 0)
}

/// Independent recheck of membership for `elements`: exact rational
/// conjugation for matrices, tracked-precision 2-adic products for
/// quaternions. Returns the elements whose verdict disagrees with
/// `expected_member`.
pub fn recheck_membership<'a>(
    h: &Conjugator,
    p: u64,
    elements: impl IntoIterator<Item = &'a ResidueMatrix>,
    expected_member: impl Fn(&ResidueMatrix) -> bool,
) -> Result<Vec<ResidueMatrix>> {
    let inv = h.inverse()?;
    let mut bad = Vec::new();
    match (h, &inv) {
        (Conjugator::Matrix(m), Conjugator::Matrix(n)) => {
            for x in elements {
                let y = n.mul(&lift(x)).mul(m);
                let integral = y.entries().iter().all(|e| val_int(e.denom(), p) == 0);
                if integral != expected_member(x) {
                    bad.push(*x);
                }
            }
        }
        (Conjugator::Quaternion(q), Conjugator::Quaternion(r)) => {
            if p != 2 {
                return Err(Error::UnsupportedPrime(p));
            }
            let split = split_2adic(q.algebra(), LOCAL_PRECISION)?;
            let mq = split.image_two_adic(q)?;
            let mr = split.image_two_adic(r)?;
            for x in elements {
                let lx = lift(x).map(|e| PAdicApprox::from_rational(e, 2, LOCAL_PRECISION).expect("p = 2"));
                let y = mr.mul(&lx).mul(&mq);
                let mut integral = true;
                for e in y.entries() {
                    integral &= padic_integral(e)?;
                }
                if integral != expected_member(x) {
                    bad.push(*x);
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(bad)
}

/// Searches for `h = (X0 + X1 i + X2 j + X3 ij) / den` with `nrd(h) = det(target)`
/// whose 2-adic image is congruent to `target` modulo 4, over `|X_i| <= bound`.
/// Candidates are ordered by `max |X_i|`, then lexicographically.
pub fn find_quaternion_conjugator(
    algebra: &QuaternionAlgebra,
    target: &Mat2<Rational>,
    den: i64,
    bound: i64,
) -> Result<Option<Quaternion>> {
    let (a, b) = algebra.integral_constants()?;
    let split = split_2adic(algebra, LOCAL_PRECISION)?;
    let norm = target.det() * int(den * den);
    if !norm.is_integer() {
        return Ok(None);
    }
    let norm = norm.to_integer().to_i128().ok_or_else(|| Error::InvalidInput("norm too large".into()))?;
    let (a, b) = (a as i128, b as i128);
    let congruent = |q: &Quaternion| -> Result<bool> {
        let image = split.image_two_adic(q)?;
        for (x, t) in image.entries().into_iter().zip(target.entries()) {
            let t = PAdicApprox::from_rational(t, 2, LOCAL_PRECISION)?;
            let diff = x.sub(&t);
            if diff.is_zero() {
                if diff.absolute_precision().is_some_and(|p| p < 2) {
                    return Ok(false);
                }
            } else if diff.valuation() < 2 {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let axis: Vec<i128> = (-(bound as i128)..=bound as i128).collect();
    let mut candidates: Vec<[i128; 4]> = axis
        .par_iter()
        .flat_map_iter(|&x1| {
            let axis = &axis;
            axis.iter().flat_map(move |&x2| {
                axis.iter().flat_map(move |&x3| {
                    let sq = norm + a * x1 * x1 + b * x2 * x2 - a * b * x3 * x3;
                    let r = if sq >= 0 { sq.sqrt() } else { -1 };
                    let hit = r >= 0 && r * r == sq && r <= bound as i128;
                    let both = if r > 0 { vec![[r, x1, x2, x3], [-r, x1, x2, x3]] } else { vec![[r, x1, x2, x3]] };
                    both.into_iter().filter(move |_| hit)
                })
            })
        })
        .collect();
    candidates.sort_by_key(|x| (x.iter().map(|c| c.abs()).max(), *x));
    let d = Rational::from_integer(BigInt::from(den));
    for x in candidates {
        let q = algebra.element(x.map(|c| Rational::from_integer(BigInt::from(c)) / &d));
        if congruent(&q)? {
            debug_assert!(q.reduced_norm() == target.det());
            return Ok(Some(q));
        }
    }
    Ok(None)
}

/// A quaternion congruent to `target` modulo 4 built directly from the
/// splitting, without control of its reduced norm. Coordinates solve the
/// image equations with `s^-1` replaced by an integer inverse mod `2^12`.
pub fn congruent_quaternion(algebra: &QuaternionAlgebra, target: &Mat2<Rational>) -> Result<Quaternion> {
    let split = split_2adic(algebra, LOCAL_PRECISION)?;
    let (_, b) = algebra.integral_constants()?;
    let s = split.two_adic_root().expect("2-adic").to_rational().to_integer();
    let m = BigInt::from(1u64 << 12);
    let c = Rational::from_integer(mod_inverse(&s, &m).expect("s is a unit"));
    let half = Rational::new(1.into(), 2.into());
    let b = int(b);
    let n = target;
    let q = algebra.element([
        (&n.a + &n.d) * &half,
        (&n.a - &n.d) * &half * &c,
        (&n.b + &n.c / &b) * &half,
        (&n.b - &n.c / &b) * &half * &c,
    ]);
    let image = split.image_two_adic(&q)?;
    for (x, t) in image.entries().into_iter().zip(n.entries()) {
        let diff = x.sub(&PAdicApprox::from_rational(t, 2, LOCAL_PRECISION)?);
        if !diff.is_zero() && diff.valuation() < 2 {
            return Err(Error::InsufficientPrecision { available: diff.valuation(), needed: 2 });
        }
    }
    Ok(q)
}
