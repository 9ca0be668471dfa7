//! Norm-one units of an integral order, their images in `SL2(Z/2^k)`, and
//! the torsion and surjectivity checks run on them.
//!
//! Two orders are available. The standard order `Z<i, j>` always exists for
//! integral `a, b`, but its reduction mod 2 is commutative (`ij = -ji = ji`),
//! so its unit group can never map onto `SL2(Z/2)`. When `a = 1 mod 4` the
//! order `Z<(1+i)/2, j>` is used instead; for odd `b` it is maximal at 2.

use std::fmt;

use indexmap::IndexSet;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_sqrt, int, is_rational_square, is_square_padic, Rational};
use crate::modgroup::{closure, group_order, ResidueMatrix, SubgroupTable};
use crate::quatalg::{split_2adic, Place, Quaternion, QuaternionAlgebra, SplittingMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegralOrder {
    /// `Z + Zi + Zj + Zij`.
    Standard,
    /// `Z<(1+i)/2, j>`: coordinates in `Z/2` with `2x0 = 2x1` and `2x2 = 2x3` mod 2.
    HalfIntegral,
}

impl IntegralOrder {
    /// The order used for `algebra` by the pipelines: half-integral when
    /// `a = 1 mod 4`, otherwise standard.
    pub fn preferred(algebra: &QuaternionAlgebra) -> Result<Self> {
        let (a, _) = algebra.integral_constants()?;
        Ok(if a.rem_euclid(4) == 1 { IntegralOrder::HalfIntegral } else { IntegralOrder::Standard })
    }

    fn check(self, a: i64) -> Result<()> {
        match self {
            IntegralOrder::HalfIntegral if a.rem_euclid(4) != 1 => {
                Err(Error::OrderUnavailable("half-integral (needs a = 1 mod 4)"))
            }
            _ => Ok(()),
        }
    }

    /// Whether `q` lies in this order.
    pub fn contains(self, q: &Quaternion) -> bool {
        let doubled: Option<Vec<BigInt>> = q
            .coords()
            .iter()
            .map(|x| {
                let y = x * int(2);
                y.is_integer().then(|| y.to_integer())
            })
            .collect();
        let Some(x) = doubled else { return false };
        let even = |n: &BigInt| (n % 2u32).is_zero();
        match self {
            IntegralOrder::Standard => x.iter().all(even),
            IntegralOrder::HalfIntegral => even(&(&x[0] - &x[1])) && even(&(&x[2] - &x[3])),
        }
    }
}

impl fmt::Display for IntegralOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntegralOrder::Standard => "Z<i,j>",
            IntegralOrder::HalfIntegral => "Z<(1+i)/2,j>",
        })
    }
}

/// All norm-one elements of an order inside the box `max |x_i| <= height`.
#[derive(Clone, Debug)]
pub struct UnitSlice {
    pub algebra: QuaternionAlgebra,
    pub order: IntegralOrder,
    pub height: u64,
    pub elements: Vec<Quaternion>,
}

impl UnitSlice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Non-central units, in slice order.
    pub fn non_central(&self) -> impl Iterator<Item = &Quaternion> {
        self.elements.iter().filter(|q| !q.is_scalar())
    }
}

/// Sort key: box height first, then coordinates.
fn slice_key(q: &Quaternion) -> (Rational, [Rational; 4]) {
    let h = q.coords().iter().map(|x| x.abs()).max().expect("four coords");
    (h, q.coords().clone())
}

/// Enumerates norm-one units with every coordinate bounded by `height` in
/// absolute value, iterating the last three coordinates and solving for the
/// first exactly.
pub fn enumerate_units(algebra: &QuaternionAlgebra, height: u64, order: IntegralOrder) -> Result<UnitSlice> {
    let (a, b) = algebra.integral_constants()?;
    order.check(a)?;
    if height < 1 {
        return Err(Error::InvalidInput("unit height must be >= 1".into()));
    }
    // scale = 2 works on doubled coordinates X = 2x for the half-integral order
    let scale: i128 = if order == IntegralOrder::HalfIntegral { 2 } else { 1 };
    let bound = height as i128 * scale;
    let (a, b) = (a as i128, b as i128);
    let target = scale * scale;
    let axis: Vec<i128> = (-bound..=bound).collect();
    let mut found: Vec<[i128; 4]> = axis
        .par_iter()
        .flat_map_iter(|&x1| {
            let axis = &axis;
            axis.iter().flat_map(move |&x2| {
                axis.iter().filter_map(move |&x3| {
                    if scale == 2 && (x2 - x3).rem_euclid(2) != 0 {
                        return None;
                    }
                    let sq = target + a * x1 * x1 + b * x2 * x2 - a * b * x3 * x3;
                    let r = exact_sqrt(&BigInt::from(sq))?.to_i128()?;
                    if r > bound || (scale == 2 && (r - x1).rem_euclid(2) != 0) {
                        return None;
                    }
                    Some([r, x1, x2, x3])
                })
            })
        })
        .flat_map_iter(|[r, x1, x2, x3]| {
            let mut v = vec![[r, x1, x2, x3]];
            if r != 0 {
                v.push([-r, x1, x2, x3]);
            }
            v
        })
        .collect();
    found.sort_unstable();
    found.dedup();
    let mut elements: Vec<Quaternion> = found
        .into_iter()
        .map(|x| algebra.element(x.map(|c| Rational::new(BigInt::from(c), BigInt::from(scale)))))
        .collect();
    elements.sort_by_cached_key(slice_key);
    Ok(UnitSlice { algebra: algebra.clone(), order, height, elements })
}

/// Reduces one quaternion through a 2-adic splitting modulo `2^k`.
pub fn reduce_quaternion(split: &SplittingMap, q: &Quaternion, k: u32) -> Result<ResidueMatrix> {
    let image = split.image_two_adic(q)?;
    let modulus = 1u64 << k;
    let mut e = [0i128; 4];
    for (slot, x) in e.iter_mut().zip(image.entries()) {
        let available = x.absolute_precision().unwrap_or(i64::MAX);
        if available < k as i64 {
            return Err(Error::InsufficientPrecision { available, needed: k as i64 });
        }
        if x.is_zero() {
            continue;
        }
        if x.valuation() < 0 {
            return Err(Error::NotIntegral);
        }
        let u = x.unit_part().expect("nonzero").value() as i128;
        let v = x.valuation().min(k as i64) as u32;
        *slot = (u << v).rem_euclid(modulus as i128);
    }
    ResidueMatrix::new(e, modulus)
}

/// Images of every unit of the slice in `SL2(Z/2^k)`, in slice order.
pub fn reduce_units(slice: &UnitSlice, split: &SplittingMap, k: u32) -> Result<Vec<ResidueMatrix>> {
    if split.place() != Place::Prime(2) {
        return Err(Error::InvalidInput("reduction needs a 2-adic splitting".into()));
    }
    slice.elements.iter().map(|q| reduce_quaternion(split, q, k)).collect()
}

/// Splitting precision used for reductions at level `2^k`.
pub fn splitting_precision(k: u32) -> u32 {
    k + 4
}

#[derive(Clone, Debug)]
pub struct Surjectivity {
    pub surjective: bool,
    pub image: SubgroupTable,
    pub full_order: u64,
    pub distinct_generators: usize,
}

impl Surjectivity {
    pub fn achieved_index(&self) -> u64 {
        self.full_order / self.image.order()
    }
}

/// Compares the closure of the reduced slice with all of `SL2(Z/2^k)`.
pub fn surjects_at_level(slice: &UnitSlice, k: u32) -> Result<Surjectivity> {
    let split = split_2adic(&slice.algebra, splitting_precision(k))?;
    let images = reduce_units(slice, &split, k)?;
    let distinct: IndexSet<ResidueMatrix> = images.into_iter().filter(|m| !m.is_identity()).collect();
    // only images outside the running subgroup can enlarge it
    let mut kept = vec![ResidueMatrix::identity(1 << k)];
    let mut image = closure(&kept)?;
    let full_order = group_order(2, k)? as u64;
    for g in &distinct {
        if image.order() == full_order {
            break;
        }
        if !image.contains(g) {
            kept.push(*g);
            image = closure(&kept)?;
        }
    }
    Ok(Surjectivity { surjective: image.order() == full_order, distinct_generators: distinct.len(), image, full_order })
}

/// A unit of finite order found in the slice.
#[derive(Clone, Debug)]
pub struct TorsionWitness {
    pub unit: Quaternion,
    pub order: u32,
}

#[derive(Clone, Debug)]
pub struct TorsionReport {
    pub slice_size: usize,
    pub witnesses: Vec<TorsionWitness>,
    pub embeds_minus_one: bool,
    pub embeds_minus_three: bool,
}

impl TorsionReport {
    /// No order-4 and no order-3/6 elements anywhere in the unit group.
    pub fn torsion_free(&self) -> bool {
        !self.embeds_minus_one && !self.embeds_minus_three
    }
}

/// Order of a norm-one unit, read off from its reduced trace; `None` when
/// the order is infinite. Requires a division algebra.
pub fn unit_order(q: &Quaternion) -> Option<u32> {
    if q.is_scalar() {
        return Some(if q.coords()[0].is_positive() { 1 } else { 2 });
    }
    let t = q.reduced_trace();
    let t = t.is_integer().then(|| t.to_integer().to_i64()).flatten()?;
    match t {
        0 => Some(4),
        1 => Some(6),
        -1 => Some(3),
        2 | -2 => unreachable!("unipotent non-scalar unit in a division algebra"),
        _ => None,
    }
}

/// Slice search plus the algebra-level embedding criterion.
pub fn torsion_check(algebra: &QuaternionAlgebra, height: u64, order: IntegralOrder) -> Result<TorsionReport> {
    if !algebra.is_division()? {
        return Err(Error::NotDivision);
    }
    let slice = enumerate_units(algebra, height, order)?;
    let witnesses = slice
        .non_central()
        .filter_map(|q| unit_order(q).map(|order| TorsionWitness { unit: q.clone(), order }))
        .collect();
    Ok(TorsionReport {
        slice_size: slice.len(),
        witnesses,
        embeds_minus_one: algebra.quadratic_embeds(&int(-1))?,
        embeds_minus_three: algebra.quadratic_embeds(&int(-3))?,
    })
}

/// Result of the scan for a suitable second structure constant.
#[derive(Clone, Debug)]
pub struct ExampleAlgebra {
    pub algebra: QuaternionAlgebra,
    pub b: i64,
    pub ramified: Vec<Place>,
    /// Every smaller candidate with the first condition it failed.
    pub rejected: Vec<(i64, &'static str)>,
}

/// Checks the preconditions on `d`: not a square, a 2-adic square, `d > 6`.
pub fn check_d(d: i64) -> Result<()> {
    if is_rational_square(&int(d)) {
        return Err(Error::InvalidInput(format!("d = {d} is a perfect square")));
    }
    if d == 0 || !is_square_padic(&int(d), 2, 3)? {
        return Err(Error::NotASquare(d.to_string(), 2));
    }
    if d <= 6 {
        return Err(Error::InvalidInput(format!("d = {d} must exceed 6")));
    }
    Ok(())
}

/// Scans odd `b = 3, 5, 7, ...` up to `bound` for `(d, b)` that is a
/// division algebra split at 2 and at infinity into which neither `Q(i)`
/// nor `Q(sqrt -3)` embeds.
pub fn find_example_algebra(d: i64, bound: u64) -> Result<ExampleAlgebra> {
    check_d(d)?;
    let mut rejected = Vec::new();
    let mut b = 3i64;
    while b as u64 <= bound {
        let algebra = QuaternionAlgebra::from_ints(d, b)?;
        let ramified = algebra.ramified_places()?;
        let reason = if ramified.is_empty() {
            Some("split (not division)")
        } else if ramified.contains(&Place::Prime(2)) {
            Some("ramified at 2")
        } else if ramified.contains(&Place::Infinity) {
            Some("ramified at infinity")
        } else if algebra.quadratic_embeds(&int(-1))? {
            Some("Q(i) embeds")
        } else if algebra.quadratic_embeds(&int(-3))? {
            Some("Q(sqrt -3) embeds")
        } else {
            None
        };
        match reason {
            None => return Ok(ExampleAlgebra { algebra, b, ramified, rejected }),
            Some(r) => rejected.push((b, r)),
        }
        b += 2;
    }
    Err(Error::NoExampleAlgebra(bound))
}
