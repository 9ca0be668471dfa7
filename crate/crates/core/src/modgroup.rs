//! The finite groups `SL2(Z/p^k)`: enumeration, subgroup closure, indices.

use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{is_prime, reduce_mod, Rational, ResidueElem};
use crate::matrix::Mat2;

/// Default cap on the size of any explicitly stored group.
pub const DEFAULT_CAP: u128 = 1 << 24;

/// `[[a, b], [c, d]]` over `Z/m` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueMatrix {
    modulus: u64,
    entries: [u64; 4],
}

impl ResidueMatrix {
    /// Builds a matrix from integer entries, checking the determinant.
    pub fn new(entries: [i128; 4], modulus: u64) -> Result<Self> {
        let m = Self::unchecked(entries, modulus);
        if m.det() != 1 % modulus {
            return Err(Error::DeterminantNotOne(format!("{} mod {modulus}", m.det())));
        }
        Ok(m)
    }

    fn unchecked(entries: [i128; 4], modulus: u64) -> Self {
        assert!(modulus >= 2);
        ResidueMatrix { modulus, entries: entries.map(|x| x.rem_euclid(modulus as i128) as u64) }
    }

    pub fn identity(modulus: u64) -> Self {
        Self::unchecked([1, 0, 0, 1], modulus)
    }

    /// Reduces a matrix of p-adically integral rationals.
    pub fn from_rationals(m: &Mat2<Rational>, modulus: u64) -> Result<Self> {
        let mut e = [0i128; 4];
        for (slot, x) in e.iter_mut().zip(m.entries()) {
            *slot = reduce_mod(x, modulus).ok_or(Error::NotIntegral)? as i128;
        }
        Self::new(e, modulus)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn entries(&self) -> [u64; 4] {
        self.entries
    }

    pub fn entry(&self, index: usize) -> ResidueElem {
        ResidueElem::new(self.entries[index] as i128, self.modulus)
    }

    fn det(&self) -> u64 {
        let m = self.modulus as u128;
        let [a, b, c, d] = self.entries.map(u128::from);
        ((a * d % m + m - b * c % m) % m) as u64
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.modulus, o.modulus);
        let m = self.modulus as u128;
        let [a, b, c, d] = self.entries.map(u128::from);
        let [e, f, g, h] = o.entries.map(u128::from);
        ResidueMatrix {
            modulus: self.modulus,
            entries: [
                ((a * e + b * g) % m) as u64,
                ((a * f + b * h) % m) as u64,
                ((c * e + d * g) % m) as u64,
                ((c * f + d * h) % m) as u64,
            ],
        }
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.entries.map(i128::from);
        Self::unchecked([d, -b, -c, a], self.modulus)
    }

    /// Image under `Z/m -> Z/m'` for `m'` dividing `m`.
    pub fn reduce(&self, modulus: u64) -> Self {
        assert_eq!(self.modulus % modulus, 0);
        Self::unchecked(self.entries.map(i128::from), modulus)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.modulus)
    }
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries;
        write!(f, "[[{a},{b}],[{c},{d}]] mod {}", self.modulus)
    }
}

/// `|SL2(Z/p^k)| = p^(3k-2) (p^2 - 1)`.
pub fn group_order(p: u64, k: u32) -> Result<u128> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k < 1 {
        return Err(Error::InvalidInput("level exponent k must be >= 1".into()));
    }
    let p = p as u128;
    p.checked_pow(3 * k - 2)
        .and_then(|x| x.checked_mul(p * p - 1))
        .ok_or_else(|| Error::InvalidInput("group order overflows".into()))
}

/// An explicitly stored subgroup of `SL2(Z/m)`. Elements keep insertion order.
#[derive(Clone, Debug)]
pub struct SubgroupTable {
    modulus: u64,
    elements: IndexSet<ResidueMatrix>,
    generators: Vec<ResidueMatrix>,
}

impl SubgroupTable {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn generators(&self) -> &[ResidueMatrix] {
        &self.generators
    }

    pub fn elements(&self) -> impl Iterator<Item = &ResidueMatrix> {
        self.elements.iter()
    }

    pub fn contains(&self, x: &ResidueMatrix) -> bool {
        self.elements.contains(x)
    }

    pub fn is_abelian(&self) -> bool {
        self.generators.iter().all(|g| self.generators.iter().all(|h| g.mul(h) == h.mul(g)))
    }

    /// Checks closure under products of pairs and inverses.
    pub fn is_closed(&self) -> bool {
        self.elements
            .iter()
            .all(|x| self.contains(&x.inverse()) && self.elements.iter().all(|y| self.contains(&x.mul(y))))
    }

    /// Confirms the element set is a group by regenerating it: elements
    /// outside the running closure are added as generators one at a time, and
    /// every closure must stay inside the set. Returns the generators found.
    pub fn verify_by_generation(&self) -> Result<Vec<ResidueMatrix>> {
        let mut gens = vec![ResidueMatrix::identity(self.modulus)];
        let mut current = closure(&gens)?;
        for x in &self.elements {
            if current.contains(x) {
                continue;
            }
            gens.push(*x);
            current = closure_capped(&gens, self.elements.len() as u128).map_err(|_| Error::NotASubgroup)?;
            if !current.elements().all(|y| self.contains(y)) {
                return Err(Error::NotASubgroup);
            }
        }
        if current.order() != self.order() {
            return Err(Error::NotASubgroup);
        }
        gens.remove(0);
        Ok(gens)
    }

    /// Builds a table from an element set; callers check closure separately.
    pub(crate) fn from_elements(
        modulus: u64,
        elements: impl IntoIterator<Item = ResidueMatrix>,
        generators: Vec<ResidueMatrix>,
    ) -> Self {
        SubgroupTable { modulus, elements: elements.into_iter().collect(), generators }
    }
}

/// Every element of `SL2(Z/p^k)`, in a fixed order.
pub fn enumerate_group(p: u64, k: u32) -> Result<SubgroupTable> {
    enumerate_group_capped(p, k, DEFAULT_CAP)
}

pub fn enumerate_group_capped(p: u64, k: u32, cap: u128) -> Result<SubgroupTable> {
    let order = group_order(p, k)?;
    if order > cap {
        return Err(Error::CapExceeded { order, cap });
    }
    let m = p.pow(k);
    let mut elements = IndexSet::with_capacity(order as usize);
    for a in 0..m {
        for c in 0..m {
            if a % p == 0 && c % p == 0 {
                continue;
            }
            // first column primitive; solve ad - bc = 1 for the second
            if a % p != 0 {
                let ainv = ResidueElem::new(a as i128, m).inv().expect("unit");
                for b in 0..m {
                    let d = ResidueElem::new(1 + b as i128 * c as i128, m).mul(ainv).value();
                    elements.insert(ResidueMatrix::unchecked([a, b, c, d].map(i128::from), m));
                }
            } else {
                let cinv = ResidueElem::new(c as i128, m).inv().expect("unit");
                for d in 0..m {
                    let b = ResidueElem::new(a as i128 * d as i128 - 1, m).mul(cinv).value();
                    elements.insert(ResidueMatrix::unchecked([a, b, c, d].map(i128::from), m));
                }
            }
        }
    }
    debug_assert_eq!(elements.len() as u128, order);
    let t = ResidueMatrix::unchecked([1, 1, 0, 1], m);
    let u = ResidueMatrix::unchecked([1, 0, 1, 1], m);
    Ok(SubgroupTable { modulus: m, elements, generators: vec![t, u] })
}

/// Breadth-first closure of `generators` under right multiplication by the
/// generators and their inverses.
pub fn closure(generators: &[ResidueMatrix]) -> Result<SubgroupTable> {
    closure_capped(generators, DEFAULT_CAP)
}

pub fn closure_capped(generators: &[ResidueMatrix], cap: u128) -> Result<SubgroupTable> {
    let Some(first) = generators.first() else {
        return Err(Error::InvalidInput("closure needs at least one generator".into()));
    };
    let m = first.modulus;
    if generators.iter().any(|g| g.modulus != m) {
        return Err(Error::MixedModuli);
    }
    let mut steps: IndexSet<ResidueMatrix> = IndexSet::new();
    for g in generators {
        steps.insert(*g);
        steps.insert(g.inverse());
    }
    let mut elements = IndexSet::new();
    elements.insert(ResidueMatrix::identity(m));
    let mut cursor = 0;
    while cursor < elements.len() {
        let x = elements[cursor];
        for s in &steps {
            if elements.insert(x.mul(s)) && elements.len() as u128 > cap {
                return Err(Error::CapExceeded { order: elements.len() as u128, cap });
            }
        }
        cursor += 1;
    }
    Ok(SubgroupTable { modulus: m, elements, generators: generators.to_vec() })
}

/// `[G : H]`, after checking `H` is contained in `G` element-wise.
pub fn index(h: &SubgroupTable, g: &SubgroupTable) -> Result<u64> {
    if h.modulus != g.modulus {
        return Err(Error::LevelMismatch(h.modulus, g.modulus));
    }
    if !h.elements().all(|x| g.contains(x)) {
        return Err(Error::NotASubgroup);
    }
    assert_eq!(g.order() % h.order(), 0, "Lagrange violated");
    Ok(g.order() / h.order())
}
