use std::fmt;

use serde::{Deserialize, Serialize};

/// Element of `Z/mZ` with `2 <= m < 2^63`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueElem {
    value: u64,
    modulus: u64,
}

#[allow(clippy::should_implement_trait)]
impl ResidueElem {
    pub fn new(value: i128, modulus: u64) -> Self {
        assert!((2..1 << 63).contains(&modulus), "modulus out of range");
        let value = value.rem_euclid(modulus as i128) as u64;
        ResidueElem { value, modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_unit(&self) -> bool {
        gcd(self.value, self.modulus) == 1
    }

    pub fn add(self, other: Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        Self::new(self.value as i128 + other.value as i128, self.modulus)
    }

    pub fn sub(self, other: Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        Self::new(self.value as i128 - other.value as i128, self.modulus)
    }

    pub fn neg(self) -> Self {
        Self::new(-(self.value as i128), self.modulus)
    }

    pub fn mul(self, other: Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        let v = (self.value as u128 * other.value as u128) % self.modulus as u128;
        ResidueElem { value: v as u64, modulus: self.modulus }
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Self::new(1, self.modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(self) -> Option<Self> {
        let (g, x, _) = ext_gcd(self.value as i128, self.modulus as i128);
        (g == 1).then(|| Self::new(x, self.modulus))
    }

    /// Reduces to a smaller modulus dividing the current one.
    pub fn reduce(self, modulus: u64) -> Self {
        debug_assert_eq!(self.modulus % modulus, 0);
        Self::new(self.value as i128, modulus)
    }
}

impl fmt::Display for ResidueElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_wraps() {
        let a = ResidueElem::new(-3, 8);
        assert_eq!(a.value(), 5);
        assert_eq!(a.mul(a).value(), 1);
        assert_eq!(a.inv().unwrap().value(), 5);
        assert!(ResidueElem::new(4, 8).inv().is_none());
        assert_eq!(ResidueElem::new(3, 7).pow(6).value(), 1);
        assert_eq!(ResidueElem::new(13, 16).reduce(4).value(), 1);
    }

    #[test]
    #[should_panic]
    fn rejects_modulus_one() {
        ResidueElem::new(0, 1);
    }
}
