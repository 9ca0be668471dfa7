//! 2x2 matrices over any ring whose references support `+ - *`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mat2<U> {
        Mat2 { a: f(&self.a), b: f(&self.b), c: f(&self.c), d: f(&self.d) }
    }

    pub fn entries(&self) -> [&T; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn rows(&self) -> [[&T; 2]; 2] {
        [[&self.a, &self.b], [&self.c, &self.d]]
    }
}

impl<T> Mat2<T>
where
    T: Clone,
    for<'x> &'x T: Add<&'x T, Output = T> + Sub<&'x T, Output = T> + Mul<&'x T, Output = T> + Neg<Output = T>,
{
    pub fn mul(&self, o: &Self) -> Self {
        Mat2 {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Mat2 { a: &self.a + &o.a, b: &self.b + &o.b, c: &self.c + &o.c, d: &self.d + &o.d }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Mat2 { a: &self.a - &o.a, b: &self.b - &o.b, c: &self.c - &o.c, d: &self.d - &o.d }
    }

    pub fn scale(&self, s: &T) -> Self {
        Mat2 { a: s * &self.a, b: s * &self.b, c: s * &self.c, d: s * &self.d }
    }

    pub fn det(&self) -> T {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn trace(&self) -> T {
        &self.a + &self.d
    }

    /// `[[d, -b], [-c, a]]`; the inverse up to the determinant.
    pub fn adjugate(&self) -> Self {
        Mat2 { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }
}
