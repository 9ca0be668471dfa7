//! Non-discreteness witnesses for subgroups of `SL2(R)` given by words in
//! finitely many generators, evaluated exactly over `Q` or `Q(sqrt d)`.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Roots;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, int, is_rational_square, Rational};
use crate::matrix::Mat2;
use crate::quatalg::{Quaternion, QuaternionAlgebra, SplittingMap};
use crate::units::IntegralOrder;

/// `u + v sqrt(d)` with `d` a positive non-square rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealQuadElem {
    u: Rational,
    v: Rational,
    d: Rational,
}

impl RealQuadElem {
    pub fn new(u: Rational, v: Rational, d: Rational) -> Result<Self> {
        if !d.is_positive() || is_rational_square(&d) {
            return Err(Error::NotRealSplit(format_rational(&d)));
        }
        Ok(RealQuadElem { u, v, d })
    }

    pub fn u(&self) -> &Rational {
        &self.u
    }

    pub fn v(&self) -> &Rational {
        &self.v
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    fn with(&self, u: Rational, v: Rational) -> Self {
        RealQuadElem { u, v, d: self.d.clone() }
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.d, o.d, "mixed quadratic fields");
    }
}

impl Add for &RealQuadElem {
    type Output = RealQuadElem;
    fn add(self, o: &RealQuadElem) -> RealQuadElem {
        self.check(o);
        self.with(&self.u + &o.u, &self.v + &o.v)
    }
}

impl Sub for &RealQuadElem {
    type Output = RealQuadElem;
    fn sub(self, o: &RealQuadElem) -> RealQuadElem {
        self.check(o);
        self.with(&self.u - &o.u, &self.v - &o.v)
    }
}

impl Mul for &RealQuadElem {
    type Output = RealQuadElem;
    fn mul(self, o: &RealQuadElem) -> RealQuadElem {
        self.check(o);
        let u = &self.u * &o.u + &self.v * &o.v * &self.d;
        let v = &self.u * &o.v + &self.v * &o.u;
        self.with(u, v)
    }
}

impl Neg for &RealQuadElem {
    type Output = RealQuadElem;
    fn neg(self) -> RealQuadElem {
        self.with(-&self.u, -&self.v)
    }
}

impl fmt::Display for RealQuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.v.is_zero() {
            return f.write_str(&format_rational(&self.u));
        }
        write!(f, "{} + {}*sqrt({})", format_rational(&self.u), format_rational(&self.v), format_rational(&self.d))
    }
}

/// Exact ordered field elements usable as matrix entries in word searches.
pub trait ExactReal: Clone + Eq + Hash + fmt::Debug + fmt::Display + Send + Sync {
    /// The rational `r` in the same field as `self`.
    fn lift(&self, r: &Rational) -> Self;
    fn sign(&self) -> i8;
    fn as_rational(&self) -> Option<Rational>;
    fn scale(&self, r: &Rational) -> Self;
}

impl ExactReal for Rational {
    fn lift(&self, r: &Rational) -> Self {
        r.clone()
    }

    fn sign(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
}

impl ExactReal for RealQuadElem {
    fn lift(&self, r: &Rational) -> Self {
        self.with(r.clone(), Rational::zero())
    }

    fn sign(&self) -> i8 {
        let (su, sv) = (ExactReal::sign(&self.u), ExactReal::sign(&self.v));
        if sv == 0 || su == sv {
            return ExactReal::sign(&self.u);
        }
        if su == 0 {
            return ExactReal::sign(&self.v);
        }
        // opposite signs: compare u^2 with v^2 d
        let lhs = &self.u * &self.u;
        let rhs = &self.v * &self.v * &self.d;
        if lhs > rhs {
            ExactReal::sign(&self.u)
        } else {
            ExactReal::sign(&self.v)
        }
    }

    fn as_rational(&self) -> Option<Rational> {
        self.v.is_zero().then(|| self.u.clone())
    }

    fn scale(&self, r: &Rational) -> Self {
        self.with(&self.u * r, &self.v * r)
    }
}

/// Shorthand for the reference arithmetic every entry type provides.
pub trait RefArith<T>:
    Add<Self, Output = T> + Sub<Self, Output = T> + Mul<Self, Output = T> + Neg<Output = T> + Sized
{
}
impl<'x, T> RefArith<T> for &'x T where
    &'x T: Add<&'x T, Output = T> + Sub<&'x T, Output = T> + Mul<&'x T, Output = T> + Neg<Output = T>
{
}

/// Image of a quaternion under `i -> diag(sqrt a, -sqrt a)`, `j -> [[0,1],[b,0]]`.
pub fn real_embed(q: &Quaternion) -> Result<Mat2<RealQuadElem>> {
    let alg = q.algebra();
    let d = alg.a().clone();
    let zero = RealQuadElem::new(Rational::zero(), Rational::zero(), d)?;
    let [x0, x1, x2, x3] = q.coords();
    let b = alg.b();
    Ok(Mat2::new(
        zero.with(x0.clone(), x1.clone()),
        zero.with(x2.clone(), x3.clone()),
        zero.with(b * x2, -(b * x3)),
        zero.with(x0.clone(), -x1.clone()),
    ))
}

/// A named generator with its inverse.
#[derive(Clone, Debug)]
pub struct Generator<T> {
    pub label: String,
    pub matrix: Mat2<T>,
    pub inverse: Mat2<T>,
}

impl<T: ExactReal> Generator<T>
where
    for<'x> &'x T: RefArith<T>,
{
    /// Requires a rational nonzero determinant.
    pub fn new(label: impl Into<String>, matrix: Mat2<T>) -> Result<Self> {
        let det = matrix.det().as_rational().ok_or_else(|| Error::InvalidInput("irrational determinant".into()))?;
        if det.is_zero() {
            return Err(Error::NotInvertible);
        }
        let inverse = matrix.adjugate().map(|x| x.scale(&det.recip()));
        Ok(Generator { label: label.into(), matrix, inverse })
    }
}

/// One letter: a generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    fn cancels(self, o: Letter) -> bool {
        self.generator == o.generator && self.inverse != o.inverse
    }
}

pub fn format_word<T>(gens: &[Generator<T>], word: &[Letter]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    word.iter()
        .map(|l| if l.inverse { format!("{}^-1", gens[l.generator].label) } else { gens[l.generator].label.clone() })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug)]
pub struct WordElement<T> {
    pub word: Vec<Letter>,
    pub matrix: Mat2<T>,
}

impl<T: ExactReal> WordElement<T>
where
    for<'x> &'x T: RefArith<T>,
{
    pub fn trace(&self) -> T {
        self.matrix.trace()
    }

    pub fn has_unit_determinant(&self) -> bool {
        self.matrix.det().as_rational().is_some_and(|d| d.is_one())
    }
}

/// The matrix of a word, multiplied from scratch.
pub fn evaluate_word<T: ExactReal>(gens: &[Generator<T>], word: &[Letter]) -> Result<Mat2<T>>
where
    for<'x> &'x T: RefArith<T>,
{
    let first = gens.first().ok_or_else(|| Error::InvalidInput("no generators".into()))?;
    let one = first.matrix.a.lift(&Rational::one());
    let zero = first.matrix.a.lift(&Rational::zero());
    let mut m = Mat2::new(one.clone(), zero.clone(), zero, one);
    for l in word {
        let g = gens.get(l.generator).ok_or_else(|| Error::InvalidInput("letter out of range".into()))?;
        m = m.mul(if l.inverse { &g.inverse } else { &g.matrix });
    }
    Ok(m)
}

/// Distinct elements of freely reduced words of length `<= max_len`, in
/// breadth-first order (shortest first, then lexicographic on letters).
/// Stops after `limit` elements.
pub fn enumerate_words<T: ExactReal>(gens: &[Generator<T>], max_len: usize, limit: usize) -> Vec<WordElement<T>>
where
    for<'x> &'x T: RefArith<T>,
{
    let mut out = Vec::new();
    visit_words(gens, max_len, limit, |w| {
        out.push(w.clone());
        false
    });
    out
}

/// Walks the enumeration of [`enumerate_words`] and returns the first
/// element accepted by `stop`.
pub fn visit_words<T: ExactReal>(
    gens: &[Generator<T>],
    max_len: usize,
    limit: usize,
    mut stop: impl FnMut(&WordElement<T>) -> bool,
) -> Option<WordElement<T>>
where
    for<'x> &'x T: RefArith<T>,
{
    let letters: Vec<Letter> = (0..gens.len())
        .flat_map(|g| [Letter { generator: g, inverse: false }, Letter { generator: g, inverse: true }])
        .collect();
    let mut seen: HashSet<Mat2<T>> = HashSet::new();
    let mut count = 0usize;
    let mut frontier = vec![WordElement { word: vec![], matrix: evaluate_word(gens, &[]).ok()? }];
    seen.insert(frontier[0].matrix.clone());
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if w.word.last().is_some_and(|&last| last.cancels(l)) {
                    continue;
                }
                let g = &gens[l.generator];
                let matrix = w.matrix.mul(if l.inverse { &g.inverse } else { &g.matrix });
                if !seen.insert(matrix.clone()) {
                    continue;
                }
                let mut word = w.word.clone();
                word.push(l);
                let elem = WordElement { word, matrix };
                if stop(&elem) {
                    return Some(elem);
                }
                count += 1;
                if count >= limit {
                    return None;
                }
                next.push(elem);
            }
        }
        frontier = next;
    }
    None
}

/// Why a trace does or does not certify an elliptic element of infinite order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceClass {
    /// `|t| >= 2`.
    NotElliptic,
    /// `t` is `2 cos(pi q / n)` for some `n` in `{1..6, 8, 10, 12}`.
    FiniteOrder,
    InfiniteOrderElliptic,
}

pub fn classify_trace<T: ExactReal>(t: &T) -> TraceClass
where
    for<'x> &'x T: RefArith<T>,
{
    let two = t.lift(&int(2));
    if (t - &two).sign() >= 0 || (t + &two).sign() <= 0 {
        return TraceClass::NotElliptic;
    }
    let t2 = t * t;
    let one = t.lift(&int(1));
    let rationals = [0, 1, -1].map(|n| t.lift(&int(n)));
    let squares = [2, 3].map(|n| t.lift(&int(n)));
    let golden = [&(&(&t2 - t) - &one), &(&(&t2 + t) - &one)];
    if rationals.contains(t) || squares.contains(&t2) || golden.iter().any(|g| g.sign() == 0) {
        TraceClass::FiniteOrder
    } else {
        TraceClass::InfiniteOrderElliptic
    }
}

/// A determinant-one word whose trace certifies an elliptic element of
/// infinite order.
#[derive(Clone, Debug)]
pub struct EllipticWitness<T> {
    pub element: WordElement<T>,
    pub trace: T,
}

/// Breadth-first search for a witness; `None` when the search space is
/// exhausted.
pub fn find_infinite_elliptic<T: ExactReal>(
    gens: &[Generator<T>],
    max_len: usize,
    limit: usize,
) -> Option<EllipticWitness<T>>
where
    for<'x> &'x T: RefArith<T>,
{
    visit_words(gens, max_len, limit, |w| {
        w.has_unit_determinant() && classify_trace(&w.trace()) == TraceClass::InfiniteOrderElliptic
    })
    .map(|element| EllipticWitness { trace: element.trace(), element })
}

/// Re-multiplies the witness word and re-runs the trace tests.
pub fn reverify_elliptic<T: ExactReal>(gens: &[Generator<T>], word: &[Letter]) -> Result<T>
where
    for<'x> &'x T: RefArith<T>,
{
    let m = evaluate_word(gens, word)?;
    if m.det().as_rational().is_none_or(|d| !d.is_one()) {
        return Err(Error::Verification("witness determinant is not 1".into()));
    }
    let t = m.trace();
    if classify_trace(&t) != TraceClass::InfiniteOrderElliptic {
        return Err(Error::Verification(format!("trace {t} does not certify an infinite-order elliptic")));
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JorgensenVerdict<T> {
    /// `tr[A, B] = 2`: the pair is elementary and the inequality says nothing.
    Elementary,
    Holds {
        sum: T,
    },
    /// Sum below 1 for a non-elementary pair: `<A, B>` is not discrete.
    Violation {
        sum: T,
    },
}

fn abs<T: ExactReal>(x: T) -> T
where
    for<'x> &'x T: RefArith<T>,
{
    if x.sign() < 0 {
        -&x
    } else {
        x
    }
}

/// Evaluates `|tr(A)^2 - 4| + |tr[A, B] - 2|` against 1.
pub fn jorgensen_violation<T: ExactReal>(a: &Mat2<T>, b: &Mat2<T>) -> Result<JorgensenVerdict<T>>
where
    for<'x> &'x T: RefArith<T>,
{
    for m in [a, b] {
        if m.det().as_rational().is_none_or(|d| !d.is_one()) {
            return Err(Error::DeterminantNotOne(m.det().to_string()));
        }
    }
    // inverses of determinant-one matrices are adjugates
    let comm = a.mul(b).mul(&a.adjugate()).mul(&b.adjugate());
    let two = a.a.lift(&int(2));
    let ct = &comm.trace() - &two;
    if ct.sign() == 0 {
        return Ok(JorgensenVerdict::Elementary);
    }
    let ta = a.trace();
    let four = a.a.lift(&int(4));
    let sum = &abs(&(&ta * &ta) - &four) + &abs(ct);
    let one = a.a.lift(&int(1));
    Ok(if (&sum - &one).sign() < 0 { JorgensenVerdict::Violation { sum } } else { JorgensenVerdict::Holds { sum } })
}

#[derive(Clone, Debug)]
pub struct JorgensenWitness<T> {
    pub a: WordElement<T>,
    pub b: WordElement<T>,
    pub sum: T,
}

/// First violating pair among the first `limit` determinant-one words, in
/// enumeration order of `(A, B)`.
pub fn find_jorgensen_pair<T: ExactReal>(
    gens: &[Generator<T>],
    max_len: usize,
    limit: usize,
) -> Option<JorgensenWitness<T>>
where
    for<'x> &'x T: RefArith<T>,
{
    let words: Vec<WordElement<T>> = enumerate_words(gens, max_len, usize::MAX)
        .into_iter()
        .filter(|w| w.has_unit_determinant())
        .take(limit)
        .collect();
    for a in &words {
        for b in &words {
            if let Ok(JorgensenVerdict::Violation { sum }) = jorgensen_violation(&a.matrix, &b.matrix) {
                return Some(JorgensenWitness { a: a.clone(), b: b.clone(), sum });
            }
        }
    }
    None
}

/// Largest `-v_2` over the entries of the 2-adic image, floored at 0: half
/// the distance the element moves the base vertex of the Bruhat-Tits tree.
pub fn tree_displacement(split: &SplittingMap, q: &Quaternion) -> Result<u32> {
    let image = split.image_two_adic(q)?;
    let mut worst = 0i64;
    for x in image.entries() {
        if x.is_zero() {
            if x.absolute_precision().is_some_and(|a| a < 0) {
                return Err(Error::InsufficientPrecision { available: x.absolute_precision().unwrap_or(0), needed: 0 });
            }
            continue;
        }
        worst = worst.max(-x.valuation());
    }
    Ok(worst as u32)
}

/// One factor of a quaternionic word.
#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Factor {
    Unit(Quaternion),
    H,
}

/// `x` as a product `g1 h g2 h ... gn h g0` with each `gi` a norm-one
/// element of the order.
#[derive(Clone, Debug)]
pub struct Descent {
    pub target: Quaternion,
    pub factors: Vec<Factor>,
}

/// Writes `x` as a word in `Gamma` and `h` when `h` moves the base vertex to
/// distance 2: at each step some `g h` (with `g` from `units` or 1) maps the
/// base vertex to the next vertex on the path towards `x`, and `(g h)^-1 x`
/// is one step closer. Returns `None` if no unit realizes a step.
pub fn descend(
    x: &Quaternion,
    h: &Quaternion,
    units: &[Quaternion],
    order: IntegralOrder,
    split: &SplittingMap,
) -> Result<Option<Descent>> {
    if !h.reduced_norm().is_one() || !x.reduced_norm().is_one() {
        return Err(Error::DeterminantNotOne("descent needs norm-one h and x".into()));
    }
    if tree_displacement(split, h)? != 1 {
        return Ok(None);
    }
    let h_inv = h.inverse()?;
    let one = x.algebra().one();
    let candidates: Vec<&Quaternion> = std::iter::once(&one).chain(units.iter()).collect();
    let mut factors = Vec::new();
    let mut y = x.clone();
    let mut n = tree_displacement(split, &y)?;
    while n > 0 {
        let mut step = None;
        for g in &candidates {
            let z = h_inv.mul(&g.inverse()?).mul(&y);
            if tree_displacement(split, &z)? + 1 == n {
                step = Some(((*g).clone(), z));
                break;
            }
        }
        let Some((g, z)) = step else { return Ok(None) };
        factors.push(Factor::Unit(g));
        factors.push(Factor::H);
        y = z;
        n -= 1;
    }
    if !order.contains(&y) {
        return Ok(None);
    }
    factors.push(Factor::Unit(y));
    Ok(Some(Descent { target: x.clone(), factors }))
}

impl Descent {
    /// Re-checks every unit factor (in the order, norm one), re-multiplies
    /// the word, and re-runs the trace tests on the product.
    pub fn reverify(&self, h: &Quaternion, order: IntegralOrder) -> Result<Rational> {
        let mut product = self.target.algebra().one();
        for f in &self.factors {
            match f {
                Factor::H => product = product.mul(h),
                Factor::Unit(g) => {
                    if !order.contains(g) || !g.reduced_norm().is_one() {
                        return Err(Error::Verification(format!("factor {g} is not a norm-one unit")));
                    }
                    product = product.mul(g);
                }
            }
        }
        if product != self.target {
            return Err(Error::Verification("word does not multiply to the target".into()));
        }
        let t = product.reduced_trace();
        if classify_trace(&t) != TraceClass::InfiniteOrderElliptic {
            return Err(Error::Verification(format!(
                "trace {} is not an infinite-order elliptic trace",
                format_rational(&t)
            )));
        }
        Ok(t)
    }
}

/// Norm-one elements `(X0 + X1 i + X2 j + X3 ij) / den` with `|X_i| <= bound`,
/// `den` a power of 2 up to `max_den`, whose trace certifies an elliptic of
/// infinite order. Ordered by `den`, then height, then coordinates.
pub fn small_trace_elements(
    algebra: &QuaternionAlgebra,
    max_den: i64,
    bound: i64,
    limit: usize,
) -> Result<Vec<Quaternion>> {
    let (a, b) = algebra.integral_constants()?;
    let (a, b) = (a as i128, b as i128);
    let mut out = Vec::new();
    let mut den = 2i128;
    while den <= max_den as i128 {
        let target = den * den;
        let mut found: Vec<[i128; 4]> = Vec::new();
        // |trace| = 2 |X0| / den < 2
        for x0 in -(den - 1)..den {
            for x1 in -(bound as i128)..=bound as i128 {
                for x2 in -(bound as i128)..=bound as i128 {
                    // solve for X3: a b X3^2 = target - X0^2 + a X1^2 + b X2^2
                    let rhs = target - x0 * x0 + a * x1 * x1 + b * x2 * x2;
                    if rhs % (a * b) != 0 {
                        continue;
                    }
                    let sq = rhs / (a * b);
                    if sq < 0 {
                        continue;
                    }
                    let r = sq.sqrt();
                    if r * r != sq || r > bound as i128 {
                        continue;
                    }
                    found.push([x0, x1, x2, r]);
                    if r != 0 {
                        found.push([x0, x1, x2, -r]);
                    }
                }
            }
        }
        found.sort_by_key(|x| (x.iter().map(|c| c.abs()).max(), *x));
        let d = Rational::from_integer(den.into());
        for x in found {
            let q = algebra.element(x.map(|c| Rational::from_integer(c.into()) / &d));
            if classify_trace(&q.reduced_trace()) == TraceClass::InfiniteOrderElliptic && !out.contains(&q) {
                out.push(q);
                if out.len() >= limit {
                    return Ok(out);
                }
            }
        }
        den *= 2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::quatalg::QuaternionAlgebra;

    fn rm(a: Rational, b: Rational, c: Rational, d: Rational) -> Mat2<Rational> {
        Mat2::new(a, b, c, d)
    }

    fn sl2z_gens(h: Mat2<Rational>) -> Vec<Generator<Rational>> {
        vec![
            Generator::new("T", rm(int(1), int(1), int(0), int(1))).unwrap(),
            Generator::new("U", rm(int(1), int(0), int(1), int(1))).unwrap(),
            Generator::new("h", h).unwrap(),
        ]
    }

    #[test]
    fn quadratic_signs() {
        let d = int(17);
        let x = RealQuadElem::new(int(4), int(-1), d.clone()).unwrap(); // 4 - sqrt 17 < 0
        assert_eq!(x.sign(), -1);
        let y = RealQuadElem::new(int(5), int(-1), d.clone()).unwrap();
        assert_eq!(y.sign(), 1);
        assert_eq!((&x * &y).as_rational(), None);
        let z = RealQuadElem::new(int(4), int(1), d).unwrap();
        assert_eq!((&x * &z).as_rational(), Some(int(-1)));
        assert!(RealQuadElem::new(int(1), int(1), int(16)).is_err());
    }

    #[test]
    fn trace_classes() {
        assert_eq!(classify_trace(&int(2)), TraceClass::NotElliptic);
        assert_eq!(classify_trace(&int(0)), TraceClass::FiniteOrder);
        assert_eq!(classify_trace(&int(-1)), TraceClass::FiniteOrder);
        assert_eq!(classify_trace(&rat(3, 2)), TraceClass::InfiniteOrderElliptic);
        let d = int(5);
        let golden = RealQuadElem::new(rat(1, 2), rat(1, 2), d.clone()).unwrap();
        assert_eq!(classify_trace(&golden), TraceClass::FiniteOrder);
        let other = RealQuadElem::new(rat(-1, 2), rat(1, 2), d).unwrap();
        assert_eq!(classify_trace(&other), TraceClass::FiniteOrder);
        let root2 = RealQuadElem::new(int(0), int(1), int(2)).unwrap();
        assert_eq!(classify_trace(&root2), TraceClass::FiniteOrder);
    }

    #[test]
    fn sl2z_with_rational_conjugator() {
        let gens = sl2z_gens(rm(int(2), int(0), int(0), int(1)));
        let w = find_infinite_elliptic(&gens, 6, 100_000).expect("witness");
        assert_eq!(w.element.word.len(), 4);
        assert_eq!(reverify_elliptic(&gens, &w.element.word).unwrap(), w.trace);
        let j = find_jorgensen_pair(&gens, 3, 200).expect("pair");
        assert!(j.sum < int(1));
        let discrete = sl2z_gens(rm(int(1), int(1), int(0), int(1)));
        assert!(find_infinite_elliptic(&discrete, 6, 100_000).is_none());
    }

    #[test]
    fn jorgensen_examples() {
        let id = rm(int(1), int(0), int(0), int(1));
        assert_eq!(jorgensen_violation(&id, &id).unwrap(), JorgensenVerdict::Elementary);
        let a = rm(int(1), int(1), int(0), int(1));
        let b = rm(int(1), int(0), rat(1, 2), int(1));
        assert_eq!(jorgensen_violation(&a, &b).unwrap(), JorgensenVerdict::Violation { sum: rat(1, 4) });
        let u = rm(int(1), int(0), int(1), int(1));
        assert_eq!(jorgensen_violation(&a, &u).unwrap(), JorgensenVerdict::Holds { sum: int(1) });
        assert!(jorgensen_violation(&rm(int(2), int(0), int(0), int(1)), &a).is_err());
    }

    #[test]
    fn embedding() {
        let alg = QuaternionAlgebra::from_ints(17, 7).unwrap();
        let one = real_embed(&alg.one()).unwrap();
        assert_eq!(one.det().as_rational(), Some(int(1)));
        let i = real_embed(&alg.basis(1)).unwrap();
        assert_eq!(i.det().as_rational(), Some(int(-17)));
        assert!(real_embed(&QuaternionAlgebra::from_ints(-1, -1).unwrap().one()).is_err());
    }

    #[test]
    fn quaternionic_descent() {
        use crate::commens::find_quaternion_conjugator;
        use crate::quatalg::split_2adic;
        use crate::units::enumerate_units;
        let alg = QuaternionAlgebra::from_ints(17, 7).unwrap();
        let t = rm(int(1), rat(-1, 2), int(0), int(1));
        let h = find_quaternion_conjugator(&alg, &t, 4, 40).unwrap().unwrap();
        let split = split_2adic(&alg, 40).unwrap();
        let xs = small_trace_elements(&alg, 4, 8, 1).unwrap();
        let x = &xs[0];
        assert_eq!(x.reduced_norm(), int(1));
        let slice = enumerate_units(&alg, 10, IntegralOrder::HalfIntegral).unwrap();
        let units: Vec<_> = slice.non_central().cloned().collect();
        let d = descend(x, &h, &units, IntegralOrder::HalfIntegral, &split).unwrap().expect("word");
        assert_eq!(d.reverify(&h, IntegralOrder::HalfIntegral).unwrap(), x.reduced_trace());
        let one = alg.one();
        assert!(descend(x, &one, &units, IntegralOrder::HalfIntegral, &split).unwrap().is_none());
    }
}
