//! Möbius transformations over Q and simultaneous invariants of groups
//! generated by involutions, searched degree by degree on binary forms.
//!
//! A rational function `P/Q` in lowest terms, with `P, Q` forms of degree
//! `d`, is invariant under `g` exactly when `P` and `Q` are relative
//! invariants of the substitution operator `S_g` with the same eigenvalue.
//! The search over joint eigenspaces is therefore complete per degree.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_sqrt, format_rational, int, Rational};
use crate::matrix::Mat2;

/// A projective class of invertible rational 2x2 matrices, stored with its
/// first nonzero entry equal to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MobiusMap {
    matrix: Mat2<Rational>,
}

impl MobiusMap {
    pub fn new(m: Mat2<Rational>) -> Result<Self> {
        if m.det().is_zero() {
            return Err(Error::NotInvertible);
        }
        let lead = m.entries().into_iter().find(|x| !x.is_zero()).expect("nonzero det").clone();
        Ok(MobiusMap { matrix: m.map(|x| x / &lead) })
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(Mat2::new(int(a), int(b), int(c), int(d)))
    }

    pub fn identity() -> Self {
        Self::from_ints(1, 0, 0, 1).expect("invertible")
    }

    /// `x -> 1/x`.
    pub fn sigma() -> Self {
        Self::from_ints(0, 1, 1, 0).expect("invertible")
    }

    /// `x -> a/x`, for `a != 0`.
    pub fn sigma_a(a: &Rational) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::InvalidInput("sigma_a needs a != 0".into()));
        }
        Self::new(Mat2::new(int(0), a.clone(), int(1), int(0)))
    }

    pub fn matrix(&self) -> &Mat2<Rational> {
        &self.matrix
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::new(self.matrix.mul(&other.matrix)).expect("product of invertibles")
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.matrix.adjugate()).expect("invertible")
    }

    pub fn is_identity(&self) -> bool {
        is_scalar(&self.matrix)
    }

    /// `g(x)` for `x` not a pole.
    pub fn apply(&self, x: &Rational) -> Option<Rational> {
        let m = &self.matrix;
        let den = &m.c * x + &m.d;
        (!den.is_zero()).then(|| (&m.a * x + &m.b) / den)
    }

    /// `tr^2 / det`, the conjugacy invariant of the projective class.
    pub fn trace_invariant(&self) -> Rational {
        let t = self.matrix.trace();
        &t * &t / self.matrix.det()
    }
}

impl fmt::Display for MobiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.matrix.entries().map(format_rational);
        write!(f, "[[{},{}],[{},{}]]", e[0], e[1], e[2], e[3])
    }
}

fn is_scalar(m: &Mat2<Rational>) -> bool {
    m.b.is_zero() && m.c.is_zero() && m.a == m.d
}

/// `g1 g2 g1^-1 g2^-1`.
pub fn commutator(g1: &MobiusMap, g2: &MobiusMap) -> MobiusMap {
    g1.compose(g2).compose(&g1.inverse()).compose(&g2.inverse())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Order {
    Finite {
        order: u32,
    },
    /// No power up to the search bound is scalar, and `tr^2/det` rules out
    /// every finite order (or the map is parabolic).
    Infinite {
        trace_invariant: String,
    },
}

/// Smallest `n <= n_max` with `g^n` scalar; otherwise infinite, certified by
/// the trace-invariant criterion.
pub fn finite_order(g: &MobiusMap, n_max: u32) -> Result<Order> {
    if n_max < 12 {
        return Err(Error::InvalidInput("n_max must be >= 12".into()));
    }
    let mut power = g.matrix.clone();
    for n in 1..=n_max {
        if is_scalar(&power) {
            return Ok(Order::Finite { order: n });
        }
        power = power.mul(&g.matrix);
    }
    let t = g.trace_invariant();
    let finite_values = [0, 1, 2, 3].map(int);
    // values 0..3 are orders 2, 4, 3, 6 and would have been found above
    assert!(!finite_values.contains(&t), "finite-order trace invariant without a scalar power");
    Ok(Order::Infinite { trace_invariant: format_rational(&t) })
}

/// A binary form of degree `d`: coefficient `k` multiplies `X^(d-k) Y^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    coeffs: Vec<Rational>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty());
        BinaryForm { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in o.coeffs.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        BinaryForm { coeffs: out }
    }

    /// `P(aX + bY, cX + dY)`.
    pub fn substitute(&self, g: &Mat2<Rational>) -> Self {
        let d = self.degree();
        let first = BinaryForm::new(vec![g.a.clone(), g.b.clone()]);
        let second = BinaryForm::new(vec![g.c.clone(), g.d.clone()]);
        let mut out = BinaryForm::new(vec![Rational::zero(); d + 1]);
        for (k, coeff) in self.coeffs.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            let mut term = BinaryForm::new(vec![coeff.clone()]);
            for _ in 0..d - k {
                term = term.mul(&first);
            }
            for _ in 0..k {
                term = term.mul(&second);
            }
            for (o, t) in out.coeffs.iter_mut().zip(term.coeffs) {
                *o += t;
            }
        }
        out
    }

    /// Dehomogenized value at `x = X/Y`, `Y = 1`.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, c| acc * x + c)
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match (d - k, k) {
                (0, 0) => String::new(),
                (i, 0) => power("X", i),
                (0, j) => power("Y", j),
                (i, j) => format!("{}*{}", power("X", i), power("Y", j)),
            };
            terms.push(match (mono.is_empty(), c.is_one()) {
                (true, _) => format_rational(c),
                (false, true) => mono,
                (false, false) => format!("{}*{mono}", format_rational(c)),
            });
        }
        if terms.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&terms.join(" + "))
    }
}

fn power(v: &str, e: usize) -> String {
    if e == 1 {
        v.to_string()
    } else {
        format!("{v}^{e}")
    }
}

/// Substitution operators of a set of involutions on forms of one degree,
/// each rescaled so that it squares to the identity.
#[derive(Clone, Debug)]
pub struct BinaryFormSpace {
    pub degree: usize,
    /// Column `k` is the image of the monomial `X^(d-k) Y^k`.
    pub operators: Vec<Vec<Vec<Rational>>>,
}

/// `S_g` on forms of degree `d`, unnormalized.
pub fn substitution_operator(g: &MobiusMap, d: usize) -> Vec<Vec<Rational>> {
    let mut cols = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let mut e = vec![Rational::zero(); d + 1];
        e[k] = Rational::one();
        cols.push(BinaryForm::new(e).substitute(g.matrix()).coeffs);
    }
    (0..=d).map(|r| (0..=d).map(|c| cols[c][r].clone()).collect()).collect()
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    Some(Rational::new(exact_sqrt(r.numer())?, exact_sqrt(r.denom())?))
}

impl BinaryFormSpace {
    /// `None` when some generator has no rational relative invariants in
    /// this degree (its operator squares to a non-square scalar).
    pub fn new(generators: &[MobiusMap], degree: usize) -> Result<Option<Self>> {
        let mut operators = Vec::new();
        for g in generators {
            let m = g.matrix();
            let square = m.mul(m);
            if !is_scalar(&square) {
                return Err(Error::NotAnInvolution);
            }
            // S_g^2 = S_{g^2} = (g^2)_11^d
            let scalar = pow(&square.a, degree);
            let Some(root) = rational_sqrt(&scalar) else { return Ok(None) };
            let op = substitution_operator(g, degree)
                .into_iter()
                .map(|row| row.into_iter().map(|x| x / &root).collect())
                .collect();
            operators.push(op);
        }
        Ok(Some(BinaryFormSpace { degree, operators }))
    }

    /// Forms `P` with `S_i P = chi_i P` for every generator.
    pub fn joint_eigenspace(&self, character: &[i8]) -> Vec<BinaryForm> {
        let n = self.degree + 1;
        let mut rows = Vec::new();
        for (op, &chi) in self.operators.iter().zip(character) {
            for (r, row) in op.iter().enumerate() {
                let mut row = row.clone();
                row[r] -= int(chi as i64);
                rows.push(row);
            }
        }
        null_space(rows, n).into_iter().map(BinaryForm::new).collect()
    }
}

fn pow(x: &Rational, e: usize) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// Basis of `{v : rows * v = 0}` by exact reduced row echelon form.
pub fn null_space(mut rows: Vec<Vec<Rational>>, ncols: usize) -> Vec<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot_row = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[i][f].clone();
            }
            clear_denominators(v)
        })
        .collect()
}

/// Scales a nonzero vector to coprime integers with positive leading entry.
fn clear_denominators(v: Vec<Rational>) -> Vec<Rational> {
    use num_integer::Integer;
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let mut g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        g = -g;
    }
    ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

/// A nonconstant invariant `numerator / denominator`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantFunction {
    pub numerator: BinaryForm,
    pub denominator: BinaryForm,
    pub character: Vec<i8>,
}

impl InvariantFunction {
    pub fn degree(&self) -> usize {
        self.numerator.degree()
    }

    /// Exact check of `P(g) Q = P Q(g)` as polynomials.
    pub fn is_invariant_under(&self, g: &MobiusMap) -> bool {
        let lhs = self.numerator.substitute(g.matrix()).mul(&self.denominator);
        let rhs = self.numerator.mul(&self.denominator.substitute(g.matrix()));
        lhs == rhs
    }
}

impl fmt::Display for InvariantFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: usize,
    /// False when some generator admits no rational relative invariants.
    pub has_semi_invariants: bool,
    /// `(character, dimension)` for every nonzero joint eigenspace.
    pub eigenspaces: Vec<(Vec<i8>, usize)>,
}

#[derive(Clone, Debug)]
pub struct InvariantSearch {
    pub max_degree: usize,
    pub degrees: Vec<DegreeReport>,
    pub invariants: Vec<InvariantFunction>,
}

fn characters(n: usize) -> Vec<Vec<i8>> {
    (0..1u32 << n).map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect()).collect()
}

/// Every eigenspace of dimension `m >= 2` contributes the `m - 1` ratios of
/// its basis vectors to the first; these generate its invariants.
pub fn invariant_search(generators: &[MobiusMap], max_degree: usize) -> Result<InvariantSearch> {
    if generators.is_empty() || max_degree < 1 {
        return Err(Error::InvalidInput("need generators and max degree >= 1".into()));
    }
    let mut degrees = Vec::new();
    let mut invariants = Vec::new();
    for d in 1..=max_degree {
        let Some(space) = BinaryFormSpace::new(generators, d)? else {
            degrees.push(DegreeReport { degree: d, has_semi_invariants: false, eigenspaces: vec![] });
            continue;
        };
        let mut eigenspaces = Vec::new();
        for chi in characters(generators.len()) {
            let basis = space.joint_eigenspace(&chi);
            if basis.is_empty() {
                continue;
            }
            for q in &basis[1..] {
                invariants.push(InvariantFunction {
                    numerator: q.clone(),
                    denominator: basis[0].clone(),
                    character: chi.clone(),
                });
            }
            eigenspaces.push((chi, basis.len()));
        }
        degrees.push(DegreeReport { degree: d, has_semi_invariants: true, eigenspaces });
    }
    Ok(InvariantSearch { max_degree, degrees, invariants })
}

/// Degree of `k(x)` over the field of invariants of an involution, read off
/// as the smallest degree carrying a nonconstant invariant.
pub fn index_of_invariant_field(g: &MobiusMap) -> Result<usize> {
    if finite_order(g, 12)? != (Order::Finite { order: 2 }) {
        return Err(Error::NotAnInvolution);
    }
    let search = invariant_search(std::slice::from_ref(g), 2)?;
    search.invariants.iter().map(|f| f.degree()).min().ok_or(Error::Verification("no degree-2 invariant".into()))
}
