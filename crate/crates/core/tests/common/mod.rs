//! Brute-force oracles written with plain machine integers, independent of
//! the library code they check.

#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Mutex;

use cofibered::exact::Rational;
use num_traits::ToPrimitive;

pub fn primes() -> [u64; 6] {
    [2, 3, 5, 7, 11, 13]
}

/// Squarefree integer in the rational square class of `n/d`.
pub fn square_class(n: i64, d: i64) -> i64 {
    let mut s = n * d;
    let mut f = 2i64;
    while f * f <= s.abs() {
        while s % (f * f) == 0 {
            s /= f * f;
        }
        f += 1;
    }
    s
}

pub fn square_class_of(r: &Rational) -> i64 {
    square_class(r.numer().to_i64().expect("small"), r.denom().to_i64().expect("small"))
}

fn lifts(a: i128, b: i128, p: i128, x: [i128; 3], k: u32, target: u32) -> bool {
    if k == target {
        return true;
    }
    let step = p.pow(k);
    let m = p.pow(k + 1);
    for tx in 0..p {
        for ty in 0..p {
            for tz in 0..p {
                let (x0, y0, z0) = (x[0] + tx * step, x[1] + ty * step, x[2] + tz * step);
                let f = (z0 * z0 - a * x0 * x0 - b * y0 * y0).rem_euclid(m);
                if f == 0 && lifts(a, b, p, [x0, y0, z0], k + 1, target) {
                    return true;
                }
            }
        }
    }
    false
}

/// Whether `z^2 = a x^2 + b y^2` has a solution mod `p^target` lifting a
/// solution mod `p` with not all of `x, y, z` divisible by `p`.
pub fn conic_solvable(a: i64, b: i64, p: u64, target: u32) -> bool {
    let (a, b, p) = (a as i128, b as i128, p as i128);
    for x in 0..p {
        for y in 0..p {
            for z in 0..p {
                if x == 0 && y == 0 && z == 0 {
                    continue;
                }
                if (z * z - a * x * x - b * y * y).rem_euclid(p) == 0 && lifts(a, b, p, [x, y, z], 1, target) {
                    return true;
                }
            }
        }
    }
    false
}

type ConicKey = (i64, i64, u64);

static CONIC_CACHE: Mutex<Option<HashMap<ConicKey, bool>>> = Mutex::new(None);

/// `(a, b)_p` by brute force on squarefree representatives, mod `p^8`.
pub fn hilbert_oracle(a: &Rational, b: &Rational, p: u64) -> i8 {
    let (sa, sb) = (square_class_of(a), square_class_of(b));
    let key = (sa.min(sb), sa.max(sb), p);
    if let Some(v) = CONIC_CACHE.lock().unwrap().get_or_insert_with(HashMap::new).get(&key) {
        return if *v { 1 } else { -1 };
    }
    let v = conic_solvable(key.0, key.1, p, 8);
    CONIC_CACHE.lock().unwrap().get_or_insert_with(HashMap::new).insert(key, v);
    if v {
        1
    } else {
        -1
    }
}

/// `|SL2(Z/n)|` by counting every matrix.
pub fn sl2_count(n: u64) -> u64 {
    let mut count = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if (a * d % n + n - b * c % n) % n == 1 % n {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Norm-one units of `Z<i,j>` (or the half-integral order, when `half`)
/// with every coordinate at most `height` in absolute value, as doubled
/// coordinates, sorted.
pub fn units_by_cube(a: i64, b: i64, height: i64, half: bool) -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    let r = 2 * height;
    for y0 in -r..=r {
        for y1 in -r..=r {
            for y2 in -r..=r {
                for y3 in -r..=r {
                    let ys = [y0, y1, y2, y3];
                    let ok_parity =
                        if half { (y0 - y1) % 2 == 0 && (y2 - y3) % 2 == 0 } else { ys.iter().all(|y| y % 2 == 0) };
                    if !ok_parity {
                        continue;
                    }
                    let n = y0 * y0 - a * y1 * y1 - b * y2 * y2 + a * b * y3 * y3;
                    if n == 4 {
                        out.push(ys);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Whether `u` (a unit mod p) has a square root mod `p^e`, by trying every residue.
pub fn has_root_mod(u: u64, p: u64, e: u32) -> bool {
    let m = p.pow(e);
    (0..m).any(|x| (x as u128 * x as u128 % m as u128) as u64 == u % m)
}

/// Exponent used by [`has_root_mod`] for each prime: the largest keeping `p^e <= 10^6`, capped at 10.
pub fn root_exponent(p: u64) -> u32 {
    let mut e = 1;
    while e < 10 && p.pow(e + 1) <= 1_000_000 {
        e += 1;
    }
    e
}
