//! Independent re-checking of a bundle from its inputs and witnesses alone.

use num_traits::One;
use serde_json::Value;

use super::json::{field, get_array, get_i64, get_rational, get_u64, to_letters, to_matrix, to_quaternion};
use super::{Bundle, Certificate, Verdict};
use crate::commens::{local_intersection, sl2z_case, Conjugator};
use crate::error::{Error, Result};
use crate::exact::{int, Rational};
use crate::fuchsian::{
    evaluate_word, jorgensen_violation, real_embed, reverify_elliptic, Descent, Factor, Generator, JorgensenVerdict,
};
use crate::matrix::Mat2;
use crate::mobius::{commutator, finite_order, index_of_invariant_field, invariant_search, MobiusMap, Order};
use crate::modgroup::{closure, group_order};
use crate::quatalg::{split_2adic, Place, QuaternionAlgebra};
use crate::units::{check_d, reduce_quaternion, splitting_precision, IntegralOrder};

/// Outcome of re-checking one certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recheck {
    Passed,
    /// Only verified certificates carry a checkable witness.
    Skipped,
    Failed(String),
}

/// Re-checks every verified certificate of `bundle`, in order.
pub fn reverify(bundle: &Bundle) -> Vec<(String, Recheck)> {
    bundle
        .certificates
        .iter()
        .map(|c| {
            let r = if c.verdict != Verdict::Verified {
                Recheck::Skipped
            } else {
                match check(bundle, c) {
                    Ok(()) => Recheck::Passed,
                    Err(e) => Recheck::Failed(e.to_string()),
                }
            };
            (c.claim.clone(), r)
        })
        .collect()
}

fn ensure(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Verification(what.into()))
    }
}

fn algebra_of(v: &Value) -> Result<(QuaternionAlgebra, IntegralOrder)> {
    let alg = QuaternionAlgebra::new(get_rational(v, "a")?, get_rational(v, "b")?)?;
    let order: IntegralOrder =
        serde_json::from_value(field(v, "order")?.clone()).map_err(|e| Error::Verification(format!("order: {e}")))?;
    Ok((alg, order))
}

fn sl2z_gens(h: &Mat2<Rational>) -> Result<Vec<Generator<Rational>>> {
    Ok(vec![
        Generator::new("S", Mat2::new(int(0), int(-1), int(1), int(0)))?,
        Generator::new("T", Mat2::new(int(1), int(1), int(0), int(1)))?,
        Generator::new("h", h.clone())?,
    ])
}

fn check(bundle: &Bundle, c: &Certificate) -> Result<()> {
    for d in &c.depends_on {
        let dep = bundle.certificate(d).ok_or_else(|| Error::Verification(format!("missing dependency {d}")))?;
        ensure(matches!(dep.verdict, Verdict::Verified | Verdict::Assumption), "dependency is not verified")?;
    }
    let (i, w) = (&c.inputs, &c.witness);
    let claim = c.claim.as_str();
    match claim {
        "dihedral.commutator" => {
            let a = get_rational(i, "a")?;
            let got = commutator(&MobiusMap::sigma(), &MobiusMap::sigma_a(&a)?);
            let expected = MobiusMap::new(Mat2::new(int(1), int(0), int(0), &a * &a))?;
            ensure(got == expected, "commutator is not x -> x/a^2")?;
            ensure(MobiusMap::new(to_matrix(field(w, "matrix")?)?)? == got, "recorded matrix differs")
        }
        "dihedral.commutator-infinite-order" | "dihedral.finite-group" => {
            let a = get_rational(i, "a")?;
            let c = commutator(&MobiusMap::sigma(), &MobiusMap::sigma_a(&a)?);
            let o = finite_order(&c, 24)?;
            let infinite = matches!(o, Order::Infinite { .. });
            ensure(infinite == (claim == "dihedral.commutator-infinite-order"), "order verdict differs")
        }
        "dihedral.invariant-field-index2" => {
            let a = get_rational(i, "a")?;
            for g in [MobiusMap::sigma(), MobiusMap::sigma_a(&a)?] {
                ensure(index_of_invariant_field(&g)? == 2, "invariant field index is not 2")?;
            }
            Ok(())
        }
        "dihedral.trivial-intersection" | "dihedral.control-nontrivial-intersection" => {
            let a = get_rational(i, "a")?;
            let degree = get_u64(i, "degree")? as usize;
            let gens = [MobiusMap::sigma(), MobiusMap::sigma_a(&a)?];
            let s = invariant_search(&gens, degree)?;
            ensure(s.invariants.iter().all(|f| gens.iter().all(|g| f.is_invariant_under(g))), "invariant fails")?;
            ensure(s.invariants.is_empty() == (claim == "dihedral.trivial-intersection"), "invariant set differs")
        }
        "quaternionic.d-two-adic-square" => check_d(get_i64(i, "d")?),
        "quaternionic.example-algebra" => {
            let alg = QuaternionAlgebra::from_ints(get_i64(i, "d")?, get_i64(w, "b")?)?;
            let r = alg.ramified_places()?;
            ensure(!r.is_empty(), "not a division algebra")?;
            ensure(!r.contains(&Place::Prime(2)) && !r.contains(&Place::Infinity), "ramified at 2 or infinity")?;
            ensure(!alg.quadratic_embeds(&int(-1))? && !alg.quadratic_embeds(&int(-3))?, "torsion field embeds")
        }
        "quaternionic.torsion-free" => {
            let (alg, _) = algebra_of(field(i, "algebra")?)?;
            ensure(alg.is_division()?, "not a division algebra")?;
            ensure(!alg.quadratic_embeds(&int(-1))?, "Q(i) embeds")?;
            ensure(!alg.quadratic_embeds(&int(-3))?, "Q(sqrt -3) embeds")
        }
        "quaternionic.unramified-covers" => Ok(()),
        _ if claim.starts_with("quaternionic.surjective.k") => {
            let (alg, order) = algebra_of(field(i, "algebra")?)?;
            let k = get_u64(i, "k")? as u32;
            let split = split_2adic(&alg, splitting_precision(k))?;
            let mut gens = Vec::new();
            for u in get_array(w, "generating_units")? {
                let q = to_quaternion(&alg, u)?;
                ensure(order.contains(&q) && q.reduced_norm().is_one(), "generator is not a unit of the order")?;
                gens.push(reduce_quaternion(&split, &q, k)?);
            }
            let full = group_order(2, k)? as u64;
            let image = if gens.is_empty() { 1 } else { closure(&gens)?.order() };
            ensure(image == full, "recorded units do not generate SL2(Z/2^k)")
        }
        "quaternionic.index3" | "quaternionic.control-index1" => {
            let (alg, _) = algebra_of(field(i, "algebra")?)?;
            let h = Conjugator::quaternion(to_quaternion(&alg, field(w, "h")?)?)?;
            let levels = get_array(field(w, "stabilization")?, "levels")?;
            let images = get_array(w, "images")?;
            let mut prev = None;
            for (l, img) in levels.iter().zip(images) {
                ensure(get_u64(img, "image_order")? == get_u64(img, "full_order")?, "image was not the full group")?;
                let r = local_intersection(&h, 2, get_u64(l, "k")? as u32)?;
                let got = (r.index_in_gamma, r.index_in_gamma_h);
                ensure(got == (get_u64(l, "index_in_gamma")?, get_u64(l, "index_in_gamma_h")?), "index differs")?;
                prev = Some(got);
            }
            let target = if claim == "quaternionic.control-index1" { 1 } else { super::PAPER_INDEX };
            ensure(prev == Some((target, target)), "final indices differ from the claim")
        }
        "quaternionic.nondiscrete" => {
            let (alg, order) = algebra_of(field(i, "algebra")?)?;
            let h = to_quaternion(&alg, field(i, "h")?)?;
            match field(w, "kind")?.as_str() {
                Some("word") => {
                    let mut gens = Vec::new();
                    for g in get_array(w, "generators")? {
                        let q = to_quaternion(&alg, field(g, "quaternion")?)?;
                        let label = field(g, "label")?.as_str().unwrap_or("?");
                        ensure(
                            label == "h" && q == h || order.contains(&q) && q.reduced_norm().is_one(),
                            "bad generator",
                        )?;
                        gens.push(Generator::new(label, real_embed(&q)?)?);
                    }
                    reverify_elliptic(&gens, &to_letters(field(w, "word")?)?).map(|_| ())
                }
                Some("descent") => {
                    let mut factors = Vec::new();
                    for f in get_array(w, "factors")? {
                        factors.push(if f.as_str() == Some("h") {
                            Factor::H
                        } else {
                            Factor::Unit(to_quaternion(&alg, f)?)
                        });
                    }
                    let d = Descent { target: to_quaternion(&alg, field(w, "target")?)?, factors };
                    let t = d.reverify(&h, order)?;
                    ensure(t == get_rational(w, "trace")?, "trace differs")
                }
                _ => Err(Error::Verification("unknown witness kind".into())),
            }
        }
        "sl2z.finite-index" | "sl2z.control-index1" => {
            let h = to_matrix(field(i, "h")?)?;
            let primes: Vec<u64> = get_array(i, "primes")?.iter().filter_map(Value::as_u64).collect();
            let levels = get_array(w, "levels")?;
            let last = levels.last().ok_or_else(|| Error::Verification("no levels".into()))?;
            let r = sl2z_case(&h, &primes, get_u64(last, "k")? as u32)?;
            ensure(r.index_in_gamma == get_u64(w, "index_in_gamma")?, "index in Gamma differs")?;
            ensure(r.index_in_gamma_h == get_u64(w, "index_in_gamma_h")?, "index in Gamma_h differs")?;
            if claim == "sl2z.control-index1" {
                ensure((r.index_in_gamma, r.index_in_gamma_h) == (1, 1), "control index is not 1")?;
            } else if levels.len() >= 2 {
                let prev = &levels[levels.len() - 2];
                ensure(get_u64(prev, "index_in_gamma")? == r.index_in_gamma, "not stabilized")?;
            }
            Ok(())
        }
        "sl2z.nondiscrete" => {
            let gens = sl2z_gens(&to_matrix(field(i, "h")?)?)?;
            let t = reverify_elliptic(&gens, &to_letters(field(w, "word")?)?)?;
            ensure(t == get_rational(w, "trace")?, "trace differs")
        }
        "sl2z.jorgensen" => {
            let gens = sl2z_gens(&to_matrix(field(i, "h")?)?)?;
            let a = evaluate_word(&gens, &to_letters(field(w, "a")?)?)?;
            let b = evaluate_word(&gens, &to_letters(field(w, "b")?)?)?;
            match jorgensen_violation(&a, &b)? {
                JorgensenVerdict::Violation { sum } => ensure(sum == get_rational(w, "sum")?, "sum differs"),
                _ => Err(Error::Verification("no violation".into())),
            }
        }
        _ => Err(Error::Verification(format!("no re-check for claim {claim}"))),
    }
}
