//! The amalgamated sum `ℤ ⊕_{cℤ} ℤ = ℤ² / Γ` with `Γ = {(h, −h) : h ∈ cℤ}`.
//!
//! Every coset has a unique representative `(u, v)` with `0 <= v < c`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::report::{Verdict, WitnessReport};
use crate::seq::IntSeq;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AmalgamElt {
    c: BigInt,
    u: BigInt,
    v: BigInt,
}

fn check_modulus(c: &BigInt) -> Result<()> {
    if c.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveModulus(c.to_string()))
    }
}

/// `(x, y) ~ (x + c·⌊y/c⌋, y mod c)`.
pub fn normal_form(x: &BigInt, y: &BigInt, c: &BigInt) -> Result<AmalgamElt> {
    check_modulus(c)?;
    let (t, v) = y.div_mod_floor(c);
    Ok(AmalgamElt {
        c: c.clone(),
        u: x + c * t,
        v,
    })
}

impl AmalgamElt {
    pub fn zero(c: &BigInt) -> Result<Self> {
        normal_form(&BigInt::zero(), &BigInt::zero(), c)
    }

    pub fn modulus(&self) -> &BigInt {
        &self.c
    }

    pub fn u(&self) -> &BigInt {
        &self.u
    }

    pub fn v(&self) -> &BigInt {
        &self.v
    }

    pub fn pair(&self) -> (BigInt, BigInt) {
        (self.u.clone(), self.v.clone())
    }

    pub fn add(&self, other: &AmalgamElt) -> Result<AmalgamElt> {
        if self.c != other.c {
            return Err(Error::ModulusMismatch(self.c.to_string(), other.c.to_string()));
        }
        normal_form(&(&self.u + &other.u), &(&self.v + &other.v), &self.c)
    }

    pub fn neg(&self) -> AmalgamElt {
        normal_form(&-&self.u, &-&self.v, &self.c).expect("modulus already checked")
    }

    /// Image under `(u, v) ↦ (u + v, v mod c)` in `ℤ ⊕ ℤ/c`.
    pub fn split_image(&self) -> (BigInt, BigInt) {
        (&self.u + &self.v, self.v.clone())
    }
}

impl fmt::Display for AmalgamElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.u, self.v)
    }
}

/// `e_1(g) = (g, 0) + Γ`.
pub fn emb1(g: &BigInt, c: &BigInt) -> Result<AmalgamElt> {
    normal_form(g, &BigInt::zero(), c)
}

/// `e_2(g) = (0, g) + Γ`.
pub fn emb2(g: &BigInt, c: &BigInt) -> Result<AmalgamElt> {
    normal_form(&BigInt::zero(), g, c)
}

/// The common restriction of `e_1` and `e_2` to `cℤ`.
pub fn emb_h(h: &BigInt, c: &BigInt) -> Result<AmalgamElt> {
    check_modulus(c)?;
    if !h.is_multiple_of(c) {
        return Err(Error::NotInSubgroup(h.to_string(), c.to_string()));
    }
    emb1(h, c)
}

/// Compares `e_1[W] ∩ e_2[W]` with `e[W ∩ cℤ]` for `W = [−bound, bound]`.
pub fn intersection_check(c: &BigInt, bound: &BigInt) -> Result<WitnessReport> {
    check_modulus(c)?;
    if bound < c {
        return Err(Error::InvalidArgument(format!("bound {bound} is below c = {c}")));
    }
    let window = || num_iter(-bound, bound);
    let first: BTreeSet<AmalgamElt> = window().map(|g| emb1(&g, c)).collect::<Result<_>>()?;
    let second: BTreeSet<AmalgamElt> = window().map(|g| emb2(&g, c)).collect::<Result<_>>()?;
    let both: BTreeSet<AmalgamElt> = first.intersection(&second).cloned().collect();
    let image: BTreeSet<AmalgamElt> = window()
        .filter(|h| h.is_multiple_of(c))
        .map(|h| emb_h(&h, c))
        .collect::<Result<_>>()?;
    // e_2 images whose u-coordinate leaves the window.
    let truncated = second.iter().filter(|e| e.u.abs() > *bound).count();
    let verdict = if both == image {
        Verdict::Certified
    } else {
        Verdict::Refuted
    };
    let mut report = WitnessReport::new("amalgam-intersection", verdict)
        .param("c", c)
        .param("bound", bound)
        .bound("window", format!("[-{bound},{bound}]"))
        .bound("intersection_size", both.len())
        .bound("image_size", image.len())
        .bound("boundary_truncated", truncated);
    for e in both.symmetric_difference(&image) {
        let side = if both.contains(e) { "intersection-only" } else { "image-only" };
        report.push(&[("element", e.to_string()), ("side", side.into())]);
    }
    if verdict == Verdict::Certified {
        if let (Some(lo), Some(hi)) = (both.first(), both.last()) {
            report.push(&[("least", lo.to_string()), ("greatest", hi.to_string())]);
        }
    }
    Ok(report)
}

fn num_iter(lo: BigInt, hi: &BigInt) -> impl Iterator<Item = BigInt> + '_ {
    let mut next = Some(lo);
    std::iter::from_fn(move || {
        let cur = next.take()?;
        if &cur > hi {
            return None;
        }
        next = Some(&cur + 1);
        Some(cur)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushedTerm {
    pub n: u64,
    pub a: BigInt,
    pub first: AmalgamElt,
    pub second: AmalgamElt,
}

/// Normal forms of `e_1(a_n)` and `e_2(a_n)` for `first_index <= n <= N`.
pub fn pushed_sequences(a: &IntSeq, c: &BigInt, big_n: u64) -> Result<Vec<PushedTerm>> {
    check_modulus(c)?;
    if big_n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let first = a.first_index();
    a.terms(big_n)?
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            Ok(PushedTerm {
                n: first + k as u64,
                first: emb1(&v, c)?,
                second: emb2(&v, c)?,
                a: v,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::SeqPreset;
    use proptest::prelude::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn nf(x: i64, y: i64, c: i64) -> (BigInt, BigInt) {
        normal_form(&big(x), &big(y), &big(c)).unwrap().pair()
    }

    #[test]
    fn normal_form_examples() {
        assert_eq!(nf(2, 7, 3), (big(8), big(1)));
        assert_eq!(nf(5, 0, 3), (big(5), big(0)));
        assert_eq!(nf(0, -1, 3), (big(-3), big(2)));
        assert_eq!(normal_form(&big(1), &big(1), &big(0)), Err(Error::NonPositiveModulus("0".into())));
        assert!(normal_form(&big(1), &big(1), &big(-2)).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let c = big(3);
        let a = normal_form(&big(5), &big(1), &c).unwrap();
        let b = normal_form(&big(4), &big(2), &c).unwrap();
        assert_eq!(a.add(&b).unwrap().pair(), (big(12), big(0)));
        assert_eq!(a.add(&a.neg()).unwrap(), AmalgamElt::zero(&c).unwrap());
        assert_eq!(normal_form(&big(0), &big(1), &c).unwrap().neg().pair(), (big(-3), big(2)));
        let d = emb1(&big(1), &big(4)).unwrap();
        assert!(matches!(a.add(&d), Err(Error::ModulusMismatch(..))));
    }

    #[test]
    fn embedding_examples() {
        let c = big(3);
        assert_eq!(emb2(&big(5), &c).unwrap().pair(), (big(3), big(2)));
        assert_eq!(emb_h(&big(6), &c).unwrap().pair(), (big(6), big(0)));
        assert_eq!(emb2(&big(6), &c).unwrap().pair(), (big(6), big(0)));
        assert_eq!(emb1(&big(0), &c).unwrap(), AmalgamElt::zero(&c).unwrap());
        assert_eq!(emb_h(&big(7), &c), Err(Error::NotInSubgroup("7".into(), "3".into())));
    }

    #[test]
    fn intersection_examples() {
        for (c, bound) in [(3, 30), (1, 10), (2, 4)] {
            let r = intersection_check(&big(c), &big(bound)).unwrap();
            assert_eq!(r.verdict, Verdict::Certified);
        }
        let r = intersection_check(&big(2), &big(4)).unwrap();
        assert_eq!(r.bounds["intersection_size"], "5");
        assert_eq!(r.evidence[0]["least"], "(-4,0)");
        assert_eq!(r.evidence[0]["greatest"], "(4,0)");
        assert!(intersection_check(&big(5), &big(4)).is_err());
    }

    #[test]
    fn pushed_examples() {
        let a = IntSeq::new(SeqPreset::pow2());
        let p = pushed_sequences(&a, &big(3), 2).unwrap();
        assert_eq!(p[2].first.pair(), (big(4), big(0)));
        assert_eq!(p[2].second.pair(), (big(3), big(1)));
        let p = pushed_sequences(&a, &big(4), 10).unwrap();
        assert_eq!(p[2].second, p[2].first);
        for t in &p {
            if t.a.is_multiple_of(&big(4)) {
                assert_eq!(t.first, t.second);
                assert_eq!(t.first, emb_h(&t.a, &big(4)).unwrap());
            } else {
                assert_ne!(t.first, t.second);
            }
        }
    }

    #[test]
    fn embeddings_are_injective_on_a_window() {
        for c in [1i64, 2, 7] {
            let c = big(c);
            let mut seen1 = BTreeSet::new();
            let mut seen2 = BTreeSet::new();
            for g in -2000i64..=2000 {
                assert!(seen1.insert(emb1(&big(g), &c).unwrap()));
                assert!(seen2.insert(emb2(&big(g), &c).unwrap()));
            }
        }
    }

    #[test]
    fn split_image_is_a_bijection_on_a_window() {
        // (u, v) ↦ (u + v, v) must be injective and additive.
        let c = big(5);
        let mut seen = BTreeSet::new();
        for x in -20i64..=20 {
            for y in -20i64..=20 {
                let e = normal_form(&big(x), &big(y), &c).unwrap();
                let (s, r) = e.split_image();
                assert_eq!(s, big(x + y));
                seen.insert((e, (s, r)));
            }
        }
        let images: BTreeSet<_> = seen.iter().map(|(_, i)| i.clone()).collect();
        assert_eq!(images.len(), seen.len());
    }

    fn elt(c: i64) -> impl Strategy<Value = AmalgamElt> {
        (-10_000i64..10_000, -10_000i64..10_000)
            .prop_map(move |(x, y)| normal_form(&big(x), &big(y), &big(c)).unwrap())
    }

    proptest! {
        #[test]
        fn normal_form_is_constant_on_orbits(x in -1_000_000i64..1_000_000, y in -1_000_000i64..1_000_000, t in -1000i64..1000, c in 1i64..50) {
            let e = normal_form(&big(x), &big(y), &big(c)).unwrap();
            prop_assert_eq!(normal_form(&big(x + t * c), &big(y - t * c), &big(c)).unwrap(), e.clone());
            prop_assert_eq!(normal_form(e.u(), e.v(), &big(c)).unwrap(), e.clone());
            prop_assert!(!e.v().is_negative() && e.v() < &big(c));
        }

        #[test]
        fn group_laws((a, b, d) in (1i64..20).prop_flat_map(|c| (elt(c), elt(c), elt(c)))) {
            let z = AmalgamElt::zero(a.modulus()).unwrap();
            prop_assert_eq!(a.add(&b).unwrap().add(&d).unwrap(), a.add(&b.add(&d).unwrap()).unwrap());
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.add(&z).unwrap(), a.clone());
            prop_assert_eq!(a.add(&a.neg()).unwrap(), z);
        }

        #[test]
        fn embeddings_are_homomorphisms(g in -10_000i64..10_000, h in -10_000i64..10_000, c in 1i64..30) {
            let c = big(c);
            for emb in [emb1, emb2] {
                let lhs = emb(&big(g + h), &c).unwrap();
                let rhs = emb(&big(g), &c).unwrap().add(&emb(&big(h), &c).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
            let m = big(g) * &c;
            prop_assert_eq!(emb1(&m, &c).unwrap(), emb2(&m, &c).unwrap());
        }
    }
}
