//! Countable neighborhood bases of zero for metrizable, totally bounded
//! group topologies on `Z`.
//!
//! Two decidable families are provided: chains of subgroups `d_i·Z` with
//! `d_i | d_{i+1}` (this covers the p-adic topologies), and Bohr-type bases
//! `U_i = {x : dist(α·x, Z) < 2^-i}` for a quadratic irrational `α`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{rat, FracLit, IntLit};
use crate::surd::{convergents, QuadSurd};

/// `U_i = d_i·Z` for a divisibility chain `1 = d_0 | d_1 | d_2 | ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuliChain {
    divisors: Vec<BigInt>,
}

impl ModuliChain {
    pub fn new(divisors: Vec<BigInt>) -> Result<Self> {
        match divisors.first() {
            Some(d) if d.is_one() => {}
            _ => return Err(Error::InvalidBase("the chain must start with d_0 = 1".into())),
        }
        for (i, w) in divisors.windows(2).enumerate() {
            if !w[1].is_positive() || !w[1].is_multiple_of(&w[0]) {
                return Err(Error::InvalidBase(format!(
                    "d_{} = {} does not divide d_{} = {}",
                    i,
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
            if i >= 1 && w[1] <= w[0] {
                return Err(Error::InvalidBase(format!(
                    "divisors must increase strictly from d_1 on (d_{} = {}, d_{} = {})",
                    i,
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
        }
        Ok(ModuliChain { divisors })
    }

    /// `d_i = p^i` for `i = 0..=depth`.
    pub fn padic(p: &BigInt, depth: usize) -> Result<Self> {
        if *p < BigInt::from(2) {
            return Err(Error::InvalidBase(format!("p-adic base needs p >= 2, got {p}")));
        }
        let mut divisors = Vec::with_capacity(depth + 1);
        let mut d = BigInt::one();
        for _ in 0..=depth {
            divisors.push(d.clone());
            d *= p;
        }
        ModuliChain::new(divisors)
    }

    /// `d_i = i!` for `i = 0..=depth`.
    pub fn factorial(depth: usize) -> Self {
        let mut divisors = Vec::with_capacity(depth + 1);
        let mut d = BigInt::one();
        divisors.push(d.clone());
        for i in 1..=depth {
            d *= i;
            divisors.push(d.clone());
        }
        ModuliChain { divisors }
    }

    pub fn divisors(&self) -> &[BigInt] {
        &self.divisors
    }

    /// Index of the last level in the chain.
    pub fn depth(&self) -> usize {
        self.divisors.len() - 1
    }

    pub fn divisor(&self, level: usize) -> Result<&BigInt> {
        self.divisors.get(level).ok_or(Error::LevelOutOfRange {
            level,
            depth: self.depth(),
        })
    }

    /// Largest level whose divisor is at most `bound`.
    pub fn last_level_at_most(&self, bound: &BigInt) -> usize {
        self.divisors.partition_point(|d| d <= bound).saturating_sub(1)
    }
}

/// Bohr-type base `U_i = {x : dist(α·x, Z) < 2^-i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterBase {
    alpha: QuadSurd,
    depth: usize,
}

impl CharacterBase {
    pub fn new(alpha: QuadSurd, depth: usize) -> Result<Self> {
        if alpha.is_rational() {
            return Err(Error::NotHausdorff(
                "rational alpha gives a base that does not separate points".into(),
            ));
        }
        Ok(CharacterBase { alpha, depth })
    }

    pub fn alpha(&self) -> &QuadSurd {
        &self.alpha
    }

    /// Default level cap used when tracking.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn radius(level: usize) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << level)
    }

    fn member(&self, level: usize, x: &BigInt) -> bool {
        if x.is_zero() || level == 0 {
            return true;
        }
        self.alpha
            .scale(&rat(x.clone()))
            .dist_to_int_lt(&Self::radius(level))
    }

    /// With `L = q_k` points `{s·α}` the circle gaps are `η_{k-1}` and
    /// `η_{k-1} + η_k` (`η_j = |q_j·α − p_j|`), so once that sum is below
    /// `2δ` every point of the circle is within `δ` of some `s·α`.
    fn cover_radius(&self, level: usize) -> BigInt {
        let two_delta = Self::radius(level) * rat(2);
        let mut prev: Option<crate::surd::Convergent> = None;
        for c in convergents(&self.alpha) {
            if let Some(p) = prev {
                if p.error.add(&c.error).cmp_rat(&two_delta) == Ordering::Less {
                    // 2l − 1 consecutive shifts must cover q_k points.
                    return (&c.q >> 1u32) + 1;
                }
            }
            prev = Some(c);
        }
        unreachable!("continued fraction of an irrational never terminates")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NeighborhoodBase {
    Moduli(ModuliChain),
    Character(CharacterBase),
}

impl NeighborhoodBase {
    pub fn member(&self, level: usize, x: &BigInt) -> Result<bool> {
        match self {
            NeighborhoodBase::Moduli(m) => Ok(x.is_multiple_of(m.divisor(level)?)),
            NeighborhoodBase::Character(c) => Ok(c.member(level, x)),
        }
    }

    /// Some `l` with `⋃_{|s|<l} (s + U_level) = Z`.
    pub fn cover_radius(&self, level: usize) -> Result<BigInt> {
        match self {
            NeighborhoodBase::Moduli(m) => Ok(m.divisor(level)?.clone()),
            NeighborhoodBase::Character(c) => Ok(c.cover_radius(level)),
        }
    }

    /// Smallest `i <= depth_cap` with `x ∉ U_i`, or `None` when every level
    /// up to the cap still contains `x`.
    pub fn separation_level(&self, x: &BigInt, depth_cap: usize) -> Result<Option<usize>> {
        if x.is_zero() {
            return Err(Error::ZeroSeparation);
        }
        let cap = self.max_level().map_or(depth_cap, |d| d.min(depth_cap));
        for level in 0..=cap {
            if !self.member(level, x)? {
                return Ok(Some(level));
            }
        }
        Ok(None)
    }

    /// Last representable level, if the base is finite.
    pub fn max_level(&self) -> Option<usize> {
        match self {
            NeighborhoodBase::Moduli(m) => Some(m.depth()),
            NeighborhoodBase::Character(_) => None,
        }
    }

    pub fn default_level_cap(&self) -> usize {
        match self {
            NeighborhoodBase::Moduli(m) => m.depth(),
            NeighborhoodBase::Character(c) => c.depth(),
        }
    }

    /// Largest level `<= cap` containing `x`, and whether the cap was hit
    /// (so that higher levels were not ruled out).
    pub fn level_of(&self, x: &BigInt, cap: usize) -> (usize, bool) {
        let cap = self.max_level().map_or(cap, |d| d.min(cap));
        let mut level = 0;
        while level < cap && self.member(level + 1, x).unwrap_or(false) {
            level += 1;
        }
        (level, level == cap)
    }
}

/// Config-document form of a base.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BaseDesc {
    Moduli { divisors: Vec<IntLit> },
    Padic { p: IntLit, depth: usize },
    Factorial { depth: usize },
    Character { alpha: AlphaDesc, depth: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum AlphaDesc {
    /// `offset + scale·√sqrt`.
    Sqrt {
        sqrt: IntLit,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<FracLit>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<FracLit>,
    },
    /// Eventually periodic continued fraction.
    Cf { cf: CfDesc },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfDesc {
    #[serde(default)]
    pub prefix: Vec<IntLit>,
    pub period: Vec<IntLit>,
}

impl AlphaDesc {
    pub fn to_surd(&self) -> Result<QuadSurd> {
        match self {
            AlphaDesc::Sqrt {
                sqrt,
                offset,
                scale,
            } => {
                let a = offset.as_ref().map_or_else(BigRational::zero, |f| f.0.clone());
                let b = scale.as_ref().map_or_else(BigRational::one, |f| f.0.clone());
                QuadSurd::new(a, b, sqrt.0.clone())
            }
            AlphaDesc::Cf { cf } => {
                let prefix: Vec<BigInt> = cf.prefix.iter().map(|t| t.0.clone()).collect();
                let period: Vec<BigInt> = cf.period.iter().map(|t| t.0.clone()).collect();
                QuadSurd::from_periodic_cf(&prefix, &period)
            }
        }
    }
}

impl BaseDesc {
    pub fn build(&self) -> Result<NeighborhoodBase> {
        Ok(match self {
            BaseDesc::Moduli { divisors } => NeighborhoodBase::Moduli(ModuliChain::new(
                divisors.iter().map(|d| d.0.clone()).collect(),
            )?),
            BaseDesc::Padic { p, depth } => {
                NeighborhoodBase::Moduli(ModuliChain::padic(&p.0, *depth)?)
            }
            BaseDesc::Factorial { depth } => {
                NeighborhoodBase::Moduli(ModuliChain::factorial(*depth))
            }
            BaseDesc::Character { alpha, depth } => {
                NeighborhoodBase::Character(CharacterBase::new(alpha.to_surd()?, *depth)?)
            }
        })
    }
}

impl std::str::FromStr for BaseDesc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config {
            field: "base".into(),
            msg: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moduli(ds: &[i64]) -> NeighborhoodBase {
        NeighborhoodBase::Moduli(ModuliChain::new(ds.iter().map(|&d| d.into()).collect()).unwrap())
    }

    fn sqrt2() -> NeighborhoodBase {
        r#"{"kind":"character","alpha":{"sqrt":2},"depth":32}"#
            .parse::<BaseDesc>()
            .unwrap()
            .build()
            .unwrap()
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn moduli_membership() {
        let b = moduli(&[1, 2, 4, 8]);
        assert!(b.member(3, &big(24)).unwrap());
        assert!(!b.member(3, &big(4)).unwrap());
        assert!(b.member(0, &big(-7)).unwrap());
        assert!(matches!(
            b.member(4, &big(0)),
            Err(Error::LevelOutOfRange { level: 4, depth: 3 })
        ));
    }

    #[test]
    fn character_membership() {
        let b = sqrt2();
        // 5√2 ≈ 7.0711
        assert!(b.member(2, &big(5)).unwrap());
        assert!(b.member(3, &big(5)).unwrap());
        assert!(!b.member(4, &big(5)).unwrap());
        assert!(b.member(0, &big(1)).unwrap());
        assert!(b.member(1, &big(1)).unwrap());
        assert!(!b.member(2, &big(1)).unwrap());
        assert!(b.member(40, &big(0)).unwrap());
    }

    #[test]
    fn cover_radius_examples() {
        assert_eq!(moduli(&[1, 2, 4, 8]).cover_radius(3).unwrap(), big(8));
        assert_eq!(moduli(&[1, 6]).cover_radius(1).unwrap(), big(6));
        let l = sqrt2().cover_radius(2).unwrap();
        assert!(l <= big(8), "l = {l}");
        assert_eq!(l, big(3));
        assert_eq!(sqrt2().cover_radius(0).unwrap(), big(1));
    }

    #[test]
    fn separation_levels() {
        let b = moduli(&[1, 2, 4, 8]);
        assert_eq!(b.separation_level(&big(4), 10).unwrap(), Some(3));
        assert_eq!(b.separation_level(&big(1), 10).unwrap(), Some(1));
        assert_eq!(b.separation_level(&big(8), 10).unwrap(), None);
        assert_eq!(b.separation_level(&big(0), 10), Err(Error::ZeroSeparation));
        // dist(√2, Z) ≈ 0.414 is below 1/2 but not below 1/4.
        assert_eq!(sqrt2().separation_level(&big(1), 10).unwrap(), Some(2));
    }

    #[test]
    fn chain_validation() {
        assert!(ModuliChain::new(vec![big(2), big(4)]).is_err());
        assert!(ModuliChain::new(vec![big(1), big(2), big(5)]).is_err());
        assert!(ModuliChain::new(vec![big(1), big(2), big(2)]).is_err());
        assert!(ModuliChain::new(vec![big(1), big(1), big(2)]).is_ok());
        assert!(ModuliChain::new(vec![]).is_err());
        let f = ModuliChain::factorial(5);
        assert_eq!(f.divisors().last(), Some(&big(120)));
        assert!(ModuliChain::new(f.divisors().to_vec()).is_ok());
        assert_eq!(f.last_level_at_most(&big(119)), 4);
        assert_eq!(f.last_level_at_most(&big(120)), 5);
    }

    #[test]
    fn rational_alpha_is_rejected() {
        let e = r#"{"kind":"character","alpha":{"sqrt":"16"},"depth":8}"#
            .parse::<BaseDesc>()
            .unwrap()
            .build();
        assert!(matches!(e, Err(Error::NotHausdorff(_))));
        let e = r#"{"kind":"character","alpha":{"sqrt":2,"scale":"0"},"depth":8}"#
            .parse::<BaseDesc>()
            .unwrap()
            .build();
        assert!(matches!(e, Err(Error::NotHausdorff(_))));
    }

    #[test]
    fn config_forms() {
        let b: BaseDesc = r#"{"kind":"padic","p":2,"depth":64}"#.parse().unwrap();
        match b.build().unwrap() {
            NeighborhoodBase::Moduli(m) => {
                assert_eq!(m.depth(), 64);
                assert_eq!(m.divisor(64).unwrap(), &(BigInt::one() << 64));
            }
            _ => panic!(),
        }
        let b: BaseDesc = r#"{"kind":"moduli","divisors":["1","2","4","8"]}"#.parse().unwrap();
        assert_eq!(b.build().unwrap(), moduli(&[1, 2, 4, 8]));
        let cf: BaseDesc =
            r#"{"kind":"character","alpha":{"cf":{"prefix":[1],"period":[2]}},"depth":8}"#
                .parse()
                .unwrap();
        let cf = cf.build().unwrap();
        for x in -50..50 {
            for level in 0..6 {
                assert_eq!(
                    cf.member(level, &big(x)).unwrap(),
                    sqrt2().member(level, &big(x)).unwrap()
                );
            }
        }
        assert!(r#"{"kind":"padic","p":2,"depth":4,"extra":1}"#
            .parse::<BaseDesc>()
            .is_err());
        let round = serde_json::to_string(&b).unwrap();
        assert_eq!(round.parse::<BaseDesc>().unwrap(), b);
    }

    fn covers(b: &NeighborhoodBase, level: usize, window: i64) -> bool {
        let l = b.cover_radius(level).unwrap();
        let l: i64 = l.to_string().parse().unwrap();
        (-window..=window).all(|x| ((1 - l)..l).any(|s| b.member(level, &big(x - s)).unwrap()))
    }

    #[test]
    fn cover_property_on_windows() {
        let b = moduli(&[1, 2, 4, 8, 16]);
        for level in 0..=4 {
            assert!(covers(&b, level, 200));
        }
        let s = sqrt2();
        for level in 0..=6 {
            assert!(covers(&s, level, 300), "level {level}");
        }
        let golden: NeighborhoodBase =
            r#"{"kind":"character","alpha":{"sqrt":5,"offset":"1/2","scale":"1/2"},"depth":8}"#
                .parse::<BaseDesc>()
                .unwrap()
                .build()
                .unwrap();
        for level in 0..=6 {
            assert!(covers(&golden, level, 300), "level {level}");
        }
    }

    #[test]
    fn level_of_respects_caps() {
        let b = moduli(&[1, 2, 4, 8]);
        assert_eq!(b.level_of(&big(12), 10), (2, false));
        assert_eq!(b.level_of(&big(16), 10), (3, true));
        assert_eq!(b.level_of(&big(16), 2), (2, true));
        assert_eq!(sqrt2().level_of(&big(5), 10), (3, false));
    }
}
