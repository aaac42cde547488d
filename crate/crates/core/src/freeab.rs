//! The free abelian group on generators `e_0, e_1, ...`: finitely supported
//! integer vectors, the fibered subgroup `H = {x : f(i) | x_i}`, and the
//! dyadic subgroups `U_n = {x : 2^n | x_i}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::IntLit;
use crate::report::{Verdict, WitnessReport};
use crate::topology::{member_nbhd_free, CanonicalNbhd};

/// Sparse vector with no stored zeros; support iterates ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinVec(BTreeMap<u64, BigInt>);

impl FinVec {
    pub fn zero() -> Self {
        FinVec::default()
    }

    pub fn unit(i: u64) -> Self {
        Self::scaled_unit(BigInt::one(), i)
    }

    pub fn scaled_unit(c: BigInt, i: u64) -> Self {
        Self::from_pairs([(i, c)])
    }

    /// Sums duplicate indices and drops zero coefficients.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, BigInt)>) -> Self {
        let mut v = FinVec::zero();
        for (i, c) in pairs {
            v.add_at(i, &c);
        }
        v
    }

    fn add_at(&mut self, i: u64, c: &BigInt) {
        let slot = self.0.entry(i).or_default();
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&i);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, i: u64) -> BigInt {
        self.0.get(&i).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &BigInt)> {
        self.0.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.keys().copied()
    }

    pub fn scale(&self, k: &BigInt) -> FinVec {
        FinVec::from_pairs(self.0.iter().map(|(&i, c)| (i, c * k)))
    }

    pub fn norm1(&self) -> BigInt {
        self.0.values().map(|c| c.abs()).sum()
    }
}

impl Add for &FinVec {
    type Output = FinVec;

    fn add(self, rhs: &FinVec) -> FinVec {
        let mut out = self.clone();
        for (&i, c) in &rhs.0 {
            out.add_at(i, c);
        }
        out
    }
}

impl Neg for &FinVec {
    type Output = FinVec;

    fn neg(self) -> FinVec {
        FinVec(self.0.iter().map(|(&i, c)| (i, -c)).collect())
    }
}

impl Sub for &FinVec {
    type Output = FinVec;

    fn sub(self, rhs: &FinVec) -> FinVec {
        self + &(-rhs)
    }
}

impl fmt::Display for FinVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (i, c)) in self.0.iter().enumerate() {
            if c.is_negative() {
                f.write_str("-")?;
            } else if k > 0 {
                f.write_str("+")?;
            }
            let m = c.abs();
            if !m.is_one() {
                write!(f, "{m}")?;
            }
            write!(f, "e{i}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for FinVec {
    type Err = Error;

    /// `sign? coeff? 'e' index` terms joined by `+`/`-`; `0` is the zero
    /// vector. Whitespace is ignored.
    fn from_str(text: &str) -> Result<Self> {
        let chars: Vec<(usize, char)> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
        let err = |pos: usize, msg: &str| Error::Parse {
            pos,
            msg: msg.to_string(),
        };
        if chars.is_empty() {
            return Err(err(0, "empty vector"));
        }
        if chars.len() == 1 && chars[0].1 == '0' {
            return Ok(FinVec::zero());
        }
        let digits = |k: &mut usize| {
            let start = *k;
            while *k < chars.len() && chars[*k].1.is_ascii_digit() {
                *k += 1;
            }
            chars[start..*k].iter().map(|(_, c)| *c).collect::<String>()
        };
        let mut out = FinVec::zero();
        let mut k = 0;
        while k < chars.len() {
            let mut sign = BigInt::one();
            match chars[k].1 {
                '+' | '-' => {
                    if chars[k].1 == '-' {
                        sign = -sign;
                    }
                    k += 1;
                }
                _ if k > 0 => return Err(err(chars[k].0, "expected `+` or `-`")),
                _ => {}
            }
            let coeff = digits(&mut k);
            let pos = chars.get(k).map_or(text.len(), |p| p.0);
            if chars.get(k).map(|p| p.1) != Some('e') {
                return Err(err(pos, "expected `e`"));
            }
            k += 1;
            let index = digits(&mut k);
            if index.is_empty() {
                return Err(err(chars.get(k).map_or(text.len(), |p| p.0), "expected index"));
            }
            let c: BigInt = if coeff.is_empty() { BigInt::one() } else { coeff.parse().expect("digits") };
            let i: u64 = index.parse().map_err(|_| err(pos + 1, "index too large"))?;
            out.add_at(i, &(sign * c));
        }
        Ok(out)
    }
}

/// JSON form `[[0, "3"], [7, "-2"]]`.
impl Serialize for FinVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(u64, IntLit)> = self.0.iter().map(|(&i, c)| (i, IntLit(c.clone()))).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<(u64, IntLit)>::deserialize(d)?;
        let mut seen = std::collections::BTreeSet::new();
        for (i, _) in &pairs {
            if !seen.insert(*i) {
                return Err(D::Error::custom(format!("duplicate index {i}")));
            }
        }
        Ok(FinVec::from_pairs(pairs.into_iter().map(|(i, c)| (i, c.0))))
    }
}

pub fn norm1(x: &FinVec) -> BigInt {
    x.norm1()
}

/// `ν_p(k)`, the exponent of `p` in `k > 0`.
fn valuation(mut k: u64, p: u64) -> u64 {
    let mut v = 0;
    while k % p == 0 {
        k /= p;
        v += 1;
    }
    v
}

/// A map `f : ℕ → ℕ≥1` whose fibers must all be infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiberFn {
    /// `f(i) = ν_p(i+1) + 1`; the fiber of `n` is
    /// `{i : i+1 = p^{n-1}·k, p ∤ k}`. `p = 2` is the default.
    Valuation(u64),
    /// Explicit values `f(0), f(1), ...` on a finite window. Only usable
    /// inside the window; must pass [`FiberFn::audit`].
    Table(Vec<u64>),
}

impl Default for FiberFn {
    fn default() -> Self {
        FiberFn::Valuation(2)
    }
}

impl FiberFn {
    pub fn valuation(p: u64) -> Result<Self> {
        if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
            return Err(Error::FiberAudit(format!("{p} is not prime")));
        }
        Ok(FiberFn::Valuation(p))
    }

    pub fn eval(&self, i: u64) -> Result<u64> {
        match self {
            FiberFn::Valuation(p) => {
                let k = i.checked_add(1).ok_or(Error::NotEvaluable { n: i })?;
                Ok(valuation(k, *p) + 1)
            }
            FiberFn::Table(t) => t.get(i as usize).copied().ok_or(Error::NotEvaluable { n: i }),
        }
    }

    /// A table must take only values `>= 1`, and every value up to its
    /// maximum must occur at least twice in the window, so that the
    /// declared repetition structure is visible.
    pub fn audit(&self) -> Result<()> {
        let FiberFn::Table(t) = self else {
            return Ok(());
        };
        if t.is_empty() {
            return Err(Error::FiberAudit("empty table".into()));
        }
        if let Some(i) = t.iter().position(|&v| v == 0) {
            return Err(Error::FiberAudit(format!("f({i}) = 0")));
        }
        let max = *t.iter().max().expect("non-empty");
        for n in 1..=max {
            if t.iter().filter(|&&v| v == n).count() < 2 {
                return Err(Error::FiberAudit(format!("value {n} occurs fewer than twice")));
            }
        }
        Ok(())
    }

    /// The first `count` indices with `f(i) = n`, ascending.
    pub fn fiber(&self, n: u64, count: usize) -> Result<Vec<u64>> {
        if n == 0 {
            return Err(Error::InvalidArgument("fiber values start at 1".into()));
        }
        self.audit()?;
        match self {
            FiberFn::Valuation(p) => {
                let base = p
                    .checked_pow((n - 1) as u32)
                    .ok_or_else(|| Error::InvalidArgument(format!("{p}^{} overflows", n - 1)))?;
                (1u64..)
                    .filter(|k| k % p != 0)
                    .take(count)
                    .map(|k| {
                        base.checked_mul(k)
                            .map(|v| v - 1)
                            .ok_or_else(|| Error::InvalidArgument("fiber index overflows".into()))
                    })
                    .collect()
            }
            FiberFn::Table(t) => {
                let found: Vec<u64> = (0..t.len() as u64).filter(|&i| t[i as usize] == n).take(count).collect();
                if found.len() < count {
                    return Err(Error::FiberAudit(format!(
                        "table has only {} indices with value {n}, need {count}",
                        found.len()
                    )));
                }
                Ok(found)
            }
        }
    }
}

impl fmt::Display for FiberFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberFn::Valuation(2) => f.write_str("dyadic"),
            FiberFn::Valuation(p) => write!(f, "valuation:{p}"),
            FiberFn::Table(t) => {
                let parts: Vec<String> = t.iter().map(u64::to_string).collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

impl std::str::FromStr for FiberFn {
    type Err = Error;

    /// `dyadic`, `valuation:p` or `table:f0,f1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse {
            pos: 0,
            msg: format!("unrecognized fiber rule `{s}`"),
        };
        if s == "dyadic" || s == "dyadic-valuation" {
            return Ok(FiberFn::default());
        }
        if let Some(p) = s.strip_prefix("valuation:") {
            return FiberFn::valuation(p.trim().parse().map_err(|_| bad())?);
        }
        if let Some(t) = s.strip_prefix("table:") {
            let values = t
                .split(',')
                .map(|v| v.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            let f = FiberFn::Table(values);
            f.audit()?;
            return Ok(f);
        }
        Err(bad())
    }
}

/// `H = {x : f(i) | x_i for every i}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubgroupH {
    pub fiber: FiberFn,
}

impl SubgroupH {
    pub fn new(fiber: FiberFn) -> Result<Self> {
        fiber.audit()?;
        Ok(SubgroupH { fiber })
    }

    pub fn contains(&self, x: &FinVec) -> Result<bool> {
        for (&i, c) in x.iter() {
            if !c.is_multiple_of(&BigInt::from(self.fiber.eval(i)?)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn in_h(x: &FinVec, h: &SubgroupH) -> Result<bool> {
    h.contains(x)
}

/// `x = x' + x''` with `x'` on `{f <= n0}` and `x''` on `{f > n0}`.
pub fn split_h(x: &FinVec, n0: u64, h: &SubgroupH) -> Result<(FinVec, FinVec)> {
    if !h.contains(x)? {
        return Err(Error::NotInH);
    }
    let mut low = Vec::new();
    let mut high = Vec::new();
    for (&i, c) in x.iter() {
        if h.fiber.eval(i)? <= n0 {
            low.push((i, c.clone()));
        } else {
            high.push((i, c.clone()));
        }
    }
    Ok((FinVec::from_pairs(low), FinVec::from_pairs(high)))
}

/// `2^n` divides every coordinate.
pub fn in_un(x: &FinVec, n: u32) -> bool {
    let m = BigInt::one() << n;
    x.iter().all(|(_, c)| c.is_multiple_of(&m))
}

/// Above this many vectors the exhaustive enumeration refuses to run.
pub const BALL_ENUMERATION_LIMIT: u64 = 20_000_000;

/// Number of vectors in `ℤ^w` with `Σ|x_i| <= r`.
fn ball_size(w: u64, r: u64) -> Option<u64> {
    // Σ_k 2^k C(w, k) C(r, k)
    let mut total: u64 = 0;
    let mut cw: u64 = 1;
    let mut cr: u64 = 1;
    for k in 0..=w.min(r) {
        if k > 0 {
            cw = cw.checked_mul(w - k + 1)? / k;
            cr = cr.checked_mul(r - k + 1)? / k;
        }
        let term = 1u64.checked_shl(k as u32)?.checked_mul(cw)?.checked_mul(cr)?;
        total = total.checked_add(term)?;
    }
    Some(total)
}

fn enumerate_ball(window: u64, radius: u64, visit: &mut impl FnMut(&[i64])) {
    fn go(coords: &mut Vec<i64>, window: usize, left: i64, visit: &mut impl FnMut(&[i64])) {
        if coords.len() == window {
            visit(coords);
            return;
        }
        for c in -left..=left {
            coords.push(c);
            go(coords, window, left - c.abs(), visit);
            coords.pop();
        }
    }
    go(&mut Vec::with_capacity(window as usize), window as usize, radius as i64, visit);
}

/// Enumerates every `x` with `norm1(x) <= n0` supported in `[0, window)`
/// and keeps those in `U_{n0}`. Certified iff only `0` survives.
pub fn ball_cap_un(n0: u32, window: u64) -> Result<WitnessReport> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let size = ball_size(window, n0 as u64)
        .filter(|&s| s <= BALL_ENUMERATION_LIMIT)
        .ok_or_else(|| {
            Error::WindowTooLarge(format!(
                "window {window} with radius {n0} exceeds {BALL_ENUMERATION_LIMIT} vectors"
            ))
        })?;
    let modulus = 1i64 << n0.min(62);
    let mut survivors = Vec::new();
    let mut seen: u64 = 0;
    enumerate_ball(window, n0 as u64, &mut |coords| {
        seen += 1;
        if coords.iter().all(|c| c % modulus == 0) {
            let x = FinVec::from_pairs(coords.iter().enumerate().map(|(i, &c)| (i as u64, BigInt::from(c))));
            debug_assert!(in_un(&x, n0));
            survivors.push(x);
        }
    });
    debug_assert_eq!(seen, size);
    let verdict = if survivors.len() == 1 && survivors[0].is_zero() {
        Verdict::Certified
    } else {
        Verdict::Refuted
    };
    let mut report = WitnessReport::new("dyadic-ball-cap", verdict)
        .param("n0", n0)
        .param("window", window)
        .bound("enumerated", seen)
        .bound("survivors", survivors.len());
    for x in &survivors {
        report.push(&[("survivor", x.to_string())]);
    }
    Ok(report)
}

/// `0` followed by `(n0+1)·e_i` for the first `count` indices with
/// `f(i) = n0 + 1`.
pub fn compact_witness(n0: u64, fiber: &FiberFn, count: usize) -> Result<Vec<FinVec>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let c = BigInt::from(n0 + 1);
    let mut out = vec![FinVec::zero()];
    out.extend(
        fiber
            .fiber(n0 + 1, count)?
            .into_iter()
            .map(|i| FinVec::scaled_unit(c.clone(), i)),
    );
    Ok(out)
}

/// `count` vectors `2^n·e_i` inside the neighborhood, for the smallest
/// such `i`. All of them lie in `U_n`.
pub fn nondiscrete_witness(n: u32, nbhd: &CanonicalNbhd, count: usize) -> Result<Vec<FinVec>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let c = BigInt::one() << n;
    // `2^n` units at index `i` need `m_{2^n - 1} <= i`.
    let start = nbhd.slot_big(&(&c - 1));
    let out: Vec<FinVec> = (start..start + count as u64)
        .map(|i| FinVec::scaled_unit(c.clone(), i))
        .collect();
    debug_assert!(out.iter().all(|x| member_nbhd_free(x, nbhd)));
    Ok(out)
}
