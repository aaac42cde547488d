//! Lazily evaluated integer sequences with provenance.

use std::fmt;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::num::{floor_pow, fmt_rat, parse_fraction, parse_int};
use crate::ringseq::{theorem2_term, RatioTarget};
use crate::tracker::TrackedSeq;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqPreset {
    /// `⌊r^n⌋` for `n >= 0`; `2^n` is the `pow2` preset.
    Pow(BigRational),
    /// `n^d` for `n >= 1`.
    Poly(u32),
    /// The ring-obstruction sequence, `n >= 1`.
    Thm2(RatioTarget),
    /// `a_n + c`.
    Shifted(Box<SeqPreset>, BigInt),
    /// Explicit finite table starting at `first`, e.g. tracker output.
    Table {
        name: String,
        first: u64,
        values: Vec<BigInt>,
    },
}

impl SeqPreset {
    pub fn pow2() -> Self {
        SeqPreset::Pow(BigRational::from_integer(2.into()))
    }

    pub fn shifted(self, c: impl Into<BigInt>) -> Self {
        SeqPreset::Shifted(Box::new(self), c.into())
    }

    pub fn tracked(seq: &TrackedSeq) -> Self {
        SeqPreset::Table {
            name: "tracked".into(),
            first: seq.first_index(),
            values: seq.values(),
        }
    }

    pub fn first_index(&self) -> u64 {
        match self {
            SeqPreset::Pow(_) => 0,
            SeqPreset::Poly(_) | SeqPreset::Thm2(_) => 1,
            SeqPreset::Shifted(inner, _) => inner.first_index(),
            SeqPreset::Table { first, .. } => *first,
        }
    }

    pub fn last_index(&self) -> Option<u64> {
        match self {
            SeqPreset::Shifted(inner, _) => inner.last_index(),
            SeqPreset::Table { first, values, .. } => {
                (values.len() as u64).checked_sub(1).map(|l| first + l)
            }
            _ => None,
        }
    }

    fn eval(&self, n: u64) -> Result<BigInt> {
        let first = self.first_index();
        if n < first || self.last_index().is_some_and(|l| n > l) {
            return Err(Error::IndexOutOfRange {
                index: n,
                first,
                last: self.last_index().unwrap_or(u64::MAX),
            });
        }
        let exp = || u32::try_from(n).map_err(|_| Error::InvalidArgument(format!("index {n} too large")));
        Ok(match self {
            SeqPreset::Pow(r) => floor_pow(r, exp()?),
            SeqPreset::Poly(d) => num_traits::pow(BigInt::from(n), *d as usize),
            SeqPreset::Thm2(r) => {
                exp()?;
                theorem2_term(r, n)
            }
            SeqPreset::Shifted(inner, c) => inner.eval(n)? + c,
            SeqPreset::Table { first, values, .. } => values[(n - first) as usize].clone(),
        })
    }
}

impl fmt::Display for SeqPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqPreset::Pow(r) if r.is_integer() => write!(f, "{}^n", r.numer()),
            SeqPreset::Pow(r) => write!(f, "({})^n", fmt_rat(r)),
            SeqPreset::Poly(1) => write!(f, "n"),
            SeqPreset::Poly(d) => write!(f, "n^{d}"),
            SeqPreset::Thm2(r) => write!(f, "thm2({})", fmt_rat(r.value())),
            SeqPreset::Shifted(inner, c) if c.is_negative() => write!(f, "{inner}{c}"),
            SeqPreset::Shifted(inner, c) => write!(f, "{inner}+{c}"),
            SeqPreset::Table { name, .. } => write!(f, "{name}"),
        }
    }
}

impl std::str::FromStr for SeqPreset {
    type Err = Error;

    /// Accepts `pow2`, `2^n`, `(3/2)^n`, `pow(3/2)`, `n`, `n^d`,
    /// `thm2(3/2)`, `shifted(<seq>, c)`, `<seq>+c`, `<seq>-c` and
    /// `table:v0,v1,...` (indices from 0).
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        parse_seq(&t)
    }
}

fn parse_seq(t: &str) -> Result<SeqPreset> {
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("unrecognized sequence `{t}`"),
    };
    if let Some(rest) = t.strip_prefix("table:") {
        let values = rest.split(',').map(parse_int).collect::<Result<Vec<_>>>()?;
        return Ok(SeqPreset::Table {
            name: "table".into(),
            first: 0,
            values,
        });
    }
    if let Some(inner) = t.strip_prefix("shifted(").and_then(|r| r.strip_suffix(')')) {
        let comma = top_level(inner, |c| c == ',').ok_or_else(bad)?;
        let base = parse_seq(&inner[..comma])?;
        return Ok(base.shifted(parse_int(&inner[comma + 1..])?));
    }
    // A trailing top-level `+c` / `-c` is a shift.
    if let Some(i) = top_level_last(t, |c| c == '+' || c == '-') {
        if i > 0 {
            if let Ok(c) = parse_int(&t[i..]) {
                return Ok(parse_seq(&t[..i])?.shifted(c));
            }
        }
    }
    match t {
        "pow2" => return Ok(SeqPreset::pow2()),
        "n" => return Ok(SeqPreset::Poly(1)),
        _ => {}
    }
    if let Some(d) = t.strip_prefix("n^") {
        return d.parse().map(SeqPreset::Poly).map_err(|_| bad());
    }
    if let Some(r) = t.strip_prefix("pow(").and_then(|r| r.strip_suffix(')')) {
        return Ok(SeqPreset::Pow(parse_fraction(r)?));
    }
    if let Some(r) = t.strip_prefix("thm2(").and_then(|r| r.strip_suffix(')')) {
        return Ok(SeqPreset::Thm2(RatioTarget::new(parse_fraction(r)?)?));
    }
    if let Some(base) = t.strip_suffix("^n") {
        let base = base
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .unwrap_or(base);
        return Ok(SeqPreset::Pow(parse_fraction(base)?));
    }
    Err(bad())
}

fn top_level(t: &str, pred: impl Fn(char) -> bool) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in t.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if depth == 0 && pred(c) => return Some(i),
            _ => {}
        }
    }
    None
}

fn top_level_last(t: &str, pred: impl Fn(char) -> bool) -> Option<usize> {
    let mut depth = 0i32;
    let mut found = None;
    for (i, c) in t.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if depth == 0 && pred(c) => found = Some(i),
            _ => {}
        }
    }
    found
}

/// A preset with a memo of already evaluated terms. Safe to share
/// between threads.
pub struct IntSeq {
    preset: SeqPreset,
    memo: RwLock<Vec<BigInt>>,
}

impl IntSeq {
    pub fn new(preset: SeqPreset) -> Self {
        IntSeq {
            preset,
            memo: RwLock::new(Vec::new()),
        }
    }

    pub fn preset(&self) -> &SeqPreset {
        &self.preset
    }

    pub fn first_index(&self) -> u64 {
        self.preset.first_index()
    }

    pub fn last_index(&self) -> Option<u64> {
        self.preset.last_index()
    }

    pub fn term(&self, n: u64) -> Result<BigInt> {
        let first = self.first_index();
        if n < first {
            return self.preset.eval(n);
        }
        {
            let off = (n - first) as usize;
            if let Some(v) = self.memo.read().expect("memo lock").get(off) {
                return Ok(v.clone());
            }
        }
        self.extend_to(n)?;
        let memo = self.memo.read().expect("memo lock");
        Ok(memo[(n - first) as usize].clone())
    }

    fn extend_to(&self, n: u64) -> Result<()> {
        let first = self.first_index();
        let mut memo = self.memo.write().expect("memo lock");
        while first + (memo.len() as u64) <= n {
            let next = first + memo.len() as u64;
            memo.push(self.preset.eval(next)?);
        }
        Ok(())
    }

    /// Terms `a_first ..= a_last`, clipped to the sequence's own range.
    pub fn terms(&self, last: u64) -> Result<Vec<BigInt>> {
        let last = self.last_index().map_or(last, |l| l.min(last));
        let first = self.first_index();
        if last < first {
            return Ok(Vec::new());
        }
        self.extend_to(last)?;
        let memo = self.memo.read().expect("memo lock");
        Ok(memo[..=(last - first) as usize].to_vec())
    }
}

impl Clone for IntSeq {
    fn clone(&self) -> Self {
        IntSeq {
            preset: self.preset.clone(),
            memo: RwLock::new(self.memo.read().expect("memo lock").clone()),
        }
    }
}

impl fmt::Debug for IntSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntSeq").field("preset", &self.preset).finish()
    }
}

impl fmt::Display for IntSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.preset.fmt(f)
    }
}

impl From<SeqPreset> for IntSeq {
    fn from(p: SeqPreset) -> Self {
        IntSeq::new(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn presets_evaluate() {
        let a = IntSeq::new("2^n".parse().unwrap());
        assert_eq!(a.first_index(), 0);
        assert_eq!(a.term(0).unwrap(), big(1));
        assert_eq!(a.term(10).unwrap(), big(1024));
        assert_eq!(a.term(3).unwrap(), big(8));
        let b = IntSeq::new("2^n+1".parse().unwrap());
        assert_eq!(b.term(3).unwrap(), big(9));
        let c = IntSeq::new("shifted(pow2, -5)".parse().unwrap());
        assert_eq!(c.term(3).unwrap(), big(3));
        let t = IntSeq::new("thm2(3/2)".parse().unwrap());
        assert_eq!(t.term(6).unwrap(), big(10));
        assert!(t.term(0).is_err());
        let p = IntSeq::new("(3/2)^n".parse().unwrap());
        assert_eq!(p.term(4).unwrap(), big(5));
        let n = IntSeq::new("n".parse().unwrap());
        assert_eq!(n.terms(4).unwrap(), vec![big(1), big(2), big(3), big(4)]);
    }

    #[test]
    fn tables_are_finite() {
        let t = IntSeq::new("table:5,7,11".parse().unwrap());
        assert_eq!(t.last_index(), Some(2));
        assert_eq!(t.terms(100).unwrap().len(), 3);
        assert!(matches!(t.term(3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn display_round_trips() {
        for s in ["2^n", "(3/2)^n", "n", "n^2", "thm2(7/4)", "2^n+1", "3^n-4"] {
            let p: SeqPreset = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
            assert_eq!(p.to_string().parse::<SeqPreset>().unwrap(), p);
        }
        assert!("foo".parse::<SeqPreset>().is_err());
    }

    #[test]
    fn shared_across_threads() {
        let a = std::sync::Arc::new(IntSeq::new(SeqPreset::pow2()));
        let handles: Vec<_> = (0..4)
            .map(|i| {
                let a = a.clone();
                std::thread::spawn(move || a.term(50 + i).unwrap())
            })
            .collect();
        for (i, h) in handles.into_iter().enumerate() {
            assert_eq!(h.join().unwrap(), BigInt::from(1u8) << (50 + i));
        }
    }
}
