//! Greedy construction of a sequence that converges to zero in a given
//! totally bounded topology while tracking a growth function, plus the
//! gap statistics behind the necessary condition for increasing sequences.
//!
//! For each `n` the tracker looks at the integer interval
//! `I_n = [f(n) − ε(n), f(n) + ε(n)]`, finds the deepest level `k(n)` whose
//! neighborhood meets it, and picks `a_n ∈ U_{k(n)} ∩ I_n` closest to `f(n)`
//! (smaller value on ties).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{ceil_rat, floor_pow, floor_rat, fmt_rat, parse_fraction, parse_int, rat};
use crate::zbase::NeighborhoodBase;

/// Integer-valued growth function on `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrowthFn {
    /// `f(n) = n^d`.
    Power(u32),
    /// `f(n) = ⌊r^n⌋ + n²`.
    ExpPlusSquare(BigRational),
    /// `f(n) = table[n - 1]`.
    Table(Vec<BigInt>),
}

impl GrowthFn {
    pub fn eval(&self, n: u64) -> Result<BigInt> {
        if n == 0 {
            return Err(Error::NotEvaluable { n });
        }
        match self {
            GrowthFn::Power(d) => Ok(num_traits::pow(BigInt::from(n), *d as usize)),
            GrowthFn::ExpPlusSquare(r) => {
                let e = u32::try_from(n).map_err(|_| Error::NotEvaluable { n })?;
                Ok(floor_pow(r, e) + BigInt::from(n) * BigInt::from(n))
            }
            GrowthFn::Table(t) => t
                .get((n - 1) as usize)
                .cloned()
                .ok_or(Error::NotEvaluable { n }),
        }
    }
}

impl fmt::Display for GrowthFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthFn::Power(d) => write!(f, "n^{d}"),
            GrowthFn::ExpPlusSquare(r) if r.is_integer() => write!(f, "{}^n+n^2", r.numer()),
            GrowthFn::ExpPlusSquare(r) => write!(f, "({})^n+n^2", fmt_rat(r)),
            GrowthFn::Table(t) => {
                write!(f, "table:")?;
                for (i, v) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::str::FromStr for GrowthFn {
    type Err = Error;

    /// Accepts `n^d`, `r^n+n^2` (with `r` an integer or `(p/q)`), and
    /// `table:v1,v2,...` listing `f(1), f(2), ...`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |msg: &str| Error::Parse {
            pos: 0,
            msg: format!("{msg} in growth function `{s}`"),
        };
        if let Some(rest) = t.strip_prefix("table:") {
            let vals = rest
                .split(',')
                .map(parse_int)
                .collect::<Result<Vec<_>>>()?;
            return Ok(GrowthFn::Table(vals));
        }
        if t == "n" {
            return Ok(GrowthFn::Power(1));
        }
        if let Some(d) = t.strip_prefix("n^") {
            let d: u32 = d.parse().map_err(|_| bad("bad exponent"))?;
            return Ok(GrowthFn::Power(d));
        }
        if let Some(base) = t.strip_suffix("^n+n^2") {
            let base = base
                .strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .unwrap_or(base);
            let r = parse_fraction(base)?;
            return Ok(GrowthFn::ExpPlusSquare(r));
        }
        Err(bad("unrecognized form"))
    }
}

/// Tolerance function `ε`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Epsilon {
    /// `ε(1) = 0`, `ε(n) = ½·min{isqrt f(n), f(n+1) − f(n), f(n) − f(n−1)}`.
    Default,
    /// `ε(n) = n`.
    Linear,
    Const(BigRational),
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Default => write!(f, "default"),
            Epsilon::Linear => write!(f, "n"),
            Epsilon::Const(c) => write!(f, "{}", fmt_rat(c)),
        }
    }
}

impl std::str::FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "default" => Ok(Epsilon::Default),
            "n" => Ok(Epsilon::Linear),
            other => Ok(Epsilon::Const(parse_fraction(other)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackerSpec {
    pub f: GrowthFn,
    pub eps: Epsilon,
    pub base: NeighborhoodBase,
    /// Maximal level searched; defaults to the base's own depth.
    pub level_cap: Option<usize>,
}

impl TrackerSpec {
    pub fn new(f: GrowthFn, eps: Epsilon, base: NeighborhoodBase) -> Self {
        TrackerSpec {
            f,
            eps,
            base,
            level_cap: None,
        }
    }

    pub fn with_level_cap(mut self, cap: usize) -> Self {
        self.level_cap = Some(cap);
        self
    }

    pub fn epsilon(&self, n: u64) -> Result<BigRational> {
        match &self.eps {
            Epsilon::Default => default_epsilon(&self.f, n),
            Epsilon::Linear => Ok(rat(n)),
            Epsilon::Const(c) => Ok(c.clone()),
        }
    }
}

pub fn default_epsilon(f: &GrowthFn, n: u64) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::NotEvaluable { n });
    }
    if n == 1 {
        return Ok(BigRational::zero());
    }
    let prev = f.eval(n - 1)?;
    let cur = f.eval(n)?;
    let next = f.eval(n + 1)?;
    if cur <= prev || next <= cur {
        return Err(Error::GrowthViolation { n });
    }
    let root = if cur.is_negative() {
        BigInt::zero()
    } else {
        num_integer::Roots::sqrt(&cur)
    };
    let m = root.min(&next - &cur).min(&cur - &prev);
    Ok(BigRational::new(m, BigInt::from(2)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedEntry {
    pub n: u64,
    pub f: BigInt,
    pub eps: BigRational,
    pub a: BigInt,
    pub k: usize,
    /// The search hit its level cap, so `k` is only a lower bound.
    pub cap_limited: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedSeq {
    pub label: String,
    pub entries: Vec<TrackedEntry>,
}

impl TrackedSeq {
    pub fn values(&self) -> Vec<BigInt> {
        self.entries.iter().map(|e| e.a.clone()).collect()
    }

    pub fn first_index(&self) -> u64 {
        self.entries.first().map_or(1, |e| e.n)
    }
}

/// Candidate ordering: closer to `f` first, then the smaller value.
fn closer(x: &BigInt, y: &BigInt, f: &BigInt) -> bool {
    let dx = (x - f).abs();
    let dy = (y - f).abs();
    dx < dy || (dx == dy && x < y)
}

const SCAN_LIMIT: u64 = 1_000_000;

pub fn track_one(spec: &TrackerSpec, n: u64) -> Result<TrackedEntry> {
    let f = spec.f.eval(n)?;
    let eps = spec.epsilon(n)?;
    if eps.is_negative() {
        return Err(Error::EmptyInterval { n });
    }
    let fr = rat(f.clone());
    let lo = ceil_rat(&(&fr - &eps));
    let hi = floor_rat(&(&fr + &eps));
    if lo > hi {
        return Err(Error::EmptyInterval { n });
    }
    if !lo.is_positive() && !hi.is_negative() {
        return Err(Error::IntervalContainsZero { n });
    }
    let (a, k, cap_limited) = match &spec.base {
        NeighborhoodBase::Moduli(m) => {
            let magnitude = lo.abs().max(hi.abs());
            let natural = m.last_level_at_most(&magnitude);
            let cap = spec.level_cap.map_or(natural, |c| c.min(natural));
            let meets = |level: usize| {
                let d = &m.divisors()[level];
                &hi.div_floor(d) * d >= lo
            };
            // Levels meeting I_n form an initial segment of 0..=cap.
            let (mut good, mut bad) = (0usize, cap + 1);
            while bad - good > 1 {
                let mid = good + (bad - good) / 2;
                if meets(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            let d = &m.divisors()[good];
            let below = f.div_floor(d) * d;
            let above = &below + d;
            let a = [below, above]
                .into_iter()
                .filter(|x| *x >= lo && *x <= hi)
                .reduce(|best, x| if closer(&x, &best, &f) { x } else { best })
                .expect("a meeting level has a multiple inside the interval");
            let limited = good == cap && (cap < natural || natural == m.depth());
            (a, good, limited)
        }
        NeighborhoodBase::Character(_) => {
            let width: BigInt = &hi - &lo + 1;
            if width > BigInt::from(SCAN_LIMIT) {
                return Err(Error::IntervalTooWide {
                    n,
                    width: width.to_string(),
                    limit: SCAN_LIMIT,
                });
            }
            let cap = spec
                .level_cap
                .unwrap_or_else(|| spec.base.default_level_cap());
            let mut best: Option<(usize, BigInt)> = None;
            let mut x = lo.clone();
            while x <= hi {
                let (level, _) = spec.base.level_of(&x, cap);
                let better = match &best {
                    None => true,
                    Some((bl, bx)) => level > *bl || (level == *bl && closer(&x, bx, &f)),
                };
                if better {
                    best = Some((level, x.clone()));
                }
                x += 1;
            }
            let (k, a) = best.expect("interval is non-empty");
            (a, k, k == cap)
        }
    };
    Ok(TrackedEntry {
        n,
        f,
        eps,
        a,
        k,
        cap_limited,
    })
}

/// Runs the tracker for `n = 1..=n_max`.
pub fn track(spec: &TrackerSpec, n_max: u64) -> Result<TrackedSeq> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let entries = (1..=n_max)
        .map(|n| track_one(spec, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackedSeq {
        label: format!("tracked(f={}, eps={})", spec.f, spec.eps),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioDeviation {
    pub n: u64,
    /// `|a_n/f(n) − 1|`.
    pub deviation: BigRational,
    /// `ε(n)/f(n)`.
    pub bound: BigRational,
}

impl RatioDeviation {
    pub fn within_bound(&self) -> bool {
        self.deviation <= self.bound
    }
}

pub fn tracking_ratio_profile(seq: &TrackedSeq) -> Result<Vec<RatioDeviation>> {
    if seq.entries.is_empty() {
        return Err(Error::InvalidArgument("empty tracked sequence".into()));
    }
    seq.entries
        .iter()
        .map(|e| {
            if e.f.is_zero() {
                return Err(Error::ZeroDenominator { n: e.n });
            }
            let f = rat(e.f.clone());
            Ok(RatioDeviation {
                n: e.n,
                deviation: (rat(e.a.clone()) / &f - BigRational::one()).abs(),
                bound: &e.eps / f.abs(),
            })
        })
        .collect()
}

/// How gap positions are grouped into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blocking {
    /// Block `j` holds the gaps at positions `first + jW .. first + (j+1)W`.
    Window(u64),
    /// Block `j` holds the gaps at positions `n ∈ [2^j, 2^{j+1})`.
    Dyadic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapBlock {
    pub j: u64,
    /// First and last gap position in the block (gap `n` is `a_{n+1} − a_n`).
    pub start: u64,
    pub end: u64,
    pub min_gap: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapThreshold {
    pub bound: BigInt,
    /// Number of gaps `<= bound` in the prefix.
    pub count: u64,
    pub last_position: Option<u64>,
    /// Some gap `<= bound` lies in the final block.
    pub persists: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapReport {
    pub blocks: Vec<GapBlock>,
    pub thresholds: Vec<GapThreshold>,
    /// Smallest grid bound whose small gaps persist to the end of the prefix.
    pub violation_at: Option<BigInt>,
}

pub const GAP_GRID: [u64; 6] = [1, 2, 5, 10, 100, 1000];

/// Finite evidence about `a_{n+1} − a_n → ∞` for an increasing prefix
/// `a_first, a_{first+1}, ...`. Never claims the limit itself.
pub fn gap_stats(values: &[BigInt], first_index: u64, blocking: Blocking) -> Result<GapReport> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(
            "gap statistics need at least two terms".into(),
        ));
    }
    if let Blocking::Window(0) = blocking {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    let gaps: Vec<(u64, BigInt)> = values
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let n = first_index + i as u64;
            let g = &w[1] - &w[0];
            if g.is_positive() {
                Ok((n, g))
            } else {
                Err(Error::NotIncreasing { n })
            }
        })
        .collect::<Result<_>>()?;

    let block_of = |n: u64| match blocking {
        Blocking::Window(w) => (n - first_index) / w,
        Blocking::Dyadic => 63 - u64::from(n.max(1).leading_zeros()),
    };
    let mut blocks: Vec<GapBlock> = Vec::new();
    for (n, g) in &gaps {
        let j = block_of(*n);
        match blocks.last_mut() {
            Some(b) if b.j == j => {
                b.end = *n;
                if *g < b.min_gap {
                    b.min_gap = g.clone();
                }
            }
            _ => blocks.push(GapBlock {
                j,
                start: *n,
                end: *n,
                min_gap: g.clone(),
            }),
        }
    }
    let final_start = blocks.last().map_or(0, |b| b.start);
    let thresholds: Vec<GapThreshold> = GAP_GRID
        .iter()
        .map(|&c| {
            let bound = BigInt::from(c);
            let small: Vec<u64> = gaps
                .iter()
                .filter(|(_, g)| *g <= bound)
                .map(|(n, _)| *n)
                .collect();
            let last_position = small.last().copied();
            GapThreshold {
                bound,
                count: small.len() as u64,
                last_position,
                persists: last_position.is_some_and(|p| p >= final_start),
            }
        })
        .collect();
    let violation_at = thresholds
        .iter()
        .find(|t| t.persists)
        .map(|t| t.bound.clone());
    Ok(GapReport {
        blocks,
        thresholds,
        violation_at,
    })
}

/// `f(n) = ⌊r^n⌋ + n²` with `ε(n) = n`.
pub fn preset_remark2(r: &BigRational, base: NeighborhoodBase) -> Result<TrackerSpec> {
    if *r <= BigRational::one() {
        return Err(Error::RatioNotAboveOne(fmt_rat(r)));
    }
    Ok(TrackerSpec::new(
        GrowthFn::ExpPlusSquare(r.clone()),
        Epsilon::Linear,
        base,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zbase::{BaseDesc, ModuliChain};

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn two_adic() -> NeighborhoodBase {
        NeighborhoodBase::Moduli(ModuliChain::padic(&BigInt::from(2), 64).unwrap())
    }

    fn squares() -> TrackerSpec {
        TrackerSpec::new(GrowthFn::Power(2), Epsilon::Default, two_adic())
    }

    #[test]
    fn default_epsilon_examples() {
        let f = GrowthFn::Power(2);
        assert_eq!(default_epsilon(&f, 5).unwrap(), q(5, 2));
        assert_eq!(default_epsilon(&f, 1).unwrap(), q(0, 1));
        assert_eq!(default_epsilon(&f, 2).unwrap(), q(1, 1));
    }

    #[test]
    fn growth_violation_is_reported() {
        let f = GrowthFn::Table(vec![1.into(), 4.into(), 4.into(), 9.into()]);
        assert_eq!(
            default_epsilon(&f, 2),
            Err(Error::GrowthViolation { n: 2 })
        );
        assert_eq!(default_epsilon(&f, 4), Err(Error::NotEvaluable { n: 5 }));
    }

    #[test]
    fn two_adic_squares() {
        let s = squares();
        let e = |n| track_one(&s, n).unwrap();
        assert_eq!((e(1).a, e(1).k), (BigInt::from(1), 0));
        assert_eq!((e(2).a, e(2).k), (BigInt::from(4), 2));
        assert_eq!((e(3).a, e(3).k), (BigInt::from(8), 3));
        assert_eq!((e(5).a, e(5).k), (BigInt::from(24), 3));
        assert!(!e(5).cap_limited);
    }

    #[test]
    fn ratio_profile_examples() {
        let seq = track(&squares(), 5).unwrap();
        let prof = tracking_ratio_profile(&seq).unwrap();
        assert_eq!(prof[0].deviation, q(0, 1));
        assert_eq!(prof[1].deviation, q(0, 1));
        assert_eq!(prof[4].deviation, q(1, 25));
        assert_eq!(prof[4].bound, q(1, 10));
        assert!(prof.iter().all(RatioDeviation::within_bound));
    }

    #[test]
    fn tie_break_prefers_the_smaller_value() {
        // I = [3, 7] around f = 5 with d = 2: 4 and 6 tie, 4 wins.
        let spec = TrackerSpec::new(
            GrowthFn::Table(vec![5.into()]),
            Epsilon::Const(q(2, 1)),
            NeighborhoodBase::Moduli(ModuliChain::new(vec![1.into(), 2.into()]).unwrap()),
        );
        let e = track_one(&spec, 1).unwrap();
        assert_eq!((e.a, e.k), (BigInt::from(4), 1));
        assert!(e.cap_limited);
    }

    #[test]
    fn interval_errors() {
        let spec = TrackerSpec::new(
            GrowthFn::Table(vec![5.into()]),
            Epsilon::Const(q(-1, 2)),
            two_adic(),
        );
        assert_eq!(track_one(&spec, 1), Err(Error::EmptyInterval { n: 1 }));
        let spec = TrackerSpec::new(
            GrowthFn::Table(vec![5.into()]),
            Epsilon::Const(q(5, 1)),
            two_adic(),
        );
        assert_eq!(track_one(&spec, 1), Err(Error::IntervalContainsZero { n: 1 }));
    }

    #[test]
    fn remark2_preset() {
        let s = preset_remark2(&q(2, 1), two_adic()).unwrap();
        assert_eq!(s.f.eval(3).unwrap(), BigInt::from(17));
        assert_eq!(s.f.eval(1).unwrap(), BigInt::from(3));
        let s = preset_remark2(&q(3, 2), two_adic()).unwrap();
        assert_eq!(s.f.eval(1).unwrap(), BigInt::from(2));
        assert_eq!(s.epsilon(7).unwrap(), q(7, 1));
        assert!(matches!(
            preset_remark2(&q(1, 1), two_adic()),
            Err(Error::RatioNotAboveOne(_))
        ));
    }

    #[test]
    fn gap_examples() {
        let lin: Vec<BigInt> = (1..=100).map(BigInt::from).collect();
        let r = gap_stats(&lin, 1, Blocking::Window(10)).unwrap();
        assert!(r.blocks.iter().all(|b| b.min_gap == BigInt::one()));
        assert_eq!(r.violation_at, Some(BigInt::one()));

        let pow: Vec<BigInt> = (1..=40).map(|n| BigInt::one() << n).collect();
        let r = gap_stats(&pow, 1, Blocking::Window(4)).unwrap();
        let mins: Vec<BigInt> = r.blocks.iter().take(3).map(|b| b.min_gap.clone()).collect();
        assert_eq!(mins, vec![2.into(), 32.into(), 512.into()]);
        assert!(r.blocks.windows(2).all(|w| w[0].min_gap < w[1].min_gap));
        assert_eq!(r.violation_at, None);

        assert_eq!(
            gap_stats(&[1.into(), 1.into()], 1, Blocking::Dyadic),
            Err(Error::NotIncreasing { n: 1 })
        );
    }

    #[test]
    fn tracked_squares_gaps_grow() {
        let seq = track(&squares(), 512).unwrap();
        let r = gap_stats(&seq.values(), 1, Blocking::Window(16)).unwrap();
        for w in r.blocks.windows(2).skip(1) {
            assert!(w[1].min_gap >= w[0].min_gap);
        }
        assert!(r.blocks.last().unwrap().min_gap > BigInt::from(100));
    }

    #[test]
    fn character_tracking_matches_brute_force() {
        let base: BaseDesc = r#"{"kind":"character","alpha":{"sqrt":2},"depth":20}"#
            .parse()
            .unwrap();
        let base = base.build().unwrap();
        let spec = TrackerSpec::new(GrowthFn::Power(2), Epsilon::Default, base.clone());
        for n in 1..=40u64 {
            let e = track_one(&spec, n).unwrap();
            let lo = ceil_rat(&(rat(e.f.clone()) - &e.eps));
            let hi = floor_rat(&(rat(e.f.clone()) + &e.eps));
            assert!(base.member(e.k, &e.a).unwrap());
            let mut x = lo.clone();
            while x <= hi {
                assert!(!base.member(e.k + 1, &x).unwrap());
                x += 1;
            }
        }
    }

    #[test]
    fn growth_fn_syntax() {
        assert_eq!("n^2".parse::<GrowthFn>().unwrap(), GrowthFn::Power(2));
        assert_eq!(
            "(3/2)^n + n^2".parse::<GrowthFn>().unwrap(),
            GrowthFn::ExpPlusSquare(q(3, 2))
        );
        assert_eq!(
            "2^n+n^2".parse::<GrowthFn>().unwrap(),
            GrowthFn::ExpPlusSquare(q(2, 1))
        );
        for s in ["n^3", "(3/2)^n+n^2", "2^n+n^2", "table:1,5,9"] {
            assert_eq!(s.parse::<GrowthFn>().unwrap().to_string(), s);
        }
        assert!("sin(n)".parse::<GrowthFn>().is_err());
    }
}
