//! A ratio-`r` integer sequence that no ring topology on `Z` can make
//! converge to zero.
//!
//! `a_n = ⌊r^n⌋`, except at the special indices `n = 2·3^k` (`k >= 1`) where
//! `a_n = ⌊r^{n/2}⌋² + 1`. Then `a_{2·3^k} − a_{3^k}² = 1` for every `k`, and
//! in a ring topology both terms of the difference would tend to zero.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{floor_pow, fmt_rat};

/// Exact rational ratio `r = p/q > 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioTarget(BigRational);

impl RatioTarget {
    pub fn new(r: BigRational) -> Result<Self> {
        if r <= BigRational::one() {
            return Err(Error::RatioNotAboveOne(fmt_rat(&r)));
        }
        Ok(RatioTarget(r))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }
}

pub fn floor_pow_ratio(r: &RatioTarget, n: u32) -> BigInt {
    floor_pow(&r.0, n)
}

/// `n = 2·3^k` for some `k >= 1`.
pub fn is_special(n: u64) -> bool {
    if n % 2 != 0 {
        return false;
    }
    let mut m = n / 2;
    if m < 3 {
        return false;
    }
    while m % 3 == 0 {
        m /= 3;
    }
    m == 1
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSeq {
    r: RatioTarget,
    /// `values[i]` is `a_{i+1}`.
    values: Vec<BigInt>,
}

impl RingSeq {
    pub fn ratio(&self) -> &RatioTarget {
        &self.r
    }

    pub fn len(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn special_indices(&self) -> Vec<u64> {
        (1..=self.len()).filter(|&n| is_special(n)).collect()
    }

    /// First term is at least one whenever `r >= 1`.
    pub fn first_term_positive(&self) -> bool {
        self.values.first().is_some_and(|a| *a >= BigInt::one())
    }

    pub fn get(&self, n: u64) -> Result<&BigInt> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                first: 1,
                last: self.len(),
            });
        }
        Ok(&self.values[(n - 1) as usize])
    }
}

/// The `n`-th term, `n >= 1`.
pub fn theorem2_term(r: &RatioTarget, n: u64) -> BigInt {
    let e = u32::try_from(n).expect("index fits in u32");
    if is_special(n) {
        let h = floor_pow(&r.0, e / 2);
        &h * &h + 1
    } else {
        floor_pow(&r.0, e)
    }
}

pub fn gen_theorem2(r: &RatioTarget, n_max: u64) -> Result<RingSeq> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let values = (1..=n_max).map(|n| theorem2_term(r, n)).collect();
    Ok(RingSeq {
        r: r.clone(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionWitness {
    pub k: u32,
    /// `a_{2·3^k} − a_{3^k}²`.
    pub difference: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    pub witnesses: Vec<ObstructionWitness>,
    /// All differences equal one.
    pub certified: bool,
}

pub fn obstruction_witnesses(seq: &RingSeq, k_max: u32) -> Result<Obstruction> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("Kmax must be at least 1".into()));
    }
    let witnesses = (1..=k_max)
        .map(|k| {
            let base = 3u64
                .checked_pow(k)
                .ok_or(Error::InvalidArgument(format!("3^{k} overflows")))?;
            let square = seq.get(base)?;
            let special = seq.get(2 * base)?;
            Ok(ObstructionWitness {
                k,
                difference: special - square * square,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let certified = witnesses.iter().all(|w| w.difference.is_one());
    Ok(Obstruction {
        witnesses,
        certified,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioDeviation {
    pub max: BigRational,
    /// Position `n` where `|a_{n+1}/a_n − r|` is largest (first on ties).
    pub argmax: u64,
}

/// Maximum of `|a_{n+1}/a_n − r|` over `n ∈ [from, to)`.
pub fn ratio_profile(seq: &RingSeq, from: u64, to: u64) -> Result<RatioDeviation> {
    if from == 0 || from >= to || to > seq.len() {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= from < to <= {}, got [{from}, {to})",
            seq.len()
        )));
    }
    let r = seq.r.value();
    let mut best: Option<RatioDeviation> = None;
    for n in from..to {
        let a = seq.get(n)?;
        if a.is_zero() {
            return Err(Error::ZeroDenominator { n });
        }
        let dev = (BigRational::new(seq.get(n + 1)?.clone(), a.clone()) - r).abs();
        if best.as_ref().is_none_or(|b| dev > b.max) {
            best = Some(RatioDeviation {
                max: dev,
                argmax: n,
            });
        }
    }
    Ok(best.expect("range is non-empty"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDeviation {
    pub j: u32,
    pub from: u64,
    pub to: u64,
    pub deviation: RatioDeviation,
    /// The block has a position `n` with `n` or `n + 1` special.
    pub touches_special: bool,
}

/// Per-block maxima over the dyadic blocks `[2^j, 2^{j+1})` that fit in
/// the sequence (the last ratio needs `a_{2^{j+1}}`).
pub fn dyadic_profile(seq: &RingSeq) -> Result<Vec<BlockDeviation>> {
    let mut out = Vec::new();
    let mut j = 0u32;
    while (1u64 << (j + 1)) <= seq.len() {
        let (from, to) = (1u64 << j, 1u64 << (j + 1));
        out.push(BlockDeviation {
            j,
            from,
            to,
            deviation: ratio_profile(seq, from, to)?,
            touches_special: (from..to).any(|n| is_special(n) || is_special(n + 1)),
        });
        j += 1;
    }
    Ok(out)
}
