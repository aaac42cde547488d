//! Basic neighborhoods of the strongest group topology in which a
//! sequence converges to zero, and diagonal-escape witnesses for a pair
//! of such sequences.
//!
//! A slot sequence `m_0 <= m_1 <= ...` names the neighborhood
//! `V = ⋃_k (A_{m_0} + ... + A_{m_k})` with `A_m = {0} ∪ {±a_n : n >= m}`.
//! Each slot draws its term independently, so indices may repeat.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::freeab::FinVec;
use crate::report::{Verdict, WitnessReport};
use crate::seq::IntSeq;

/// An eventually constant nondecreasing slot sequence, stored as steps
/// `(start_slot, value)`. The last step's value repeats forever.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalNbhd {
    steps: Vec<(u64, u64)>,
}

impl CanonicalNbhd {
    pub fn constant(m: u64) -> Self {
        CanonicalNbhd {
            steps: vec![(0, m)],
        }
    }

    /// Drops redundant steps; rejects decreasing values.
    pub fn from_steps(steps: &[(u64, u64)]) -> Result<Self> {
        match steps.first() {
            None => return Err(Error::InvalidSlots("no steps".into())),
            Some(&(s, _)) if s != 0 => {
                return Err(Error::InvalidSlots("first step must start at slot 0".into()))
            }
            _ => {}
        }
        let mut out: Vec<(u64, u64)> = Vec::with_capacity(steps.len());
        for &(start, value) in steps {
            if let Some(&(ps, pv)) = out.last() {
                if start <= ps {
                    return Err(Error::InvalidSlots(format!(
                        "step starts must increase, got {start} after {ps}"
                    )));
                }
                if value < pv {
                    return Err(Error::InvalidSlots(format!(
                        "slot values must be nondecreasing, got {value} after {pv}"
                    )));
                }
                if value == pv {
                    continue;
                }
            }
            out.push((start, value));
        }
        Ok(CanonicalNbhd { steps: out })
    }

    /// `m_0, m_1, ..., m_k`, with `m_k` repeated for every later slot.
    pub fn from_prefix(values: &[u64]) -> Result<Self> {
        let steps: Vec<(u64, u64)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u64, v))
            .collect();
        Self::from_steps(&steps)
    }

    pub fn steps(&self) -> &[(u64, u64)] {
        &self.steps
    }

    pub fn final_value(&self) -> u64 {
        self.steps.last().expect("at least one step").1
    }

    pub fn slot(&self, j: u64) -> u64 {
        let i = self.steps.partition_point(|&(s, _)| s <= j);
        self.steps[i - 1].1
    }

    pub fn slot_big(&self, j: &BigInt) -> u64 {
        match j.to_u64() {
            Some(j) => self.slot(j),
            None => self.final_value(),
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<u64> {
        (0..len as u64).map(|j| self.slot(j)).collect()
    }
}

impl fmt::Display for CanonicalNbhd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.steps.last().expect("at least one step").0;
        let parts: Vec<String> = (0..=last).map(|j| self.slot(j).to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl std::str::FromStr for CanonicalNbhd {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidSlots(format!("bad slot value `{}`", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_prefix(&values)
    }
}

/// Exact decision for the generator sequence `(e_n)` of the free abelian
/// group: `x` needs one slot per unit of `|x_i|`, and slot `j` accepts
/// index `i` iff `m_j <= i`. Sorted units into sorted slots is optimal.
pub fn member_nbhd_free(x: &FinVec, nbhd: &CanonicalNbhd) -> bool {
    let mut used = BigInt::zero();
    for (&i, c) in x.iter() {
        used += c.abs();
        // The largest slot taken by this run is `used - 1`.
        if nbhd.slot_big(&(&used - 1)) > i {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailSumQuery {
    pub target: BigInt,
    pub nbhd: CanonicalNbhd,
    /// Maximum number of nonzero summands.
    pub depth_cap: usize,
    /// Largest sequence index a summand may use.
    pub index_cap: u64,
    /// Search nodes visited before giving up.
    pub node_budget: u64,
}

impl TailSumQuery {
    pub const DEFAULT_INDEX_CAP: u64 = 64;
    pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

    pub fn new(target: BigInt, nbhd: CanonicalNbhd, depth_cap: usize) -> Result<Self> {
        if depth_cap == 0 {
            return Err(Error::InvalidArgument("depth cap must be at least 1".into()));
        }
        Ok(TailSumQuery {
            target,
            nbhd,
            depth_cap,
            index_cap: Self::DEFAULT_INDEX_CAP,
            node_budget: Self::DEFAULT_NODE_BUDGET,
        })
    }

    pub fn with_index_cap(mut self, cap: u64) -> Self {
        self.index_cap = cap;
        self
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub slot: usize,
    pub index: u64,
    /// `±a_index`.
    pub value: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntMembership {
    /// Summands in slot order; they add up to the target.
    Member(Vec<Summand>),
    /// No representation within the depth and index caps. When
    /// `budget_exhausted` is set the search stopped early.
    NotMemberWithinCap { nodes: u64, budget_exhausted: bool },
}

impl IntMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, IntMembership::Member(_))
    }
}

struct Search<'a> {
    terms: &'a [BigInt],
    first: u64,
    nbhd: &'a CanonicalNbhd,
    /// `gcd_upto[k]` is the gcd of `terms[lo0..=k]`.
    gcd_upto: Vec<BigInt>,
    nodes: u64,
    budget: u64,
    chosen: Vec<(usize, bool)>,
}

impl Search<'_> {
    fn lo(&self, slot: usize) -> usize {
        (self.nbhd.slot(slot as u64).saturating_sub(self.first)) as usize
    }

    /// Fill slots `0..=s` with positions at most `upper` summing to `residual`.
    fn fill(&mut self, s: usize, upper: usize, prev: Option<(usize, bool)>, residual: &BigInt) -> Option<bool> {
        let lo = self.lo(s);
        if lo > upper {
            return Some(false);
        }
        if !residual.is_multiple_of(&self.gcd_upto[upper]) {
            return Some(false);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let target = residual.abs();
        let neg = residual.is_negative();
        if s == 0 {
            let Ok(off) = self.terms[lo..=upper].binary_search(&target) else {
                return Some(false);
            };
            let k = lo + off;
            if prev.is_some_and(|(pk, pneg)| pk == k && pneg != neg) {
                return Some(false);
            }
            self.chosen.push((k, neg));
            return Some(true);
        }
        // Smallest position whose term can still cover the residual with
        // the slots left; larger positions come after, for cancellation.
        let slots_left = BigInt::from(s + 1);
        let start = lo + self.terms[lo..=upper].partition_point(|t| &slots_left * t < target);
        for k in start..=upper {
            for neg in [neg, !neg] {
                if prev.is_some_and(|(pk, pneg)| pk == k && pneg != neg) {
                    continue;
                }
                let next = if neg { residual + &self.terms[k] } else { residual - &self.terms[k] };
                self.chosen.push((k, neg));
                if self.fill(s - 1, k, Some((k, neg)), &next)? {
                    return Some(true);
                }
                self.chosen.pop();
            }
        }
        Some(false)
    }
}

/// Bounded search for `x = t_0 + ... + t_{j-1}` with `t_s ∈ {±a_n : n >= m_s}`
/// and `j <= depth_cap`, by iterative deepening on `j`. Within a depth the
/// indices are taken nonincreasing from the last slot down, pruned by
/// magnitude (`|residual| <= slots_left · a_max`) and divisibility; the
/// last slot is a direct lookup.
pub fn member_nbhd_int(a: &IntSeq, q: &TailSumQuery) -> Result<IntMembership> {
    if q.target.is_zero() {
        return Ok(IntMembership::Member(Vec::new()));
    }
    let first = a.first_index();
    let terms = a.terms(q.index_cap)?;
    for (k, t) in terms.iter().enumerate() {
        let n = first + k as u64;
        if !t.is_positive() {
            return Err(Error::NotPositive { n });
        }
        if k > 0 && t <= &terms[k - 1] {
            return Err(Error::NotIncreasing { n });
        }
    }
    let lo0 = q.nbhd.slot(0).saturating_sub(first) as usize;
    let mut nodes = 0;
    if lo0 >= terms.len() {
        return Ok(IntMembership::NotMemberWithinCap {
            nodes,
            budget_exhausted: false,
        });
    }
    let mut gcd_upto = vec![BigInt::zero(); terms.len()];
    let mut g = BigInt::zero();
    for k in lo0..terms.len() {
        g = g.gcd(&terms[k]);
        gcd_upto[k] = g.clone();
    }
    for j in 1..=q.depth_cap {
        let mut search = Search {
            terms: &terms,
            first,
            nbhd: &q.nbhd,
            gcd_upto: gcd_upto.clone(),
            nodes: 0,
            budget: q.node_budget.saturating_sub(nodes),
            chosen: Vec::new(),
        };
        let outcome = search.fill(j - 1, terms.len() - 1, None, &q.target);
        nodes += search.nodes;
        match outcome {
            None => {
                return Ok(IntMembership::NotMemberWithinCap {
                    nodes,
                    budget_exhausted: true,
                })
            }
            Some(true) => {
                // `chosen` runs from slot j-1 down to slot 0.
                let summands = search
                    .chosen
                    .iter()
                    .rev()
                    .enumerate()
                    .map(|(slot, &(k, neg))| Summand {
                        slot,
                        index: first + k as u64,
                        value: if neg { -terms[k].clone() } else { terms[k].clone() },
                    })
                    .collect();
                return Ok(IntMembership::Member(summands));
            }
            Some(false) => {}
        }
    }
    Ok(IntMembership::NotMemberWithinCap {
        nodes,
        budget_exhausted: false,
    })
}

/// All `(n, m)` with `first <= n, m <= big_n` and `b_m − a_n = g`, in
/// lexicographic order.
pub fn sup_witness_pairs(a: &IntSeq, b: &IntSeq, g: &BigInt, big_n: u64) -> Result<Vec<(u64, u64)>> {
    if g.is_zero() {
        return Err(Error::ZeroShift);
    }
    let mut by_value: HashMap<BigInt, Vec<u64>> = HashMap::new();
    let fa = a.first_index();
    for (k, v) in a.terms(big_n)?.into_iter().enumerate() {
        by_value.entry(v).or_default().push(fa + k as u64);
    }
    let fb = b.first_index();
    let mut pairs = Vec::new();
    for (k, v) in b.terms(big_n)?.into_iter().enumerate() {
        if let Some(ns) = by_value.get(&(v - g)) {
            pairs.extend(ns.iter().map(|&n| (n, fb + k as u64)));
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

fn sample_grid(first: u64, big_n: u64) -> Vec<u64> {
    let mut grid = vec![first];
    let mut p = 1u64;
    while p <= big_n {
        if p > first {
            grid.push(p);
        }
        p = p.saturating_mul(2);
    }
    if big_n > first {
        grid.push(big_n);
    }
    grid.dedup();
    grid
}

/// Finite evidence that the pairs `(n, m)` with `b_m − a_n = g` escape
/// every bound up to `N`: certified iff some pair has `min(n, m) >= N`.
pub fn diagonal_escape_report(a: &IntSeq, b: &IntSeq, g: &BigInt, big_n: u64) -> Result<WitnessReport> {
    let pairs = sup_witness_pairs(a, b, g, big_n)?;
    let first = a.first_index().min(b.first_index());
    let reach = pairs.iter().map(|&(n, m)| n.min(m)).max();
    let verdict = if reach.is_some_and(|r| r >= big_n) {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    let mut report = WitnessReport::new("diagonal-escape", verdict)
        .param("a", a)
        .param("b", b)
        .param("g", g)
        .param("N", big_n)
        .bound("N", big_n)
        .bound("pairs_found", pairs.len());
    if let Some(r) = reach {
        report = report.bound("max_min_index", r);
        let largest = pairs
            .iter()
            .filter(|&&(n, m)| n.min(m) == r)
            .max()
            .expect("reach comes from a pair");
        report = report.bound("largest_pair", format!("({},{})", largest.0, largest.1));
    }
    for n0 in sample_grid(first, big_n) {
        let hit = pairs.iter().find(|&&(n, m)| n >= n0 && m >= n0);
        let mut item = vec![("n0", n0.to_string())];
        match hit {
            Some(&(n, m)) => {
                item.push(("n", n.to_string()));
                item.push(("m", m.to_string()));
            }
            None => item.push(("pair", "none".into())),
        }
        report.push(&item);
    }
    Ok(report)
}
