//! Exact arithmetic in `Q(√d)` for the character bases.
//!
//! A [`QuadSurd`] is `a + b·√d` with rational `a`, `b` and a fixed non-square
//! `d > 1`. Signs, floors and comparisons against rationals are decided
//! exactly, so no floating point enters a membership decision.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{floor_rat, rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadSurd {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

impl QuadSurd {
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Result<Self> {
        if d <= BigInt::one() || is_perfect_square(&d) {
            return Err(Error::NotHausdorff(format!(
                "sqrt({d}) is rational, so the character base is not Hausdorff"
            )));
        }
        Ok(QuadSurd { a, b, d })
    }

    fn with(&self, a: BigRational, b: BigRational) -> Self {
        QuadSurd {
            a,
            b,
            d: self.d.clone(),
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_coeff(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (_, Ordering::Equal) => sa,
            (Ordering::Equal, _) => sb,
            _ if sa == sb => sa,
            _ => {
                let lhs = &self.a * &self.a;
                let rhs = &self.b * &self.b * rat(self.d.clone());
                // a² = b²d cannot happen for irrational √d.
                if lhs > rhs {
                    sa
                } else {
                    sb
                }
            }
        }
    }

    pub fn cmp_rat(&self, r: &BigRational) -> Ordering {
        self.sub_rat(r).signum()
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.d, o.d);
        self.with(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.d, o.d);
        self.with(&self.a - &o.a, &self.b - &o.b)
    }

    pub fn add_rat(&self, r: &BigRational) -> Self {
        self.with(&self.a + r, self.b.clone())
    }

    pub fn sub_rat(&self, r: &BigRational) -> Self {
        self.with(&self.a - r, self.b.clone())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        self.with(&self.a * r, &self.b * r)
    }

    pub fn neg(&self) -> Self {
        self.with(-&self.a, -&self.b)
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.d, o.d);
        let d = rat(self.d.clone());
        self.with(
            &self.a * &o.a + &self.b * &o.b * d,
            &self.a * &o.b + &self.b * &o.a,
        )
    }

    /// `1/(a + b√d) = (a − b√d)/(a² − b²d)`; the denominator is never zero
    /// for a non-zero value.
    pub fn recip(&self) -> Self {
        let norm = &self.a * &self.a - &self.b * &self.b * rat(self.d.clone());
        assert!(!norm.is_zero(), "reciprocal of zero");
        self.with(&self.a / &norm, -&self.b / &norm)
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return floor_rat(&self.a);
        }
        // b√d = ±√(b²d) and √(u/v) = √(uv)/v, so isqrt gives an estimate
        // within one unit; the exact sign test then fixes it.
        let t = &self.b * &self.b * rat(self.d.clone());
        let r = num_integer::Roots::sqrt(&(t.numer() * t.denom()));
        let approx = BigRational::new(r, t.denom().clone());
        let est = if self.b.is_positive() {
            &self.a + approx
        } else {
            &self.a - approx
        };
        let mut k = floor_rat(&est);
        while self.cmp_rat(&rat(k.clone())) == Ordering::Less {
            k -= 1;
        }
        while self.cmp_rat(&rat(&k + 1)) != Ordering::Less {
            k += 1;
        }
        k
    }

    /// Decides `dist(self, Z) < delta` exactly.
    pub fn dist_to_int_lt(&self, delta: &BigRational) -> bool {
        let fl = rat(self.floor());
        let below = self.sub_rat(&fl);
        if below.cmp_rat(delta) == Ordering::Less {
            return true;
        }
        let above = self.neg().add_rat(&(fl + BigRational::one()));
        above.cmp_rat(delta) == Ordering::Less
    }

    /// Value of the purely or eventually periodic continued fraction
    /// `[prefix[0]; prefix[1..], (period)*]`.
    pub fn from_periodic_cf(prefix: &[BigInt], period: &[BigInt]) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::NotHausdorff(
                "a finite continued fraction is rational".into(),
            ));
        }
        if period.iter().any(|t| !t.is_positive()) || prefix.iter().skip(1).any(|t| !t.is_positive())
        {
            return Err(Error::InvalidBase(
                "continued fraction terms after the first must be positive".into(),
            ));
        }
        let (h1, h0, k1, k0) = moebius(period);
        // k1·y² + (k0 − h1)·y − h0 = 0 with y > 1.
        let disc = (&k0 - &h1) * (&k0 - &h1) + BigInt::from(4) * &k1 * &h0;
        let two_k = BigInt::from(2) * &k1;
        let y = QuadSurd::new(
            BigRational::new(&h1 - &k0, two_k.clone()),
            BigRational::new(BigInt::one(), two_k),
            disc,
        )?;
        if prefix.is_empty() {
            return Ok(y);
        }
        let (p1, p0, q1, q0) = moebius(prefix);
        let num = y.scale(&rat(p1)).add_rat(&rat(p0));
        let den = y.scale(&rat(q1)).add_rat(&rat(q0));
        Ok(num.div(&den))
    }

    /// Continued-fraction expansion; never terminates for irrational values.
    pub fn cf_terms(&self) -> CfTerms {
        CfTerms {
            x: Some(self.clone()),
        }
    }
}

/// Numerators and denominators `(h_n, h_{n-1}, k_n, k_{n-1})` after feeding
/// all of `terms` into the convergent recursion.
fn moebius(terms: &[BigInt]) -> (BigInt, BigInt, BigInt, BigInt) {
    let (mut h1, mut h0) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k0) = (BigInt::zero(), BigInt::one());
    for t in terms {
        let h = t * &h1 + &h0;
        let k = t * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h);
        k0 = std::mem::replace(&mut k1, k);
    }
    (h1, h0, k1, k0)
}

pub struct CfTerms {
    x: Option<QuadSurd>,
}

impl Iterator for CfTerms {
    type Item = BigInt;

    fn next(&mut self) -> Option<BigInt> {
        let x = self.x.take()?;
        let a = x.floor();
        let frac = x.sub_rat(&rat(a.clone()));
        if !(frac.is_rational() && frac.a.is_zero()) {
            self.x = Some(frac.recip());
        }
        Some(a)
    }
}

/// Convergent `p/q` of a continued fraction together with `|q·α − p|`.
#[derive(Debug, Clone)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
    pub error: QuadSurd,
}

/// Iterates convergents `p_k/q_k` of `alpha` with their approximation
/// errors `|q_k α − p_k|`, starting from `k = -1` (`p = 1`, `q = 0`).
pub fn convergents(alpha: &QuadSurd) -> impl Iterator<Item = Convergent> + '_ {
    let mut terms = alpha.cf_terms();
    let (mut h1, mut h0) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k0) = (BigInt::zero(), BigInt::one());
    let mut first = true;
    std::iter::from_fn(move || {
        if !first {
            let t = terms.next()?;
            let h = &t * &h1 + &h0;
            let k = &t * &k1 + &k0;
            h0 = std::mem::replace(&mut h1, h);
            k0 = std::mem::replace(&mut k1, k);
        }
        first = false;
        let error = alpha.scale(&rat(k1.clone())).sub_rat(&rat(h1.clone())).abs();
        Some(Convergent {
            p: h1.clone(),
            q: k1.clone(),
            error,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn sqrt(d: i64) -> QuadSurd {
        QuadSurd::new(q(0, 1), q(1, 1), d.into()).unwrap()
    }

    #[test]
    fn rejects_square_radicands() {
        assert!(matches!(
            QuadSurd::new(q(0, 1), q(1, 1), 9.into()),
            Err(Error::NotHausdorff(_))
        ));
    }

    #[test]
    fn floors_and_signs() {
        let s2 = sqrt(2);
        assert_eq!(s2.floor(), BigInt::from(1));
        assert_eq!(s2.neg().floor(), BigInt::from(-2));
        assert_eq!(s2.scale(&q(5, 1)).floor(), BigInt::from(7));
        // 1000·√2 = 1414.21...
        assert_eq!(s2.scale(&q(1000, 1)).floor(), BigInt::from(1414));
        // 3/2 - √2 > 0, 7/5 - √2 < 0
        assert_eq!(s2.neg().add_rat(&q(3, 2)).signum(), Ordering::Greater);
        assert_eq!(s2.neg().add_rat(&q(7, 5)).signum(), Ordering::Less);
    }

    #[test]
    fn distance_to_integers() {
        let s2 = sqrt(2);
        // dist(5√2, Z) ≈ 0.0711
        let five = s2.scale(&q(5, 1));
        assert!(five.dist_to_int_lt(&q(1, 4)));
        assert!(five.dist_to_int_lt(&q(1, 14)));
        assert!(!five.dist_to_int_lt(&q(1, 15)));
        // dist(√2, Z) ≈ 0.4142
        assert!(s2.dist_to_int_lt(&q(1, 2)));
        assert!(!s2.dist_to_int_lt(&q(1, 4)));
    }

    #[test]
    fn sqrt2_expansion() {
        let terms: Vec<BigInt> = sqrt(2).cf_terms().take(6).collect();
        let expect: Vec<BigInt> = [1, 2, 2, 2, 2, 2].iter().map(|&t| t.into()).collect();
        assert_eq!(terms, expect);
        let golden = QuadSurd::new(q(1, 2), q(1, 2), 5.into()).unwrap();
        assert!(golden.cf_terms().take(10).all(|t| t == BigInt::one()));
    }

    #[test]
    fn periodic_cf_round_trip() {
        let big = |v: &[i64]| v.iter().map(|&t| BigInt::from(t)).collect::<Vec<_>>();
        let s2 = QuadSurd::from_periodic_cf(&big(&[1]), &big(&[2])).unwrap();
        assert_eq!(s2.mul(&s2).cmp_rat(&q(2, 1)), Ordering::Equal);
        let x = QuadSurd::from_periodic_cf(&big(&[3, 1, 4]), &big(&[1, 5, 9])).unwrap();
        let terms: Vec<BigInt> = x.cf_terms().take(9).collect();
        assert_eq!(terms, big(&[3, 1, 4, 1, 5, 9, 1, 5, 9]));
        assert!(matches!(
            QuadSurd::from_periodic_cf(&big(&[1, 2]), &[]),
            Err(Error::NotHausdorff(_))
        ));
    }

    #[test]
    fn convergent_errors_shrink() {
        let s2 = sqrt(2);
        let cs: Vec<Convergent> = convergents(&s2).take(5).collect();
        let qs: Vec<i64> = cs.iter().map(|c| c.q.to_string().parse().unwrap()).collect();
        assert_eq!(qs, vec![0, 1, 2, 5, 12]);
        for w in cs.windows(2) {
            assert_eq!(w[1].error.sub(&w[0].error).signum(), Ordering::Less);
        }
    }
}
