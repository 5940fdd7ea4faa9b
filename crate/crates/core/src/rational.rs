//! Exact rational helpers: the `p/q` text encoding and the canonical
//! enumerations every infinite presentation reads its choices from.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    BigRational::from_integer(BigInt::from(p))
}

/// `2^-n` as an exact rational.
pub fn pow2_neg(n: u32) -> Rational {
    BigRational::new(BigInt::one(), BigInt::one() << n as usize)
}

/// Bit-exact encoding: always `p/q`, even for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("malformed rational `{s}` (expected p/q)"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(p))
        }
    }
}

/// Next element of the Calkin–Wilf sequence of positive rationals.
fn calkin_wilf_next(x: &Rational) -> Rational {
    let two = BigInt::from(2);
    let fl = x.numer().div_floor(x.denom());
    let denom = BigRational::from_integer(two * fl) - x + BigRational::one();
    denom.recip()
}

/// Canonical enumeration of all rationals: `0, 1, -1, 1/2, -1/2, 2, -2, ...`
/// (positives in Calkin–Wilf order, each followed by its negation).
#[derive(Debug, Clone)]
pub struct Rationals {
    next_positive: Rational,
    pending_negative: Option<Rational>,
    started: bool,
}

pub fn rationals() -> Rationals {
    Rationals {
        next_positive: BigRational::one(),
        pending_negative: None,
        started: false,
    }
}

impl Iterator for Rationals {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        if !self.started {
            self.started = true;
            return Some(BigRational::zero());
        }
        if let Some(neg) = self.pending_negative.take() {
            return Some(neg);
        }
        let cur = self.next_positive.clone();
        self.next_positive = calkin_wilf_next(&cur);
        self.pending_negative = Some(-cur.clone());
        Some(cur)
    }
}

/// The `n`-th rational of [`rationals`].
pub fn nth_rational(n: usize) -> Rational {
    rationals().nth(n).expect("enumeration is infinite")
}

/// Breadth-first Stern–Brocot enumeration of the rationals in `(0,1)`:
/// `1/2, 1/3, 2/3, 1/4, 2/5, 3/5, 3/4, ...`.
#[derive(Debug, Clone)]
pub struct SternBrocotUnit {
    /// Sorted fractions seen so far, bracketed by 0/1 and 1/1.
    frontier: Vec<(BigInt, BigInt)>,
    level: Vec<(BigInt, BigInt)>,
    pos: usize,
}

pub fn stern_brocot_unit() -> SternBrocotUnit {
    SternBrocotUnit {
        frontier: vec![(BigInt::zero(), BigInt::one()), (BigInt::one(), BigInt::one())],
        level: Vec::new(),
        pos: 0,
    }
}

impl Iterator for SternBrocotUnit {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        if self.pos == self.level.len() {
            let mut next_frontier = Vec::with_capacity(self.frontier.len() * 2);
            let mut level = Vec::with_capacity(self.frontier.len());
            for w in self.frontier.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let m = (&a.0 + &b.0, &a.1 + &b.1);
                next_frontier.push(a.clone());
                next_frontier.push(m.clone());
                level.push(m);
            }
            next_frontier.push(self.frontier.last().cloned().expect("nonempty"));
            self.frontier = next_frontier;
            self.level = level;
            self.pos = 0;
        }
        let (p, q) = self.level[self.pos].clone();
        self.pos += 1;
        Some(BigRational::new(p, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_prefix() {
        let got: Vec<String> = rationals().take(9).map(|r| format_rational(&r)).collect();
        assert_eq!(got, ["0/1", "1/1", "-1/1", "1/2", "-1/2", "2/1", "-2/1", "1/3", "-1/3"]);
    }

    #[test]
    fn enumeration_has_no_repeats() {
        let v: Vec<Rational> = rationals().take(2000).collect();
        let set: std::collections::BTreeSet<_> = v.iter().cloned().collect();
        assert_eq!(set.len(), v.len());
    }

    #[test]
    fn stern_brocot_levels() {
        let got: Vec<String> = stern_brocot_unit().take(7).map(|r| format_rational(&r)).collect();
        assert_eq!(got, ["1/2", "1/3", "2/3", "1/4", "2/5", "3/5", "3/4"]);
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("4").unwrap(), int(4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(6, -4)), "-3/2");
    }
}
