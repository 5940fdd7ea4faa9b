//! Point codes, basic-set codes and effective opens.
//!
//! Every family carries exact data; membership and same-family inclusion are
//! decided without approximation.

use std::cmp::Ordering;
use std::fmt;



use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// A point of a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    /// Index into a finite universe.
    Index(usize),
    /// An exact rational (rationals and reals presentations).
    Rat(Rational),
    /// A point of the plane with rational coordinates.
    Pair(Rational, Rational),
    /// An eventually-zero symbol sequence, stored without trailing zeros.
    Seq(Vec<u32>),
}

impl Point {
    pub fn seq(mut s: Vec<u32>) -> Point {
        while s.last() == Some(&0) {
            s.pop();
        }
        Point::Seq(s)
    }

    pub fn family(&self) -> &'static str {
        match self {
            Point::Index(_) => "index",
            Point::Rat(_) => "rational",
            Point::Pair(..) => "pair",
            Point::Seq(_) => "sequence",
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Point::Rat(q) => Some(q),
            _ => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "{i}"),
            Point::Rat(q) => f.write_str(&format_rational(q)),
            Point::Pair(x, y) => write!(f, "({},{})", format_rational(x), format_rational(y)),
            Point::Seq(s) => write_seq(f, s),
        }
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, s: &[u32]) -> fmt::Result {
    f.write_str("<")?;
    for (i, v) in s.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(">")
}

/// Open interval with rational or infinite endpoints (`None` is infinite).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
}

fn cmp_lo(a: &Option<Rational>, b: &Option<Rational>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

fn cmp_hi(a: &Option<Rational>, b: &Option<Rational>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(x), Some(y)) => x.cmp(y),
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_lo(&self.lo, &other.lo).then_with(|| cmp_hi(&self.hi, &other.hi))
    }
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Interval {
        Interval { lo: Some(lo), hi: Some(hi) }
    }

    pub fn whole() -> Interval {
        Interval { lo: None, hi: None }
    }

    /// `(c - r, c + r)`.
    pub fn ball(c: &Rational, r: &Rational) -> Interval {
        Interval::new(c - r, c + r)
    }

    pub fn is_nonempty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.lo.as_ref().map_or(true, |a| a < q) && self.hi.as_ref().map_or(true, |b| q < b)
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &Interval) -> bool {
        cmp_lo(&self.lo, &other.lo) != Ordering::Greater
            && cmp_hi(&self.hi, &other.hi) != Ordering::Less
    }

    /// `closure(self) ⊆ other`.
    pub fn closure_within(&self, other: &Interval) -> bool {
        let lo_ok = match (&other.lo, &self.lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a < b,
        };
        let hi_ok = match (&other.hi, &self.hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => b < a,
        };
        lo_ok && hi_ok
    }

    /// Whether `q` lies in the closure.
    pub fn closure_contains(&self, q: &Rational) -> bool {
        self.lo.as_ref().map_or(true, |a| a <= q) && self.hi.as_ref().map_or(true, |b| q <= b)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = if cmp_lo(&self.lo, &other.lo) == Ordering::Less {
            other.lo.clone()
        } else {
            self.lo.clone()
        };
        let hi = if cmp_hi(&self.hi, &other.hi) == Ordering::Greater {
            other.hi.clone()
        } else {
            self.hi.clone()
        };
        let iv = Interval { lo, hi };
        iv.is_nonempty().then_some(iv)
    }

    pub fn length(&self) -> Option<Rational> {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    }

    pub fn midpoint(&self) -> Option<Rational> {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => Some((a + b) / Rational::from_integer(2.into())),
            _ => None,
        }
    }

    /// Distance from `q` to the nearer endpoint; `None` when both are infinite.
    pub fn boundary_distance(&self, q: &Rational) -> Option<Rational> {
        let l = self.lo.as_ref().map(|a| q - a);
        let h = self.hi.as_ref().map(|b| b - q);
        match (l, h) {
            (Some(l), Some(h)) => Some(if l < h { l } else { h }),
            (Some(l), None) => Some(l),
            (None, Some(h)) => Some(h),
            (None, None) => None,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo.as_ref().map_or("-inf".to_string(), format_rational);
        let hi = self.hi.as_ref().map_or("+inf".to_string(), format_rational);
        write!(f, "({lo},{hi})")
    }
}

/// A basic-set code. The denoted set is always nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basic {
    /// Subset of a finite universe of at most 64 points.
    Mask(u64),
    Interval(Interval),
    /// Interval minus finitely many points; `excluded` is sorted, inside the
    /// interval and nonempty.
    IntervalMinus { interval: Interval, excluded: Vec<Rational> },
    /// All sequences extending the prefix.
    Cylinder(Vec<u32>),
    /// Product of two intervals.
    Box(Interval, Interval),
}

impl Basic {
    /// Normalizing constructor: drops exclusions outside the interval and
    /// collapses to a plain interval when nothing is excluded.
    pub fn interval_minus(interval: Interval, excluded: impl IntoIterator<Item = Rational>) -> Basic {
        let mut ex: Vec<Rational> = excluded.into_iter().filter(|q| interval.contains(q)).collect();
        ex.sort();
        ex.dedup();
        if ex.is_empty() {
            Basic::Interval(interval)
        } else {
            Basic::IntervalMinus { interval, excluded: ex }
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Basic::Mask(_) => "mask",
            Basic::Interval(_) => "interval",
            Basic::IntervalMinus { .. } => "interval-minus",
            Basic::Cylinder(_) => "cylinder",
            Basic::Box(..) => "box",
        }
    }

    pub fn mask(&self) -> Option<u64> {
        match self {
            Basic::Mask(m) => Some(*m),
            _ => None,
        }
    }

    /// Underlying interval for the interval families.
    pub fn interval(&self) -> Option<&Interval> {
        match self {
            Basic::Interval(iv) | Basic::IntervalMinus { interval: iv, .. } => Some(iv),
            _ => None,
        }
    }

    fn excluded(&self) -> &[Rational] {
        match self {
            Basic::IntervalMinus { excluded, .. } => excluded,
            _ => &[],
        }
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        match (self, x) {
            (Basic::Mask(m), Point::Index(i)) => Ok(*i < 64 && m >> i & 1 == 1),
            (Basic::Interval(iv), Point::Rat(q)) => Ok(iv.contains(q)),
            (Basic::IntervalMinus { interval, excluded }, Point::Rat(q)) => {
                Ok(interval.contains(q) && excluded.binary_search(q).is_err())
            }
            (Basic::Cylinder(c), Point::Seq(s)) => {
                Ok(c.iter().enumerate().all(|(i, v)| s.get(i).copied().unwrap_or(0) == *v))
            }
            (Basic::Box(a, b), Point::Pair(x, y)) => Ok(a.contains(x) && b.contains(y)),
            _ => Err(Error::PresentationMismatch(format!(
                "point family `{}` against basic family `{}`",
                x.family(),
                self.family()
            ))),
        }
    }

    /// Exact inclusion `self ⊆ other`.
    pub fn included_in(&self, other: &Basic) -> Result<bool> {
        match (self, other) {
            (Basic::Mask(a), Basic::Mask(b)) => Ok(a & !b == 0),
            (Basic::Cylinder(a), Basic::Cylinder(b)) => Ok(a.starts_with(b)),
            (Basic::Box(a1, a2), Basic::Box(b1, b2)) => Ok(b1.includes(a1) && b2.includes(a2)),
            (
                Basic::Interval(_) | Basic::IntervalMinus { .. },
                Basic::Interval(_) | Basic::IntervalMinus { .. },
            ) => {
                let (ia, ib) = (self.interval().unwrap(), other.interval().unwrap());
                if !ib.includes(ia) {
                    return Ok(false);
                }
                let ea = self.excluded();
                Ok(other
                    .excluded()
                    .iter()
                    .filter(|e| ia.contains(e))
                    .all(|e| ea.binary_search(e).is_ok()))
            }
            _ => Err(Error::UnsupportedComparison(self.family(), other.family())),
        }
    }

    /// Intersection within a family; `None` when empty.
    pub fn intersect(&self, other: &Basic) -> Result<Option<Basic>> {
        Ok(match (self, other) {
            (Basic::Mask(a), Basic::Mask(b)) => (a & b != 0).then_some(Basic::Mask(a & b)),
            (Basic::Cylinder(a), Basic::Cylinder(b)) => {
                if a.starts_with(b) {
                    Some(self.clone())
                } else if b.starts_with(a) {
                    Some(other.clone())
                } else {
                    None
                }
            }
            (Basic::Box(a1, a2), Basic::Box(b1, b2)) => match (a1.intersect(b1), a2.intersect(b2)) {
                (Some(x), Some(y)) => Some(Basic::Box(x, y)),
                _ => None,
            },
            (
                Basic::Interval(_) | Basic::IntervalMinus { .. },
                Basic::Interval(_) | Basic::IntervalMinus { .. },
            ) => self
                .interval()
                .unwrap()
                .intersect(other.interval().unwrap())
                .map(|iv| {
                    let ex = self.excluded().iter().chain(other.excluded()).cloned();
                    Basic::interval_minus(iv, ex.collect::<Vec<_>>())
                }),
            _ => return Err(Error::UnsupportedComparison(self.family(), other.family())),
        })
    }

    /// Half-width of an interval or of the wider side of a box.
    pub fn radius(&self) -> Option<Rational> {
        let half = |iv: &Interval| iv.length().map(|l| l / Rational::from_integer(2.into()));
        match self {
            Basic::Interval(iv) | Basic::IntervalMinus { interval: iv, .. } => half(iv),
            Basic::Box(a, b) => {
                let (ra, rb) = (half(a)?, half(b)?);
                Some(if ra > rb { ra } else { rb })
            }
            _ => None,
        }
    }

    pub fn is_singleton(&self) -> Option<bool> {
        match self {
            Basic::Mask(m) => Some(m.count_ones() == 1),
            Basic::Interval(_) | Basic::IntervalMinus { .. } | Basic::Box(..) => Some(false),
            Basic::Cylinder(_) => Some(false),
        }
    }
}

impl fmt::Display for Basic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basic::Mask(m) => {
                f.write_str("{")?;
                let mut first = true;
                for i in 0..64 {
                    if m >> i & 1 == 1 {
                        if !first {
                            f.write_str(",")?;
                        }
                        first = false;
                        write!(f, "{i}")?;
                    }
                }
                f.write_str("}")
            }
            Basic::Interval(iv) => write!(f, "{iv}"),
            Basic::IntervalMinus { interval, excluded } => {
                write!(f, "{interval}\\{{")?;
                for (i, e) in excluded.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(&format_rational(e))?;
                }
                f.write_str("}")
            }
            Basic::Cylinder(c) => write_seq(f, c),
            Basic::Box(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

/// An effective open set: decidable membership plus a selector producing a
/// basic neighborhood inside the open.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Open {
    /// The set denoted by one family code (not necessarily a catalog member).
    Set(Basic),
    /// Finite union of codes of one family.
    Union(Vec<Basic>),
}

impl From<Basic> for Open {
    fn from(b: Basic) -> Open {
        Open::Set(b)
    }
}

impl Open {
    pub fn contains(&self, x: &Point) -> Result<bool> {
        match self {
            Open::Set(b) => b.contains(x),
            Open::Union(parts) => {
                for p in parts {
                    if p.contains(x)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Exact `b ⊆ self` for single sets, unions of masks and unions of
    /// plain intervals; other unions answer by member-wise inclusion.
    pub fn includes_basic(&self, b: &Basic) -> Result<bool> {
        match self {
            Open::Set(s) => b.included_in(s),
            Open::Union(parts) => {
                if let Some(m) = union_mask(parts) {
                    return b.included_in(&Basic::Mask(m));
                }
                if let (Some(comps), Some(iv)) = (merged_intervals(parts), b.interval()) {
                    return Ok(comps.iter().any(|c| c.includes(iv)));
                }
                for p in parts {
                    if b.included_in(p)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// A family code containing `x` and inside the open.
    pub fn selector(&self, x: &Point) -> Result<Basic> {
        let pick = |b: &Basic| -> Result<Basic> {
            match (b, x) {
                (Basic::IntervalMinus { interval, excluded }, Point::Rat(q)) => {
                    let below = excluded.iter().filter(|e| *e < q).max().cloned();
                    let above = excluded.iter().filter(|e| *e > q).min().cloned();
                    Ok(Basic::Interval(Interval {
                        lo: below.or_else(|| interval.lo.clone()),
                        hi: above.or_else(|| interval.hi.clone()),
                    }))
                }
                _ => Ok(b.clone()),
            }
        };
        match self {
            Open::Set(b) if b.contains(x)? => pick(b),
            Open::Union(parts) => {
                for p in parts {
                    if p.contains(x)? {
                        return pick(p);
                    }
                }
                Err(Error::Precondition(format!("point {x} outside the open")))
            }
            _ => Err(Error::Precondition(format!("point {x} outside the open"))),
        }
    }

    /// Intersection with a basic code, when it stays inside one family.
    pub fn intersect_basic(&self, b: &Basic) -> Result<Option<Open>> {
        match self {
            Open::Set(s) => Ok(s.intersect(b)?.map(Open::Set)),
            Open::Union(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    if let Some(i) = p.intersect(b)? {
                        out.push(i);
                    }
                }
                Ok(if out.is_empty() { None } else { Some(Open::Union(out)) })
            }
        }
    }
}

fn union_mask(parts: &[Basic]) -> Option<u64> {
    parts.iter().map(Basic::mask).try_fold(0u64, |acc, m| m.map(|m| acc | m))
}

/// Connected components of a union of plain intervals.
fn merged_intervals(parts: &[Basic]) -> Option<Vec<Interval>> {
    let mut ivs: Vec<Interval> = parts
        .iter()
        .map(|p| match p {
            Basic::Interval(iv) => Some(iv.clone()),
            _ => None,
        })
        .collect::<Option<_>>()?;
    ivs.sort();
    let mut out: Vec<Interval> = Vec::new();
    for iv in ivs {
        if let Some(last) = out.last_mut() {
            // open intervals merge only when they overlap (touching leaves a gap point)
            let overlaps = match (&last.hi, &iv.lo) {
                (None, _) | (_, None) => true,
                (Some(h), Some(l)) => l < h,
            };
            if overlaps {
                if cmp_hi(&iv.hi, &last.hi) == Ordering::Greater {
                    last.hi = iv.hi.clone();
                }
                continue;
            }
        }
        out.push(iv);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn iv(a: Rational, b: Rational) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn interval_minus_membership_and_inclusion() {
        let u = Basic::Interval(iv(int(0), int(1)));
        let v = Basic::interval_minus(iv(int(0), int(1)), [rat(1, 2)]);
        assert!(!v.contains(&Point::Rat(rat(1, 2))).unwrap());
        assert!(v.contains(&Point::Rat(rat(1, 3))).unwrap());
        assert!(v.included_in(&u).unwrap());
        assert!(!u.included_in(&v).unwrap());
        let small = Basic::Interval(iv(int(0), rat(1, 2)));
        assert!(small.included_in(&v).unwrap());
    }

    #[test]
    fn cylinder_inclusion_is_prefix() {
        let a = Basic::Cylinder(vec![0, 1]);
        let b = Basic::Cylinder(vec![0]);
        assert!(a.included_in(&b).unwrap());
        assert!(!b.included_in(&a).unwrap());
        assert!(a.contains(&Point::seq(vec![0, 1, 0, 0])).unwrap());
    }

    #[test]
    fn cross_family_is_an_error() {
        let a = Basic::Mask(1);
        let b = Basic::Cylinder(vec![]);
        assert!(matches!(a.included_in(&b), Err(Error::UnsupportedComparison(..))));
        assert!(matches!(a.contains(&Point::Rat(int(0))), Err(Error::PresentationMismatch(_))));
    }

    #[test]
    fn union_of_touching_intervals_has_a_gap() {
        let u = Open::Union(vec![
            Basic::Interval(iv(int(0), int(1))),
            Basic::Interval(iv(int(1), int(2))),
        ]);
        assert!(!u.includes_basic(&Basic::Interval(iv(rat(1, 2), rat(3, 2)))).unwrap());
        let u = Open::Union(vec![
            Basic::Interval(iv(int(0), int(1))),
            Basic::Interval(iv(rat(1, 2), int(2))),
        ]);
        assert!(u.includes_basic(&Basic::Interval(iv(rat(1, 4), rat(3, 2)))).unwrap());
    }

    #[test]
    fn selector_avoids_excluded_points() {
        let v = Open::Set(Basic::interval_minus(iv(int(0), int(1)), [rat(1, 2)]));
        let s = v.selector(&Point::Rat(rat(1, 4))).unwrap();
        assert_eq!(s, Basic::Interval(iv(int(0), rat(1, 2))));
    }
}
