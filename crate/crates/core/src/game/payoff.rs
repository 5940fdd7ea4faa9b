//! Payoff properties, verdicts, and the `≤` order on descending sequences.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::play::Play;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::topology::{bits, Basic, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Empty,
    Nonempty,
    Undetermined,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Empty => "Empty",
            Winner::Nonempty => "Nonempty",
            Winner::Undetermined => "Undetermined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub winner: Winner,
    pub depth: usize,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Verdict: {} at depth {}", self.winner, self.depth)
    }
}

/// A predicate on the stabilized open of a finite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LimitPredicate {
    /// The classic game: every nonempty limit.
    Any,
    Eq(u64),
    SubsetOf(u64),
    Contains(usize),
    /// Explicit set of admissible limits.
    Set(BTreeSet<u64>),
    Union(Vec<LimitPredicate>),
}

impl LimitPredicate {
    pub fn holds(&self, w: u64) -> bool {
        match self {
            LimitPredicate::Any => w != 0,
            LimitPredicate::Eq(m) => w == *m,
            LimitPredicate::SubsetOf(m) => w & !m == 0,
            LimitPredicate::Contains(x) => w >> x & 1 == 1,
            LimitPredicate::Set(s) => s.contains(&w),
            LimitPredicate::Union(ps) => ps.iter().any(|p| p.holds(w)),
        }
    }

    /// Parses the predicate mini-language: `limit=SET`, `limit⊆SET`
    /// (or `limit<=SET`), `limit∋POINT` (or `limit has POINT`), `true`, and
    /// unions joined by `|`.
    pub fn parse(space: &Space, text: &str) -> Result<LimitPredicate> {
        let parts: Vec<&str> = text.split('|').map(str::trim).collect();
        let mut out = Vec::new();
        for p in parts {
            out.push(parse_atom(space, p)?);
        }
        Ok(if out.len() == 1 { out.pop().unwrap() } else { LimitPredicate::Union(out) })
    }

    pub fn describe(&self, space: &Space) -> String {
        let set = |m: &u64| space.fmt_basic(&Basic::Mask(*m));
        match self {
            LimitPredicate::Any => "true".into(),
            LimitPredicate::Eq(m) => format!("limit={}", set(m)),
            LimitPredicate::SubsetOf(m) => format!("limit⊆{}", set(m)),
            LimitPredicate::Contains(x) => format!("limit∋{}", space.fmt_point(&crate::topology::Point::Index(*x))),
            LimitPredicate::Set(s) => {
                format!("limit∈[{}]", s.iter().map(set).collect::<Vec<_>>().join(","))
            }
            LimitPredicate::Union(ps) => ps.iter().map(|p| p.describe(space)).collect::<Vec<_>>().join(" | "),
        }
    }
}

fn parse_atom(space: &Space, s: &str) -> Result<LimitPredicate> {
    if !space.is_finite() {
        return Err(Error::Capability("limit predicates need a finite space".into()));
    }
    if s == "true" {
        return Ok(LimitPredicate::Any);
    }
    let bad = || Error::Parse(format!("malformed predicate `{s}`"));
    let rest = s.strip_prefix("limit").ok_or_else(bad)?.trim_start();
    let mask = |t: &str| -> Result<u64> {
        space.parse_basic(t).map(|b| b.mask().expect("finite codes are masks"))
    };
    if let Some(t) = rest.strip_prefix("⊆").or_else(|| rest.strip_prefix("<=")) {
        Ok(LimitPredicate::SubsetOf(mask(t.trim())?))
    } else if let Some(t) = rest.strip_prefix('=') {
        Ok(LimitPredicate::Eq(mask(t.trim())?))
    } else if let Some(t) = rest.strip_prefix("∋").or_else(|| rest.strip_prefix("has ")) {
        let p = space.parse_point(t.trim())?;
        match p {
            crate::topology::Point::Index(i) => Ok(LimitPredicate::Contains(i)),
            _ => Err(bad()),
        }
    } else {
        Err(bad())
    }
}

type DepthFn = dyn Fn(&[Basic]) -> Winner + Send + Sync;

/// A payoff property of descending open sequences.
#[derive(Clone)]
pub enum Payoff {
    Limit(LimitPredicate),
    Depth {
        name: String,
        eval: Arc<DepthFn>,
        invariant: bool,
        monotone: bool,
    },
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payoff::Limit(q) => write!(f, "Limit({q:?})"),
            Payoff::Depth { name, .. } => write!(f, "Depth({name})"),
        }
    }
}

impl Payoff {
    /// Nonempty wins once some `V_n` (n ≥ 1) has its closure inside
    /// `V_{n-1}` and width at most `tolerance`: a nested-closure certificate
    /// that the intersection is a point up to the tolerance.
    pub fn convergence(tolerance: Rational) -> Payoff {
        let eval = move |vs: &[Basic]| -> Winner {
            for w in vs.windows(2) {
                let nested = match (w[0].interval(), w[1].interval()) {
                    (Some(a), Some(b)) => b.closure_within(a),
                    _ => match (&w[0], &w[1]) {
                        (Basic::Box(a0, a1), Basic::Box(b0, b1)) => b0.closure_within(a0) && b1.closure_within(a1),
                        _ => false,
                    },
                };
                let narrow = w[1].radius().is_some_and(|r| r * Rational::from_integer(2.into()) <= tolerance);
                if nested && narrow {
                    return Winner::Nonempty;
                }
            }
            Winner::Undetermined
        };
        Payoff::Depth { name: "convergence".into(), eval: Arc::new(eval), invariant: true, monotone: true }
    }

    pub fn is_invariant(&self) -> bool {
        match self {
            Payoff::Limit(_) => true,
            Payoff::Depth { invariant, .. } => *invariant,
        }
    }
}

/// Limit form: the play is read as eventually constant at its last reply,
/// which is exact once it has stabilized. Depth form: the evaluator's verdict.
pub fn evaluate(p: &Payoff, play: &Play) -> Verdict {
    let depth = play.rounds.len();
    let winner = match p {
        Payoff::Limit(q) => match play.last_v().and_then(Basic::mask) {
            Some(m) if q.holds(m) => Winner::Nonempty,
            Some(_) => Winner::Empty,
            None => Winner::Undetermined,
        },
        Payoff::Depth { eval, .. } => eval(&play.opens()),
    };
    Verdict { winner, depth }
}

/// A finite prefix of a descending open sequence; `stabilized` marks it as
/// constant from its last element on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descending {
    pub prefix: Vec<Basic>,
    pub stabilized: bool,
}

impl Descending {
    pub fn stable(prefix: Vec<Basic>) -> Descending {
        Descending { prefix, stabilized: true }
    }
}

/// `A ≤ B`: every `V_j` of B includes some `U_i` of A. Exact when both are
/// stabilized within `depth`; otherwise `None` where the prefix cannot decide.
pub fn seq_leq(a: &Descending, b: &Descending, depth: usize) -> Result<Option<bool>> {
    let ap = &a.prefix[..a.prefix.len().min(depth)];
    let bp = &b.prefix[..b.prefix.len().min(depth)];
    let a_exact = a.stabilized && ap.len() == a.prefix.len() && !ap.is_empty();
    let b_exact = b.stabilized && bp.len() == b.prefix.len() && !bp.is_empty();
    for v in bp {
        let mut covered = false;
        for u in ap {
            if u.included_in(v)? {
                covered = true;
                break;
            }
        }
        if !covered {
            return Ok(if a_exact { Some(false) } else { None });
        }
    }
    Ok(if b_exact { Some(true) } else { None })
}

/// `A ≡ B` as mutual `≤`.
pub fn seq_equiv(a: &Descending, b: &Descending, depth: usize) -> Result<Option<bool>> {
    Ok(match (seq_leq(a, b, depth)?, seq_leq(b, a, depth)?) {
        (Some(true), Some(true)) => Some(true),
        (Some(false), _) | (_, Some(false)) => Some(false),
        _ => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub monotone: bool,
    pub invariant: bool,
}

/// Limit predicates are invariant; monotone iff downward closed on the opens.
pub fn classify_property(space: &Space, q: &LimitPredicate) -> Result<Classification> {
    if !space.is_finite() {
        return Err(Error::Capability("classify_property needs a finite space".into()));
    }
    let opens = space.opens();
    let monotone = opens
        .iter()
        .all(|&b| !q.holds(b) || opens.iter().filter(|&&a| a & !b == 0).all(|&a| q.holds(a)));
    Ok(Classification { monotone, invariant: true })
}

/// Every subset of the open lattice closed downward, as explicit predicates.
pub fn down_sets(space: &Space) -> Vec<LimitPredicate> {
    let opens = space.opens();
    let n = opens.len();
    assert!(n <= 20, "down-set enumeration over {n} opens");
    let mut out = Vec::new();
    for sel in 0u32..1 << n {
        let chosen: Vec<u64> = bits(sel as u64).map(|i| opens[i]).collect();
        let closed = chosen
            .iter()
            .all(|&b| opens.iter().filter(|&&a| a & !b == 0).all(|a| chosen.contains(a)));
        if closed {
            out.push(LimitPredicate::Set(chosen.into_iter().collect()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, pow2_neg};
    use crate::topology::{Interval, Point};

    fn chain() -> Space {
        Space::finite("chain3", 3, &[0b001, 0b011, 0b111]).unwrap()
    }

    #[test]
    fn classify_examples() {
        let s = chain();
        assert!(classify_property(&s, &LimitPredicate::Any).unwrap().monotone);
        assert!(classify_property(&s, &LimitPredicate::SubsetOf(0b011)).unwrap().monotone);
        let c = classify_property(&s, &LimitPredicate::Eq(0b011)).unwrap();
        assert!(c.invariant && !c.monotone);
    }

    #[test]
    fn seq_leq_examples() {
        let k = |m| Descending::stable(vec![Basic::Mask(m)]);
        assert_eq!(seq_leq(&k(1), &k(3), 8).unwrap(), Some(true));
        assert_eq!(seq_leq(&k(3), &k(1), 8).unwrap(), Some(false));
        let a = Descending::stable(vec![Basic::Mask(7), Basic::Mask(3), Basic::Mask(3), Basic::Mask(1)]);
        let sub = Descending::stable(vec![Basic::Mask(3), Basic::Mask(1)]);
        assert_eq!(seq_equiv(&a, &sub, 8).unwrap(), Some(true));
        let open = Descending { prefix: vec![Basic::Mask(3)], stabilized: false };
        assert_eq!(seq_leq(&k(1), &open, 8).unwrap(), None);
    }

    #[test]
    fn parse_predicates() {
        let s = chain();
        assert_eq!(LimitPredicate::parse(&s, "limit={0}").unwrap(), LimitPredicate::Eq(1));
        assert_eq!(LimitPredicate::parse(&s, "limit⊆{0,1}").unwrap(), LimitPredicate::SubsetOf(3));
        assert_eq!(LimitPredicate::parse(&s, "limit∋2").unwrap(), LimitPredicate::Contains(2));
        let u = LimitPredicate::parse(&s, "limit={0} | limit<={0,1}").unwrap();
        assert!(u.holds(1) && u.holds(3) && !u.holds(7));
        assert!(LimitPredicate::parse(&s, "lim={0}").is_err());
    }

    #[test]
    fn down_sets_of_chain() {
        // chain of 3 opens: down-sets are the 4 initial segments
        assert_eq!(down_sets(&chain()).len(), 4);
    }

    #[test]
    fn convergence_payoff_on_half_balls() {
        let vs: Vec<Basic> = (0..64)
            .map(|n| Basic::Interval(Interval::ball(&int(0), &pow2_neg(n))))
            .collect();
        let p = Payoff::convergence(pow2_neg(60));
        let mut play = Play::new(std::sync::Arc::new(
            crate::topology::Space::new(
                "reals",
                crate::topology::Kind::CountableMetricLike,
                crate::topology::Universe::Reals,
                crate::topology::Catalog::RationalIntervals,
                true,
                [],
            )
            .unwrap(),
        ));
        for v in &vs {
            play.rounds.push(super::super::play::Round { x: Point::Rat(int(0)), u: v.clone(), v: v.clone() });
        }
        assert_eq!(evaluate(&p, &play).winner, Winner::Nonempty);
        play.rounds.truncate(10);
        assert_eq!(evaluate(&p, &play).winner, Winner::Undetermined);
    }
}
