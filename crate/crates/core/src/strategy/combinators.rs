//! Change of basis, composition, countable intersection, and a family of
//! pseudo-random stable strategies used as test subjects.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::Stationary;
use crate::error::{Error, Result};
use crate::game::{Move, Strategy};
use crate::topology::{Basic, Open, Point, Space};

/// An Empty move whose open need not be a catalog code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenMove {
    pub x: Point,
    pub u: Open,
}

/// A strategy in the unrestricted game: moves and replies are effective opens.
pub trait OpenStrategy: Send + Sync {
    fn respond_open(&self, moves: &[OpenMove]) -> Result<Open>;
}

/// Views a basis strategy as an open strategy on moves that happen to be
/// single codes.
pub struct AsOpen<S>(pub S);

impl<S: Strategy> OpenStrategy for AsOpen<S> {
    fn respond_open(&self, moves: &[OpenMove]) -> Result<Open> {
        let ms = moves
            .iter()
            .map(|m| match &m.u {
                Open::Set(b) => Ok(Move::new(m.x.clone(), b.clone())),
                Open::Union(_) => Err(Error::Precondition("basis strategy queried with a union".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Open::Set(self.0.respond(&ms)?))
    }
}

/// Replies `refine(x, S(...))`.
pub struct ToBasis<S> {
    inner: S,
    space: Arc<Space>,
}

pub fn to_basis<S: OpenStrategy>(inner: S, space: Arc<Space>) -> ToBasis<S> {
    ToBasis { inner, space }
}

impl<S: OpenStrategy> Strategy for ToBasis<S> {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        let om: Vec<OpenMove> = moves.iter().map(|m| OpenMove { x: m.x.clone(), u: Open::Set(m.u.clone()) }).collect();
        let reply = self.inner.respond_open(&om)?;
        let x = &moves.last().expect("nonempty history").x;
        self.space.refine(x, &reply)
    }

    fn describe(&self) -> String {
        "to_basis".into()
    }
}

/// Plays a basis strategy in the unrestricted game by refining each of
/// Empty's opens at its point first.
pub struct FromBasis<S> {
    inner: S,
    space: Arc<Space>,
}

pub fn from_basis<S: Strategy>(inner: S, space: Arc<Space>) -> FromBasis<S> {
    FromBasis { inner, space }
}

impl<S: Strategy> OpenStrategy for FromBasis<S> {
    fn respond_open(&self, moves: &[OpenMove]) -> Result<Open> {
        let refined = moves
            .iter()
            .map(|m| Ok(Move::new(m.x.clone(), self.space.refine(&m.x, &m.u)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Open::Set(self.inner.respond(&refined)?))
    }
}

/// `(x, U) ↦ S2(x, S1(x, U))`.
pub fn compose_stationary(s1: &Stationary, s2: &Stationary) -> Stationary {
    let (a, b) = (s1.clone(), s2.clone());
    Stationary::new(format!("{}∘{}", s2.name(), s1.name()), move |x, u| {
        let v = a.respond1(x, u)?;
        b.respond1(x, &v)
    })
}

/// `⟨k, m⟩ = 2^k (2m + 1) - 1`.
pub fn pairing(k: usize, m: usize) -> usize {
    (1usize << k) * (2 * m + 1) - 1
}

pub fn unpairing(n: usize) -> (usize, usize) {
    let v = n + 1;
    let k = v.trailing_zeros() as usize;
    (k, ((v >> k) - 1) / 2)
}

type Family = dyn Fn(usize) -> Arc<dyn Strategy> + Send + Sync;

/// Interleaves a countable family: round `⟨k, m⟩` is answered by `S_k` on
/// the rounds `⟨k, 0⟩, ..., ⟨k, m⟩`.
pub struct Intersection {
    family: Arc<Family>,
}

pub fn intersect_countable(family: impl Fn(usize) -> Arc<dyn Strategy> + Send + Sync + 'static) -> Intersection {
    Intersection { family: Arc::new(family) }
}

impl Intersection {
    /// Indices of the thread of `S_k` among the first `n` rounds.
    pub fn thread(k: usize, n: usize) -> Vec<usize> {
        (0..).map(|m| pairing(k, m)).take_while(|&i| i < n).collect()
    }
}

impl Strategy for Intersection {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        let n = moves.len() - 1;
        let (k, m) = unpairing(n);
        let sub: Vec<Move> = (0..=m).map(|j| moves[pairing(k, j)].clone()).collect();
        (self.family)(k).respond(&sub)
    }

    fn describe(&self) -> String {
        "intersect_countable".into()
    }
}

/// Consecutive duplicate moves collapsed to one.
pub fn collapse(moves: &[Move]) -> Vec<Move> {
    let mut out: Vec<Move> = Vec::with_capacity(moves.len());
    for m in moves {
        if out.last() != Some(m) {
            out.push(m.clone());
        }
    }
    out
}

/// A history-sensitive but stable strategy on a finite space: the reply is a
/// legal catalog code picked by hashing the seed with the collapsed history.
pub struct HashStrategy {
    space: Arc<Space>,
    seed: u64,
}

impl HashStrategy {
    pub fn new(space: Arc<Space>, seed: u64) -> HashStrategy {
        HashStrategy { space, seed }
    }
}

impl Strategy for HashStrategy {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        let c = collapse(moves);
        let m = c.last().expect("nonempty history");
        let mut legal = Vec::new();
        for b in self.space.masks().into_iter().map(Basic::Mask) {
            if b.contains(&m.x)? && b.included_in(&m.u)? {
                legal.push(b);
            }
        }
        if legal.is_empty() {
            return Ok(m.u.clone());
        }
        let mut h = DefaultHasher::new();
        self.seed.hash(&mut h);
        c.hash(&mut h);
        Ok(legal[(h.finish() % legal.len() as u64) as usize].clone())
    }

    fn describe(&self) -> String {
        format!("hash:{}", self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::topology::{Catalog, Interval, Kind, Universe};

    #[test]
    fn pairing_roundtrip() {
        for n in 0..500 {
            let (k, m) = unpairing(n);
            assert_eq!(pairing(k, m), n);
        }
        assert_eq!(unpairing(0), (0, 0));
    }

    #[test]
    fn to_basis_on_chain_refines_to_minimal() {
        let chain = Arc::new(Space::finite("chain3", 3, &[1, 3, 7]).unwrap());
        let full = AsOpen(Stationary::new("full", |_, _| Ok(Basic::Mask(7))));
        let s = to_basis(full, chain);
        let r = s.respond(&[Move::new(Point::Index(0), Basic::Mask(7))]).unwrap();
        assert_eq!(r, Basic::Mask(1));
    }

    #[test]
    fn from_basis_refines_union_moves() {
        let reals = Arc::new(
            Space::new("reals", Kind::CountableMetricLike, Universe::Reals, Catalog::RationalIntervals, true, [])
                .unwrap(),
        );
        let s = from_basis(Stationary::copycat(), reals.clone());
        let u = Open::Union(vec![
            Basic::Interval(Interval::new(int(0), int(1))),
            Basic::Interval(Interval::new(int(3), int(4))),
        ]);
        let x = Point::Rat(rat(7, 2));
        let reply = s.respond_open(&[OpenMove { x: x.clone(), u: u.clone() }]).unwrap();
        let expect = reals.refine(&x, &u).unwrap();
        assert_eq!(reply, Open::Set(expect.clone()));
        assert!(u.includes_basic(&expect).unwrap());
    }

    #[test]
    fn compose_with_copycat_is_neutral() {
        let shrink = Stationary::new("first", |x, u| {
            let Point::Index(i) = x else { unreachable!() };
            Ok(if u.mask().unwrap() & 1 == 1 && *i == 0 { Basic::Mask(1) } else { u.clone() })
        });
        let c = Stationary::copycat();
        for m in [1u64, 3, 7] {
            let u = Basic::Mask(m);
            let x = Point::Index(0);
            let a = compose_stationary(&c, &shrink).respond1(&x, &u).unwrap();
            let b = compose_stationary(&shrink, &c).respond1(&x, &u).unwrap();
            let r = shrink.respond1(&x, &u).unwrap();
            assert_eq!(a, r);
            assert_eq!(b, r);
        }
    }

    #[test]
    fn hash_strategy_is_stable() {
        let s = Arc::new(Space::finite("chain3", 3, &[1, 3, 7]).unwrap());
        let h = HashStrategy::new(s, 7);
        let m0 = Move::new(Point::Index(1), Basic::Mask(7));
        let m1 = Move::new(Point::Index(0), Basic::Mask(3));
        let a = h.respond(&[m0.clone(), m1.clone()]).unwrap();
        let b = h.respond(&[m0.clone(), m0.clone(), m1.clone()]).unwrap();
        assert_eq!(a, b);
    }
}
