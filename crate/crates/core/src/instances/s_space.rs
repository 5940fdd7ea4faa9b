//! The space of descending pair sequences followed by a convergent trace
//! strategy, presented as Baire space.
//!
//! A word `⟨s_0, s_1, ...⟩` is a handle for the sequence in which Empty
//! plays, at round `n`, the `s_n`-th enumerated point of `U_n = V_{n-1}`
//! (of the whole space at round 0). Handles are padded with zeros, and
//! symbol 0 picks the first enumerated point, which is the midpoint of a
//! bounded interval.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::game::{open_trace, Move, Round, Strategy};
use crate::rational::{pow2_neg, Rational};
use crate::strategy::TraceStrategy;
use crate::topology::{BasisClass, Basic, Catalog, Interval, Kind, Open, OpenMap, Point, Space, Universe};

/// Longest scan when looking a point up in an enumeration.
const INDEX_SCAN: usize = 1 << 14;

pub struct SSpace {
    st: Arc<TraceStrategy>,
    depth: usize,
    source: Arc<Space>,
    target: Arc<Space>,
    memo: Mutex<HashMap<Vec<u32>, Vec<Round>>>,
}

/// Builds the presentation and the map `f`, after checking at `depth` that
/// the strategy shrinks the all-zero and a few other handles.
pub fn s_space(st: Arc<TraceStrategy>, depth: usize) -> Result<SSpace> {
    let target = st.space().clone();
    if !matches!(target.universe, Universe::Rationals | Universe::Reals) {
        return Err(Error::PresentationMismatch("the S-space is built over interval presentations".into()));
    }
    if depth < 2 {
        return Err(Error::Precondition("depth must be at least 2".into()));
    }
    let source = Space::new("s-space", Kind::CountableMetricLike, Universe::Baire, Catalog::Cylinders, true, BasisClass::ALL)?;
    let s = SSpace { st, depth, source: Arc::new(source), target, memo: Mutex::new(HashMap::new()) };
    for probe in [vec![], vec![1], vec![2, 1], vec![1, 3, 2]] {
        let rounds = s.rounds(&s.pad(&probe))?;
        let first = rounds[0].v.interval().and_then(Interval::length);
        let last = rounds[depth - 1].v.interval().and_then(Interval::length);
        let ok = match (first, last) {
            (Some(a), Some(b)) => b <= a * pow2_neg((depth / 2) as u32),
            _ => false,
        };
        if !ok {
            return Err(Error::Precondition(format!(
                "strategy does not converge at depth {depth} along handle {probe:?}"
            )));
        }
    }
    Ok(s)
}

impl SSpace {
    pub fn depth(&self) -> usize {
        self.depth
    }

    fn pad(&self, w: &[u32]) -> Vec<u32> {
        let mut v = w.to_vec();
        if v.len() < self.depth {
            v.resize(self.depth, 0);
        }
        v
    }

    fn handle(z: &Point) -> Result<&[u32]> {
        match z {
            Point::Seq(w) => Ok(w),
            _ => Err(Error::PresentationMismatch(format!("S-space points are sequences, got {z}"))),
        }
    }

    fn step(&self, rounds: &[Round], s: u32) -> Result<Round> {
        let u = rounds.last().map_or_else(|| self.target.top(), |r| r.v.clone());
        let x = self
            .target
            .enumerate_points(&u)
            .nth(s as usize)
            .ok_or_else(|| Error::Precondition("enumeration ended early".into()))?;
        let mut moves: Vec<Move> = rounds.iter().map(Round::mv).collect();
        moves.push(Move::new(x.clone(), u.clone()));
        let v = self.st.respond(&moves)?;
        Ok(Round { x, u, v })
    }

    /// `⟨x_n, U_n, V_n⟩` for every symbol of the word.
    pub fn rounds(&self, word: &[u32]) -> Result<Vec<Round>> {
        if let Some(r) = self.memo.lock().expect("memo poisoned").get(word) {
            return Ok(r.clone());
        }
        let mut rounds = if word.is_empty() { Vec::new() } else { self.rounds(&word[..word.len() - 1])? };
        if let Some(&s) = word.last() {
            let r = self.step(&rounds, s)?;
            rounds.push(r);
        }
        self.memo.lock().expect("memo poisoned").insert(word.to_vec(), rounds.clone());
        Ok(rounds)
    }

    /// Whether the word's last pair follows its parent by the recurrence
    /// `x ∈ U_n = V_{n-1}`, `V_n = S*(x, U_n, T_n)`, recomputed from scratch.
    pub fn check_cylinder(&self, word: &[u32]) -> Result<bool> {
        let Some((_, parent)) = word.split_last() else { return Ok(true) };
        let pr = self.rounds(parent)?;
        let full = self.rounds(word)?;
        if full[..pr.len()] != pr[..] {
            return Ok(false);
        }
        let last = full.last().expect("nonempty word");
        if let Some(p) = pr.last() {
            if last.u != p.v {
                return Ok(false);
            }
        }
        let t = open_trace(&pr);
        let v = self.st.respond_star(&last.x, &last.u, &t)?;
        Ok(last.u.contains(&last.x)? && v == last.v && v.included_in(&last.u)?)
    }

    /// Closure of `V_{d-1}` with `d = max(len, depth)`; it contains `f(z)`.
    pub fn certified_interval(&self, z: &Point) -> Result<Interval> {
        let rounds = self.rounds(&self.pad(Self::handle(z)?))?;
        let v = &rounds.last().expect("depth ≥ 2").v;
        v.interval().cloned().ok_or(Error::UnsupportedComparison(v.family(), "interval"))
    }

    /// `2^-n` for the first index where the pair sequences differ.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<Rational> {
        let (wa, wb) = (Self::handle(a)?, Self::handle(b)?);
        let n = wa.len().max(wb.len()).max(self.depth);
        let (mut pa, mut pb) = (wa.to_vec(), wb.to_vec());
        pa.resize(n, 0);
        pb.resize(n, 0);
        let (ra, rb) = (self.rounds(&pa)?, self.rounds(&pb)?);
        Ok(ra
            .iter()
            .zip(&rb)
            .position(|(x, y)| (&x.u, &x.v) != (&y.u, &y.v))
            .map_or_else(|| Rational::from_integer(0.into()), |i| pow2_neg(i as u32)))
    }
}

impl OpenMap for SSpace {
    fn source(&self) -> &Arc<Space> {
        &self.source
    }

    fn target(&self) -> &Arc<Space> {
        &self.target
    }

    /// The midpoint of the certified interval.
    fn apply(&self, z: &Point) -> Result<Point> {
        let iv = self.certified_interval(z)?;
        iv.midpoint()
            .map(Point::Rat)
            .ok_or_else(|| Error::Precondition("reply interval is unbounded".into()))
    }

    /// `f(⟨U_0, ..., U_n⟩) = V_n`.
    fn image_basic(&self, b: &Basic) -> Result<Open> {
        match b {
            Basic::Cylinder(w) if w.is_empty() => Ok(Open::Set(self.target.top())),
            Basic::Cylinder(w) => Ok(Open::Set(self.rounds(w)?.last().expect("nonempty").v.clone())),
            _ => Err(Error::UnsupportedComparison(b.family(), "cylinder")),
        }
    }

    fn preimage_basic(&self, _b: &Basic) -> Result<Open> {
        Err(Error::Capability("preimages in the S-space are not finitely presented".into()))
    }

    /// Extends a cylinder by the index of `x` in the enumeration of its image.
    fn choose_preimage(&self, x: &Point, w: &Open) -> Result<Point> {
        let parts: Vec<&Basic> = match w {
            Open::Set(b) => vec![b],
            Open::Union(ps) => ps.iter().collect(),
        };
        for b in parts {
            let Basic::Cylinder(word) = b else { continue };
            let Open::Set(v) = self.image_basic(b)? else { continue };
            if !v.contains(x)? {
                continue;
            }
            if let Some(k) = self.target.enumerate_points(&v).take(INDEX_SCAN).position(|p| p == *x) {
                let mut h = word.clone();
                h.push(k as u32);
                let z = Point::seq(h);
                if self.apply(&z)? == *x {
                    return Ok(z);
                }
            }
        }
        Err(Error::MapInvariant(format!("no handle found over {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{reals, reals_half_ball};
    use crate::rational::int;
    use crate::strategy::tracify;

    fn half_ball_space(depth: usize) -> SSpace {
        let st = Arc::new(tracify(Arc::new(reals_half_ball()), Arc::new(reals())));
        s_space(st, depth).unwrap()
    }

    #[test]
    fn constant_centre_converges_to_zero() {
        let s = half_ball_space(16);
        assert_eq!(s.apply(&Point::seq(vec![])).unwrap(), Point::Rat(int(0)));
        let iv = s.certified_interval(&Point::seq(vec![])).unwrap();
        assert!(iv.length().unwrap() <= pow2_neg(14));
    }

    #[test]
    fn distance_is_first_difference() {
        let s = half_ball_space(8);
        let a = Point::seq(vec![0, 0, 0, 1]);
        let b = Point::seq(vec![0, 0, 0, 2]);
        assert_eq!(s.distance(&a, &b).unwrap(), pow2_neg(3));
        assert_eq!(s.distance(&a, &a).unwrap(), int(0));
    }

    #[test]
    fn image_of_cylinder_is_last_reply() {
        let s = half_ball_space(8);
        let w = vec![1, 2];
        let rounds = s.rounds(&w).unwrap();
        assert_eq!(s.image_basic(&Basic::Cylinder(w.clone())).unwrap(), Open::Set(rounds[1].v.clone()));
        assert!(s.check_cylinder(&w).unwrap());
        let x = rounds[1].v.interval().unwrap().midpoint().unwrap();
        let z = s.choose_preimage(&Point::Rat(x.clone()), &Open::Set(Basic::Cylinder(w))).unwrap();
        assert_eq!(s.apply(&z).unwrap(), Point::Rat(x));
    }

    #[test]
    fn copycat_is_rejected() {
        let st = Arc::new(tracify(Arc::new(crate::strategy::Stationary::copycat()), Arc::new(reals())));
        assert!(matches!(s_space(st, 8), Err(Error::Precondition(_))));
    }
}
