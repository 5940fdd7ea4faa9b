//! Trace strategies, good triples and stationarization.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use super::Stationary;
use crate::error::{Error, Result};
use crate::game::{Move, Play, Round, Strategy, Trace};
use crate::topology::{BasisClass, Basic, Open, Point, Space};

/// Points scanned per witness search on infinite spaces.
pub const WITNESS_SCAN: usize = 16;

/// `S_t(⟨x_i, U_i⟩_{i≤n}) = S*(x_n, U_n, T_n)` with the witness table `w`.
///
/// `S*(x, U, T)` is the reply of the underlying stable strategy to the
/// witness history of `T` extended by `(x, U)`; `w(T ∪ {(U, V)})` is the
/// first enumerated `y ∈ U` whose shadow reply is `V`. Equal replies share
/// one witness, which is the injectivity the construction needs.
pub struct TraceStrategy {
    inner: Arc<dyn Strategy>,
    space: Arc<Space>,
    witness: Mutex<HashMap<Trace, Point>>,
    prefix: Mutex<HashMap<Vec<Move>, (Trace, Basic)>>,
    good: Mutex<HashMap<(Point, Basic), Basic>>,
}

/// `inner` should be stable (see `stabilize`).
pub fn tracify(inner: Arc<dyn Strategy>, space: Arc<Space>) -> TraceStrategy {
    TraceStrategy {
        inner,
        space,
        witness: Mutex::new(HashMap::new()),
        prefix: Mutex::new(HashMap::new()),
        good: Mutex::new(HashMap::new()),
    }
}

impl TraceStrategy {
    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn inner(&self) -> &Arc<dyn Strategy> {
        &self.inner
    }

    fn scan_points(&self, u: &Basic) -> Vec<Point> {
        let pts = self.space.enumerate_points(u);
        if self.space.is_finite() {
            pts.collect()
        } else {
            pts.take(WITNESS_SCAN).collect()
        }
    }

    /// First scanned `y ∈ U` with `S(hist ++ (y, U)) = V`.
    fn search_witness(&self, hist: &[Move], u: &Basic, v: &Basic) -> Result<Option<Point>> {
        let mut h = hist.to_vec();
        h.push(Move::new(Point::Index(0), u.clone()));
        for y in self.scan_points(u) {
            h.last_mut().expect("pushed above").x = y.clone();
            if self.inner.respond(&h)? == *v {
                return Ok(Some(y));
            }
        }
        Ok(None)
    }

    /// `w(T)` for a nonempty trace.
    pub fn witness(&self, t: &Trace) -> Result<Point> {
        if let Some(y) = self.witness.lock().expect("witness table poisoned").get(t) {
            return Ok(y.clone());
        }
        let (u, v) = t.last().ok_or_else(|| Error::Precondition("w is undefined on the empty trace".into()))?;
        let earlier = Trace(t.0[..t.len() - 1].to_vec());
        let hist = self.witness_history(&earlier)?;
        let y = self
            .search_witness(&hist, u, v)?
            .ok_or_else(|| Error::Precondition("trace is not realized by the strategy".into()))?;
        self.witness.lock().expect("witness table poisoned").insert(t.clone(), y.clone());
        Ok(y)
    }

    /// `⟨w(T_1), U_1⟩, ..., ⟨w(T_k), U_k⟩` along the prefixes of `T`.
    pub fn witness_history(&self, t: &Trace) -> Result<Vec<Move>> {
        (1..=t.len())
            .map(|j| {
                let pre = Trace(t.0[..j].to_vec());
                Ok(Move::new(self.witness(&pre)?, t.0[j - 1].0.clone()))
            })
            .collect()
    }

    /// `S*(x, U, T)`.
    pub fn respond_star(&self, x: &Point, u: &Basic, t: &Trace) -> Result<Basic> {
        let mut hist = self.witness_history(t)?;
        hist.push(Move::new(x.clone(), u.clone()));
        let v = self.inner.respond(&hist)?;
        let next = t.with(u, &v);
        if next != *t && !self.witness.lock().expect("witness table poisoned").contains_key(&next) {
            hist.pop();
            // past the scan bound the first point that produced V is recorded
            let y = self.search_witness(&hist, u, &v)?.unwrap_or_else(|| x.clone());
            self.witness.lock().expect("witness table poisoned").entry(next).or_insert(y);
        }
        Ok(v)
    }

    /// The trace before the last move and the reply to it.
    fn along(&self, moves: &[Move]) -> Result<(Trace, Basic)> {
        if let Some(hit) = self.prefix.lock().expect("memo poisoned").get(moves) {
            return Ok(hit.clone());
        }
        let (m, earlier) = moves.split_last().expect("nonempty history");
        let t = if earlier.is_empty() {
            Trace::default()
        } else {
            let (t, v) = self.along(earlier)?;
            t.with(&earlier.last().expect("nonempty").u, &v)
        };
        let v = self.respond_star(&m.x, &m.u, &t)?;
        let out = (t, v);
        self.prefix.lock().expect("memo poisoned").insert(moves.to_vec(), out.clone());
        Ok(out)
    }

    /// The play re-pointed through `w`: `⟨w(T_{i+1}), U_i⟩`.
    pub fn witness_play(&self, rounds: &[Round]) -> Result<Vec<Move>> {
        let mut t = Trace::default();
        let mut out = Vec::with_capacity(rounds.len());
        for r in rounds {
            t = t.with(&r.u, &r.v);
            out.push(Move::new(self.witness(&t)?, r.u.clone()));
        }
        Ok(out)
    }

    /// Snapshot of the witness table.
    pub fn witness_table(&self) -> Vec<(Trace, Point)> {
        let mut v: Vec<_> = self
            .witness
            .lock()
            .expect("witness table poisoned")
            .iter()
            .map(|(t, p)| (t.clone(), p.clone()))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    fn require_open_finite(&self) -> Result<()> {
        if self.space.is_finite() || self.space.has_flag(BasisClass::OpenFinite) {
            Ok(())
        } else {
            Err(Error::Capability(format!(
                "`{}` does not carry the open-finite flag",
                self.space.name
            )))
        }
    }

    /// `W = ⋂ { S*(x, U, T) : T ∈ 𝒯_U }`, where `𝒯_U` collects the traces
    /// of partial plays following this strategy after which `(x, U)` is a
    /// legal move. Every pair of such a trace is a superset of `U`, so the
    /// search runs over the (finitely many) basic supersets of `U`; points
    /// of infinite basics are scanned up to a bound.
    pub fn response_intersection(&self, x: &Point, u: &Basic) -> Result<Basic> {
        self.require_open_finite()?;
        let key = (x.clone(), u.clone());
        if let Some(w) = self.good.lock().expect("memo poisoned").get(&key) {
            return Ok(w.clone());
        }
        let sups = self.space.supersets_in_basis(u)?;
        let mut w = self.respond_star(x, u, &Trace::default())?;
        let mut seen: HashSet<Trace> = HashSet::new();
        let mut stack = vec![Trace::default()];
        seen.insert(Trace::default());
        while let Some(t) = stack.pop() {
            let last = t.last().map(|p| p.1.clone());
            for a in &sups {
                if let Some(l) = &last {
                    if !a.included_in(l)? {
                        continue;
                    }
                }
                let mut ys = self.scan_points(a);
                if a.contains(x)? && !ys.contains(x) {
                    ys.push(x.clone());
                }
                for y in ys {
                    let b = self.respond_star(&y, a, &t)?;
                    if !u.included_in(&b)? {
                        continue;
                    }
                    let next = t.with(a, &b);
                    if seen.insert(next.clone()) {
                        let r = self.respond_star(x, u, &next)?;
                        w = w.intersect(&r)?.ok_or_else(|| {
                            Error::Construction("responses around x have empty intersection".into())
                        })?;
                        stack.push(next);
                    }
                }
            }
        }
        self.good.lock().expect("memo poisoned").insert(key, w.clone());
        Ok(w)
    }

    /// Whether `(x, U, V)` is a good triple: `V` lies inside every response
    /// to a partial play ending with `(x, U)`.
    pub fn good_triple_check(&self, x: &Point, u: &Basic, v: &Basic) -> Result<bool> {
        let w = self.response_intersection(x, u)?;
        Ok(v.contains(x)? && v.included_in(u)? && v.included_in(&w)?)
    }
}

impl Strategy for TraceStrategy {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        Ok(self.along(moves)?.1)
    }

    fn describe(&self) -> String {
        format!("tracify({})", self.inner.describe())
    }
}

/// `respond1(x, U) = refine(x, W)` with `W` the response intersection.
pub fn stationarize(st: Arc<TraceStrategy>) -> Result<Stationary> {
    st.require_open_finite()?;
    let space = st.space.clone();
    let parent = st.clone();
    let name = format!("stationarize({})", st.describe());
    let mut s = Stationary::new(name, move |x, u| {
        let w = parent.response_intersection(x, u)?;
        space.refine(x, &Open::Set(w))
    });
    s.parent = Some(st);
    Ok(s)
}

/// The shadow play `⟨x_i, U_i, V'_i⟩` with `V'_i` the parent trace
/// strategy's reply; checks `V_i ⊆ V'_i ⊆ V_{i-1}`.
pub fn replay_shadow(play: &Play, s: &Stationary) -> Result<Play> {
    let parent = s
        .parent
        .as_ref()
        .ok_or_else(|| Error::Precondition("stationary strategy has no parent trace strategy".into()))?;
    let moves = play.moves();
    let mut shadow = Play::new(play.space.clone());
    for (i, r) in play.rounds.iter().enumerate() {
        let v2 = parent.respond(&moves[..=i])?;
        if !r.v.included_in(&v2)? {
            return Err(Error::Construction(format!("round {i}: V ⊄ V'")));
        }
        if i > 0 && !v2.included_in(&play.rounds[i - 1].v)? {
            return Err(Error::Construction(format!("round {i}: V' ⊄ previous V")));
        }
        shadow
            .push(r.mv(), v2)
            .map_err(|e| Error::Construction(format!("shadow play illegal: {e}")))?;
    }
    shadow.complete = play.complete;
    Ok(shadow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{stabilize, HashStrategy};

    fn chain() -> Arc<Space> {
        Arc::new(Space::finite("chain3", 3, &[1, 3, 7]).unwrap())
    }

    #[test]
    fn base_case_is_the_strategy() {
        let s = chain();
        let h: Arc<dyn Strategy> = Arc::new(HashStrategy::new(s.clone(), 3));
        let st = tracify(h.clone(), s.clone());
        for u in [1u64, 3, 7] {
            for x in crate::topology::bits(u) {
                let m = Move::new(Point::Index(x), Basic::Mask(u));
                assert_eq!(st.respond_star(&m.x, &m.u, &Trace::default()).unwrap(), h.respond(&[m]).unwrap());
            }
        }
    }

    #[test]
    fn history_free_strategy_ignores_traces() {
        let s = chain();
        let zero = Stationary::new("zero", |x, u| {
            Ok(if u.mask().unwrap() & 1 == 1 && *x == Point::Index(0) { Basic::Mask(1) } else { u.clone() })
        });
        let st = tracify(Arc::new(zero.clone()), s.clone());
        let t = Trace::default().with(&Basic::Mask(7), &Basic::Mask(7));
        let got = st.respond_star(&Point::Index(0), &Basic::Mask(3), &t).unwrap();
        assert_eq!(got, zero.respond1(&Point::Index(0), &Basic::Mask(3)).unwrap());
        let stat = stationarize(Arc::new(st)).unwrap();
        assert_eq!(stat.respond1(&Point::Index(0), &Basic::Mask(3)).unwrap(), Basic::Mask(1));
    }

    #[test]
    fn stationarize_needs_open_finite() {
        let reals = Arc::new(crate::instances::reals());
        let st = Arc::new(tracify(Arc::new(Stationary::copycat()), reals));
        assert!(matches!(stationarize(st), Err(Error::Capability(_))));
    }

    #[test]
    fn witness_replay_on_chain() {
        let s = chain();
        let h: Arc<dyn Strategy> = Arc::new(stabilize(Arc::new(HashStrategy::new(s.clone(), 11)), 8));
        let st = tracify(h.clone(), s.clone());
        let moves = vec![
            Move::new(Point::Index(1), Basic::Mask(7)),
            Move::new(Point::Index(0), Basic::Mask(1)),
        ];
        let mut rounds = Vec::new();
        for i in 0..moves.len() {
            let v = st.respond(&moves[..=i]).unwrap();
            if i + 1 < moves.len() && !moves[i + 1].u.included_in(&v).unwrap() {
                return;
            }
            rounds.push(Round { x: moves[i].x.clone(), u: moves[i].u.clone(), v });
        }
        let ys = st.witness_play(&rounds).unwrap();
        for i in 0..ys.len() {
            assert_eq!(h.respond(&ys[..=i]).unwrap(), rounds[i].v);
        }
    }
}
