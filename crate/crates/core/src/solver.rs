//! Exhaustive solver for generalized Choquet games on finite spaces.
//!
//! With a limit payoff only the current open matters, so the game is played
//! on a finite graph: Empty moves from an open `V` (Nonempty's last reply,
//! or the whole space) to a move `(x, U)` with `x ∈ U ⊆ V`, and Nonempty
//! answers with `V'`, `x ∈ V' ⊆ U`. Open sequences descend, so Nonempty
//! wins exactly when the play eventually stays in positions whose open
//! satisfies the predicate: a co-Büchi objective,
//! `Win = μY. νZ. (G ∩ CPre(Z)) ∪ CPre(Y)`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, Side};
use crate::game::{down_sets, EmptyStrategy, LimitPredicate, Move, Round, Strategy};
use crate::strategy::{stabilize, stationarize, tracify, Stationary, DEFAULT_SCAN_BOUND};
use crate::topology::{bits, full_mask, Basic, Point, Space};

/// Topologies on `{0, ..., n-1}`, each presented by its full open lattice.
pub fn enumerate_topologies(n: usize) -> Result<Vec<Space>> {
    if n == 0 || n > 4 {
        return Err(Error::Size(format!("topology enumeration supports 1..=4 points, got {n}")));
    }
    let full = full_mask(n);
    let proper: Vec<u64> = (1..full).collect();
    let mut out = Vec::new();
    for sel in 0u64..1 << proper.len() {
        let mut fam: Vec<u64> = bits(sel).map(|i| proper[i]).collect();
        fam.push(full);
        let closed = fam.iter().all(|&a| {
            fam.iter().all(|&b| fam.contains(&(a | b)) && (a & b == 0 || fam.contains(&(a & b))))
        });
        if closed {
            fam.sort_by_key(|m| (m.count_ones(), *m));
            let name = format!("top{n}-{}", out.len());
            out.push(Space::finite(name, n, &fam)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    /// Empty to move from this open.
    N(u64),
    /// Nonempty to answer `(x, U)`.
    E(usize, u64),
}

struct Graph {
    nodes: Vec<Node>,
    succ: Vec<Vec<usize>>,
    good: Vec<bool>,
    root: usize,
}

impl Graph {
    fn new(space: &Space, q: &LimitPredicate) -> Result<Graph> {
        let n = space.size().ok_or_else(|| Error::Capability("the solver needs a finite space".into()))?;
        let mut basics = space.masks();
        basics.sort_by_key(|m| (m.count_ones(), *m));
        basics.dedup();
        let top = full_mask(n);
        let mut nodes: Vec<Node> = basics.iter().map(|&v| Node::N(v)).collect();
        if !basics.contains(&top) {
            nodes.push(Node::N(top));
        }
        for &u in &basics {
            for x in bits(u) {
                nodes.push(Node::E(x, u));
            }
        }
        let index = |nd: &Node| nodes.iter().position(|m| m == nd).expect("node listed");
        let mut succ = Vec::with_capacity(nodes.len());
        let mut good = Vec::with_capacity(nodes.len());
        for nd in &nodes {
            match *nd {
                Node::N(v) => {
                    succ.push(
                        basics
                            .iter()
                            .filter(|&&u| u & !v == 0)
                            .flat_map(|&u| bits(u).map(move |x| Node::E(x, u)))
                            .map(|m| index(&m))
                            .collect(),
                    );
                    good.push(q.holds(v));
                }
                Node::E(x, u) => {
                    succ.push(
                        basics
                            .iter()
                            .filter(|&&v| v & !u == 0 && v >> x & 1 == 1)
                            .map(|&v| index(&Node::N(v)))
                            .collect(),
                    );
                    good.push(q.holds(u));
                }
            }
        }
        let root = index(&Node::N(top));
        Ok(Graph { nodes, succ, good, root })
    }

    /// Controllable predecessor for `side`: the mover must be able to
    /// reach `s` (own nodes) or cannot avoid it (opponent nodes).
    fn cpre(&self, s: &[bool], side: Side) -> Vec<bool> {
        (0..self.nodes.len())
            .map(|i| {
                let own = matches!((self.nodes[i], side), (Node::E(..), Side::Nonempty) | (Node::N(_), Side::Empty));
                if own {
                    self.succ[i].iter().any(|&j| s[j])
                } else {
                    self.succ[i].iter().all(|&j| s[j])
                }
            })
            .collect()
    }

    /// Nonempty's region with the rank of each node (`usize::MAX` outside).
    fn co_buchi(&self) -> (Vec<bool>, Vec<usize>) {
        let n = self.nodes.len();
        let mut y = vec![false; n];
        let mut rank = vec![usize::MAX; n];
        let mut layer = 0;
        loop {
            let cy = self.cpre(&y, Side::Nonempty);
            let mut z = vec![true; n];
            loop {
                let cz = self.cpre(&z, Side::Nonempty);
                let next: Vec<bool> = (0..n).map(|i| (self.good[i] && cz[i]) || cy[i]).collect();
                if next == z {
                    break;
                }
                z = next;
            }
            if z == y {
                return (y, rank);
            }
            layer += 1;
            for i in 0..n {
                if z[i] && !y[i] {
                    rank[i] = layer;
                }
            }
            y = z;
        }
    }

    /// Empty's region (`νY. μZ. (¬G ∩ CPre(Y)) ∪ CPre(Z)`) with attractor
    /// layers towards the bad nodes that stay in the region.
    fn buchi_bad(&self) -> (Vec<bool>, Vec<usize>) {
        let n = self.nodes.len();
        let mut y = vec![true; n];
        loop {
            let cy = self.cpre(&y, Side::Empty);
            let target: Vec<bool> = (0..n).map(|i| !self.good[i] && cy[i]).collect();
            let (z, _) = self.attractor(&target);
            if z == y {
                let (_, layers) = self.attractor(&target);
                return (y, layers);
            }
            y = z;
        }
    }

    fn attractor(&self, target: &[bool]) -> (Vec<bool>, Vec<usize>) {
        let n = self.nodes.len();
        let mut z = target.to_vec();
        let mut layer: Vec<usize> = (0..n).map(|i| if target[i] { 0 } else { usize::MAX }).collect();
        let mut k = 0;
        loop {
            k += 1;
            let c = self.cpre(&z, Side::Empty);
            let mut changed = false;
            for i in 0..n {
                if c[i] && !z[i] {
                    z[i] = true;
                    layer[i] = k;
                    changed = true;
                }
            }
            if !changed {
                return (z, layer);
            }
        }
    }
}

/// Nonempty's positional witness `(x, U) ↦ V`; moves off the table are
/// answered with `U`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StationaryTable(pub BTreeMap<(usize, u64), u64>);

impl StationaryTable {
    pub fn reply(&self, x: usize, u: u64) -> u64 {
        self.0.get(&(x, u)).copied().unwrap_or(u)
    }

    pub fn to_strategy(&self, name: &str) -> Stationary {
        let t = self.clone();
        Stationary::new(name, move |x, u| match (x, u) {
            (Point::Index(i), Basic::Mask(m)) => Ok(Basic::Mask(t.reply(*i, *m))),
            _ => Err(Error::PresentationMismatch(format!("finite witness asked about {x} in {u}"))),
        })
    }
}

/// Empty's positional witness `V ↦ (x, U)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyPositional(pub BTreeMap<u64, (usize, u64)>);

impl EmptyPositional {
    pub fn at(&self, v: u64) -> (usize, u64) {
        self.0.get(&v).copied().unwrap_or_else(|| (bits(v).next().unwrap_or(0), v))
    }
}

impl EmptyStrategy for EmptyPositional {
    fn next_move(&mut self, space: &Space, rounds: &[Round]) -> Result<Move> {
        let v = match rounds.last() {
            Some(r) => r.v.mask(),
            None => space.top().mask(),
        }
        .ok_or_else(|| Error::PresentationMismatch("positional Empty witness needs masks".into()))?;
        let (x, u) = self.at(v);
        Ok(Move::new(Point::Index(x), Basic::Mask(u)))
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub winner: Side,
    /// Winner of the game started at each Empty-to-move open.
    pub per_open: Vec<(u64, Side)>,
    pub nonempty: Option<StationaryTable>,
    pub empty: Option<EmptyPositional>,
    /// `verify_winning` accepted the witness.
    pub certified: bool,
    /// Exactly one side won at every open.
    pub determined: bool,
}

impl SolveResult {
    pub fn render(&self, space: &Space, q: &LimitPredicate) -> String {
        let mut s = format!("predicate: {}\nwinner: {}\n", q.describe(space), self.winner);
        if let Some(t) = &self.nonempty {
            s.push_str("witness (Nonempty, stationary):\n");
            for (&(x, u), &v) in &t.0 {
                s.push_str(&format!(
                    "  ({}, {}) -> {}\n",
                    space.fmt_point(&Point::Index(x)),
                    space.fmt_basic(&Basic::Mask(u)),
                    space.fmt_basic(&Basic::Mask(v))
                ));
            }
        }
        if let Some(e) = &self.empty {
            s.push_str("witness (Empty, positional):\n");
            for (&v, &(x, u)) in &e.0 {
                s.push_str(&format!(
                    "  {} -> ({}, {})\n",
                    space.fmt_basic(&Basic::Mask(v)),
                    space.fmt_point(&Point::Index(x)),
                    space.fmt_basic(&Basic::Mask(u))
                ));
            }
        }
        s.push_str(if self.certified { "certified: yes\n" } else { "certified: NO\n" });
        s
    }
}

/// Decides the game and certifies the winner's witness.
pub fn solve(space: &Space, q: &LimitPredicate) -> Result<SolveResult> {
    let g = Graph::new(space, q)?;
    let (win, rank) = g.co_buchi();
    let (lose, layers) = g.buchi_bad();
    let determined = (0..g.nodes.len()).all(|i| win[i] != lose[i]);
    let per_open = g
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, nd)| match nd {
            Node::N(v) => Some((*v, if win[i] { Side::Nonempty } else { Side::Empty })),
            _ => None,
        })
        .collect();
    let mut table = BTreeMap::new();
    for (i, nd) in g.nodes.iter().enumerate() {
        if let (Node::E(x, u), true) = (nd, win[i]) {
            let best = g.succ[i].iter().copied().min_by_key(|&j| rank[j]).expect("answers exist");
            let Node::N(v) = g.nodes[best] else { unreachable!("E nodes lead to N nodes") };
            table.insert((*x, *u), v);
        }
    }
    let mut empty = BTreeMap::new();
    for (i, nd) in g.nodes.iter().enumerate() {
        if let (Node::N(v), true) = (nd, lose[i]) {
            let pick = if !g.good[i] && g.succ[i].iter().any(|&j| lose[j]) && layers[i] == 0 {
                g.succ[i].iter().copied().find(|&j| lose[j])
            } else {
                g.succ[i].iter().copied().filter(|&j| layers[j] < layers[i]).min_by_key(|&j| layers[j])
            };
            if let Some(Node::E(x, u)) = pick.map(|j| g.nodes[j]) {
                empty.insert(*v, (x, u));
            }
        }
    }
    let winner = if win[g.root] { Side::Nonempty } else { Side::Empty };
    let table = StationaryTable(table);
    let empty = EmptyPositional(empty);
    let certified = match winner {
        Side::Nonempty => verify_winning(space, q, Witness::Nonempty(&table.to_strategy("witness")))?,
        Side::Empty => verify_winning(space, q, Witness::Empty(&empty))?,
    };
    let (nonempty, empty) = match winner {
        Side::Nonempty => (Some(table), None),
        Side::Empty => (None, Some(empty)),
    };
    Ok(SolveResult { winner, per_open, nonempty, empty, certified, determined })
}

pub enum Witness<'a> {
    Nonempty(&'a dyn Strategy),
    Empty(&'a EmptyPositional),
}

/// Longest strictly descending chain of nonempty opens.
pub fn chain_length(space: &Space) -> usize {
    let opens = space.opens();
    let mut best = vec![1usize; opens.len()];
    for i in 0..opens.len() {
        for j in 0..i {
            if opens[j] & !opens[i] == 0 && opens[j] != opens[i] {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

fn empty_moves(basics: &[u64], v: u64) -> Vec<(usize, u64)> {
    basics
        .iter()
        .filter(|&&u| u & !v == 0)
        .flat_map(|&u| bits(u).map(move |x| (x, u)))
        .collect()
}

fn reply_mask(s: &dyn Strategy, hist: &[Move]) -> Result<u64> {
    let r = s.respond(hist)?;
    r.mask().ok_or_else(|| Error::PresentationMismatch(format!("finite strategy replied {r}")))
}

/// Exhaustive certification of a witness from the start of the game.
///
/// Stationary Nonempty strategies and positional Empty witnesses are
/// decided exactly: the play can stabilize at `W` only by Empty playing
/// `(x, W)` and the reply staying `W`. History-dependent strategies are
/// searched to depth `chain_length + 1` with a two-repeat stay probe at
/// every position.
pub fn verify_winning(space: &Space, q: &LimitPredicate, w: Witness<'_>) -> Result<bool> {
    let top = space.top().mask().ok_or_else(|| Error::Capability("verify_winning needs a finite space".into()))?;
    verify_from(space, q, w, top)
}

/// As [`verify_winning`], for the game started with Empty to move in `start`.
pub fn verify_from(space: &Space, q: &LimitPredicate, w: Witness<'_>, start: u64) -> Result<bool> {
    let mut basics = space.masks();
    basics.dedup();
    let legal = |x: usize, u: u64, v: u64| basics.contains(&v) && v >> x & 1 == 1 && v & !u == 0;
    match w {
        Witness::Nonempty(s) if s.is_stationary() => {
            let mut seen = HashSet::from([start]);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for (x, u) in empty_moves(&basics, v) {
                    let r = reply_mask(s, &[Move::new(Point::Index(x), Basic::Mask(u))])?;
                    if !legal(x, u, r) {
                        return Ok(false);
                    }
                    if u == v && r == v && !q.holds(v) {
                        return Ok(false);
                    }
                    if seen.insert(r) {
                        stack.push(r);
                    }
                }
            }
            Ok(true)
        }
        Witness::Nonempty(s) => {
            let depth = chain_length(space) + 1;
            let mut hist = Vec::new();
            history_search(&basics, q, s, &mut hist, start, depth)
        }
        Witness::Empty(e) => {
            let mut seen = HashSet::from([start]);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                let (x, u) = e.at(v);
                if !basics.contains(&u) || u >> x & 1 == 0 || u & !v != 0 {
                    return Ok(false);
                }
                if u == v && q.holds(v) {
                    return Ok(false);
                }
                for &r in basics.iter().filter(|&&r| legal(x, u, r)) {
                    if seen.insert(r) {
                        stack.push(r);
                    }
                }
            }
            Ok(true)
        }
    }
}

fn history_search(
    basics: &[u64],
    q: &LimitPredicate,
    s: &dyn Strategy,
    hist: &mut Vec<Move>,
    v: u64,
    budget: usize,
) -> Result<bool> {
    for (x, u) in empty_moves(basics, v) {
        let m = Move::new(Point::Index(x), Basic::Mask(u));
        hist.push(m.clone());
        let r = reply_mask(s, hist)?;
        if !(basics.contains(&r) && r >> x & 1 == 1 && r & !u == 0) {
            hist.pop();
            return Ok(false);
        }
        if r == u && !q.holds(r) {
            hist.push(m);
            let again = reply_mask(s, hist)?;
            hist.pop();
            if again == r {
                hist.pop();
                return Ok(false);
            }
        }
        let ok = budget == 0 || history_search(basics, q, s, hist, r, budget - 1)?;
        hist.pop();
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One-ply refutation: after each of the loser's root moves, the winner's
/// witness still wins.
pub fn loser_has_no_root_reply(space: &Space, q: &LimitPredicate, res: &SolveResult) -> Result<bool> {
    let top = space.top().mask().ok_or_else(|| Error::Capability("needs a finite space".into()))?;
    let mut basics = space.masks();
    basics.dedup();
    match res.winner {
        Side::Nonempty => {
            let t = res.nonempty.as_ref().expect("Nonempty witness");
            let s = t.to_strategy("witness");
            for (x, u) in empty_moves(&basics, top) {
                let v = t.reply(x, u);
                if !verify_from(space, q, Witness::Nonempty(&s), v)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Side::Empty => {
            let e = res.empty.as_ref().expect("Empty witness");
            let (x, u) = e.at(top);
            for &v in basics.iter().filter(|&&v| v >> x & 1 == 1 && v & !u == 0) {
                if !verify_from(space, q, Witness::Empty(e), v)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// `stationarize(tracify(stabilize(S)))`.
pub fn stationary_pipeline(space: &Arc<Space>, s: Arc<dyn Strategy>) -> Result<Stationary> {
    let stable: Arc<dyn Strategy> = Arc::new(stabilize(s, DEFAULT_SCAN_BOUND));
    stationarize(Arc::new(tracify(stable, space.clone())))
}

/// `count` seeded predicates, each a random subset of the opens.
pub fn random_predicates(space: &Space, seed: u64, count: usize) -> Vec<LimitPredicate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opens = space.opens();
    (0..count)
        .map(|_| LimitPredicate::Set(opens.iter().copied().filter(|_| rng.gen_bool(0.5)).collect::<BTreeSet<_>>()))
        .collect()
}

/// Down-sets, singletons and 64 seeded random predicates.
pub fn sweep_predicates(space: &Space, seed: u64) -> Vec<LimitPredicate> {
    let mut out = down_sets(space);
    out.extend(space.opens().into_iter().map(LimitPredicate::Eq));
    out.extend(random_predicates(space, seed, 64));
    out
}

/// `count` of the 355 four-point topologies, chosen by seed.
pub fn sample_topologies(n: usize, count: usize, seed: u64) -> Result<Vec<Space>> {
    let mut all = enumerate_topologies(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count && !all.is_empty() {
        let i = rng.gen_range(0..all.len());
        out.push(all.swap_remove(i));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct SweepStats {
    pub instances: usize,
    pub nonempty_wins: usize,
    pub certified: usize,
    pub determined: usize,
    pub root_refuted: usize,
    /// Nonempty witnesses sent through the stationary pipeline.
    pub pipeline_runs: usize,
    pub pipeline_certified: usize,
}

impl fmt::Display for SweepStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instances {} | nonempty wins {} | certified {} | determined {} | one-ply refuted {}",
            self.instances, self.nonempty_wins, self.certified, self.determined, self.root_refuted
        )?;
        if self.pipeline_runs > 0 {
            write!(f, " | stationary pipeline certified {}/{}", self.pipeline_certified, self.pipeline_runs)?;
        }
        Ok(())
    }
}

impl SweepStats {
    pub fn all_passed(&self) -> bool {
        self.certified == self.instances
            && self.determined == self.instances
            && self.root_refuted == self.instances
            && self.pipeline_certified == self.pipeline_runs
    }

    pub fn add(&mut self, o: &SweepStats) {
        self.instances += o.instances;
        self.nonempty_wins += o.nonempty_wins;
        self.certified += o.certified;
        self.determined += o.determined;
        self.root_refuted += o.root_refuted;
        self.pipeline_runs += o.pipeline_runs;
        self.pipeline_certified += o.pipeline_certified;
    }
}

/// Solves every predicate on one space, checks determinacy and the
/// one-ply refutation, and runs the stationary pipeline on every Nonempty
/// witness (memoized per witness table). Returns the stationarized
/// strategies alongside the counts.
pub fn sweep_space(
    space: &Arc<Space>,
    preds: &[LimitPredicate],
    with_pipeline: bool,
) -> Result<(SweepStats, Vec<(LimitPredicate, Stationary)>)> {
    let mut st = SweepStats::default();
    let mut cache: BTreeMap<StationaryTable, Stationary> = BTreeMap::new();
    let mut out = Vec::new();
    for q in preds {
        let r = solve(space, q)?;
        st.instances += 1;
        st.certified += r.certified as usize;
        st.determined += r.determined as usize;
        st.root_refuted += loser_has_no_root_reply(space, q, &r)? as usize;
        if let (Some(t), true) = (&r.nonempty, with_pipeline) {
            st.nonempty_wins += 1;
            st.pipeline_runs += 1;
            let s = match cache.get(t) {
                Some(s) => s.clone(),
                None => {
                    let s = stationary_pipeline(space, Arc::new(t.to_strategy("witness")))?;
                    cache.insert(t.clone(), s.clone());
                    s
                }
            };
            if verify_winning(space, q, Witness::Nonempty(&s))? {
                st.pipeline_certified += 1;
            }
            out.push((q.clone(), s));
        } else if r.nonempty.is_some() {
            st.nonempty_wins += 1;
        }
    }
    Ok((st, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::chain;

    #[test]
    fn chain_examples() {
        let s = chain(3).unwrap();
        // Empty can pin the play at any open: (1, {0,1}) forces the reply {0,1}.
        let r = solve(&s, &LimitPredicate::Eq(0b001)).unwrap();
        assert_eq!(r.winner, Side::Empty);
        assert!(r.certified && r.determined);
        let r = solve(&s, &LimitPredicate::Eq(0b011)).unwrap();
        assert_eq!(r.winner, Side::Empty);
        assert!(r.certified);
        let (x, u) = r.empty.unwrap().at(0b111);
        assert_ne!(u, 0b011);
        assert!(u >> x & 1 == 1);
        let r = solve(&s, &LimitPredicate::Contains(0)).unwrap();
        assert_eq!(r.winner, Side::Nonempty);
        assert!(r.certified);
    }

    #[test]
    fn discrete_singleton_limit() {
        let s = crate::instances::discrete(2).unwrap();
        let r = solve(&s, &LimitPredicate::SubsetOf(0b01)).unwrap();
        assert_eq!(r.winner, Side::Empty);
        let r = solve(&s, &LimitPredicate::Set([0b01, 0b10].into_iter().collect())).unwrap();
        assert_eq!(r.winner, Side::Nonempty);
        assert_eq!(r.nonempty.unwrap().reply(0, 0b11), 0b01);
    }

    #[test]
    fn classic_game_is_won_by_nonempty() {
        for s in enumerate_topologies(3).unwrap() {
            assert_eq!(solve(&s, &LimitPredicate::Any).unwrap().winner, Side::Nonempty);
        }
    }

    #[test]
    fn copycat_examples() {
        let s = chain(3).unwrap();
        let c = Stationary::copycat();
        assert!(verify_winning(&s, &LimitPredicate::Any, Witness::Nonempty(&c)).unwrap());
        assert!(!verify_winning(&s, &LimitPredicate::Eq(1), Witness::Nonempty(&c)).unwrap());
    }

    #[test]
    fn size_limit() {
        assert!(matches!(enumerate_topologies(5), Err(Error::Size(_))));
        assert_eq!(enumerate_topologies(1).unwrap().len(), 1);
        assert_eq!(enumerate_topologies(2).unwrap().len(), 4);
    }

    #[test]
    fn infinite_space_is_a_capability_error() {
        let r = solve(&crate::instances::reals(), &LimitPredicate::Any);
        assert!(matches!(r, Err(Error::Capability(_))));
    }
}
