//! Moves, plays, legality and the engine loop.

use std::sync::Arc;

use crate::error::{Error, Result, Side};
use crate::topology::{Basic, Point, Space};

/// Empty's move `(x, U)` with `x ∈ U`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub x: Point,
    pub u: Basic,
}

impl Move {
    pub fn new(x: Point, u: Basic) -> Move {
        Move { x, u }
    }
}

/// One round: Empty's move and Nonempty's reply.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Round {
    pub x: Point,
    pub u: Basic,
    pub v: Basic,
}

impl Round {
    pub fn mv(&self) -> Move {
        Move::new(self.x.clone(), self.u.clone())
    }
}

/// A Nonempty strategy: a pure function of Empty's moves so far, the last
/// element being the move to answer.
pub trait Strategy: Send + Sync {
    fn respond(&self, moves: &[Move]) -> Result<Basic>;

    fn describe(&self) -> String {
        "strategy".into()
    }

    /// Whether replies ignore everything but the last move.
    fn is_stationary(&self) -> bool {
        false
    }
}

impl<S: Strategy + ?Sized> Strategy for Arc<S> {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        (**self).respond(moves)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn is_stationary(&self) -> bool {
        (**self).is_stationary()
    }
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        (**self).respond(moves)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn is_stationary(&self) -> bool {
        (**self).is_stationary()
    }
}

/// An Empty strategy; may keep state across the rounds of one play.
pub trait EmptyStrategy {
    fn next_move(&mut self, space: &Space, rounds: &[Round]) -> Result<Move>;
}

/// Empty replays a fixed list of moves, then repeats `(x, V)` of the last round.
pub struct Scripted(pub Vec<Move>);

impl EmptyStrategy for Scripted {
    fn next_move(&mut self, _space: &Space, rounds: &[Round]) -> Result<Move> {
        if let Some(m) = self.0.get(rounds.len()) {
            return Ok(m.clone());
        }
        let last = rounds.last().ok_or_else(|| Error::Precondition("empty script".into()))?;
        Ok(Move::new(last.x.clone(), last.v.clone()))
    }
}

/// `x ∈ U` and, after a reply, `U ⊆ V_prev`.
pub fn legal_empty_move(last_v: Option<&Basic>, m: &Move) -> Result<bool> {
    if !m.u.contains(&m.x)? {
        return Ok(false);
    }
    match last_v {
        Some(v) => m.u.included_in(v),
        None => Ok(true),
    }
}

/// `x ∈ V ⊆ U`.
pub fn legal_reply(m: &Move, v: &Basic) -> Result<bool> {
    Ok(v.contains(&m.x)? && v.included_in(&m.u)?)
}

/// Why a move is illegal, for diagnostics.
pub fn explain_empty_move(space: &Space, last_v: Option<&Basic>, m: &Move) -> Result<Option<String>> {
    if !space.is_catalogued(&m.u) {
        return Ok(Some(format!("{} is not a catalog basic", space.fmt_basic(&m.u))));
    }
    if !m.u.contains(&m.x)? {
        return Ok(Some(format!("{} ∉ {}", space.fmt_point(&m.x), space.fmt_basic(&m.u))));
    }
    if let Some(v) = last_v {
        if !m.u.included_in(v)? {
            return Ok(Some(format!("{} ⊄ {}", space.fmt_basic(&m.u), space.fmt_basic(v))));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub struct Play {
    pub space: Arc<Space>,
    pub rounds: Vec<Round>,
    /// Whether the requested evaluation depth was reached.
    pub complete: bool,
}

impl Play {
    pub fn new(space: Arc<Space>) -> Play {
        Play { space, rounds: Vec::new(), complete: false }
    }

    pub fn last_v(&self) -> Option<&Basic> {
        self.rounds.last().map(|r| &r.v)
    }

    pub fn moves(&self) -> Vec<Move> {
        self.rounds.iter().map(Round::mv).collect()
    }

    /// Nonempty's open sequence `V_0, V_1, ...`.
    pub fn opens(&self) -> Vec<Basic> {
        self.rounds.iter().map(|r| r.v.clone()).collect()
    }

    pub fn legal_empty_move(&self, m: &Move) -> Result<bool> {
        legal_empty_move(self.last_v(), m)
    }

    pub fn legal_reply(&self, m: &Move, v: &Basic) -> Result<bool> {
        legal_reply(m, v)
    }

    /// Appends a round after checking both sides.
    pub fn push(&mut self, m: Move, v: Basic) -> Result<()> {
        let round = self.rounds.len();
        if let Some(reason) = explain_empty_move(&self.space, self.last_v(), &m)? {
            return Err(Error::IllegalMove { round, side: Side::Empty, reason });
        }
        if !legal_reply(&m, &v)? || !self.space.is_catalogued(&v) {
            let reason = if !self.space.is_catalogued(&v) {
                format!("{} is not a catalog basic", self.space.fmt_basic(&v))
            } else if !v.contains(&m.x)? {
                format!("{} ∉ {}", self.space.fmt_point(&m.x), self.space.fmt_basic(&v))
            } else {
                format!("{} ⊄ {}", self.space.fmt_basic(&v), self.space.fmt_basic(&m.u))
            };
            return Err(Error::IllegalMove { round, side: Side::Nonempty, reason });
        }
        self.rounds.push(Round { x: m.x, u: m.u, v });
        Ok(())
    }

    pub fn open_trace(&self) -> Trace {
        open_trace(&self.rounds)
    }

    /// Transcript lines `i | x | U | V`.
    pub fn transcript_lines(&self) -> Vec<String> {
        self.rounds
            .iter()
            .enumerate()
            .map(|(i, r)| {
                format!(
                    "{i} | {} | {} | {}",
                    self.space.fmt_point(&r.x),
                    self.space.fmt_basic(&r.u),
                    self.space.fmt_basic(&r.v)
                )
            })
            .collect()
    }
}

/// Runs `rounds` rounds; the first illegal move aborts with its round and side.
pub fn run_play(
    space: &Arc<Space>,
    empty: &mut dyn EmptyStrategy,
    nonempty: &dyn Strategy,
    rounds: usize,
) -> Result<Play> {
    let mut play = Play::new(space.clone());
    let mut moves = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let m = empty.next_move(space, &play.rounds)?;
        let i = play.rounds.len();
        if let Some(reason) = explain_empty_move(space, play.last_v(), &m)? {
            return Err(Error::IllegalMove { round: i, side: Side::Empty, reason });
        }
        moves.push(m.clone());
        let v = nonempty.respond(&moves)?;
        play.push(m, v)?;
    }
    play.complete = true;
    Ok(play)
}

/// The set of `(U, V)` pairs of a play, in play order with duplicates
/// removed. For a legal play this is reverse-inclusion order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace(pub Vec<(Basic, Basic)>);

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// `T ∪ {(U, V)}`.
    pub fn with(&self, u: &Basic, v: &Basic) -> Trace {
        let mut t = self.clone();
        if !t.0.iter().any(|(a, b)| a == u && b == v) {
            t.0.push((u.clone(), v.clone()));
        }
        t
    }

    pub fn contains(&self, u: &Basic, v: &Basic) -> bool {
        self.0.iter().any(|(a, b)| a == u && b == v)
    }

    pub fn last(&self) -> Option<&(Basic, Basic)> {
        self.0.last()
    }
}

pub fn open_trace(rounds: &[Round]) -> Trace {
    rounds.iter().fold(Trace::default(), |t, r| t.with(&r.u, &r.v))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Copycat;
    impl Strategy for Copycat {
        fn respond(&self, moves: &[Move]) -> Result<Basic> {
            Ok(moves.last().unwrap().u.clone())
        }
    }

    fn chain() -> Arc<Space> {
        Arc::new(Space::finite("chain3", 3, &[0b001, 0b011, 0b111]).unwrap())
    }

    #[test]
    fn legality_examples() {
        let m = |x, u| Move::new(Point::Index(x), Basic::Mask(u));
        assert!(legal_empty_move(None, &m(0, 0b111)).unwrap());
        assert!(!legal_empty_move(Some(&Basic::Mask(0b011)), &m(2, 0b111)).unwrap());
        assert!(legal_empty_move(Some(&Basic::Mask(0b011)), &m(1, 0b011)).unwrap());
        assert!(legal_reply(&m(0, 0b011), &Basic::Mask(1)).unwrap());
        assert!(!legal_reply(&m(1, 0b011), &Basic::Mask(1)).unwrap());
        assert!(!legal_reply(&m(0, 0b001), &Basic::Mask(0b011)).unwrap());
    }

    #[test]
    fn copycat_play_and_trace_collapse() {
        let s = chain();
        let mut e = Scripted(vec![Move::new(Point::Index(0), Basic::Mask(1))]);
        let p = run_play(&s, &mut e, &Copycat, 5).unwrap();
        assert!(p.rounds.iter().all(|r| r.v == Basic::Mask(1)));
        assert_eq!(p.open_trace().len(), 1);
        assert_eq!(p.transcript_lines()[0], "0 | 0 | {0} | {0}");
        assert!(open_trace(&[]).is_empty());
    }

    #[test]
    fn illegal_empty_move_is_reported_with_round() {
        let s = chain();
        let mut e = Scripted(vec![
            Move::new(Point::Index(1), Basic::Mask(0b011)),
            Move::new(Point::Index(2), Basic::Mask(0b111)),
        ]);
        match run_play(&s, &mut e, &Copycat, 3) {
            Err(Error::IllegalMove { round: 1, side: Side::Empty, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
