//! Making a strategy stable under repeated Empty moves.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::combinators::collapse;
use crate::error::Result;
use crate::game::{Move, Strategy};
use crate::topology::Basic;

pub const DEFAULT_SCAN_BOUND: usize = 64;

/// Two passes over `S`. The scan-ahead pass answers a move that `S` would
/// answer with `U` itself by repeating the move until `S` answers
/// differently (at most `scan_bound` times), and remembers those pretend
/// repetitions for every later query. The collapse pass then feeds it
/// histories with consecutive duplicates removed.
pub struct Stabilized {
    inner: Arc<dyn Strategy>,
    scan_bound: usize,
    memo: Mutex<HashMap<Vec<Move>, (Vec<Move>, Basic)>>,
}

pub fn stabilize(inner: Arc<dyn Strategy>, scan_bound: usize) -> Stabilized {
    Stabilized { inner, scan_bound: scan_bound.max(1), memo: Mutex::new(HashMap::new()) }
}

impl Stabilized {
    pub fn scan_bound(&self) -> usize {
        self.scan_bound
    }

    /// The scan-ahead pass: the history actually fed to `S` and the reply.
    fn scan_ahead(&self, moves: &[Move]) -> Result<(Vec<Move>, Basic)> {
        if let Some(hit) = self.memo.lock().expect("memo poisoned").get(moves) {
            return Ok(hit.clone());
        }
        let (m, earlier) = moves.split_last().expect("nonempty history");
        let mut h = if earlier.is_empty() { Vec::new() } else { self.scan_ahead(earlier)?.0 };
        h.push(m.clone());
        let mut reply = self.inner.respond(&h)?;
        // a stationary strategy repeats itself, so the scan cannot change anything
        if reply == m.u && !self.inner.is_stationary() {
            let base = h.len();
            for _ in 0..self.scan_bound {
                h.push(m.clone());
                let r = self.inner.respond(&h)?;
                if r != m.u {
                    reply = r;
                    break;
                }
            }
            if reply == m.u {
                h.truncate(base);
            }
        }
        let out = (h, reply);
        self.memo.lock().expect("memo poisoned").insert(moves.to_vec(), out.clone());
        Ok(out)
    }
}

impl Strategy for Stabilized {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        Ok(self.scan_ahead(&collapse(moves))?.1)
    }

    fn describe(&self) -> String {
        format!("stabilize({}, {})", self.inner.describe(), self.scan_bound)
    }

    fn is_stationary(&self) -> bool {
        self.inner.is_stationary()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::Point;

    /// Replies `U` the first time a move is seen and `{0}` after one repeat.
    struct Hesitant;
    impl Strategy for Hesitant {
        fn respond(&self, moves: &[Move]) -> Result<Basic> {
            let m = moves.last().unwrap();
            let repeated = moves.len() >= 2 && moves[moves.len() - 2] == *m;
            let zero_in = m.u.mask().unwrap() & 1 == 1 && m.x == Point::Index(0);
            Ok(if repeated && zero_in { Basic::Mask(1) } else { m.u.clone() })
        }
    }

    #[test]
    fn scan_finds_the_later_subset_immediately() {
        let s = stabilize(Arc::new(Hesitant), 4);
        let m = Move::new(Point::Index(0), Basic::Mask(0b111));
        assert_eq!(s.respond(&[m.clone()]).unwrap(), Basic::Mask(1));
        // a repeat of the move does not change the next answer
        let n = Move::new(Point::Index(0), Basic::Mask(1));
        assert_eq!(
            s.respond(&[m.clone(), n.clone()]).unwrap(),
            s.respond(&[m.clone(), m.clone(), n.clone()]).unwrap()
        );
    }

    #[test]
    fn copycat_is_unchanged() {
        let s = stabilize(Arc::new(super::super::Stationary::copycat()), 64);
        let m = Move::new(Point::Index(2), Basic::Mask(0b111));
        assert_eq!(s.respond(&[m]).unwrap(), Basic::Mask(0b111));
    }
}
