//! Strategy representations and the transformations between them.

mod combinators;
mod lift;
mod stable;
mod trace;

use std::fmt;
use std::sync::Arc;

pub use combinators::{
    collapse, compose_stationary, from_basis, intersect_countable, pairing, to_basis, unpairing, AsOpen, FromBasis,
    HashStrategy, Intersection, OpenMove, OpenStrategy, ToBasis,
};
pub use lift::{lift_through_open_map, Lifted};
pub use stable::{stabilize, Stabilized, DEFAULT_SCAN_BOUND};
pub use trace::{replay_shadow, stationarize, tracify, TraceStrategy};

use crate::error::Result;
use crate::game::{Move, Strategy};
use crate::topology::{Basic, Point};

type Respond1 = dyn Fn(&Point, &Basic) -> Result<Basic> + Send + Sync;

/// A strategy whose reply depends on Empty's last move only.
#[derive(Clone)]
pub struct Stationary {
    name: String,
    f: Arc<Respond1>,
    /// The trace strategy this one was stationarized from, if any.
    pub parent: Option<Arc<TraceStrategy>>,
}

impl fmt::Debug for Stationary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stationary({})", self.name)
    }
}

impl Stationary {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Point, &Basic) -> Result<Basic> + Send + Sync + 'static,
    ) -> Stationary {
        Stationary { name: name.into(), f: Arc::new(f), parent: None }
    }

    /// Replies `U` to every move.
    pub fn copycat() -> Stationary {
        Stationary::new("copycat", |_, u| Ok(u.clone()))
    }

    pub fn respond1(&self, x: &Point, u: &Basic) -> Result<Basic> {
        (self.f)(x, u)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl Strategy for Stationary {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        let m = moves.last().expect("respond needs at least one move");
        self.respond1(&m.x, &m.u)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }

    fn is_stationary(&self) -> bool {
        true
    }
}
