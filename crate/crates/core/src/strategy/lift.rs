//! Transporting Nonempty strategies along open maps `f: Z → X`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::game::{Move, Round, Strategy};
use crate::topology::{Basic, Open, OpenMap};

/// A strategy on `X` shadowing one on `Z`.
///
/// Round `k`: pick `ẑ_k ∈ f⁻¹(U_k) ∩ V̂_{k-1}` over `x_k`, play
/// `Û_k = refine(ẑ_k, f⁻¹(U_k) ∩ V̂_{k-1})` on `Z`, and answer
/// `V_k = refine(x_k, f(V̂_k))`.
pub struct Lifted {
    inner: Arc<dyn Strategy>,
    map: Arc<dyn OpenMap>,
    memo: Mutex<HashMap<Vec<Move>, (Vec<Round>, Basic)>>,
}

pub fn lift_through_open_map(inner: Arc<dyn Strategy>, map: Arc<dyn OpenMap>) -> Lifted {
    Lifted { inner, map, memo: Mutex::new(HashMap::new()) }
}

impl Lifted {
    pub fn map(&self) -> &Arc<dyn OpenMap> {
        &self.map
    }

    /// The shadow rounds on `Z` and the reply on `X`.
    fn run(&self, moves: &[Move]) -> Result<(Vec<Round>, Basic)> {
        if let Some(hit) = self.memo.lock().expect("memo poisoned").get(moves) {
            return Ok(hit.clone());
        }
        let (m, earlier) = moves.split_last().expect("nonempty history");
        let mut shadow = if earlier.is_empty() { Vec::new() } else { self.run(earlier)?.0 };
        let pre = self.map.preimage_basic(&m.u)?;
        let w = match shadow.last() {
            None => pre,
            Some(r) => pre.intersect_basic(&r.v)?.ok_or_else(|| {
                Error::MapInvariant("preimage of the move misses the previous shadow reply".into())
            })?,
        };
        let z = self.map.choose_preimage(&m.x, &w)?;
        let zsp = self.map.source();
        let u_hat = zsp.refine(&z, &w)?;
        let mut hist: Vec<Move> = shadow.iter().map(Round::mv).collect();
        hist.push(Move::new(z.clone(), u_hat.clone()));
        let v_hat = self.inner.respond(&hist)?;
        let img = self.map.image_basic(&v_hat)?;
        let v = self.map.target().refine(&m.x, &img)?;
        shadow.push(Round { x: z, u: u_hat, v: v_hat });
        let out = (shadow, v);
        self.memo.lock().expect("memo poisoned").insert(moves.to_vec(), out.clone());
        Ok(out)
    }

    /// `⟨ẑ_k, Û_k, V̂_k⟩` for the given history.
    pub fn source_rounds(&self, moves: &[Move]) -> Result<Vec<Round>> {
        Ok(self.run(moves)?.0)
    }

    /// `f(V̂_k)` for the last move.
    pub fn image_of_reply(&self, moves: &[Move]) -> Result<Open> {
        let rounds = self.source_rounds(moves)?;
        self.map.image_basic(&rounds.last().expect("nonempty").v)
    }
}

impl Strategy for Lifted {
    fn respond(&self, moves: &[Move]) -> Result<Basic> {
        Ok(self.run(moves)?.1)
    }

    fn describe(&self) -> String {
        format!("lift({})", self.inner.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::Stationary;
    use crate::topology::{FiniteMap, Point, Space};

    #[test]
    fn copycat_lifts_along_quotient() {
        let chain = Arc::new(Space::finite("chain3", 3, &[1, 3, 7]).unwrap());
        let z = Arc::new(Space::finite("z4", 4, &[0b0001, 0b0011, 0b0111, 0b1011, 0b1111]).unwrap());
        let f: Arc<dyn OpenMap> = Arc::new(FiniteMap::new(z, chain, vec![0, 1, 2, 2]).unwrap());
        let l = lift_through_open_map(Arc::new(Stationary::copycat()), f);
        let moves = vec![Move::new(Point::Index(2), Basic::Mask(7)), Move::new(Point::Index(1), Basic::Mask(3))];
        assert_eq!(l.respond(&moves[..1]).unwrap(), Basic::Mask(7));
        assert_eq!(l.respond(&moves).unwrap(), Basic::Mask(3));
        let rounds = l.source_rounds(&moves).unwrap();
        assert!(rounds[1].v.included_in(&rounds[0].v).unwrap());
    }
}
