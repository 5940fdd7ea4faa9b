//! Effective open maps.

use std::sync::Arc;

use super::basic::{Basic, Interval, Open, Point};
use super::space::{bits, Space};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// An open continuous surjection with computable images and preimages.
pub trait OpenMap: Send + Sync {
    fn source(&self) -> &Arc<Space>;
    fn target(&self) -> &Arc<Space>;
    fn apply(&self, z: &Point) -> Result<Point>;
    fn image_basic(&self, b: &Basic) -> Result<Open>;
    fn preimage_basic(&self, b: &Basic) -> Result<Open>;
    /// A preimage of `x` inside `w`; map-invariant error when none is found.
    fn choose_preimage(&self, x: &Point, w: &Open) -> Result<Point>;
}

/// Identity on one space.
pub struct Identity(pub Arc<Space>);

impl OpenMap for Identity {
    fn source(&self) -> &Arc<Space> {
        &self.0
    }
    fn target(&self) -> &Arc<Space> {
        &self.0
    }
    fn apply(&self, z: &Point) -> Result<Point> {
        Ok(z.clone())
    }
    fn image_basic(&self, b: &Basic) -> Result<Open> {
        Ok(Open::Set(b.clone()))
    }
    fn preimage_basic(&self, b: &Basic) -> Result<Open> {
        Ok(Open::Set(b.clone()))
    }
    fn choose_preimage(&self, x: &Point, w: &Open) -> Result<Point> {
        if w.contains(x)? {
            Ok(x.clone())
        } else {
            Err(Error::MapInvariant(format!("{x} has no preimage in the given open")))
        }
    }
}

/// A map between finite spaces given by a point table. Openness and
/// continuity are checked at construction.
pub struct FiniteMap {
    source: Arc<Space>,
    target: Arc<Space>,
    table: Vec<usize>,
}

impl FiniteMap {
    pub fn new(source: Arc<Space>, target: Arc<Space>, table: Vec<usize>) -> Result<FiniteMap> {
        let (n, m) = match (source.size(), target.size()) {
            (Some(n), Some(m)) => (n, m),
            _ => return Err(Error::Capability("finite maps need finite spaces".into())),
        };
        if table.len() != n || table.iter().any(|&y| y >= m) {
            return Err(Error::MapInvariant("point table does not fit the spaces".into()));
        }
        let map = FiniteMap { source, target, table };
        let onto = map.image_mask(u64::MAX >> (64 - n));
        if onto.count_ones() as usize != m {
            return Err(Error::MapInvariant("map is not surjective".into()));
        }
        let src_opens = map.source.opens();
        let tgt_opens = map.target.opens();
        for &b in &map.target.masks() {
            let pre = map.preimage_mask(b);
            if pre != 0 && !src_opens.contains(&pre) {
                return Err(Error::MapInvariant(format!("preimage of {} is not open", map.target.fmt_basic(&Basic::Mask(b)))));
            }
        }
        for &b in &map.source.masks() {
            let img = map.image_mask(b);
            if !tgt_opens.contains(&img) {
                return Err(Error::MapInvariant(format!("image of {} is not open", map.source.fmt_basic(&Basic::Mask(b)))));
            }
        }
        Ok(map)
    }

    fn image_mask(&self, m: u64) -> u64 {
        bits(m).filter(|&i| i < self.table.len()).fold(0, |a, i| a | 1 << self.table[i])
    }

    fn preimage_mask(&self, m: u64) -> u64 {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &y)| m >> y & 1 == 1)
            .fold(0, |a, (i, _)| a | 1 << i)
    }

    /// The open image as a union of target basics.
    fn as_target_open(&self, m: u64) -> Open {
        let parts: Vec<Basic> = self
            .target
            .masks()
            .into_iter()
            .filter(|b| b & !m == 0)
            .map(Basic::Mask)
            .collect();
        Open::Union(parts)
    }
}

impl OpenMap for FiniteMap {
    fn source(&self) -> &Arc<Space> {
        &self.source
    }
    fn target(&self) -> &Arc<Space> {
        &self.target
    }
    fn apply(&self, z: &Point) -> Result<Point> {
        self.source.check_point(z)?;
        match z {
            Point::Index(i) => Ok(Point::Index(self.table[*i])),
            _ => unreachable!("checked above"),
        }
    }
    fn image_basic(&self, b: &Basic) -> Result<Open> {
        let m = b.mask().ok_or(Error::UnsupportedComparison(b.family(), "mask"))?;
        Ok(self.as_target_open(self.image_mask(m)))
    }
    fn preimage_basic(&self, b: &Basic) -> Result<Open> {
        let m = b.mask().ok_or(Error::UnsupportedComparison(b.family(), "mask"))?;
        Ok(Open::Set(Basic::Mask(self.preimage_mask(m))))
    }
    fn choose_preimage(&self, x: &Point, w: &Open) -> Result<Point> {
        self.target.check_point(x)?;
        let Point::Index(y) = x else { unreachable!("checked above") };
        for (i, &t) in self.table.iter().enumerate() {
            if t == *y && w.contains(&Point::Index(i))? {
                return Ok(Point::Index(i));
            }
        }
        Err(Error::MapInvariant(format!("{} has no preimage in the given open", self.target.fmt_point(x))))
    }
}

/// First-coordinate projection of the plane onto the reals.
pub struct Projection {
    source: Arc<Space>,
    target: Arc<Space>,
}

impl Projection {
    pub fn new(source: Arc<Space>, target: Arc<Space>) -> Projection {
        Projection { source, target }
    }
}

impl OpenMap for Projection {
    fn source(&self) -> &Arc<Space> {
        &self.source
    }
    fn target(&self) -> &Arc<Space> {
        &self.target
    }
    fn apply(&self, z: &Point) -> Result<Point> {
        match z {
            Point::Pair(x, _) => Ok(Point::Rat(x.clone())),
            _ => Err(Error::PresentationMismatch(format!("projection expects a pair, got {z}"))),
        }
    }
    fn image_basic(&self, b: &Basic) -> Result<Open> {
        match b {
            Basic::Box(a, _) => Ok(Open::Set(Basic::Interval(a.clone()))),
            _ => Err(Error::UnsupportedComparison(b.family(), "box")),
        }
    }
    fn preimage_basic(&self, b: &Basic) -> Result<Open> {
        match b {
            Basic::Interval(iv) => Ok(Open::Set(Basic::Box(iv.clone(), Interval::whole()))),
            _ => Err(Error::UnsupportedComparison(b.family(), "interval")),
        }
    }
    fn choose_preimage(&self, x: &Point, w: &Open) -> Result<Point> {
        let Point::Rat(x) = x else {
            return Err(Error::PresentationMismatch(format!("projection target point expected, got {x}")));
        };
        let fibre_y = |b: &Basic| -> Option<Rational> {
            match b {
                Basic::Box(a, c) if a.contains(x) => Some(
                    c.midpoint()
                        .unwrap_or_else(|| {
                            crate::rational::rationals().find(|q| c.contains(q)).expect("nonempty interval")
                        }),
                ),
                _ => None,
            }
        };
        let zero = Rational::from_integer(0.into());
        let candidate = Point::Pair(x.clone(), zero);
        if w.contains(&candidate)? {
            return Ok(candidate);
        }
        let parts: Vec<&Basic> = match w {
            Open::Set(b) => vec![b],
            Open::Union(ps) => ps.iter().collect(),
        };
        parts
            .into_iter()
            .find_map(fibre_y)
            .map(|y| Point::Pair(x.clone(), y))
            .ok_or_else(|| Error::MapInvariant(format!("no preimage of {x} in the given open")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::topology::space::{Catalog, Kind, Universe};

    fn plane_and_line() -> (Arc<Space>, Arc<Space>) {
        let p = Space::new("plane", Kind::CountableMetricLike, Universe::Plane, Catalog::Boxes, true, []).unwrap();
        let r = Space::new("reals", Kind::CountableMetricLike, Universe::Reals, Catalog::RationalIntervals, true, [])
            .unwrap();
        (Arc::new(p), Arc::new(r))
    }

    #[test]
    fn projection_examples() {
        let (p, r) = plane_and_line();
        let f = Projection::new(p, r);
        assert_eq!(f.apply(&Point::Pair(rat(1, 2), int(3))).unwrap(), Point::Rat(rat(1, 2)));
        let b = Basic::Box(Interval::new(int(0), int(1)), Interval::new(int(2), int(3)));
        assert_eq!(f.image_basic(&b).unwrap(), Open::Set(Basic::Interval(Interval::new(int(0), int(1)))));
        let z = f.choose_preimage(&Point::Rat(rat(1, 2)), &Open::Set(b.clone())).unwrap();
        assert!(b.contains(&z).unwrap());
        assert_eq!(f.apply(&z).unwrap(), Point::Rat(rat(1, 2)));
    }

    #[test]
    fn finite_quotient_is_checked() {
        let chain = Arc::new(Space::finite("chain3", 3, &[0b001, 0b011, 0b111]).unwrap());
        let z = Arc::new(Space::finite("z4", 4, &[0b0001, 0b0011, 0b0111, 0b1011, 0b1111]).unwrap());
        let f = FiniteMap::new(z.clone(), chain.clone(), vec![0, 1, 2, 2]).unwrap();
        assert_eq!(f.apply(&Point::Index(3)).unwrap(), Point::Index(2));
        let pre = f.choose_preimage(&Point::Index(2), &Open::Set(Basic::Mask(0b1011))).unwrap();
        assert_eq!(pre, Point::Index(3));
        // not open: the point 2 of the chain is not isolated, but here it would be
        let discrete = Arc::new(Space::finite("d3", 3, &[1, 2, 4]).unwrap());
        assert!(FiniteMap::new(chain, discrete, vec![0, 1, 2]).is_err());
    }
}
