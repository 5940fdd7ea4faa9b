//! Staged uniform bases from a convergent stationary strategy and a
//! point-finite refinement oracle.

use crate::error::{Error, Result};
use crate::rational::{int, pow2_neg, Rational};
use crate::strategy::Stationary;
use crate::topology::{Basic, Interval, Open, Point, Space, Universe};

/// Catalog neighborhoods consulted by the convergence probe.
pub const PROBE_PREFIX: usize = 64;

/// Points sampled on infinite presentations.
const SAMPLES: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Finite(Vec<Basic>),
    /// `((k-1)/2^m, (k+1)/2^m)` for every integer `k`.
    Dyadic { m: u32 },
}

impl Family {
    pub fn members_containing(&self, x: &Point) -> Result<Vec<Basic>> {
        match self {
            Family::Finite(v) => {
                let mut out = Vec::new();
                for b in v {
                    if b.contains(x)? {
                        out.push(b.clone());
                    }
                }
                Ok(out)
            }
            Family::Dyadic { m } => {
                let q = x
                    .as_rational()
                    .ok_or_else(|| Error::PresentationMismatch(format!("dyadic family at non-rational {x}")))?;
                let scale = int(1) / pow2_neg(*m);
                let t = q * &scale;
                let (lo, hi) = (t.floor(), t.ceil());
                let mut ks = vec![lo.clone()];
                if hi != lo {
                    ks.push(hi);
                }
                Ok(ks
                    .into_iter()
                    .map(|k| Basic::Interval(Interval::new((&k - int(1)) / &scale, (&k + int(1)) / &scale)))
                    .collect())
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Family::Finite(v) => format!("{} sets", v.len()),
            Family::Dyadic { m } => format!("dyadic intervals of radius 2^-{m}"),
        }
    }
}

/// The family `{S(x, U) : x ∈ U ∈ B_i}`: exhaustive on finite spaces,
/// sampled at `points` otherwise.
#[derive(Debug, Clone)]
pub enum Cover {
    Finite(Vec<Basic>),
    Sampled { members: Vec<Basic>, points: Vec<Point> },
}

/// A point-finite open refinement of a cover; trusted, then spot-checked.
pub trait RefinementOracle {
    fn name(&self) -> String;
    /// `stage` is the index of the stage being produced (1 for `B_1`).
    fn refine_cover(&self, space: &Space, stage: usize, cover: &Cover) -> Result<Family>;
}

/// Finite spaces: the cover itself (finite, hence point-finite).
pub struct ExactOracle;

impl RefinementOracle for ExactOracle {
    fn name(&self) -> String {
        "exact".into()
    }

    fn refine_cover(&self, space: &Space, _stage: usize, cover: &Cover) -> Result<Family> {
        match cover {
            Cover::Finite(v) if space.is_finite() => Ok(Family::Finite(v.clone())),
            _ => Err(Error::Capability("the exact oracle needs a finite space".into())),
        }
    }
}

/// Interval presentations: stage `s` is the dyadic family of radius
/// `2^-(2s-2)`, at most two members around any point.
pub struct DyadicOracle;

impl RefinementOracle for DyadicOracle {
    fn name(&self) -> String {
        "dyadic".into()
    }

    fn refine_cover(&self, space: &Space, stage: usize, _cover: &Cover) -> Result<Family> {
        if !matches!(space.universe, Universe::Rationals | Universe::Reals) {
            return Err(Error::Capability("the dyadic oracle needs an interval presentation".into()));
        }
        Ok(Family::Dyadic { m: 2 * (stage.max(1) as u32 - 1) })
    }
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub family: Family,
    /// Largest number of members around one checked point.
    pub max_overlap: usize,
}

#[derive(Debug, Clone)]
pub struct StagedBasis {
    pub stages: Vec<Stage>,
    /// Points the spot checks ran at.
    pub checked_points: Vec<Point>,
}

impl StagedBasis {
    /// Finite spaces: every open neighborhood of every point contains a
    /// member of some stage around the point.
    pub fn union_is_basis(&self, space: &Space) -> Result<bool> {
        let n = space.size().ok_or_else(|| Error::Capability("needs a finite space".into()))?;
        for o in space.opens() {
            for x in crate::topology::bits(o).filter(|&x| x < n) {
                let p = Point::Index(x);
                let mut found = false;
                for st in &self.stages {
                    for b in st.family.members_containing(&p)? {
                        if b.included_in(&Basic::Mask(o))? {
                            found = true;
                        }
                    }
                }
                if !found {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn sample_points(space: &Space) -> Vec<Point> {
    if space.is_finite() {
        return space.points();
    }
    let window = Basic::Interval(Interval::new(int(-4), int(4)));
    space.enumerate_points(&window).take(SAMPLES).collect()
}

fn contract(msg: String) -> Error {
    Error::OracleContract(msg)
}

/// `B_0 = {X}`, `B_{i+1} = oracle({S(x, U) : x ∈ U ∈ B_i})`, each stage
/// spot-checked for covering, refinement and point-finiteness.
pub fn build_uniform(
    space: &Space,
    s: &Stationary,
    oracle: &dyn RefinementOracle,
    stages: usize,
) -> Result<StagedBasis> {
    let points = sample_points(space);
    let mut out = vec![Stage { family: Family::Finite(vec![space.top()]), max_overlap: 1 }];
    for i in 0..stages {
        let prev = &out[i].family;
        let cover = match prev {
            Family::Finite(v) if space.is_finite() => {
                let mut members: Vec<Basic> = Vec::new();
                for u in v {
                    for x in space.enumerate_points(u) {
                        let r = s.respond1(&x, u)?;
                        if !members.contains(&r) {
                            members.push(r);
                        }
                    }
                }
                Cover::Finite(members)
            }
            _ => {
                let mut members = Vec::new();
                for p in &points {
                    for u in prev.members_containing(p)? {
                        members.push(s.respond1(p, &u)?);
                    }
                }
                Cover::Sampled { members, points: points.clone() }
            }
        };
        let next = oracle.refine_cover(space, i + 1, &cover)?;
        let mut max_overlap = 0;
        for p in &points {
            let around = next.members_containing(p)?;
            if around.is_empty() {
                return Err(contract(format!("stage {} misses {}", i + 1, space.fmt_point(p))));
            }
            max_overlap = max_overlap.max(around.len());
            for d in &around {
                if !refines(space, s, prev, &cover, d)? {
                    return Err(contract(format!(
                        "stage {} member {} lies in no member of the cover",
                        i + 1,
                        space.fmt_basic(d)
                    )));
                }
            }
        }
        out.push(Stage { family: next, max_overlap });
    }
    Ok(StagedBasis { stages: out, checked_points: points })
}

/// `d ⊆ S(c, U)` for a cover member; on infinite spaces the member is
/// generated at the centre `c` of `d`.
fn refines(space: &Space, s: &Stationary, prev: &Family, cover: &Cover, d: &Basic) -> Result<bool> {
    match cover {
        Cover::Finite(v) => {
            for c in v {
                if d.included_in(c)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Cover::Sampled { .. } => {
            let c = match d.interval().and_then(Interval::midpoint) {
                Some(c) => Point::Rat(c),
                None => space.enumerate_points(d).next().ok_or_else(|| contract("empty member".into()))?,
            };
            for u in prev.members_containing(&c)? {
                if d.included_in(&s.respond1(&c, &u)?)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Follows a nested branch `B_0 ⊇ B_1 ⊇ ... ⊇ B_depth` of members around
/// `x` (depth-first; the branching is finite) and checks that its last
/// element lies inside every catalog neighborhood of `x` among the first
/// [`PROBE_PREFIX`] codes. On interval presentations the radii must also
/// shrink by half per stage.
pub fn uniform_convergence_probe(space: &Space, staged: &StagedBasis, x: &Point, depth: usize) -> Result<bool> {
    let depth = depth.min(staged.stages.len() - 1);
    fn branch(st: &[Stage], x: &Point, i: usize, d: usize, chain: &mut Vec<Basic>) -> Result<bool> {
        if i == d {
            return Ok(true);
        }
        for m in st[i + 1].family.members_containing(x)? {
            if m.included_in(chain.last().expect("chain starts at X"))? {
                chain.push(m);
                if branch(st, x, i + 1, d, chain)? {
                    return Ok(true);
                }
                chain.pop();
            }
        }
        Ok(false)
    }
    let top = match &staged.stages[0].family {
        Family::Finite(v) if v.len() == 1 => v[0].clone(),
        _ => space.top(),
    };
    let mut chain = vec![top];
    if !branch(&staged.stages, x, 0, depth, &mut chain)? {
        return Ok(false);
    }
    let last = chain.last().expect("nonempty");
    let n = space.catalog_len().unwrap_or(PROBE_PREFIX).min(PROBE_PREFIX);
    for b in space.catalog_prefix(n) {
        if b.contains(x)? && !Open::Set(b.clone()).includes_basic(last)? {
            return Ok(false);
        }
    }
    if depth >= 2 {
        if let (Some(r1), Some(rd)) = (chain[1].radius(), last.radius()) {
            let bound: Rational = r1 * pow2_neg(depth as u32 - 1);
            if rd > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::countable_order_strategy;
    use crate::instances::{chain, reals, reals_half_ball};
    use std::sync::Arc;

    #[test]
    fn first_stage_is_the_space() {
        let s = reals();
        let b = build_uniform(&s, &reals_half_ball(), &DyadicOracle, 0).unwrap();
        assert_eq!(b.stages[0].family, Family::Finite(vec![s.top()]));
    }

    #[test]
    fn dyadic_stages_overlap_at_most_twice() {
        let s = reals();
        let b = build_uniform(&s, &reals_half_ball(), &DyadicOracle, 6).unwrap();
        assert_eq!(b.stages.len(), 7);
        assert!(b.stages.iter().all(|st| st.max_overlap <= 2));
        for p in b.checked_points.iter().take(10) {
            assert!(uniform_convergence_probe(&s, &b, p, 6).unwrap(), "{p}");
        }
    }

    #[test]
    fn finite_stages_reach_minimal_opens() {
        let s = Arc::new(chain(3).unwrap());
        let st = countable_order_strategy(s.clone()).unwrap();
        let b = build_uniform(&s, &st, &ExactOracle, 3).unwrap();
        assert!(b.union_is_basis(&s).unwrap());
        for x in 0..3 {
            assert!(uniform_convergence_probe(&s, &b, &Point::Index(x), 3).unwrap());
        }
    }

    #[test]
    fn one_point_space_is_trivial() {
        let s = Space::finite("one", 1, &[1]).unwrap();
        let st = Stationary::copycat();
        let b = build_uniform(&s, &st, &ExactOracle, 2).unwrap();
        assert!(uniform_convergence_probe(&s, &b, &Point::Index(0), 2).unwrap());
    }

    #[test]
    fn lying_oracle_is_caught() {
        struct Coarse;
        impl RefinementOracle for Coarse {
            fn name(&self) -> String {
                "coarse".into()
            }
            fn refine_cover(&self, s: &Space, _: usize, _: &Cover) -> Result<Family> {
                Ok(Family::Finite(vec![s.top()]))
            }
        }
        let s = reals();
        let err = build_uniform(&s, &reals_half_ball(), &Coarse, 1).unwrap_err();
        assert!(matches!(err, Error::OracleContract(_)));
    }
}
