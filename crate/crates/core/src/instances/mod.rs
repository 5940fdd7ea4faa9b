//! Concrete spaces, maps, built-in strategies and adversaries.

mod s_space;

pub use s_space::{s_space, SSpace};

use std::sync::Arc;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{EmptyStrategy, Move, Round};
use crate::rational::{int, nth_rational, pow2_neg, rat, Rational};
use crate::strategy::{compose_stationary, Stationary};
use crate::topology::{BasisClass, Basic, Catalog, FiniteMap, Interval, Kind, Point, Projection, Space, Universe};

fn finite_with_all_flags(name: &str, n: usize, masks: &[u64]) -> Result<Space> {
    let mut s = Space::finite(name, n, masks)?;
    s.flags.extend(BasisClass::ALL);
    Ok(s)
}

/// `{0} ⊂ {0,1} ⊂ ... ⊂ {0..n-1}`.
pub fn chain(n: usize) -> Result<Space> {
    let masks: Vec<u64> = (1..=n).map(|k| (1u64 << k) - 1).collect();
    finite_with_all_flags(&format!("chain{n}"), n, &masks)
}

/// Singletons plus the whole space.
pub fn discrete(n: usize) -> Result<Space> {
    let mut masks: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    if n > 1 {
        masks.push((1u64 << n) - 1);
    }
    finite_with_all_flags(&format!("discrete{n}"), n, &masks)
}

/// Four points mapping onto the 3-chain (`3 ↦ 2`).
pub fn z4() -> Space {
    finite_with_all_flags("z4", 4, &[0b0001, 0b0011, 0b0111, 0b1011, 0b1111]).expect("fixture is a basis")
}

/// The quotient `z4 → chain3` with point table `[0, 1, 2, 2]`.
pub fn quotient_map() -> FiniteMap {
    let chain = Arc::new(chain(3).expect("chain3"));
    FiniteMap::new(Arc::new(z4()), chain, vec![0, 1, 2, 2]).expect("fixture map is open and continuous")
}

pub fn rationals() -> Space {
    Space::new("rationals", Kind::CountableMetricLike, Universe::Rationals, Catalog::RationalIntervals, true, [])
        .expect("generated presentation")
}

pub fn reals() -> Space {
    Space::new("reals", Kind::CountableMetricLike, Universe::Reals, Catalog::RationalIntervals, true, [])
        .expect("generated presentation")
}

pub fn plane() -> Space {
    Space::new("plane", Kind::CountableMetricLike, Universe::Plane, Catalog::Boxes, true, [])
        .expect("generated presentation")
}

pub fn cantor() -> Space {
    Space::new("cantor", Kind::CountableMetricLike, Universe::Cantor, Catalog::Cylinders, true, BasisClass::ALL)
        .expect("generated presentation")
}

pub fn baire() -> Space {
    Space::new("baire", Kind::CountableMetricLike, Universe::Baire, Catalog::Cylinders, true, BasisClass::ALL)
        .expect("generated presentation")
}

/// Instance lookup by name: `chainN`, `discreteN` (also `chain:N`), `z4`,
/// `rationals`, `reals`, `plane`, `cantor`, `baire`.
pub fn by_name(name: &str) -> Result<Space> {
    let num = |p: &str| -> Option<usize> {
        name.strip_prefix(p).map(|t| t.trim_start_matches(':')).and_then(|t| t.parse().ok())
    };
    match name {
        "rationals" => Ok(rationals()),
        "reals" => Ok(reals()),
        "plane" => Ok(plane()),
        "cantor" => Ok(cantor()),
        "baire" => Ok(baire()),
        "z4" => Ok(z4()),
        _ => {
            if let Some(n) = num("chain").filter(|n| (1..=64).contains(n)) {
                chain(n)
            } else if let Some(n) = num("discrete").filter(|n| (1..=64).contains(n)) {
                discrete(n)
            } else {
                Err(Error::Parse(format!("unknown instance `{name}`")))
            }
        }
    }
}

/// `r = min(x - a, b - x) / 2`; an infinite side does not count, and
/// `r = 1` on the whole line.
fn half_radius(x: &Rational, iv: &Interval) -> Rational {
    iv.boundary_distance(x).map_or_else(|| int(1), |d| d / int(2))
}

fn expect_rat<'a>(x: &'a Point) -> Result<&'a Rational> {
    x.as_rational()
        .ok_or_else(|| Error::PresentationMismatch(format!("expected a rational point, got {x}")))
}

fn expect_interval(u: &Basic) -> Result<&Interval> {
    match u {
        Basic::Interval(iv) => Ok(iv),
        _ => Err(Error::UnsupportedComparison(u.family(), "interval")),
    }
}

/// `respond1(x, (a,b)) = (x - r, x + r)`.
pub fn reals_half_ball() -> Stationary {
    Stationary::new("half-ball", |x, u| {
        let q = expect_rat(x)?;
        let r = half_radius(q, expect_interval(u)?);
        Ok(Basic::Interval(Interval::ball(q, &r)))
    })
}

/// Half-ball applied twice.
pub fn reals_quarter_ball() -> Stationary {
    let h = reals_half_ball();
    let s = compose_stationary(&h, &h);
    Stationary::new("quarter-ball", move |x, u| s.respond1(x, u))
}

/// Square box around `(x, y)` with half the smallest boundary distance.
pub fn half_ball_2d() -> Stationary {
    Stationary::new("half-ball2d", |p, u| {
        let Point::Pair(x, y) = p else {
            return Err(Error::PresentationMismatch(format!("expected a pair, got {p}")));
        };
        let Basic::Box(a, b) = u else {
            return Err(Error::UnsupportedComparison(u.family(), "box"));
        };
        let d = match (a.boundary_distance(x), b.boundary_distance(y)) {
            (Some(d1), Some(d2)) => Some(if d1 < d2 { d1 } else { d2 }),
            (d1, d2) => d1.or(d2),
        };
        let r = d.map_or_else(|| int(1), |d| d / int(2));
        Ok(Basic::Box(Interval::ball(x, &r), Interval::ball(y, &r)))
    })
}

/// `proj₁: plane → reals`.
pub fn product_projection() -> Projection {
    Projection::new(Arc::new(plane()), Arc::new(reals()))
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.gen_range(0..xs.len())]
}

/// Seeded Empty strategy on interval presentations: a random point of the
/// last reply and a random catalog interval around it, repeating the last
/// reply a quarter of the time.
pub struct RandomIntervals {
    rng: ChaCha8Rng,
}

impl RandomIntervals {
    pub fn new(seed: u64) -> RandomIntervals {
        RandomIntervals { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl EmptyStrategy for RandomIntervals {
    fn next_move(&mut self, space: &Space, rounds: &[Round]) -> Result<Move> {
        let v = rounds.last().map_or_else(|| space.top(), |r| r.v.clone());
        let iv = expect_interval(&v)?.clone();
        let (lo, hi) = match (&iv.lo, &iv.hi) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => {
                let c = rat(self.rng.gen_range(-32..=32), 8);
                let w = rat(self.rng.gen_range(1..=32), 8);
                let clip = Interval::ball(&c, &w).intersect(&iv).ok_or_else(|| {
                    Error::Precondition("random window misses the reply".into())
                })?;
                (clip.lo.expect("bounded"), clip.hi.expect("bounded"))
            }
        };
        let x = &lo + (&hi - &lo) * rat(self.rng.gen_range(1..64), 64);
        if iv.lo.is_some() && iv.hi.is_some() && self.rng.gen_range(0..4) == 0 {
            return Ok(Move::new(Point::Rat(x), v));
        }
        let a = &lo + (&x - &lo) * rat(self.rng.gen_range(0..16), 16);
        let b = &x + (&hi - &x) * rat(self.rng.gen_range(1..=16), 16);
        Ok(Move::new(Point::Rat(x), Basic::Interval(Interval::new(a, b))))
    }
}

/// Empty's winning strategy on the rationals: at round `n` it plays an
/// interval of length at most `2^-n` whose closure avoids `q_n` and stays
/// inside the last reply.
pub struct RationalsEmptyWinner {
    rng: ChaCha8Rng,
}

pub fn rationals_empty_winner(seed: u64) -> RationalsEmptyWinner {
    RationalsEmptyWinner { rng: ChaCha8Rng::seed_from_u64(seed) }
}

impl EmptyStrategy for RationalsEmptyWinner {
    fn next_move(&mut self, space: &Space, rounds: &[Round]) -> Result<Move> {
        let n = rounds.len();
        let qn = nth_rational(n);
        let v = rounds.last().map_or_else(|| space.top(), |r| r.v.clone());
        let iv = expect_interval(&v)?.clone();
        let candidates: Vec<Rational> = space
            .enumerate_points(&v)
            .take(9)
            .filter_map(|p| p.as_rational().cloned())
            .filter(|c| *c != qn)
            .collect();
        let c = pick(&mut self.rng, &candidates).clone();
        let gap = (&c - &qn).abs() / int(2);
        let mut rho = pow2_neg(n as u32 + 1);
        if gap < rho {
            rho = gap;
        }
        if let Some(d) = iv.boundary_distance(&c) {
            let d = d / int(2);
            if d < rho {
                rho = d;
            }
        }
        Ok(Move::new(Point::Rat(c.clone()), Basic::Interval(Interval::ball(&c, &rho))))
    }
}

/// Built-in Nonempty strategies on interval presentations.
pub fn interval_builtins() -> Vec<Stationary> {
    vec![
        Stationary::copycat(),
        reals_half_ball(),
        reals_quarter_ball(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{run_play, Strategy};
    use crate::topology::OpenMap;

    fn iv(a: Rational, b: Rational) -> Basic {
        Basic::Interval(Interval::new(a, b))
    }

    #[test]
    fn half_ball_examples() {
        let h = reals_half_ball();
        assert_eq!(h.respond1(&Point::Rat(int(0)), &iv(int(-1), int(1))).unwrap(), iv(rat(-1, 2), rat(1, 2)));
        assert_eq!(h.respond1(&Point::Rat(rat(1, 4)), &iv(int(0), int(1))).unwrap(), iv(rat(1, 8), rat(3, 8)));
        let q = reals_quarter_ball();
        assert_eq!(q.respond1(&Point::Rat(int(0)), &iv(int(-1), int(1))).unwrap(), iv(rat(-1, 4), rat(1, 4)));
    }

    #[test]
    fn projection_lift_example() {
        let f = product_projection();
        let b = Basic::Box(Interval::new(int(0), int(1)), Interval::new(int(2), int(3)));
        assert_eq!(f.image_basic(&b).unwrap(), iv(int(0), int(1)).into());
    }

    #[test]
    fn empty_winner_first_round() {
        let s = Arc::new(rationals());
        let mut e = rationals_empty_winner(0);
        let m = e.next_move(&s, &[]).unwrap();
        let Basic::Interval(u) = &m.u else { panic!() };
        assert!(!u.closure_contains(&nth_rational(0)));
        assert!(u.length().unwrap() <= int(1));
    }

    #[test]
    fn copycat_loses_lengths() {
        let s = Arc::new(rationals());
        let mut e = rationals_empty_winner(7);
        let play = run_play(&s, &mut e, &Stationary::copycat(), 128).unwrap();
        for (n, r) in play.rounds.iter().enumerate() {
            let Basic::Interval(u) = &r.u else { panic!() };
            assert!(u.length().unwrap() <= pow2_neg(n as u32));
            assert!(!u.closure_contains(&nth_rational(n)));
        }
    }

    #[test]
    fn builtins_are_legal_on_random_moves() {
        let s = Arc::new(reals());
        let mut e = RandomIntervals::new(5);
        for b in interval_builtins() {
            for _ in 0..100 {
                run_play(&s, &mut e, &b as &dyn Strategy, 20).unwrap();
            }
        }
    }

    #[test]
    fn names_resolve() {
        for n in ["chain3", "chain:4", "discrete2", "z4", "rationals", "reals", "plane", "cantor", "baire"] {
            by_name(n).unwrap();
        }
        assert!(by_name("torus").is_err());
    }
}
