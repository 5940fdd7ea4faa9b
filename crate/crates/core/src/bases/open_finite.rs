//! Open-finite bases for second countable T1 presentations.

use crate::error::{Error, Result};
use crate::topology::{Basic, Point, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    V,
    W,
}

#[derive(Debug, Clone)]
pub struct OpenFiniteEntry {
    pub part: Part,
    /// `i` for `V_i`, `k` for `W_k`.
    pub index: usize,
    pub code: Basic,
    /// Supersets among the emitted `V` codes, itself included.
    pub supersets_v: usize,
    /// Supersets among the emitted `W` codes.
    pub supersets_w: usize,
    /// The proof's bounds for the two counts.
    pub bound_v: usize,
    pub bound_w: usize,
}

impl OpenFiniteEntry {
    pub fn within_bounds(&self) -> bool {
        self.supersets_v <= self.bound_v && self.supersets_w <= self.bound_w
    }
}

#[derive(Debug, Clone)]
pub struct OpenFiniteBasis {
    /// `U_i` after set-level deduplication.
    pub source: Vec<Basic>,
    /// `x_i`, the first enumerated point of `V_i`.
    pub points: Vec<Point>,
    pub v: Vec<Basic>,
    /// `(k, w_k, W_k)`; empty when every `x_i` is isolated.
    pub w: Vec<(usize, Point, Basic)>,
    /// One entry per emitted code, `V_0, W_0, V_1, W_1, ...`.
    pub certificate: Vec<OpenFiniteEntry>,
}

impl OpenFiniteBasis {
    pub fn codes(&self) -> Vec<Basic> {
        self.certificate.iter().map(|e| e.code.clone()).collect()
    }

    /// An emitted code `B` with `x ∈ B ⊆ U`.
    pub fn serve(&self, x: &Point, u: &Basic) -> Result<Option<Basic>> {
        for e in &self.certificate {
            if e.code.contains(x)? && e.code.included_in(u)? {
                return Ok(Some(e.code.clone()));
            }
        }
        Ok(None)
    }
}

/// `b` without the given points, inside the same family.
fn minus_points(b: &Basic, pts: &[&Point]) -> Result<Basic> {
    match b {
        Basic::Mask(m) => {
            let drop = pts.iter().fold(0u64, |a, p| match p {
                Point::Index(i) => a | 1 << i,
                _ => a,
            });
            let rest = m & !drop;
            if rest == 0 {
                return Err(Error::Construction("removing points emptied a basic".into()));
            }
            Ok(Basic::Mask(rest))
        }
        Basic::Interval(_) | Basic::IntervalMinus { .. } => {
            let iv = b.interval().expect("interval family").clone();
            let mut ex: Vec<_> = match b {
                Basic::IntervalMinus { excluded, .. } => excluded.clone(),
                _ => Vec::new(),
            };
            ex.extend(pts.iter().filter_map(|p| p.as_rational().cloned()));
            Ok(Basic::interval_minus(iv, ex))
        }
        _ => {
            for p in pts {
                if b.contains(p)? {
                    return Err(Error::Capability(format!(
                        "the `{}` family cannot remove points",
                        b.family()
                    )));
                }
            }
            Ok(b.clone())
        }
    }
}

fn is_isolated(space: &Space, x: &Point) -> bool {
    match x {
        Point::Index(i) if space.is_finite() => space.minimal_open(*i).count_ones() == 1,
        // no generated infinite presentation has isolated points
        _ => false,
    }
}

/// `w_k = x_{j(k)}` with `j(k) = k - t(t+1)/2` for the largest such `t`:
/// the schedule `0; 0,1; 0,1,2; ...` visits every index infinitely often
/// and never looks ahead of `k`.
fn schedule(k: usize) -> usize {
    let mut t = 0;
    while (t + 1) * (t + 2) / 2 <= k {
        t += 1;
    }
    k - t * (t + 1) / 2
}

/// The interleaved `V`/`W` construction on the first `n` distinct catalog codes.
pub fn build_open_finite(space: &Space, n: usize) -> Result<OpenFiniteBasis> {
    if !space.t1 {
        return Err(Error::Precondition(format!("`{}` is not T1", space.name)));
    }
    let mut source: Vec<Basic> = Vec::with_capacity(n);
    let mut scan = n;
    while source.len() < n {
        let codes = space.catalog_prefix(scan);
        source.clear();
        for c in codes.iter() {
            if !source.contains(c) {
                source.push(c.clone());
            }
            if source.len() == n {
                break;
            }
        }
        if space.catalog_len().is_some_and(|l| l <= scan) {
            break;
        }
        scan *= 2;
    }
    let n = source.len();
    let mut points: Vec<Point> = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for u in &source {
        let single = u
            .is_singleton()
            .ok_or_else(|| Error::Capability(format!("cannot decide whether {u} is a singleton")))?;
        let vi = if single {
            u.clone()
        } else {
            if let Basic::Mask(m) = u {
                return Err(Error::Precondition(format!(
                    "basic {} is neither a singleton nor infinite",
                    space.fmt_basic(&Basic::Mask(*m))
                )));
            }
            let inside: Vec<&Point> = points.iter().collect();
            minus_points(u, &inside)?
        };
        let x = space
            .enumerate_points(&vi)
            .next()
            .ok_or_else(|| Error::Construction(format!("no point in {vi}")))?;
        points.push(x);
        v.push(vi);
    }
    let mut w = Vec::new();
    if !points.iter().all(|x| is_isolated(space, x)) {
        let mut schedule_points: Vec<usize> = Vec::new();
        for k in 0..n {
            if !is_isolated(space, &points[k]) {
                schedule_points.push(k);
            }
            let j = schedule(k);
            let Some(&i) = schedule_points.get(j) else { continue };
            let wk = points[i].clone();
            let mut acc: Option<Basic> = None;
            for u in &source[..=k] {
                if u.contains(&wk)? {
                    acc = Some(match acc {
                        None => u.clone(),
                        Some(a) => a.intersect(u)?.expect("both contain w_k"),
                    });
                }
            }
            let drop: Vec<&Point> = points[..=k].iter().filter(|p| **p != wk).collect();
            let wk_set = minus_points(&acc.expect("w_k lies in its own U_i"), &drop)?;
            w.push((k, wk, wk_set));
        }
    }
    let certificate = certify(&points, &v, &w)?;
    Ok(OpenFiniteBasis { source, points, v, w, certificate })
}

/// Superset counts are over distinct sets of each half.
fn certify(points: &[Point], v: &[Basic], w: &[(usize, Point, Basic)]) -> Result<Vec<OpenFiniteEntry>> {
    let distinct = |it: &mut dyn Iterator<Item = &Basic>| {
        let mut out: Vec<Basic> = Vec::new();
        for b in it {
            if !out.contains(b) {
                out.push(b.clone());
            }
        }
        out
    };
    let vset = distinct(&mut v.iter());
    let wset = distinct(&mut w.iter().map(|t| &t.2));
    let count = |b: &Basic, fam: &[Basic]| -> Result<usize> {
        let mut c = 0;
        for s in fam {
            if b.included_in(s)? {
                c += 1;
            }
        }
        Ok(c)
    };
    let mut out = Vec::new();
    let mut wi = w.iter().peekable();
    for (i, vi) in v.iter().enumerate() {
        out.push(OpenFiniteEntry {
            part: Part::V,
            index: i,
            code: vi.clone(),
            supersets_v: count(vi, &vset)?,
            supersets_w: count(vi, &wset)?,
            bound_v: i + 1,
            bound_w: i + 1,
        });
        while let Some((k, wk, code)) = wi.next_if(|t| t.0 == i) {
            let xi = points.iter().position(|p| p == wk).expect("w_k is some x_i");
            out.push(OpenFiniteEntry {
                part: Part::W,
                index: *k,
                code: code.clone(),
                supersets_v: count(code, &vset)?,
                supersets_w: count(code, &wset)?,
                bound_v: xi + 1,
                bound_w: xi.max(*k) + 1,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{discrete, rationals};

    #[test]
    fn schedule_repeats_every_index() {
        let s: Vec<usize> = (0..10).map(schedule).collect();
        assert_eq!(s, vec![0, 0, 1, 0, 1, 2, 0, 1, 2, 3]);
    }

    #[test]
    fn first_code_is_untouched() {
        let b = build_open_finite(&rationals(), 1).unwrap();
        assert_eq!(b.v[0], b.source[0]);
    }

    #[test]
    fn isolated_points_give_v_only() {
        let s = Space::finite("d3", 3, &[1, 2, 4]).unwrap();
        let b = build_open_finite(&s, 3).unwrap();
        assert!(b.w.is_empty());
        assert_eq!(b.v, vec![Basic::Mask(1), Basic::Mask(2), Basic::Mask(4)]);
        assert!(build_open_finite(&discrete(3).unwrap(), 4).is_err());
    }

    #[test]
    fn bounds_hold_on_a_short_prefix() {
        let b = build_open_finite(&rationals(), 40).unwrap();
        assert!(b.certificate.iter().all(OpenFiniteEntry::within_bounds));
        assert_eq!(b.v.len(), 40);
        assert_eq!(b.w.len(), 40);
    }

    #[test]
    fn cylinders_cannot_drop_points() {
        assert!(matches!(build_open_finite(&crate::instances::cantor(), 4), Err(Error::Capability(_))));
    }
}
