//! Basis classes: analyzers, and the open-finite and uniform constructions.

mod open_finite;
mod uniform;

pub use open_finite::{build_open_finite, OpenFiniteBasis, OpenFiniteEntry, Part};
pub use uniform::{
    build_uniform, uniform_convergence_probe, Cover, DyadicOracle, ExactOracle, Family, RefinementOracle, Stage,
    StagedBasis,
};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::int;
use crate::strategy::Stationary;
use crate::topology::{BasisClass, Basic, Interval, Point, PresentationFile, Space};

/// Prefix used when verifying declared flags on load.
pub const DEFAULT_PREFIX: usize = 64;

/// Generated catalogs: at most this many early codes are tried as witness anchors.
const ANCHORS: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A strictly ascending chain of basics.
    AscendingChain(Vec<Basic>),
    /// Supersets of one basic (itself included).
    Supersets { basic: Basic, supersets: Vec<Basic> },
    /// Basic neighborhoods of `point` not inside `basic`.
    Outside { point: Point, basic: Basic, members: Vec<Basic> },
    /// A strictly descending chain of basic neighborhoods of `point` not inside `basic`.
    DescendingOutside { point: Point, basic: Basic, chain: Vec<Basic> },
}

impl Witness {
    pub fn size(&self) -> usize {
        match self {
            Witness::AscendingChain(c) => c.len(),
            Witness::Supersets { supersets, .. } => supersets.len(),
            Witness::Outside { members, .. } => members.len(),
            Witness::DescendingOutside { chain, .. } => chain.len(),
        }
    }

    /// Re-checks the witness against the raw definitions.
    pub fn recheck(&self) -> Result<bool> {
        let strict = |a: &Basic, b: &Basic| -> Result<bool> { Ok(a.included_in(b)? && a != b) };
        let outside = |x: &Point, u: &Basic, m: &Basic| -> Result<bool> { Ok(m.contains(x)? && !m.included_in(u)?) };
        match self {
            Witness::AscendingChain(c) => {
                for w in c.windows(2) {
                    if !strict(&w[0], &w[1])? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Witness::Supersets { basic, supersets } => {
                for (i, s) in supersets.iter().enumerate() {
                    if !basic.included_in(s)? || supersets[..i].contains(s) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Witness::Outside { point, basic, members } => {
                if !basic.contains(point)? {
                    return Ok(false);
                }
                for (i, m) in members.iter().enumerate() {
                    if !outside(point, basic, m)? || members[..i].contains(m) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Witness::DescendingOutside { point, basic, chain } => {
                if !basic.contains(point)? {
                    return Ok(false);
                }
                for m in chain {
                    if !outside(point, basic, m)? {
                        return Ok(false);
                    }
                }
                for w in chain.windows(2) {
                    if !strict(&w[1], &w[0])? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn describe(&self, space: &Space) -> String {
        let list = |v: &[Basic]| v.iter().map(|b| space.fmt_basic(b)).collect::<Vec<_>>().join(" ");
        match self {
            Witness::AscendingChain(c) => format!("ascending chain of {}: {}", c.len(), list(c)),
            Witness::Supersets { basic, supersets } => {
                format!("{} supersets of {}: {}", supersets.len(), space.fmt_basic(basic), list(supersets))
            }
            Witness::Outside { point, basic, members } => format!(
                "{} neighborhoods of {} not inside {}: {}",
                members.len(),
                space.fmt_point(point),
                space.fmt_basic(basic),
                list(members)
            ),
            Witness::DescendingOutside { point, basic, chain } => format!(
                "descending chain of {} neighborhoods of {} not inside {}: {}",
                chain.len(),
                space.fmt_point(point),
                space.fmt_basic(basic),
                list(chain)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    VerifiedExhaustive,
    VerifiedToPrefix(usize),
    Refuted(Witness),
}

impl Evidence {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Evidence::Refuted(_))
    }
}

#[derive(Debug, Clone)]
pub struct ClassEntry {
    pub class: BasisClass,
    pub evidence: Evidence,
    /// Counts gathered on the way (superset counts, chain lengths).
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct BasisReport {
    pub space: String,
    pub prefix: usize,
    pub entries: Vec<ClassEntry>,
    rendered: Vec<String>,
}

impl BasisReport {
    pub fn entry(&self, class: BasisClass) -> Option<&ClassEntry> {
        self.entries.iter().find(|e| e.class == class)
    }

    /// Not refuted.
    pub fn holds(&self, class: BasisClass) -> bool {
        self.entry(class).is_some_and(|e| !e.evidence.is_refuted())
    }

    pub fn any_refuted(&self) -> bool {
        self.entries.iter().any(|e| e.evidence.is_refuted())
    }
}

impl fmt::Display for BasisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "basis report: {} (prefix {})", self.space, self.prefix)?;
        for line in &self.rendered {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Verdicts for all four classes.
pub fn analyze(space: &Space, prefix: usize) -> Result<BasisReport> {
    let mut entries = Vec::new();
    let mut rendered = Vec::new();
    for c in BasisClass::ALL {
        let e = check_class(space, c, prefix)?;
        let verdict = match &e.evidence {
            Evidence::VerifiedExhaustive => "verified-exhaustive".to_string(),
            Evidence::VerifiedToPrefix(n) => format!("verified-to-prefix({n})"),
            Evidence::Refuted(w) => format!("refuted: {}", w.describe(space)),
        };
        let flag = if space.has_flag(c) { " [declared]" } else { "" };
        rendered.push(format!("{}: {verdict}{flag}; {}", c.name(), e.detail));
        entries.push(e);
    }
    Ok(BasisReport { space: space.name.clone(), prefix, entries, rendered })
}

fn dedup(codes: Vec<Basic>) -> Vec<Basic> {
    let mut out: Vec<Basic> = Vec::with_capacity(codes.len());
    for c in codes {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// `inc[i][j] = codes[i] ⊊ codes[j]`.
fn strict_inclusions(codes: &[Basic]) -> Result<Vec<Vec<bool>>> {
    let n = codes.len();
    let mut inc = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                inc[i][j] = codes[i].included_in(&codes[j])?;
            }
        }
    }
    Ok(inc)
}

/// Longest strictly ascending chain starting at each code, following `up`.
fn longest_chains(n: usize, up: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut memo: Vec<Option<Vec<usize>>> = vec![None; n];
    fn go(i: usize, n: usize, up: &dyn Fn(usize, usize) -> bool, memo: &mut Vec<Option<Vec<usize>>>) -> Vec<usize> {
        if let Some(c) = &memo[i] {
            return c.clone();
        }
        let mut best = vec![i];
        for j in 0..n {
            if up(i, j) {
                let mut c = go(j, n, up, memo);
                if c.len() + 1 > best.len() {
                    c.insert(0, i);
                    best = c;
                }
            }
        }
        memo[i] = Some(best.clone());
        best
    }
    (0..n).map(|i| go(i, n, &up, &mut memo)).collect()
}

/// Sample points of a basic (every point on finite spaces).
fn sample_points(space: &Space, b: &Basic, k: usize) -> Vec<Point> {
    if space.is_finite() {
        space.enumerate_points(b).collect()
    } else {
        space.enumerate_points(b).take(k).collect()
    }
}

struct Stats {
    chains: Vec<Vec<usize>>,
    supersets: Vec<Vec<usize>>,
}

fn stats(codes: &[Basic]) -> Result<Stats> {
    let inc = strict_inclusions(codes)?;
    let n = codes.len();
    let chains = longest_chains(n, |i, j| inc[i][j]);
    let supersets = (0..n).map(|i| (0..n).filter(|&j| j == i || inc[i][j]).collect()).collect();
    Ok(Stats { chains, supersets })
}

/// `B_x[⊄U]` and its longest strictly descending chain.
fn outside(codes: &[Basic], x: &Point, u: &Basic) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut members = Vec::new();
    for (i, c) in codes.iter().enumerate() {
        if c.contains(x)? && !c.included_in(u)? {
            members.push(i);
        }
    }
    let sub: Vec<Basic> = members.iter().map(|&i| codes[i].clone()).collect();
    let inc = strict_inclusions(&sub)?;
    let down = longest_chains(sub.len(), |i, j| inc[j][i]);
    let longest = down.into_iter().max_by_key(Vec::len).unwrap_or_default();
    let chain = longest.into_iter().map(|k| members[k]).collect();
    Ok((members, chain))
}

/// One basis class over the catalog.
///
/// Finite catalogs get exact verdicts: all four classes hold for any finite
/// basis (the failing objects are infinite), and the entry records the
/// counts. Generated catalogs are compared at `prefix / 2` and `prefix`: a
/// class is refuted when some early anchor's witness keeps growing, and
/// otherwise verified to the prefix.
pub fn check_class(space: &Space, class: BasisClass, prefix: usize) -> Result<ClassEntry> {
    match space.catalog_len() {
        Some(_) => finite_catalog_entry(space, class),
        None => generated_entry(space, class, prefix),
    }
}

fn finite_catalog_entry(space: &Space, class: BasisClass) -> Result<ClassEntry> {
    let codes = dedup(space.catalog_prefix(usize::MAX));
    let st = stats(&codes)?;
    let detail = match class {
        BasisClass::Noetherian => {
            format!("longest ascending chain {}", st.chains.iter().map(Vec::len).max().unwrap_or(0))
        }
        BasisClass::OpenFinite => format!(
            "superset counts ({})",
            st.supersets.iter().map(|s| s.len().to_string()).collect::<Vec<_>>().join(",")
        ),
        BasisClass::Uniform | BasisClass::CountableOrder => {
            let mut widest = 0;
            let mut deepest = 0;
            for u in &codes {
                for x in sample_points(space, u, 4) {
                    let (m, c) = outside(&codes, &x, u)?;
                    widest = widest.max(m.len());
                    deepest = deepest.max(c.len());
                }
            }
            if class == BasisClass::Uniform {
                format!("largest B_x outside U: {widest}")
            } else {
                format!("longest descending chain outside U: {deepest}")
            }
        }
    };
    Ok(ClassEntry { class, evidence: Evidence::VerifiedExhaustive, detail })
}

fn generated_entry(space: &Space, class: BasisClass, prefix: usize) -> Result<ClassEntry> {
    let full = dedup(space.catalog_prefix(prefix));
    let half = full.len() / 2;
    let early = &full[..half];
    let anchors = half.min(ANCHORS);
    let pick = |v: &[usize]| v.iter().map(|&i| full[i].clone()).collect::<Vec<_>>();
    let mut best: Option<Witness> = None;
    let mut keep = |w: Witness| {
        if best.as_ref().map_or(true, |b| w.size() > b.size()) {
            best = Some(w);
        }
    };
    let detail;
    match class {
        BasisClass::Noetherian | BasisClass::OpenFinite => {
            let sf = stats(&full)?;
            let se = stats(early)?;
            for a in 0..anchors {
                if class == BasisClass::Noetherian {
                    if sf.chains[a].len() > se.chains[a].len() {
                        keep(Witness::AscendingChain(pick(&sf.chains[a])));
                    }
                } else if sf.supersets[a].len() > se.supersets[a].len() {
                    keep(Witness::Supersets { basic: full[a].clone(), supersets: pick(&sf.supersets[a]) });
                }
            }
            detail = if class == BasisClass::Noetherian {
                format!("longest ascending chain {}", sf.chains.iter().map(Vec::len).max().unwrap_or(0))
            } else {
                format!("most supersets {}", sf.supersets.iter().map(Vec::len).max().unwrap_or(0))
            };
        }
        BasisClass::Uniform | BasisClass::CountableOrder => {
            let mut widest = 0;
            for a in 0..anchors {
                let u = &full[a];
                for x in sample_points(space, u, 2) {
                    let (mf, cf) = outside(&full, &x, u)?;
                    let (me, ce) = outside(early, &x, u)?;
                    widest = widest.max(mf.len());
                    if class == BasisClass::Uniform && mf.len() > me.len() {
                        keep(Witness::Outside { point: x.clone(), basic: u.clone(), members: pick(&mf) });
                    }
                    if class == BasisClass::CountableOrder && cf.len() > ce.len() {
                        keep(Witness::DescendingOutside { point: x.clone(), basic: u.clone(), chain: pick(&cf) });
                    }
                }
            }
            detail = format!("largest B_x outside U: {widest}");
        }
    }
    let evidence = match best {
        Some(w) if w.size() >= 2 => Evidence::Refuted(w),
        _ => Evidence::VerifiedToPrefix(full.len()),
    };
    Ok(ClassEntry { class, evidence, detail })
}

/// Refuses a presentation whose declared flags are refuted at `prefix`.
pub fn verify_flags(space: &Space, prefix: usize) -> Result<()> {
    for &c in &space.flags {
        if let Evidence::Refuted(w) = check_class(space, c, prefix)?.evidence {
            return Err(Error::InvalidPresentation(format!(
                "declared flag `{}` is refuted: {}",
                c.name(),
                w.describe(space)
            )));
        }
    }
    Ok(())
}

/// Parses a presentation file and verifies its declared flags.
pub fn load_space(text: &str) -> Result<Space> {
    let space = PresentationFile::from_json(text)?.to_space()?;
    verify_flags(&space, DEFAULT_PREFIX)?;
    Ok(space)
}

/// A strict shrink of `u` around `x` inside the same family.
fn shrink(x: &Point, u: &Basic) -> Option<Basic> {
    match (u, x) {
        (Basic::Interval(iv), Point::Rat(q)) => {
            let r = iv.boundary_distance(q).map_or_else(|| int(1), |d| d / int(2));
            Some(Basic::Interval(Interval::ball(q, &r)))
        }
        (Basic::Cylinder(c), Point::Seq(s)) => {
            let mut w = c.clone();
            w.push(s.get(c.len()).copied().unwrap_or(0));
            Some(Basic::Cylinder(w))
        }
        _ => None,
    }
}

/// `respond1(x, U)` = first catalog basic `V` with `x ∈ V ⊊ U`, or `U` when
/// there is none (then `U` is the minimal basic neighborhood of `x`).
pub fn countable_order_strategy(space: Arc<Space>) -> Result<Stationary> {
    if !space.is_finite() && !space.has_flag(BasisClass::CountableOrder) && !space.has_flag(BasisClass::Uniform) {
        return Err(Error::Capability(format!("`{}` does not carry the countable-order flag", space.name)));
    }
    Ok(Stationary::new("countable-order", move |x, u| {
        let n = space.catalog_len().unwrap_or(crate::topology::space::REFINE_SCAN);
        for v in space.catalog_prefix(n) {
            if v != *u && v.contains(x)? && v.included_in(u)? {
                return Ok(v);
            }
        }
        if space.catalog_len().is_some() {
            return Ok(u.clone());
        }
        shrink(x, u).ok_or_else(|| Error::Precondition(format!("no strict shrink of {u} around {x}")))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{chain, discrete, rationals, reals};
    use crate::rational::rat;

    #[test]
    fn chain_is_open_finite_with_counts() {
        let s = chain(3).unwrap();
        let e = check_class(&s, BasisClass::OpenFinite, 10).unwrap();
        assert_eq!(e.evidence, Evidence::VerifiedExhaustive);
        assert!(e.detail.contains("(3,2,1)"), "{}", e.detail);
    }

    #[test]
    fn discrete_with_top_is_uniform() {
        let s = discrete(3).unwrap();
        let r = analyze(&s, 10).unwrap();
        assert!(r.holds(BasisClass::Uniform));
    }

    #[test]
    fn rationals_are_not_open_finite() {
        let s = rationals();
        let e = check_class(&s, BasisClass::OpenFinite, 100).unwrap();
        let Evidence::Refuted(w) = &e.evidence else { panic!("{e:?}") };
        assert!(w.size() > 50, "{}", w.size());
        assert!(w.recheck().unwrap());
    }

    #[test]
    fn all_interval_classes_refuted_with_valid_witnesses() {
        let s = reals();
        for c in BasisClass::ALL {
            let e = check_class(&s, c, 100).unwrap();
            let Evidence::Refuted(w) = &e.evidence else { panic!("{c}: {e:?}") };
            assert!(w.recheck().unwrap(), "{c}");
        }
    }

    #[test]
    fn cylinders_verified_to_prefix() {
        let s = crate::instances::baire();
        for c in BasisClass::ALL {
            assert_eq!(check_class(&s, c, 60).unwrap().evidence, Evidence::VerifiedToPrefix(60), "{c}");
        }
    }

    #[test]
    fn countable_order_examples() {
        let s = Arc::new(chain(3).unwrap());
        let st = countable_order_strategy(s).unwrap();
        assert_eq!(st.respond1(&Point::Index(0), &Basic::Mask(1)).unwrap(), Basic::Mask(1));
        assert_eq!(st.respond1(&Point::Index(0), &Basic::Mask(3)).unwrap(), Basic::Mask(1));
        assert!(countable_order_strategy(Arc::new(reals())).is_err());
        let mut r = reals();
        r.flags.insert(BasisClass::CountableOrder);
        let st = countable_order_strategy(Arc::new(r)).unwrap();
        let u = Basic::Interval(Interval::new(int(-1), int(1)));
        let v = st.respond1(&Point::Rat(int(0)), &u).unwrap();
        assert_eq!(v, Basic::Interval(Interval::new(int(-1), rat(1, 2))));
    }

    #[test]
    fn refuted_flag_is_rejected_on_load() {
        let text = r#"{"kind":"countable-metric-like","universe":"rationals",
            "basis":{"generator":"rational-intervals"},"flags":["open-finite"]}"#;
        assert!(matches!(load_space(text), Err(Error::InvalidPresentation(_))));
    }
}
