//! Presentation files (JSON). Rationals are `p/q` strings.
//!
//! ```json
//! { "name": "chain3", "kind": "finite", "universe": "finite",
//!   "points": ["0", "1", "2"],
//!   "basis": { "explicit": [ {"family": "mask", "members": ["0"]},
//!                            {"family": "mask", "members": ["0", "1"]},
//!                            {"family": "mask", "members": ["0", "1", "2"]} ] },
//!   "flags": ["open-finite"], "t1": false }
//! ```

use serde::{Deserialize, Serialize};

use super::basic::{Basic, Interval};
use super::space::{bits, finite_t1, BasisClass, Catalog, Kind, Space, Universe};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PresentationFile {
    #[serde(default)]
    pub name: Option<String>,
    pub kind: String,
    pub universe: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    pub basis: BasisRecord,
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum BasisRecord {
    Explicit(Vec<CodeRecord>),
    /// `rational-intervals`, `boxes` or `cylinders`.
    Generator(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntervalRecord {
    /// `null` for minus infinity.
    pub lo: Option<String>,
    /// `null` for plus infinity.
    pub hi: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CodeRecord {
    Mask { members: Vec<String> },
    Interval { lo: Option<String>, hi: Option<String> },
    IntervalMinus { lo: Option<String>, hi: Option<String>, excluded: Vec<String> },
    Cylinder { prefix: Vec<u32> },
    Box { x: IntervalRecord, y: IntervalRecord },
}

fn opt_q(s: &Option<String>) -> Result<Option<Rational>> {
    s.as_deref().map(parse_rational).transpose()
}

fn q_opt(q: &Option<Rational>) -> Option<String> {
    q.as_ref().map(format_rational)
}

fn interval(lo: &Option<String>, hi: &Option<String>) -> Result<Interval> {
    let iv = Interval { lo: opt_q(lo)?, hi: opt_q(hi)? };
    if !iv.is_nonempty() {
        return Err(Error::InvalidPresentation(format!("empty interval {iv}")));
    }
    Ok(iv)
}

impl CodeRecord {
    fn to_basic(&self, names: Option<&[String]>) -> Result<Basic> {
        Ok(match self {
            CodeRecord::Mask { members } => {
                let names = names.ok_or_else(|| Error::InvalidPresentation("mask codes need `points`".into()))?;
                let mut m = 0u64;
                for p in members {
                    let i = names
                        .iter()
                        .position(|n| n == p)
                        .ok_or_else(|| Error::InvalidPresentation(format!("unknown point `{p}` in mask")))?;
                    m |= 1 << i;
                }
                Basic::Mask(m)
            }
            CodeRecord::Interval { lo, hi } => Basic::Interval(interval(lo, hi)?),
            CodeRecord::IntervalMinus { lo, hi, excluded } => {
                let ex = excluded.iter().map(|e| parse_rational(e)).collect::<Result<Vec<_>>>()?;
                Basic::interval_minus(interval(lo, hi)?, ex)
            }
            CodeRecord::Cylinder { prefix } => Basic::Cylinder(prefix.clone()),
            CodeRecord::Box { x, y } => Basic::Box(interval(&x.lo, &x.hi)?, interval(&y.lo, &y.hi)?),
        })
    }

    fn from_basic(b: &Basic, names: Option<&[String]>) -> CodeRecord {
        match b {
            Basic::Mask(m) => CodeRecord::Mask {
                members: bits(*m)
                    .map(|i| names.and_then(|n| n.get(i).cloned()).unwrap_or_else(|| i.to_string()))
                    .collect(),
            },
            Basic::Interval(iv) => CodeRecord::Interval { lo: q_opt(&iv.lo), hi: q_opt(&iv.hi) },
            Basic::IntervalMinus { interval, excluded } => CodeRecord::IntervalMinus {
                lo: q_opt(&interval.lo),
                hi: q_opt(&interval.hi),
                excluded: excluded.iter().map(format_rational).collect(),
            },
            Basic::Cylinder(c) => CodeRecord::Cylinder { prefix: c.clone() },
            Basic::Box(a, c) => CodeRecord::Box {
                x: IntervalRecord { lo: q_opt(&a.lo), hi: q_opt(&a.hi) },
                y: IntervalRecord { lo: q_opt(&c.lo), hi: q_opt(&c.hi) },
            },
        }
    }
}

fn parse_kind(s: &str) -> Result<Kind> {
    match s {
        "finite" => Ok(Kind::Finite),
        "countable-metric-like" => Ok(Kind::CountableMetricLike),
        "countable-order-like" => Ok(Kind::CountableOrderLike),
        _ => Err(Error::InvalidPresentation(format!("unknown kind `{s}`"))),
    }
}

impl PresentationFile {
    pub fn from_json(text: &str) -> Result<PresentationFile> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
            Error::Parse(format!("line {}, column {}: {msg}", e.line(), e.column()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("presentation records always serialize")
    }

    /// Builds the presentation (structural checks only; see
    /// `bases::load_space` for flag verification).
    pub fn to_space(&self) -> Result<Space> {
        let kind = parse_kind(&self.kind)?;
        let universe = match self.universe.as_str() {
            "finite" => {
                let pts = self
                    .points
                    .clone()
                    .ok_or_else(|| Error::InvalidPresentation("finite universe needs `points`".into()))?;
                let mut seen = std::collections::BTreeSet::new();
                if let Some(dup) = pts.iter().find(|p| !seen.insert(p.as_str())) {
                    return Err(Error::InvalidPresentation(format!("duplicate point `{dup}`")));
                }
                Universe::Finite(pts)
            }
            "rationals" => Universe::Rationals,
            "reals" => Universe::Reals,
            "plane" => Universe::Plane,
            "cantor" => Universe::Cantor,
            "baire" => Universe::Baire,
            u => return Err(Error::InvalidPresentation(format!("unknown universe `{u}`"))),
        };
        if (kind == Kind::Finite) != matches!(universe, Universe::Finite(_)) {
            return Err(Error::InvalidPresentation("kind `finite` goes with universe `finite` only".into()));
        }
        let names = self.points.as_deref();
        let catalog = match &self.basis {
            BasisRecord::Explicit(codes) => {
                Catalog::Explicit(codes.iter().map(|c| c.to_basic(names)).collect::<Result<_>>()?)
            }
            BasisRecord::Generator(g) => match g.as_str() {
                "rational-intervals" => Catalog::RationalIntervals,
                "boxes" => Catalog::Boxes,
                "cylinders" => Catalog::Cylinders,
                _ => return Err(Error::InvalidPresentation(format!("unknown generator `{g}`"))),
            },
        };
        let flags = self.flags.iter().map(|f| BasisClass::parse(f)).collect::<Result<Vec<_>>>()?;
        let t1 = match (&universe, &catalog, self.t1) {
            (Universe::Finite(pts), Catalog::Explicit(_), declared) => {
                let masks: Vec<u64> = match &catalog {
                    Catalog::Explicit(b) => b.iter().filter_map(Basic::mask).collect(),
                    _ => unreachable!(),
                };
                let actual = finite_t1(pts.len(), &masks);
                if declared.is_some_and(|d| d != actual) {
                    return Err(Error::InvalidPresentation(format!(
                        "declared t1={} but the topology has t1={actual}",
                        declared.unwrap()
                    )));
                }
                actual
            }
            (_, _, declared) => declared.unwrap_or(true),
        };
        let name = self.name.clone().unwrap_or_else(|| self.universe.clone());
        Space::new(name, kind, universe, catalog, t1, flags)
    }

    pub fn from_space(space: &Space) -> PresentationFile {
        let names = match &space.universe {
            Universe::Finite(n) => Some(n.clone()),
            _ => None,
        };
        let basis = match &space.catalog {
            Catalog::Explicit(b) => {
                BasisRecord::Explicit(b.iter().map(|c| CodeRecord::from_basic(c, names.as_deref())).collect())
            }
            Catalog::RationalIntervals => BasisRecord::Generator("rational-intervals".into()),
            Catalog::Boxes => BasisRecord::Generator("boxes".into()),
            Catalog::Cylinders => BasisRecord::Generator("cylinders".into()),
        };
        PresentationFile {
            name: Some(space.name.clone()),
            kind: space.kind.name().into(),
            universe: space.universe.name().into(),
            points: names,
            basis,
            flags: space.flags.iter().map(|f| f.name().to_string()).collect(),
            t1: Some(space.t1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = r#"{
        "name": "chain3", "kind": "finite", "universe": "finite",
        "points": ["a", "b", "c"],
        "basis": {"explicit": [
            {"family": "mask", "members": ["a"]},
            {"family": "mask", "members": ["a", "b"]},
            {"family": "mask", "members": ["a", "b", "c"]}
        ]},
        "flags": ["open-finite"]
    }"#;

    #[test]
    fn chain_loads_and_roundtrips() {
        let f = PresentationFile::from_json(CHAIN).unwrap();
        let s = f.to_space().unwrap();
        assert_eq!(s.masks(), vec![1, 3, 7]);
        assert!(!s.t1);
        let back = PresentationFile::from_space(&s);
        let s2 = PresentationFile::from_json(&back.to_json()).unwrap().to_space().unwrap();
        assert_eq!(s2.masks(), s.masks());
    }

    #[test]
    fn rationals_are_bit_exact() {
        let text = r#"{"kind":"countable-metric-like","universe":"rationals",
            "basis":{"explicit":[{"family":"interval-minus","lo":"0/1","hi":"2/2","excluded":["2/4"]}]}}"#;
        let s = PresentationFile::from_json(text).unwrap().to_space().unwrap();
        let out = PresentationFile::from_space(&s).to_json();
        assert!(out.contains("\"1/2\""));
        assert!(out.contains("\"1/1\""));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = PresentationFile::from_json("{\n \"kind\": \"finite\",\n oops }").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn declared_t1_is_checked() {
        let text = CHAIN.replace("\"flags\"", "\"t1\": true, \"flags\"");
        assert!(PresentationFile::from_json(&text).unwrap().to_space().is_err());
    }
}
