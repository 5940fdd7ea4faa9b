//! Strategy descriptors: `builtin:NAME`, `map:NAME` and the combinators
//! `stabilize(S, n)`, `tracify(S)`, `stationarize(T)`, `lift(S, map)`.

use std::fmt;
use std::sync::Arc;

use choquet::bases::countable_order_strategy;
use choquet::game::{LimitPredicate, Strategy};
use choquet::instances::{half_ball_2d, product_projection, quotient_map, reals_half_ball, reals_quarter_ball};
use choquet::solver::solve;
use choquet::strategy::{lift_through_open_map, stabilize, stationarize, tracify, HashStrategy, Stationary, TraceStrategy};
use choquet::topology::{OpenMap, Space, Universe};
use choquet::{Error, Result, Side};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Atom(String),
    Call(String, Vec<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom(a) => f.write_str(a),
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("strategy expression, column {}: {what}", self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> Result<String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, ':' | '-' | '_')))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a name"));
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let name = self.word()?;
        if !self.eat('(') {
            return Ok(Expr::Atom(name));
        }
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        if !self.eat(')') {
            return Err(self.err("expected `,` or `)`"));
        }
        Ok(Expr::Call(name, args))
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Inputs the built-ins may need.
pub struct Context {
    pub predicate: Option<String>,
    pub seed: u64,
}

/// A Nonempty strategy together with the space it plays on.
#[derive(Clone)]
pub struct Built {
    pub strategy: Arc<dyn Strategy>,
    pub space: Arc<Space>,
    pub stationary: Option<Stationary>,
    pub trace: Option<Arc<TraceStrategy>>,
}

impl Built {
    fn plain(strategy: Arc<dyn Strategy>, space: Arc<Space>) -> Built {
        Built { strategy, space, stationary: None, trace: None }
    }

    fn stationary(s: Stationary, space: Arc<Space>) -> Built {
        Built { strategy: Arc::new(s.clone()), space, stationary: Some(s), trace: None }
    }
}

enum Value {
    Strategy(Built),
    Map(Arc<dyn OpenMap>),
    Number(usize),
}

fn usage(msg: String) -> Error {
    Error::Parse(msg)
}

fn builtin(name: &str, space: &Arc<Space>, ctx: &Context) -> Result<Built> {
    let intervals = matches!(space.universe, Universe::Rationals | Universe::Reals);
    let need = |ok: bool, what: &str| -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::Capability(format!("builtin:{name} needs {what}, but `{}` is not one", space.name)))
        }
    };
    Ok(match name {
        "copycat" => Built::stationary(Stationary::copycat(), space.clone()),
        "half-ball" => {
            need(intervals, "an interval presentation")?;
            Built::stationary(reals_half_ball(), space.clone())
        }
        "quarter-ball" => {
            need(intervals, "an interval presentation")?;
            Built::stationary(reals_quarter_ball(), space.clone())
        }
        "half-ball2d" => {
            need(space.universe == Universe::Plane, "the plane")?;
            Built::stationary(half_ball_2d(), space.clone())
        }
        "countable-order" => Built::stationary(countable_order_strategy(space.clone())?, space.clone()),
        "hash" => {
            need(space.is_finite(), "a finite space")?;
            Built::plain(Arc::new(HashStrategy::new(space.clone(), ctx.seed)), space.clone())
        }
        "witness" => {
            need(space.is_finite(), "a finite space")?;
            let q = match &ctx.predicate {
                Some(p) => LimitPredicate::parse(space, p)?,
                None => LimitPredicate::Any,
            };
            let r = solve(space, &q)?;
            match (r.winner, r.nonempty) {
                (Side::Nonempty, Some(t)) => Built::stationary(t.to_strategy("witness"), space.clone()),
                _ => {
                    return Err(Error::Precondition(format!(
                        "Empty wins for {}; there is no Nonempty witness",
                        q.describe(space)
                    )))
                }
            }
        }
        _ => return Err(usage(format!("unknown built-in `builtin:{name}`"))),
    })
}

fn map(name: &str) -> Result<Arc<dyn OpenMap>> {
    match name {
        "proj2" => Ok(Arc::new(product_projection())),
        "quotient" => Ok(Arc::new(quotient_map())),
        _ => Err(usage(format!("unknown map `map:{name}`"))),
    }
}

fn eval_value(e: &Expr, space: &Arc<Space>, ctx: &Context) -> Result<Value> {
    match e {
        Expr::Atom(a) => {
            if let Some(n) = a.strip_prefix("builtin:") {
                Ok(Value::Strategy(builtin(n, space, ctx)?))
            } else if let Some(n) = a.strip_prefix("map:") {
                Ok(Value::Map(map(n)?))
            } else if let Ok(n) = a.parse() {
                Ok(Value::Number(n))
            } else {
                Err(usage(format!("`{a}` is not a built-in, a map or a number")))
            }
        }
        Expr::Call(f, args) => {
            let arity = |n: usize| -> Result<()> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(usage(format!("`{f}` takes {n} argument(s), got {}", args.len())))
                }
            };
            let strategy = |e: &Expr, space: &Arc<Space>| -> Result<Built> {
                match eval_value(e, space, ctx)? {
                    Value::Strategy(b) => Ok(b),
                    _ => Err(usage(format!("`{e}` is not a strategy"))),
                }
            };
            match f.as_str() {
                "stabilize" => {
                    arity(2)?;
                    let inner = strategy(&args[0], space)?;
                    let Value::Number(n) = eval_value(&args[1], space, ctx)? else {
                        return Err(usage("the scan bound of `stabilize` must be a number".into()));
                    };
                    Ok(Value::Strategy(Built::plain(Arc::new(stabilize(inner.strategy, n)), inner.space)))
                }
                "tracify" => {
                    arity(1)?;
                    let inner = strategy(&args[0], space)?;
                    let t = Arc::new(tracify(inner.strategy, inner.space.clone()));
                    Ok(Value::Strategy(Built { strategy: t.clone(), space: inner.space, stationary: None, trace: Some(t) }))
                }
                "stationarize" => {
                    arity(1)?;
                    let inner = strategy(&args[0], space)?;
                    let t = inner
                        .trace
                        .ok_or_else(|| usage("`stationarize` expects a trace strategy, e.g. tracify(...)".into()))?;
                    Ok(Value::Strategy(Built::stationary(stationarize(t)?, inner.space)))
                }
                "lift" => {
                    arity(2)?;
                    let Value::Map(m) = eval_value(&args[1], space, ctx)? else {
                        return Err(usage("the second argument of `lift` must be a map".into()));
                    };
                    let inner = strategy(&args[0], m.source())?;
                    let target = m.target().clone();
                    Ok(Value::Strategy(Built::plain(Arc::new(lift_through_open_map(inner.strategy, m)), target)))
                }
                _ => Err(usage(format!("unknown combinator `{f}`"))),
            }
        }
    }
}

/// Builds the strategy on `space` (or, under `lift`, on the map's target,
/// which must present the same universe as `space`).
pub fn build(e: &Expr, space: &Arc<Space>, ctx: &Context) -> Result<Built> {
    match eval_value(e, space, ctx)? {
        Value::Strategy(b) => {
            if b.space.universe != space.universe {
                return Err(Error::PresentationMismatch(format!(
                    "`{e}` plays on `{}`, not on `{}`",
                    b.space.name, space.name
                )));
            }
            Ok(b)
        }
        _ => Err(usage(format!("`{e}` is not a strategy"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use choquet::instances::{chain, rationals};

    fn ctx() -> Context {
        Context { predicate: None, seed: 0 }
    }

    #[test]
    fn parses_nested_calls() {
        let e = parse("stationarize(tracify( stabilize(builtin:witness,64)))").unwrap();
        assert_eq!(e.to_string(), "stationarize(tracify(stabilize(builtin:witness, 64)))");
        assert!(parse("tracify(builtin:copycat").is_err());
        assert!(parse("copycat)").is_err());
    }

    #[test]
    fn pipeline_on_chain_is_stationary() {
        let s = Arc::new(chain(3).unwrap());
        let e = parse("stationarize(tracify(stabilize(builtin:witness,64)))").unwrap();
        assert!(build(&e, &s, &ctx()).unwrap().stationary.is_some());
    }

    #[test]
    fn stationarize_on_rationals_is_a_capability_error() {
        let s = Arc::new(rationals());
        let e = parse("stationarize(tracify(stabilize(builtin:half-ball,64)))").unwrap();
        assert!(matches!(build(&e, &s, &ctx()), Err(Error::Capability(_))));
    }

    #[test]
    fn lift_lands_on_the_target() {
        let s = Arc::new(choquet::instances::reals());
        let b = build(&parse("lift(builtin:half-ball2d, map:proj2)").unwrap(), &s, &ctx()).unwrap();
        assert_eq!(b.space.universe, Universe::Reals);
        let wrong = build(&parse("builtin:half-ball2d").unwrap(), &s, &ctx());
        assert!(matches!(wrong, Err(Error::Capability(_))));
    }
}
