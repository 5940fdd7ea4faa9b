//! `choquet`: analyze presentations, build bases, solve finite games, run
//! transformations and sweeps, and play against a strategy as Empty.

mod expr;

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use choquet::bases::{
    analyze, build_open_finite, build_uniform, load_space, uniform_convergence_probe, DyadicOracle, ExactOracle,
    Part, RefinementOracle, DEFAULT_PREFIX,
};
use choquet::game::{
    down_sets, evaluate, explain_empty_move, run_play, EmptyStrategy, LimitPredicate, Move, Payoff, Play, Round,
    Strategy, Winner,
};
use choquet::instances::{by_name, rationals_empty_winner, RandomIntervals};
use choquet::rational::pow2_neg;
use choquet::solver::{
    enumerate_topologies, random_predicates, sample_topologies, solve, sweep_predicates, sweep_space,
    verify_winning, SweepStats, Witness,
};
use choquet::topology::{bits, Basic, Point, Space, Universe};
use choquet::{Error, Side};

use expr::{build, parse, Built, Context};

/// Plays run by `transform` on interval presentations.
const CERT_PLAYS: u64 = 8;
/// Width below which a nested interactive play counts as converged.
const PLAY_TOLERANCE: u32 = 8;

#[derive(Parser)]
#[command(name = "choquet", version, about = "Generalized Choquet games on effectively presented spaces")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Rounds to play, stages to build, or depth to probe.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Catalog prefix examined by analyses and constructions.
    #[arg(long, global = true)]
    prefix: Option<usize>,
    /// Write the play transcript here.
    #[arg(long, global = true)]
    transcript: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the four basis classes on a presentation.
    Analyze {
        /// Presentation file, or `instance:NAME`.
        file: String,
    },
    /// Build an open-finite or uniform basis.
    BuildBasis {
        #[arg(value_enum)]
        kind: BasisKind,
        file: String,
        /// Stationary strategy driving the uniform construction.
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Solve the game on a finite presentation for a limit predicate.
    Solve {
        file: Option<String>,
        /// `limit=SET`, `limit⊆SET`, `limit∋POINT`, `true`, joined by `|`.
        #[arg(long, default_value = "true")]
        predicate: String,
        /// Sweep all 3-point topologies instead of one file.
        #[arg(long)]
        all_3pt: bool,
        /// With `--all-3pt`: one `limit=W` predicate per open `W`.
        #[arg(long)]
        singleton_predicates: bool,
    },
    /// Play as Empty against a strategy, interactively or with a seeded adversary.
    Play {
        file: String,
        /// Strategy expression, e.g. `builtin:copycat` or `tracify(builtin:witness)`.
        #[arg(long)]
        strategy: String,
        /// Limit predicate; finite spaces only.
        #[arg(long)]
        predicate: Option<String>,
        /// Let a seeded Empty play instead of reading moves from stdin.
        #[arg(long, value_enum)]
        adversary: Option<Adversary>,
    },
    /// Build a strategy expression and certify it.
    Transform {
        expr: String,
        file: String,
        /// Limit predicate for `builtin:witness` and for certification.
        #[arg(long)]
        predicate: Option<String>,
    },
    /// Solve and certify many (topology, predicate) instances.
    Sweep {
        /// Include all 3-point topologies.
        #[arg(long)]
        all_3pt: bool,
        /// Also sample this many 4-point topologies.
        #[arg(long)]
        four_point: Option<usize>,
        #[arg(long, value_enum, default_value = "all")]
        predicates: PredicateSet,
        /// Same as `--predicates singletons`.
        #[arg(long)]
        singleton_predicates: bool,
        /// Run stationarize∘tracify∘stabilize on every Nonempty witness.
        #[arg(long)]
        pipeline: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisKind {
    OpenFinite,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Adversary {
    Random,
    RationalsWinner,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PredicateSet {
    All,
    Singletons,
    DownSets,
    Random,
}

enum Fail {
    Usage(String),
    Violation(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        match e {
            Error::Construction(_) | Error::OracleContract(_) | Error::MapInvariant(_) => Fail::Violation(e.to_string()),
            Error::IllegalMove { side: Side::Nonempty, .. } => Fail::Violation(e.to_string()),
            _ => Fail::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Fail>;

fn load(spec: &str) -> Result<Space, Fail> {
    if let Some(name) = spec.strip_prefix("instance:") {
        return Ok(by_name(name)?);
    }
    let text = fs::read_to_string(spec).map_err(|e| Fail::Usage(format!("cannot read `{spec}`: {e}")))?;
    load_space(&text).map_err(|e| Fail::Usage(format!("{spec}: {e}")))
}

fn predicate(space: &Space, text: Option<&str>) -> Result<LimitPredicate, Fail> {
    match text {
        Some(t) => Ok(LimitPredicate::parse(space, t)?),
        None => Ok(LimitPredicate::Any),
    }
}

fn cmd_analyze(cli: &Cli, file: &str) -> Outcome {
    let space = load(file)?;
    let report = analyze(&space, cli.prefix.unwrap_or(DEFAULT_PREFIX))?;
    print!("{report}");
    Ok(!report.any_refuted())
}

fn cmd_open_finite(cli: &Cli, space: &Space) -> Outcome {
    let b = build_open_finite(space, cli.prefix.unwrap_or(DEFAULT_PREFIX))?;
    println!("open-finite basis for {} from {} catalog codes", space.name, b.source.len());
    let mut ok = true;
    for e in &b.certificate {
        let tag = match e.part {
            Part::V => "V",
            Part::W => "W",
        };
        let fine = e.within_bounds();
        ok &= fine;
        println!(
            "{tag}_{} | {} | supersets V {} W {} | bounds {} {} | {}",
            e.index,
            space.fmt_basic(&e.code),
            e.supersets_v,
            e.supersets_w,
            e.bound_v,
            e.bound_w,
            if fine { "ok" } else { "VIOLATED" }
        );
    }
    println!("bounds: {}", if ok { "all hold" } else { "violated" });
    Ok(ok)
}

fn probe_points(space: &Space) -> Result<Vec<Point>, Fail> {
    if space.is_finite() {
        return Ok(space.points());
    }
    Ok(["0", "1/3", "-5/7"].iter().map(|p| space.parse_point(p)).collect::<Result<_, _>>()?)
}

fn cmd_uniform(cli: &Cli, space: Arc<Space>, strategy: Option<&str>) -> Outcome {
    let intervals = matches!(space.universe, Universe::Rationals | Universe::Reals);
    let default = if intervals { "builtin:half-ball" } else { "builtin:countable-order" };
    let e = parse(strategy.unwrap_or(default))?;
    let built = build(&e, &space, &Context { predicate: None, seed: cli.seed })?;
    let s = built.stationary.ok_or_else(|| Fail::Usage(format!("`{e}` is not a stationary strategy")))?;
    let oracle: Box<dyn RefinementOracle> = if space.is_finite() {
        Box::new(ExactOracle)
    } else if intervals {
        Box::new(DyadicOracle)
    } else {
        return Err(Fail::Usage(format!("no refinement oracle for `{}`", space.name)));
    };
    let stages = cli.depth.unwrap_or(6);
    let staged = build_uniform(&space, &s, oracle.as_ref(), stages)?;
    println!("uniform basis for {} via {} with the {} oracle", space.name, e, oracle.name());
    for (i, st) in staged.stages.iter().enumerate() {
        println!("B_{i} | {} | max overlap {}", st.family.describe(), st.max_overlap);
    }
    let mut ok = true;
    if space.is_finite() {
        let basis = staged.union_is_basis(&space)?;
        println!("union is a basis: {}", if basis { "yes" } else { "NO" });
        ok &= basis;
    }
    for x in probe_points(&space)? {
        let conv = uniform_convergence_probe(&space, &staged, &x, stages)?;
        println!("probe at {}: {}", space.fmt_point(&x), if conv { "converges" } else { "DOES NOT converge" });
        ok &= conv;
    }
    Ok(ok)
}

fn predicates_for(space: &Space, set: PredicateSet, seed: u64) -> Vec<LimitPredicate> {
    match set {
        PredicateSet::All => sweep_predicates(space, seed),
        PredicateSet::Singletons => space.opens().into_iter().map(LimitPredicate::Eq).collect(),
        PredicateSet::DownSets => down_sets(space),
        PredicateSet::Random => random_predicates(space, seed, 64),
    }
}

fn run_sweep(cli: &Cli, three: bool, four: Option<usize>, set: PredicateSet, pipeline: bool) -> Outcome {
    let mut spaces = Vec::new();
    if three || four.is_none() {
        spaces.extend(enumerate_topologies(3)?);
    }
    if let Some(n) = four {
        spaces.extend(sample_topologies(4, n, cli.seed)?);
    }
    let set_name = match set {
        PredicateSet::All => "all",
        PredicateSet::Singletons => "singletons",
        PredicateSet::DownSets => "down-sets",
        PredicateSet::Random => "random",
    };
    println!("sweep | seed {} | predicates {set_name} | pipeline {}", cli.seed, if pipeline { "yes" } else { "no" });
    let mut total = SweepStats::default();
    for (k, s) in spaces.into_iter().enumerate() {
        let s = Arc::new(s);
        let preds = predicates_for(&s, set, cli.seed.wrapping_add(k as u64));
        let (st, _) = sweep_space(&s, &preds, pipeline)?;
        println!("{} | {st}", s.name);
        total.add(&st);
    }
    println!("total | {total}");
    let pct = 100.0 * total.certified as f64 / total.instances.max(1) as f64;
    println!("certified: {pct:.1}%");
    Ok(total.all_passed())
}

fn cmd_solve(cli: &Cli, file: Option<&str>, pred: &str, all_3pt: bool, singletons: bool) -> Outcome {
    if all_3pt {
        let set = if singletons { PredicateSet::Singletons } else { PredicateSet::All };
        return run_sweep(cli, true, None, set, false);
    }
    let file = file.ok_or_else(|| Fail::Usage("solve needs a presentation file or --all-3pt".into()))?;
    let space = load(file)?;
    if !space.is_finite() {
        return Err(Error::Capability(format!("`{}` is infinite; the solver needs a finite space", space.name)).into());
    }
    let q = predicate(&space, Some(pred))?;
    let r = solve(&space, &q)?;
    print!("{}", r.render(&space, &q));
    Ok(r.certified)
}

/// Seeded Empty on finite spaces: a random catalog basic inside the last
/// reply and a random point of it.
struct RandomFinite(ChaCha8Rng);

impl EmptyStrategy for RandomFinite {
    fn next_move(&mut self, space: &Space, rounds: &[Round]) -> choquet::Result<Move> {
        let v = rounds.last().map_or_else(|| space.top(), |r| r.v.clone()).mask().expect("finite");
        let us: Vec<u64> = space.masks().into_iter().filter(|u| u & !v == 0).collect();
        let u = us[self.0.gen_range(0..us.len())];
        let xs: Vec<usize> = bits(u).collect();
        Ok(Move::new(Point::Index(xs[self.0.gen_range(0..xs.len())]), Basic::Mask(u)))
    }
}

fn payoff(space: &Space, q: &LimitPredicate) -> Payoff {
    if space.is_finite() {
        Payoff::Limit(q.clone())
    } else {
        Payoff::convergence(pow2_neg(PLAY_TOLERANCE))
    }
}

fn finish(cli: &Cli, play: &Play, pay: &Payoff) -> Outcome {
    let verdict = evaluate(pay, play);
    let mut text = play.transcript_lines().join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    text.push_str(&format!("{verdict}\n"));
    print!("{text}");
    if let Some(p) = &cli.transcript {
        fs::write(p, &text).map_err(|e| Fail::Usage(format!("cannot write `{}`: {e}", p.display())))?;
    }
    Ok(verdict.winner != Winner::Empty)
}

fn cmd_play(cli: &Cli, file: &str, strategy: &str, pred: Option<&str>, adversary: Option<Adversary>) -> Outcome {
    let space = Arc::new(load(file)?);
    let q = if space.is_finite() { predicate(&space, pred)? } else { LimitPredicate::Any };
    let ctx = Context { predicate: pred.map(str::to_string), seed: cli.seed };
    let Built { strategy: s, .. } = build(&parse(strategy)?, &space, &ctx)?;
    let pay = payoff(&space, &q);
    if let Some(a) = adversary {
        let rounds = cli.depth.unwrap_or(16);
        let mut empty: Box<dyn EmptyStrategy> = match a {
            Adversary::Random if space.is_finite() => Box::new(RandomFinite(ChaCha8Rng::seed_from_u64(cli.seed))),
            Adversary::Random => Box::new(RandomIntervals::new(cli.seed)),
            Adversary::RationalsWinner => Box::new(rationals_empty_winner(cli.seed)),
        };
        let play = run_play(&space, empty.as_mut(), &s, rounds)?;
        return finish(cli, &play, &pay);
    }
    let live = if space.is_finite() { Some(solve(&space, &q)?) } else { None };
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut play = Play::new(space.clone());
    let mut moves = Vec::new();
    println!("you are Empty; enter `x; U` or `quit`");
    loop {
        if cli.depth.is_some_and(|d| play.rounds.len() >= d) {
            break;
        }
        let current = play.last_v().cloned().unwrap_or_else(|| space.top());
        print!("[{}] V = {} > ", play.rounds.len(), space.fmt_basic(&current));
        io::stdout().flush().ok();
        let Some(line) = lines.next() else { break };
        let line = line.map_err(|e| Fail::Usage(format!("stdin: {e}")))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "quit" {
            break;
        }
        let Some((xs, us)) = line.split_once(';') else {
            println!("rejected: expected `x; U`");
            continue;
        };
        let m = match (space.parse_point(xs), space.parse_basic(us)) {
            (Ok(x), Ok(u)) => Move::new(x, u),
            (Err(e), _) | (_, Err(e)) => {
                println!("rejected: {e}");
                continue;
            }
        };
        if let Some(reason) = explain_empty_move(&space, play.last_v(), &m)? {
            println!("rejected: {reason}");
            continue;
        }
        moves.push(m.clone());
        let v = s.respond(&moves)?;
        play.push(m, v.clone())?;
        println!("{}", play.transcript_lines().last().expect("just pushed"));
        if let Some(r) = &live {
            let side = r.per_open.iter().find(|(o, _)| Some(*o) == v.mask()).map(|(_, s)| *s);
            if let Some(side) = side {
                println!("solver: {side} wins from {}", space.fmt_basic(&v));
            }
        }
    }
    println!();
    finish(cli, &play, &pay)
}

fn certify_intervals(space: &Arc<Space>, s: &dyn Strategy, depth: usize, seed: u64) -> Result<bool, Fail> {
    let mut ok = 0;
    for k in 0..CERT_PLAYS {
        let play = run_play(space, &mut RandomIntervals::new(seed.wrapping_add(k)), s, depth)?;
        let r0 = play.rounds[0].u.radius().expect("bounded first move");
        let last = play.rounds[depth - 1].v.radius().expect("bounded reply");
        ok += (last <= r0 * pow2_neg((depth / 2) as u32)) as u64;
    }
    println!("certification: {ok}/{CERT_PLAYS} seeded {depth}-round plays legal and shrinking by 2^-{}", depth / 2);
    Ok(ok == CERT_PLAYS)
}

fn cmd_transform(cli: &Cli, text: &str, file: &str, pred: Option<&str>) -> Outcome {
    let space = Arc::new(load(file)?);
    let e = parse(text)?;
    let built = build(&e, &space, &Context { predicate: pred.map(str::to_string), seed: cli.seed })?;
    println!("descriptor: {e}");
    println!("space: {}", space.name);
    println!("form: {}", if built.stationary.is_some() { "stationary" } else { "history-dependent" });
    if space.is_finite() {
        if let Some(st) = &built.stationary {
            println!("table:");
            for u in space.masks() {
                for x in bits(u) {
                    let (p, b) = (Point::Index(x), Basic::Mask(u));
                    let v = st.respond1(&p, &b)?;
                    println!("  ({}, {}) -> {}", space.fmt_point(&p), space.fmt_basic(&b), space.fmt_basic(&v));
                }
            }
        }
        let q = predicate(&space, pred)?;
        let ok = verify_winning(&space, &q, Witness::Nonempty(built.strategy.as_ref()))?;
        println!("certification: verify_winning against {}: {}", q.describe(&space), if ok { "passed" } else { "FAILED" });
        return Ok(ok);
    }
    if matches!(space.universe, Universe::Rationals | Universe::Reals) {
        let depth = cli.depth.unwrap_or(16).max(2);
        return certify_intervals(&space, built.strategy.as_ref(), depth, cli.seed);
    }
    println!("certification: none available on `{}`", space.name);
    Ok(true)
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Analyze { file } => cmd_analyze(cli, file),
        Cmd::BuildBasis { kind: BasisKind::OpenFinite, file, .. } => cmd_open_finite(cli, &load(file)?),
        Cmd::BuildBasis { kind: BasisKind::Uniform, file, strategy } => {
            cmd_uniform(cli, Arc::new(load(file)?), strategy.as_deref())
        }
        Cmd::Solve { file, predicate, all_3pt, singleton_predicates } => {
            cmd_solve(cli, file.as_deref(), predicate, *all_3pt, *singleton_predicates)
        }
        Cmd::Play { file, strategy, predicate, adversary } => {
            cmd_play(cli, file, strategy, predicate.as_deref(), *adversary)
        }
        Cmd::Transform { expr, file, predicate } => cmd_transform(cli, expr, file, predicate.as_deref()),
        Cmd::Sweep { all_3pt, four_point, predicates, singleton_predicates, pipeline } => {
            let set = if *singleton_predicates { PredicateSet::Singletons } else { *predicates };
            run_sweep(cli, *all_3pt, *four_point, set, *pipeline)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fail::Violation(m)) => {
            eprintln!("violation: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
