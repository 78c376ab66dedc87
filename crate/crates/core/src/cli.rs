//! Command-line front end. [`run_cli`] does all the work and returns the
//! exit code and both output streams, so it can be driven from tests.
//!
//! Exit codes: `check` returns 0 (maxmin one), 1 (not maxmin one),
//! 2 (not leaktight) or 3 (budget exhausted). Every command returns 3 on
//! I/O failure and 4 on usage, parse or validation errors.

use std::ffi::OsString;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::belief::{close_belief_monoid, decide, Answer, BeliefMonoid, ClosureConfig, Exhausted};
use crate::expr::WordExpr;
use crate::game::{parse_game, parse_strategy, Game, TimedStrategy};
use crate::markov::DEFAULT_MAX_ELEMS;
use crate::oracle::{self, RationalDist, DEFAULT_MAX_LEN};
use crate::rational::fmt_rational;

pub const EXIT_IO: u8 = 3;
pub const EXIT_INPUT: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliOutput {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "halfblind",
    version,
    about = "Maxmin reachability for half-blind stochastic games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether the maximizer can reach the final states with
    /// probability arbitrarily close to 1.
    Check {
        game: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: Budget,
    },
    /// Close the belief monoid and report its size.
    Monoid {
        game: PathBuf,
        /// Print every belief with its member matrices.
        #[arg(long)]
        dump: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: Budget,
    },
    /// Distribution over maximizer states after playing a word.
    Eval {
        game: PathBuf,
        #[arg(long)]
        word: String,
        /// Minimizer strategy file (`step <i>: <state>=<action> ...`);
        /// defaults to the first available action everywhere.
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// Start state instead of the initial one.
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Best value and word over all words up to a length.
    Maxmin {
        game: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Expand a word expression, repeating each iteration `n` times.
    Materialize {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        n: usize,
        /// Resolve letters against this game's maximizer alphabet.
        #[arg(long)]
        game: Option<PathBuf>,
    },
    /// Graphviz export of the arena.
    Dot { game: PathBuf },
}

#[derive(Args, Debug, Clone, Copy)]
struct Budget {
    #[arg(long, default_value_t = crate::belief::DEFAULT_MAX_BELIEFS)]
    max_beliefs: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ELEMS)]
    max_elems: usize,
    /// Worker threads for the closure; 1 disables parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

impl Budget {
    fn config(&self) -> ClosureConfig {
        ClosureConfig {
            max_beliefs: self.max_beliefs,
            max_elems: self.max_elems,
            parallel: self.threads != Some(1),
        }
    }
}

enum Failure {
    Io(String),
    Input(String),
}

type Run = Result<(u8, String), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<Game, Failure> {
    let text = read(path)?;
    parse_game(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn start_state(g: &Game, from: Option<&str>) -> Result<usize, Failure> {
    match from {
        None => Ok(g.initial()),
        Some(name) => g
            .s1_index(name)
            .ok_or_else(|| Failure::Input(format!("unknown maximizer state `{name}`"))),
    }
}

/// Runs `f` on a dedicated pool when a thread count is given.
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Failure::Io(format!("cannot start thread pool: {e}"))),
    }
}

pub fn run_cli<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            return if e.use_stderr() {
                CliOutput {
                    code,
                    stderr: text,
                    ..Default::default()
                }
            } else {
                CliOutput {
                    code,
                    stdout: text,
                    ..Default::default()
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok((code, stdout)) => CliOutput {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(Failure::Io(msg)) => CliOutput {
            code: EXIT_IO,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Input(msg)) => CliOutput {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn dispatch(command: Command) -> Run {
    match command {
        Command::Check { game, json, budget } => check(&game, json, budget),
        Command::Monoid {
            game,
            dump,
            json,
            budget,
        } => monoid(&game, dump, json, budget),
        Command::Eval {
            game,
            word,
            strategy,
            from,
            json,
        } => eval(&game, &word, strategy.as_deref(), from.as_deref(), json),
        Command::Maxmin {
            game,
            max_len,
            from,
            json,
            threads,
        } => maxmin(&game, max_len, from.as_deref(), json, threads),
        Command::Materialize { expr, n, game } => materialize(&expr, n, game.as_deref()),
        Command::Dot { game } => Ok((0, load_game(&game)?.to_dot())),
    }
}

pub fn exit_code(answer: &Answer) -> u8 {
    match answer {
        Answer::MaxminOne { .. } => 0,
        Answer::NotMaxminOne => 1,
        Answer::NotLeaktight => 2,
        Answer::BudgetExhausted => 3,
    }
}

fn check(path: &Path, json: bool, budget: Budget) -> Run {
    let g = load_game(path)?;
    let cfg = budget.config();
    let verdict = with_threads(budget.threads, || decide(&g, &cfg))?;
    let report = verdict.report(&g);
    let out = if json {
        report.to_json() + "\n"
    } else {
        report.to_text()
    };
    Ok((exit_code(&verdict.answer), out))
}

#[derive(Serialize)]
struct MonoidReport {
    beliefs: usize,
    elements: usize,
    idempotent_beliefs: usize,
    budget: Option<String>,
}

fn dump_monoid(g: &Game, m: &BeliefMonoid, out: &mut String) {
    let letters = g.a1_names();
    for (i, belief) in m.beliefs.iter().enumerate() {
        let expr = belief.provenance.display(letters).to_string();
        let idem = match m.is_idempotent(i) {
            Some(true) => ", idempotent",
            _ => "",
        };
        writeln!(
            out,
            "belief {i}: [{}] ({} members{idem})",
            if expr.is_empty() { "1" } else { &expr },
            belief.len()
        )
        .unwrap();
        for &id in belief.members.iter() {
            let e = m.store.get(id);
            writeln!(out, "element {id}").unwrap();
            out.push_str(&e.action.to_string());
            if e.support != e.action {
                out.push_str("support\n");
                out.push_str(&e.support.to_string());
            }
        }
        out.push('\n');
    }
}

fn monoid(path: &Path, dump: bool, json: bool, budget: Budget) -> Run {
    let g = load_game(path)?;
    let cfg = budget.config();
    let (m, hit) = match with_threads(budget.threads, || close_belief_monoid(&g, &cfg))? {
        Ok(m) => (m, None),
        Err(Exhausted { error, partial }) => (*partial, Some(error)),
    };
    let report = MonoidReport {
        beliefs: m.len(),
        elements: m.store.len(),
        idempotent_beliefs: (0..m.len())
            .filter(|&i| m.is_idempotent(i) == Some(true))
            .count(),
        budget: hit.as_ref().map(ToString::to_string),
    };
    let code = if hit.is_some() { EXIT_IO } else { 0 };
    if json {
        return Ok((
            code,
            serde_json::to_string(&report).expect("serializes") + "\n",
        ));
    }
    let mut out = String::new();
    if dump {
        dump_monoid(&g, &m, &mut out);
    }
    writeln!(
        out,
        "beliefs: {}\nelements: {}\nidempotent beliefs: {}",
        report.beliefs, report.elements, report.idempotent_beliefs
    )
    .unwrap();
    if let Some(b) = &report.budget {
        writeln!(out, "budget: {b}").unwrap();
    }
    Ok((code, out))
}

#[derive(Serialize)]
struct EvalReport {
    word: String,
    from: String,
    distribution: Vec<(String, String)>,
    final_mass: String,
}

fn eval(path: &Path, word: &str, strategy: Option<&Path>, from: Option<&str>, json: bool) -> Run {
    let g = load_game(path)?;
    let w = g
        .parse_word(word)
        .map_err(|e| Failure::Input(e.to_string()))?;
    let tau = match strategy {
        Some(p) => {
            let text = read(p)?;
            parse_strategy(&g, &text, w.len())
                .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => TimedStrategy::constant(&g.default_table(), w.len()),
    };
    let s0 = start_state(&g, from)?;
    let dist = oracle::distribution_after(&g, &w, &tau, &RationalDist::point(g.num_s1(), s0))
        .map_err(|e| Failure::Input(e.to_string()))?;
    let report = EvalReport {
        word: g.word_text(&w),
        from: g.s1_names()[s0].clone(),
        distribution: g
            .s1_names()
            .iter()
            .zip(&dist.0)
            .map(|(n, p)| (n.clone(), fmt_rational(p)))
            .collect(),
        final_mass: fmt_rational(&dist.mass(g.finals())),
    };
    if json {
        return Ok((
            0,
            serde_json::to_string(&report).expect("serializes") + "\n",
        ));
    }
    let mut out = String::new();
    for (name, p) in &report.distribution {
        writeln!(out, "{name}: {p}").unwrap();
    }
    writeln!(out, "final: {}", report.final_mass).unwrap();
    Ok((0, out))
}

#[derive(Serialize)]
struct MaxminReport {
    from: String,
    max_len: usize,
    value: String,
    word: String,
}

fn maxmin(
    path: &Path,
    max_len: usize,
    from: Option<&str>,
    json: bool,
    threads: Option<usize>,
) -> Run {
    let g = load_game(path)?;
    let s0 = start_state(&g, from)?;
    let parallel = threads != Some(1);
    let (value, word) = with_threads(threads, || {
        oracle::bounded_maxmin(&g, s0, max_len, DEFAULT_MAX_LEN, parallel)
    })?
    .map_err(|e| Failure::Input(e.to_string()))?;
    let report = MaxminReport {
        from: g.s1_names()[s0].clone(),
        max_len,
        value: fmt_rational(&value),
        word: g.word_text(&word),
    };
    if json {
        return Ok((
            0,
            serde_json::to_string(&report).expect("serializes") + "\n",
        ));
    }
    Ok((
        0,
        format!("value: {}\nword: {}\n", report.value, report.word),
    ))
}

/// Longest materialized word printed by the CLI.
const MATERIALIZE_CAP: usize = 1 << 20;

fn materialize(expr: &str, n: usize, game: Option<&Path>) -> Run {
    let (e, alphabet) = match game {
        Some(p) => {
            let g = load_game(p)?;
            let alphabet = g.a1_names().to_vec();
            (WordExpr::parse(expr, &alphabet), alphabet)
        }
        None => match WordExpr::parse_chars(expr) {
            Ok((e, a)) => (Ok(e), a),
            Err(err) => (Err(err), Vec::new()),
        },
    };
    let e = e.map_err(|err| Failure::Input(err.to_string()))?;
    let word = e
        .materialize_capped(n, MATERIALIZE_CAP)
        .map_err(|err| Failure::Input(err.to_string()))?;
    let sep = if alphabet.iter().all(|a| a.chars().count() == 1) {
        ""
    } else {
        " "
    };
    let text: Vec<&str> = word
        .letters()
        .iter()
        .map(|&a| alphabet[a].as_str())
        .collect();
    Ok((0, text.join(sep) + "\n"))
}
