//! Line-oriented game file format.
//!
//! ```text
//! p1states i f
//! p2states 1 2
//! p1actions a
//! p2actions alpha beta _
//! init i
//! final f
//! trans i a 1 1/2 2 1/2
//! ```

use std::collections::HashSet;

use num_traits::{One, Signed};

use super::{Dist, Game, GameError, MinimizerTable, TimedStrategy, UNLABELED};
use crate::rational::{fmt_rational, parse_rational, Rational};

const RESERVED_CHARS: &[char] = &['(', ')', '#', '=', ':', ','];

#[derive(Default)]
struct Header {
    s1: Option<Vec<String>>,
    s2: Option<Vec<String>>,
    a1: Option<Vec<String>>,
    a2: Option<Vec<String>>,
    init: Option<(usize, String)>,
    finals: Option<(usize, Vec<String>)>,
}

enum Side {
    Max(usize, usize),
    Min(usize, usize),
}

struct TransLine<'a> {
    line: usize,
    state: &'a str,
    action: &'a str,
    targets: Vec<(&'a str, &'a str)>,
}

pub fn parse_game(text: &str) -> Result<Game, GameError> {
    let mut header = Header::default();
    let mut trans = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let Some(directive) = tokens.next() else {
            continue;
        };
        let args: Vec<&str> = tokens.collect();
        let names = |slot: &mut Option<Vec<String>>, min: usize| -> Result<(), GameError> {
            if slot.is_some() {
                return Err(GameError::syntax(
                    line,
                    format!("duplicate `{directive}` line"),
                ));
            }
            if args.len() < min {
                return Err(GameError::syntax(
                    line,
                    format!("`{directive}` needs at least one name"),
                ));
            }
            *slot = Some(args.iter().map(|s| s.to_string()).collect());
            Ok(())
        };
        match directive {
            "p1states" => names(&mut header.s1, 1)?,
            "p2states" => names(&mut header.s2, 1)?,
            "p1actions" => names(&mut header.a1, 1)?,
            "p2actions" => names(&mut header.a2, 1)?,
            "init" => {
                if header.init.is_some() {
                    return Err(GameError::syntax(line, "duplicate `init` line"));
                }
                let [name] = args.as_slice() else {
                    return Err(GameError::syntax(line, "`init` takes exactly one state"));
                };
                header.init = Some((line, name.to_string()));
            }
            "final" => {
                if header.finals.is_some() {
                    return Err(GameError::syntax(line, "duplicate `final` line"));
                }
                header.finals = Some((line, args.iter().map(|s| s.to_string()).collect()));
            }
            "trans" => {
                if args.len() < 4 || !args.len().is_multiple_of(2) {
                    return Err(GameError::syntax(
                        line,
                        "expected `trans <state> <action> (<state> <prob>)+`",
                    ));
                }
                trans.push(TransLine {
                    line,
                    state: args[0],
                    action: args[1],
                    targets: args[2..].chunks(2).map(|c| (c[0], c[1])).collect(),
                });
            }
            other => {
                return Err(GameError::syntax(
                    line,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    let missing = |what: &str| GameError::Invalid(format!("missing `{what}` line"));
    let s1 = header.s1.ok_or_else(|| missing("p1states"))?;
    let s2 = header.s2.ok_or_else(|| missing("p2states"))?;
    let a1 = header.a1.ok_or_else(|| missing("p1actions"))?;
    let mut a2 = header.a2.unwrap_or_default();
    let (init_line, init) = header.init.ok_or_else(|| missing("init"))?;
    let (finals_line, final_names) = header.finals.unwrap_or((0, Vec::new()));

    check_names(&s1, &s2, &a1, &a2)?;

    // `_` may be used without being declared.
    if !a2.iter().any(|b| b == UNLABELED)
        && trans
            .iter()
            .any(|t| t.action == UNLABELED && s2.iter().any(|n| n == t.state))
    {
        a2.push(UNLABELED.to_string());
    }

    let pos = |list: &[String], name: &str| list.iter().position(|n| n == name);
    let initial = pos(&s1, &init).ok_or_else(|| {
        GameError::syntax(
            init_line,
            format!("initial state `{init}` is not a maximizer state"),
        )
    })?;
    let mut finals = vec![false; s1.len()];
    for name in &final_names {
        let s = pos(&s1, name).ok_or_else(|| {
            GameError::syntax(
                finals_line,
                format!("final state `{name}` is not a maximizer state"),
            )
        })?;
        finals[s] = true;
    }

    let mut p1: Vec<Vec<Dist>> = vec![vec![Vec::new(); a1.len()]; s1.len()];
    let mut p2: Vec<Vec<Option<Dist>>> = vec![vec![None; a2.len()]; s2.len()];
    for t in &trans {
        let err = |msg: String| GameError::syntax(t.line, msg);
        let side = if let Some(s) = pos(&s1, t.state) {
            let a = pos(&a1, t.action)
                .ok_or_else(|| err(format!("`{}` is not a maximizer action", t.action)))?;
            if !p1[s][a].is_empty() {
                return Err(err(format!(
                    "duplicate transition for ({}, {})",
                    t.state, t.action
                )));
            }
            Side::Max(s, a)
        } else if let Some(s) = pos(&s2, t.state) {
            let b = pos(&a2, t.action)
                .ok_or_else(|| err(format!("`{}` is not a minimizer action", t.action)))?;
            if p2[s][b].is_some() {
                return Err(err(format!(
                    "duplicate transition for ({}, {})",
                    t.state, t.action
                )));
            }
            Side::Min(s, b)
        } else {
            return Err(err(format!("unknown state `{}`", t.state)));
        };
        let (targets_list, side_name) = match side {
            Side::Max(..) => (&s2, "minimizer"),
            Side::Min(..) => (&s1, "maximizer"),
        };

        let mut dist: Dist = Vec::with_capacity(t.targets.len());
        for (target, prob) in &t.targets {
            let idx = pos(targets_list, target).ok_or_else(|| {
                err(format!(
                    "unknown state `{target}`: expected a {side_name} state"
                ))
            })?;
            let p = parse_rational(prob)
                .ok_or_else(|| err(format!("malformed probability `{prob}`")))?;
            if !p.is_positive() || p > Rational::one() {
                return Err(err(format!("probability {prob} is not in (0, 1]")));
            }
            if dist.iter().any(|(i, _)| *i == idx) {
                return Err(err(format!("target `{target}` listed twice")));
            }
            dist.push((idx, p));
        }
        let total = dist
            .iter()
            .fold(Rational::from_integer(0.into()), |acc, (_, p)| acc + p);
        if !total.is_one() {
            return Err(err(format!(
                "distribution sums to {} ≠ 1",
                fmt_rational(&total)
            )));
        }
        dist.sort_by_key(|(i, _)| *i);
        match side {
            Side::Max(s, a) => p1[s][a] = dist,
            Side::Min(t, b) => p2[t][b] = Some(dist),
        }
    }

    let game = Game {
        s1,
        s2,
        a1,
        a2,
        p1,
        p2,
        initial,
        finals,
    };
    game.validate()?;
    Ok(game)
}

fn check_names(
    s1: &[String],
    s2: &[String],
    a1: &[String],
    a2: &[String],
) -> Result<(), GameError> {
    let invalid = |m: String| Err(GameError::Invalid(m));
    for (list, what) in [
        (s1, "maximizer state"),
        (s2, "minimizer state"),
        (a1, "maximizer action"),
        (a2, "minimizer action"),
    ] {
        let mut seen = HashSet::new();
        for name in list {
            if !seen.insert(name) {
                return invalid(format!("{what} `{name}` declared twice"));
            }
            if name.contains(RESERVED_CHARS) {
                return invalid(format!("{what} `{name}` contains a reserved character"));
            }
        }
    }
    if let Some(n) = s1.iter().find(|n| s2.contains(n)) {
        return invalid(format!("state sets are not disjoint: `{n}` is in both"));
    }
    if let Some(n) = a1.iter().find(|n| a2.contains(n)) {
        return invalid(format!("action sets are not disjoint: `{n}` is in both"));
    }
    if a1.iter().any(|n| n == UNLABELED) {
        return invalid(format!("`{UNLABELED}` is reserved for minimizer actions"));
    }
    Ok(())
}

pub(super) fn print_game(g: &Game) -> String {
    let mut out = String::new();
    out.push_str(&format!("p1states {}\n", g.s1.join(" ")));
    out.push_str(&format!("p2states {}\n", g.s2.join(" ")));
    out.push_str(&format!("p1actions {}\n", g.a1.join(" ")));
    out.push_str(&format!("p2actions {}\n", g.a2.join(" ")));
    out.push_str(&format!("init {}\n", g.s1[g.initial]));
    let finals: Vec<&str> = g.finals().map(|s| g.s1[s].as_str()).collect();
    if finals.is_empty() {
        out.push_str("final\n");
    } else {
        out.push_str(&format!("final {}\n", finals.join(" ")));
    }
    let fmt_dist = |d: &Dist, names: &[String]| -> String {
        d.iter()
            .map(|(t, p)| format!("{} {}", names[*t], fmt_rational(p)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for (s, row) in g.p1.iter().enumerate() {
        for (a, d) in row.iter().enumerate() {
            out.push_str(&format!(
                "trans {} {} {}\n",
                g.s1[s],
                g.a1[a],
                fmt_dist(d, &g.s2)
            ));
        }
    }
    for (t, row) in g.p2.iter().enumerate() {
        for (b, d) in row.iter().enumerate() {
            if let Some(d) = d {
                out.push_str(&format!(
                    "trans {} {} {}\n",
                    g.s2[t],
                    g.a2[b],
                    fmt_dist(d, &g.s1)
                ));
            }
        }
    }
    out
}

/// Parses a minimizer strategy file for a word of length `len`:
/// one line per step, `step <i>: <s2name>=<action> ...`, steps numbered
/// from 1. States (and whole steps) that are not mentioned use their first
/// available action.
pub fn parse_strategy(g: &Game, text: &str, len: usize) -> Result<TimedStrategy, GameError> {
    let default = g.default_table();
    let mut steps = vec![default; len];
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| GameError::syntax(line, msg);
        let (head, body) = content
            .split_once(':')
            .ok_or_else(|| err("expected `step <i>: <state>=<action> ...`".into()))?;
        let i: usize = head
            .trim()
            .strip_prefix("step")
            .map(str::trim)
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| err(format!("malformed step header `{head}`")))?;
        if i == 0 || i > len {
            return Err(err(format!("step {i} is outside 1..={len}")));
        }
        if !seen.insert(i) {
            return Err(err(format!("step {i} given twice")));
        }
        let table: &mut MinimizerTable = &mut steps[i - 1];
        for assignment in body.split_whitespace() {
            let (state, action) = assignment
                .split_once('=')
                .ok_or_else(|| err(format!("expected `<state>=<action>`, got `{assignment}`")))?;
            let t = g
                .s2_index(state)
                .ok_or_else(|| err(format!("`{state}` is not a minimizer state")))?;
            let b = g
                .a2_index(action)
                .filter(|&b| g.p2[t][b].is_some())
                .ok_or_else(|| err(format!("`{action}` is not available at `{state}`")))?;
            table.0[t] = b;
        }
    }
    Ok(TimedStrategy { steps })
}
