#![allow(dead_code)]

use std::fmt::Write;
use std::path::PathBuf;

use halfblind::game::parse_game;
use halfblind::{Game, MinimizerTable, TimedStrategy, Word};
use rand::seq::SliceRandom;
use rand::Rng;

pub const FIXTURES: [&str; 5] = [
    "fig1.hb",
    "fig2.hb",
    "fig3_pa.hb",
    "fig4_gadget.hb",
    "fig5_game.hb",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> Game {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_game(&text).unwrap()
}

/// Splits 1 into `k` positive rationals with small denominators, as text.
fn random_probs<R: Rng>(rng: &mut R, k: usize) -> Vec<String> {
    let weights: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
    let total: u32 = weights.iter().sum();
    weights.iter().map(|w| format!("{w}/{total}")).collect()
}

fn random_targets<R: Rng>(rng: &mut R, names: &[String]) -> String {
    // Sparse supports give richer monoids.
    let k = if rng.gen_bool(0.5) {
        1
    } else {
        rng.gen_range(1..=names.len())
    };
    let mut picked: Vec<&String> = names.choose_multiple(rng, k).collect();
    picked.sort();
    picked
        .iter()
        .zip(random_probs(rng, k))
        .map(|(n, p)| format!(" {n} {p}"))
        .collect()
}

/// A random game file with the given upper bounds on its dimensions. Every
/// minimizer state has at least one action available.
pub fn random_game_text<R: Rng>(rng: &mut R, s1: usize, s2: usize, a1: usize, a2: usize) -> String {
    let n1 = rng.gen_range(1..=s1);
    let n2 = rng.gen_range(1..=s2);
    let k1 = rng.gen_range(1..=a1);
    let k2 = rng.gen_range(1..=a2);
    sized_game_text(rng, n1, n2, k1, k2)
}

/// A random game file with exactly the given dimensions.
pub fn sized_game_text<R: Rng>(rng: &mut R, n1: usize, n2: usize, k1: usize, k2: usize) -> String {
    let s1n: Vec<String> = (0..n1).map(|i| format!("s{i}")).collect();
    let s2n: Vec<String> = (0..n2).map(|i| format!("t{i}")).collect();
    let a1n: Vec<String> = ["a", "b", "c"][..k1]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let a2n: Vec<String> = ["x", "y", "z"][..k2]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let finals: Vec<&String> = s1n.iter().filter(|_| rng.gen_bool(0.4)).collect();

    let mut out = String::new();
    writeln!(out, "p1states {}", s1n.join(" ")).unwrap();
    writeln!(out, "p2states {}", s2n.join(" ")).unwrap();
    writeln!(out, "p1actions {}", a1n.join(" ")).unwrap();
    writeln!(out, "p2actions {}", a2n.join(" ")).unwrap();
    writeln!(out, "init {}", s1n[rng.gen_range(0..n1)]).unwrap();
    let finals: Vec<&str> = finals.iter().map(|s| s.as_str()).collect();
    writeln!(out, "final {}", finals.join(" ")).unwrap();
    for s in &s1n {
        for a in &a1n {
            writeln!(out, "trans {s} {a}{}", random_targets(rng, &s2n)).unwrap();
        }
    }
    for t in &s2n {
        let k = rng.gen_range(1..=k2);
        for b in a2n.choose_multiple(rng, k) {
            writeln!(out, "trans {t} {b}{}", random_targets(rng, &s1n)).unwrap();
        }
    }
    out
}

pub fn random_game<R: Rng>(rng: &mut R, s1: usize, s2: usize, a1: usize, a2: usize) -> Game {
    let text = random_game_text(rng, s1, s2, a1, a2);
    parse_game(&text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

pub fn random_word<R: Rng>(rng: &mut R, g: &Game, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word((0..len).map(|_| rng.gen_range(0..g.num_a1())).collect())
}

pub fn random_table<R: Rng>(rng: &mut R, g: &Game) -> MinimizerTable {
    MinimizerTable(
        (0..g.num_s2())
            .map(|t| *g.available(t).choose(rng).unwrap())
            .collect(),
    )
}

pub fn random_strategy<R: Rng>(rng: &mut R, g: &Game, len: usize) -> TimedStrategy {
    TimedStrategy {
        steps: (0..len).map(|_| random_table(rng, g)).collect(),
    }
}
