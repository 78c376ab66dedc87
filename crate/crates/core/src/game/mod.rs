//! Half-blind game arenas: a bipartite graph between maximizer states `S1`
//! and minimizer states `S2`, with exact rational transition probabilities.
//!
//! Indices of states and actions are their position in the declaring line
//! of the game file; every matrix in the crate uses that order.

mod dot;
mod text;

use num_traits::Zero;

use crate::markov::ExtElem;
use crate::matrix::{BitMatrix, MAX_DIM};
use crate::rational::{fmt_rational, RatMatrix, Rational};

pub use text::{parse_game, parse_strategy};

/// Action name for single unlabeled minimizer edges.
pub const UNLABELED: &str = "_";

/// Sparse distribution: `(target index, probability)` sorted by target.
pub type Dist = Vec<(usize, Rational)>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

impl GameError {
    pub(crate) fn syntax(line: usize, msg: impl Into<String>) -> Self {
        GameError::Syntax {
            line,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    pub(crate) s1: Vec<String>,
    pub(crate) s2: Vec<String>,
    pub(crate) a1: Vec<String>,
    pub(crate) a2: Vec<String>,
    /// `[s][a]`: distribution over `S2`; total.
    pub(crate) p1: Vec<Vec<Dist>>,
    /// `[t][b]`: distribution over `S1` when `b` is available at `t`.
    pub(crate) p2: Vec<Vec<Option<Dist>>>,
    pub(crate) initial: usize,
    pub(crate) finals: Vec<bool>,
}

/// A pure stationary minimizer choice: one available action per `S2` state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinimizerTable(pub Vec<usize>);

impl MinimizerTable {
    pub fn choice(&self, t: usize) -> usize {
        self.0[t]
    }
}

/// A pure time-dependent minimizer strategy over a finite horizon.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimedStrategy {
    pub steps: Vec<MinimizerTable>,
}

impl TimedStrategy {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn constant(table: &MinimizerTable, len: usize) -> Self {
        TimedStrategy {
            steps: vec![table.clone(); len],
        }
    }
}

/// A maximizer word, as indices into `A1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }
}

impl Game {
    pub fn s1_names(&self) -> &[String] {
        &self.s1
    }

    pub fn s2_names(&self) -> &[String] {
        &self.s2
    }

    pub fn a1_names(&self) -> &[String] {
        &self.a1
    }

    pub fn a2_names(&self) -> &[String] {
        &self.a2
    }

    pub fn num_s1(&self) -> usize {
        self.s1.len()
    }

    pub fn num_s2(&self) -> usize {
        self.s2.len()
    }

    pub fn num_a1(&self) -> usize {
        self.a1.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals[s]
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter_map(|(s, &f)| f.then_some(s))
    }

    pub fn s1_index(&self, name: &str) -> Option<usize> {
        self.s1.iter().position(|n| n == name)
    }

    pub fn s2_index(&self, name: &str) -> Option<usize> {
        self.s2.iter().position(|n| n == name)
    }

    pub fn a1_index(&self, name: &str) -> Option<usize> {
        self.a1.iter().position(|n| n == name)
    }

    pub fn a2_index(&self, name: &str) -> Option<usize> {
        self.a2.iter().position(|n| n == name)
    }

    /// Distribution over `S2` after the maximizer plays `a` in `s`.
    pub fn p1_dist(&self, s: usize, a: usize) -> &Dist {
        &self.p1[s][a]
    }

    /// Distribution over `S1` after the minimizer plays `b` in `t`, if `b`
    /// is available there.
    pub fn p2_dist(&self, t: usize, b: usize) -> Option<&Dist> {
        self.p2[t][b].as_ref()
    }

    /// Actions available at minimizer state `t`, in `A2` order.
    pub fn available(&self, t: usize) -> Vec<usize> {
        self.p2[t]
            .iter()
            .enumerate()
            .filter_map(|(b, d)| d.as_ref().map(|_| b))
            .collect()
    }

    /// The table choosing the first available action everywhere.
    pub fn default_table(&self) -> MinimizerTable {
        MinimizerTable((0..self.num_s2()).map(|t| self.available(t)[0]).collect())
    }

    pub fn is_valid_table(&self, table: &MinimizerTable) -> bool {
        table.0.len() == self.num_s2()
            && table
                .0
                .iter()
                .enumerate()
                .all(|(t, &b)| b < self.a2.len() && self.p2[t][b].is_some())
    }

    /// Every pure stationary minimizer table, in lexicographic order of the
    /// choices listed along `S2` (the last minimizer state varies fastest).
    pub fn stationary_tables(&self) -> Vec<MinimizerTable> {
        let options: Vec<Vec<usize>> = (0..self.num_s2()).map(|t| self.available(t)).collect();
        let mut out = vec![MinimizerTable(Vec::with_capacity(options.len()))];
        for opts in &options {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    opts.iter().map(move |&b| {
                        let mut next = prefix.clone();
                        next.0.push(b);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// Number of stationary tables, without enumerating them.
    pub fn num_stationary_tables(&self) -> u128 {
        (0..self.num_s2())
            .map(|t| self.available(t).len() as u128)
            .product()
    }

    /// One-step transition probabilities between maximizer states when the
    /// maximizer plays `a` and the minimizer answers with `table`.
    pub fn step_matrix(&self, a: usize, table: &MinimizerTable) -> RatMatrix {
        let n = self.num_s1();
        let mut m = RatMatrix::zeros(n);
        for s in 0..n {
            for (mid, p) in &self.p1[s][a] {
                let dist = self.p2[*mid][table.choice(*mid)]
                    .as_ref()
                    .expect("table picks an available action");
                for (t, q) in dist {
                    *m.get_mut(s, *t) += p * q;
                }
            }
        }
        m
    }

    /// One-step support matrix `B^{a,table}`.
    pub fn support_matrix(&self, a: usize, table: &MinimizerTable) -> BitMatrix {
        let n = self.num_s1();
        let mut m = BitMatrix::zeros(n);
        for s in 0..n {
            for (mid, _) in &self.p1[s][a] {
                if let Some(dist) = &self.p2[*mid][table.choice(*mid)] {
                    for (t, _) in dist {
                        m.set(s, *t, true);
                    }
                }
            }
        }
        m
    }

    /// The generator pair `(B^{a,table}, B^{a,table})`.
    pub fn base_matrix(&self, a: usize, table: &MinimizerTable) -> ExtElem {
        ExtElem::generator(self.support_matrix(a, table))
    }

    pub fn to_dot(&self) -> String {
        dot::export(self)
    }

    pub fn to_text(&self) -> String {
        text::print_game(self)
    }

    /// Renders a word: letters juxtaposed when every letter name is one
    /// character, space separated otherwise.
    pub fn word_text(&self, word: &Word) -> String {
        let sep = if self.a1.iter().all(|n| n.chars().count() == 1) {
            ""
        } else {
            " "
        };
        word.0
            .iter()
            .map(|&a| self.a1[a].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parses a word. Whitespace-separated tokens are split further by
    /// longest-match against the maximizer alphabet, so `aab`, `a a b` and
    /// `c1 c2` are all accepted.
    pub fn parse_word(&self, text: &str) -> Result<Word, GameError> {
        let mut letters = Vec::new();
        for token in text.split(|c: char| c.is_whitespace() || c == ',') {
            letters.extend(tokenize_letters(token, &self.a1).map_err(GameError::Invalid)?);
        }
        Ok(Word(letters))
    }

    /// Validates a freshly assembled game against every structural invariant.
    pub(crate) fn validate(&self) -> Result<(), GameError> {
        let invalid = |m: String| Err(GameError::Invalid(m));
        if self.s1.is_empty() {
            return invalid("no maximizer states declared".into());
        }
        if self.s2.is_empty() {
            return invalid("no minimizer states declared".into());
        }
        if self.a1.is_empty() {
            return invalid("no maximizer actions declared".into());
        }
        if self.s1.len() > MAX_DIM {
            return invalid(format!(
                "{} maximizer states declared, at most {MAX_DIM} are supported",
                self.s1.len()
            ));
        }
        for (s, row) in self.p1.iter().enumerate() {
            for (a, dist) in row.iter().enumerate() {
                if dist.is_empty() {
                    return invalid(format!(
                        "missing maximizer action: no transition for ({}, {})",
                        self.s1[s], self.a1[a]
                    ));
                }
            }
        }
        for (t, row) in self.p2.iter().enumerate() {
            if row.iter().all(Option::is_none) {
                return invalid(format!(
                    "empty minimizer action set at state {}",
                    self.s2[t]
                ));
            }
        }
        let one = Rational::from_integer(1.into());
        let sum = |d: &Dist| d.iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
        for (s, row) in self.p1.iter().enumerate() {
            for (a, dist) in row.iter().enumerate() {
                if sum(dist) != one {
                    return invalid(format!(
                        "distribution for ({}, {}) sums to {} ≠ 1",
                        self.s1[s],
                        self.a1[a],
                        fmt_rational(&sum(dist))
                    ));
                }
            }
        }
        for (t, row) in self.p2.iter().enumerate() {
            for (b, dist) in row.iter().enumerate() {
                if let Some(dist) = dist.as_ref().filter(|d| sum(d) != one) {
                    return invalid(format!(
                        "distribution for ({}, {}) sums to {} ≠ 1",
                        self.s2[t],
                        self.a2[b],
                        fmt_rational(&sum(dist))
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Splits `token` into letters of `alphabet` by greedy longest match.
pub(crate) fn tokenize_letters(token: &str, alphabet: &[String]) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    let mut rest = token;
    while !rest.is_empty() {
        let best = alphabet
            .iter()
            .enumerate()
            .filter(|(_, name)| rest.starts_with(name.as_str()))
            .max_by_key(|(_, name)| name.len());
        match best {
            Some((a, name)) => {
                out.push(a);
                rest = &rest[name.len()..];
            }
            None => return Err(format!("unknown maximizer action at {rest:?}")),
        }
    }
    Ok(out)
}
