//! Exact game semantics for fixed words: outcome distributions, minimizer
//! best responses, bounded-length maxmin values, and a sampling check of
//! how faithfully a belief abstracts the game.
//!
//! Minimizer strategies are pure and time-dependent (one stationary table
//! per step). Against a blind maximizer playing a fixed word this loses
//! nothing: the minimizer faces a finite-horizon safety MDP, where such
//! strategies are optimal.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::belief::Belief;
use crate::game::{Game, MinimizerTable, TimedStrategy, Word};
use crate::markov::{ElemId, ElemStore};
use crate::matrix::BitMatrix;
use crate::rational::{RatMatrix, Rational};

/// Default cap on the word length explored by [`bounded_maxmin`].
pub const DEFAULT_MAX_LEN: usize = 12;

/// Default bound on `|tables|^|word|` below which [`check_faithful`]
/// enumerates every timed strategy.
pub const DEFAULT_EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("strategy has {strategy} steps but the word has {word} letters")]
    LengthMismatch { word: usize, strategy: usize },
    #[error("length {len} is above the configured cap {cap}")]
    TooLong { len: usize, cap: usize },
    #[error("step {0} of the strategy picks an unavailable action")]
    InvalidTable(usize),
    #[error("the word is empty")]
    EmptyWord,
}

/// Distribution over maximizer states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalDist(pub Vec<Rational>);

impl RationalDist {
    pub fn point(dim: usize, s: usize) -> Self {
        let mut v = vec![Rational::zero(); dim];
        v[s] = Rational::one();
        RationalDist(v)
    }

    pub fn get(&self, s: usize) -> &Rational {
        &self.0[s]
    }

    pub fn mass<I: IntoIterator<Item = usize>>(&self, states: I) -> Rational {
        states
            .into_iter()
            .fold(Rational::zero(), |acc, s| acc + &self.0[s])
    }

    pub fn total(&self) -> Rational {
        self.mass(0..self.0.len())
    }

    pub fn support(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
            .fold(0u64, |acc, (s, _)| acc | 1 << s)
    }
}

fn check_strategy(g: &Game, w: &Word, tau: &TimedStrategy) -> Result<(), OracleError> {
    if w.len() != tau.len() {
        return Err(OracleError::LengthMismatch {
            word: w.len(),
            strategy: tau.len(),
        });
    }
    match tau.steps.iter().position(|t| !g.is_valid_table(t)) {
        Some(i) => Err(OracleError::InvalidTable(i + 1)),
        None => Ok(()),
    }
}

/// `P^{w,τ}` from `init`: the initial distribution pushed through one step
/// matrix per letter.
pub fn distribution_after(
    g: &Game,
    w: &Word,
    tau: &TimedStrategy,
    init: &RationalDist,
) -> Result<RationalDist, OracleError> {
    check_strategy(g, w, tau)?;
    let mut dist = init.0.clone();
    for (&a, table) in w.letters().iter().zip(&tau.steps) {
        dist = g.step_matrix(a, table).apply_left(&dist);
    }
    Ok(RationalDist(dist))
}

/// Distribution over minimizer states right after the last letter of `w`,
/// before the minimizer moves. `tau` covers the first `|w| - 1` steps.
pub fn distribution_before_choice(
    g: &Game,
    w: &Word,
    tau: &TimedStrategy,
    init: &RationalDist,
) -> Result<Vec<Rational>, OracleError> {
    let (&last, prefix) = w.letters().split_last().ok_or(OracleError::EmptyWord)?;
    let before = distribution_after(g, &Word(prefix.to_vec()), tau, init)?;
    let mut out = vec![Rational::zero(); g.num_s2()];
    for (s, p) in before.0.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        for (t, q) in g.p1_dist(s, last) {
            out[*t] += p * q;
        }
    }
    Ok(out)
}

/// One backward-induction step: the minimizer's best table against letter
/// `a` when `value` is the continuation value per maximizer state, and the
/// resulting value before `a` is played. Ties go to the first available
/// action.
fn bellman(g: &Game, a: usize, value: &[Rational]) -> (Vec<Rational>, MinimizerTable) {
    let mut choice = Vec::with_capacity(g.num_s2());
    let mut w_value = Vec::with_capacity(g.num_s2());
    for t in 0..g.num_s2() {
        let mut best: Option<(usize, Rational)> = None;
        for b in g.available(t) {
            let v = g
                .p2_dist(t, b)
                .expect("available")
                .iter()
                .fold(Rational::zero(), |acc, (s, q)| acc + q * &value[*s]);
            if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((b, v));
            }
        }
        let (b, v) = best.expect("every minimizer state has an action");
        choice.push(b);
        w_value.push(v);
    }
    let before = (0..g.num_s1())
        .map(|s| {
            g.p1_dist(s, a)
                .iter()
                .fold(Rational::zero(), |acc, (t, p)| acc + p * &w_value[*t])
        })
        .collect();
    (before, MinimizerTable(choice))
}

fn final_indicator(g: &Game) -> Vec<Rational> {
    (0..g.num_s1())
        .map(|s| {
            if g.is_final(s) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// Per-state values `inf_τ P_s^{w,τ}(F)` and a strategy attaining all of
/// them simultaneously.
pub fn best_response_values(g: &Game, w: &Word) -> (Vec<Rational>, TimedStrategy) {
    let mut value = final_indicator(g);
    let mut steps = Vec::with_capacity(w.len());
    for &a in w.letters().iter().rev() {
        let (before, table) = bellman(g, a, &value);
        value = before;
        steps.push(table);
    }
    steps.reverse();
    (value, TimedStrategy { steps })
}

/// `inf_τ P_{s0}^{w,τ}(F)` and a minimizer strategy realizing it.
pub fn best_response(g: &Game, w: &Word, s0: usize) -> (Rational, TimedStrategy) {
    let (values, tau) = best_response_values(g, w);
    (values[s0].clone(), tau)
}

/// Best response against a word from an initial distribution.
pub fn best_response_from(g: &Game, w: &Word, init: &RationalDist) -> (Rational, TimedStrategy) {
    let (values, tau) = best_response_values(g, w);
    let v = init
        .0
        .iter()
        .zip(&values)
        .fold(Rational::zero(), |acc, (p, v)| acc + p * v);
    (v, tau)
}

#[derive(Clone)]
struct Candidate {
    value: Rational,
    word: Vec<usize>,
}

impl Candidate {
    /// Higher value, then shorter word, then lexicographically smaller.
    fn beats(&self, other: &Candidate) -> bool {
        match self.value.cmp(&other.value) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                (self.word.len(), &self.word) < (other.word.len(), &other.word)
            }
        }
    }

    fn better(self, other: Candidate) -> Candidate {
        if other.beats(&self) {
            other
        } else {
            self
        }
    }
}

/// Explores every word `letter · suffix` with `|suffix| < remaining`, where
/// `value` is the value vector of `suffix`.
fn explore(
    g: &Game,
    s0: usize,
    suffix: &[usize],
    value: &[Rational],
    remaining: usize,
) -> Option<Candidate> {
    if remaining == 0 {
        return None;
    }
    let mut best: Option<Candidate> = None;
    for a in 0..g.num_a1() {
        let (before, _) = bellman(g, a, value);
        let mut word = Vec::with_capacity(suffix.len() + 1);
        word.push(a);
        word.extend_from_slice(suffix);
        let here = Candidate {
            value: before[s0].clone(),
            word,
        };
        let deeper = explore(g, s0, &here.word, &before, remaining - 1);
        let local = match deeper {
            Some(d) => here.better(d),
            None => here,
        };
        best = Some(match best {
            Some(b) => b.better(local),
            None => local,
        });
    }
    best
}

/// `max_{|w| ≤ max_len} inf_τ P_{s0}^{w,τ}(F)` by exhaustive enumeration,
/// with the maximizing word (ties: shortest, then lexicographically least in
/// `A1` order).
pub fn bounded_maxmin(
    g: &Game,
    s0: usize,
    max_len: usize,
    cap: usize,
    parallel: bool,
) -> Result<(Rational, Word), OracleError> {
    if max_len > cap {
        return Err(OracleError::TooLong { len: max_len, cap });
    }
    let terminal = final_indicator(g);
    let empty = Candidate {
        value: terminal[s0].clone(),
        word: Vec::new(),
    };
    if max_len == 0 {
        return Ok((empty.value, Word::default()));
    }
    // Branch on the last letter of the word.
    let branch = |a: usize| {
        let (before, _) = bellman(g, a, &terminal);
        let here = Candidate {
            value: before[s0].clone(),
            word: vec![a],
        };
        match explore(g, s0, &here.word, &before, max_len - 1) {
            Some(d) => here.better(d),
            None => here,
        }
    };
    let branches: Vec<Candidate> = if parallel {
        (0..g.num_a1()).into_par_iter().map(branch).collect()
    } else {
        (0..g.num_a1()).map(branch).collect()
    };
    let best = branches.into_iter().fold(empty, Candidate::better);
    Ok((best.value, Word(best.word)))
}

/// `M(s, t) = 1` iff `P_s^{w,τ}(t) > 0`.
pub fn support_matrix(g: &Game, w: &Word, tau: &TimedStrategy) -> Result<BitMatrix, OracleError> {
    check_strategy(g, w, tau)?;
    let n = g.num_s1();
    let mut m = BitMatrix::zeros(n);
    for s in 0..n {
        let dist = distribution_after(g, w, tau, &RationalDist::point(n, s))?;
        for t in crate::matrix::bits(dist.support()) {
            m.set(s, t, true);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaithLimits {
    /// Longest materialized word accepted.
    pub max_word_len: usize,
    /// Enumerate all timed strategies when there are at most this many;
    /// otherwise fall back to coordinate descent.
    pub exhaustive_limit: u128,
}

impl Default for FaithLimits {
    fn default() -> Self {
        FaithLimits {
            max_word_len: 64,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberFaith {
    pub elem: ElemId,
    /// A strategy whose outcome support equals the support part exactly,
    /// maximizing the smallest probability on action-part edges.
    pub strategy: Option<TimedStrategy>,
    pub support_exact: bool,
    /// `min { P_s(t) | U(s, t) = 1 }` under `strategy`.
    pub attained_min: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaithReport {
    pub word: Word,
    pub exhaustive: bool,
    pub members: Vec<MemberFaith>,
}

struct Score {
    mismatches: usize,
    attained: Option<Rational>,
}

impl Score {
    fn of(outcome: &RatMatrix, action: &BitMatrix, support: &BitMatrix) -> Score {
        let n = outcome.dim();
        let mut mismatches = 0;
        let mut attained: Option<Rational> = None;
        for s in 0..n {
            for t in 0..n {
                let p = outcome.get(s, t);
                if p.is_positive() != support.get(s, t) {
                    mismatches += 1;
                }
                if action.get(s, t) && attained.as_ref().is_none_or(|m| p < m) {
                    attained = Some(p.clone());
                }
            }
        }
        Score {
            mismatches,
            attained,
        }
    }

    fn beats(&self, other: &Score) -> bool {
        match self.mismatches.cmp(&other.mismatches) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => match (&self.attained, &other.attained) {
                (Some(a), Some(b)) => a > b,
                (Some(_), None) => true,
                _ => false,
            },
        }
    }
}

struct Search<'a> {
    word: &'a [usize],
    tables: &'a [MinimizerTable],
    /// `steps[letter][table]`
    steps: Vec<Vec<RatMatrix>>,
    targets: Vec<(BitMatrix, BitMatrix)>,
}

impl Search<'_> {
    fn outcome(&self, choice: &[usize]) -> RatMatrix {
        let n = self.steps[0][0].dim();
        self.word
            .iter()
            .zip(choice)
            .fold(RatMatrix::identity(n), |acc, (&a, &k)| {
                acc.mul(&self.steps[a][k])
            })
    }

    fn exhaustive(&self) -> Vec<(Score, Vec<usize>)> {
        let n = self.steps[0][0].dim();
        let mut best: Vec<Option<(Score, Vec<usize>)>> = vec![None; self.targets.len()]
            .into_iter()
            .map(|_: Option<()>| None)
            .collect();
        let mut path = Vec::with_capacity(self.word.len());
        self.dfs(&RatMatrix::identity(n), &mut path, &mut best);
        best.into_iter()
            .map(|b| b.expect("at least one strategy"))
            .collect()
    }

    fn dfs(
        &self,
        prefix: &RatMatrix,
        path: &mut Vec<usize>,
        best: &mut [Option<(Score, Vec<usize>)>],
    ) {
        let depth = path.len();
        if depth == self.word.len() {
            for ((action, support), slot) in self.targets.iter().zip(best.iter_mut()) {
                let score = Score::of(prefix, action, support);
                if slot.as_ref().is_none_or(|(b, _)| score.beats(b)) {
                    *slot = Some((score, path.clone()));
                }
            }
            return;
        }
        let a = self.word[depth];
        for k in 0..self.tables.len() {
            let next = prefix.mul(&self.steps[a][k]);
            path.push(k);
            self.dfs(&next, path, best);
            path.pop();
        }
    }

    fn descent(&self, target: usize) -> (Score, Vec<usize>) {
        let (action, support) = &self.targets[target];
        let score_of = |choice: &[usize]| Score::of(&self.outcome(choice), action, support);
        let mut best: Option<(Score, Vec<usize>)> = None;
        for k in 0..self.tables.len() {
            let choice = vec![k; self.word.len()];
            let score = score_of(&choice);
            if best.as_ref().is_none_or(|(b, _)| score.beats(b)) {
                best = Some((score, choice));
            }
        }
        let (mut best_score, mut best_choice) = best.expect("at least one table");
        for _pass in 0..4 {
            let mut improved = false;
            for pos in 0..self.word.len() {
                for k in 0..self.tables.len() {
                    if best_choice[pos] == k {
                        continue;
                    }
                    let mut choice = best_choice.clone();
                    choice[pos] = k;
                    let score = score_of(&choice);
                    if score.beats(&best_score) {
                        best_score = score;
                        best_choice = choice;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        (best_score, best_choice)
    }
}

/// Looks, for every member `(U, Ũ)` of `u`, for a timed strategy against
/// the `n`-th materialization of `u`'s provenance whose outcome support is
/// exactly `Ũ`, and reports the smallest probability it puts on an edge of
/// `U`.
pub fn check_faithful(
    g: &Game,
    store: &ElemStore,
    u: &Belief,
    n: usize,
    limits: &FaithLimits,
) -> Result<FaithReport, OracleError> {
    let len = u.provenance.materialized_len(n);
    if len > limits.max_word_len as u128 {
        return Err(OracleError::TooLong {
            len: usize::try_from(len).unwrap_or(usize::MAX),
            cap: limits.max_word_len,
        });
    }
    let word = u.provenance.materialize(n);
    let tables = g.stationary_tables();
    let steps = (0..g.num_a1())
        .map(|a| tables.iter().map(|t| g.step_matrix(a, t)).collect())
        .collect();
    let targets: Vec<(BitMatrix, BitMatrix)> = u
        .members
        .iter()
        .map(|&m| {
            let e = store.get(m);
            (e.action.clone(), e.support.clone())
        })
        .collect();
    let search = Search {
        word: word.letters(),
        tables: &tables,
        steps,
        targets,
    };
    let space = (tables.len() as u128).checked_pow(word.len() as u32);
    let exhaustive = space.is_some_and(|s| s <= limits.exhaustive_limit);
    let results: Vec<(Score, Vec<usize>)> = if exhaustive {
        search.exhaustive()
    } else {
        (0..search.targets.len())
            .map(|i| search.descent(i))
            .collect()
    };
    let members = u
        .members
        .iter()
        .zip(results)
        .map(|(&elem, (score, choice))| {
            let exact = score.mismatches == 0;
            MemberFaith {
                elem,
                strategy: exact.then(|| TimedStrategy {
                    steps: choice.iter().map(|&k| tables[k].clone()).collect(),
                }),
                support_exact: exact,
                attained_min: if exact { score.attained } else { None },
            }
        })
        .collect();
    Ok(FaithReport {
        word,
        exhaustive,
        members,
    })
}
