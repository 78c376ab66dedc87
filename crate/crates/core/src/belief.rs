//! The extended belief monoid: sets of extended Markov elements, closed
//! under pointwise product and iteration, together with the decision
//! procedure built on it.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::expr::WordExpr;
use crate::game::Game;
use crate::markov::{set_closure, ElemId, ElemStore, ExtElem, MonoidError, DEFAULT_MAX_ELEMS};

/// Default cap on the number of distinct beliefs.
pub const DEFAULT_MAX_BELIEFS: usize = 50_000;

/// Belief products computed between two ordered commits.
const CHUNK: usize = 4096;

/// A canonical (sorted, duplicate-free) set of interned elements, with the
/// first expression found to produce it.
#[derive(Debug, Clone)]
pub struct Belief {
    pub members: Arc<[ElemId]>,
    pub provenance: Arc<WordExpr>,
}

impl Belief {
    pub fn new(mut members: Vec<ElemId>, provenance: Arc<WordExpr>) -> Self {
        members.sort_unstable();
        members.dedup();
        debug_assert!(!members.is_empty());
        Belief {
            members: members.into(),
            provenance,
        }
    }

    pub fn same_members(&self, other: &Belief) -> bool {
        self.members == other.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosureConfig {
    pub max_beliefs: usize,
    pub max_elems: usize,
    /// Compute belief products on the rayon pool. Results are committed in a
    /// fixed order either way.
    pub parallel: bool,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        ClosureConfig {
            max_beliefs: DEFAULT_MAX_BELIEFS,
            max_elems: DEFAULT_MAX_ELEMS,
            parallel: true,
        }
    }
}

/// `uv = {UV | U ∈ u, V ∈ v}`.
pub fn belief_product(
    store: &mut ElemStore,
    u: &Belief,
    v: &Belief,
) -> Result<Belief, MonoidError> {
    let mut members = Vec::with_capacity(u.len() * v.len());
    for &x in u.members.iter() {
        for &y in v.members.iter() {
            members.push(store.product(x, y)?);
        }
    }
    Ok(Belief::new(
        members,
        WordExpr::concat(u.provenance.clone(), v.provenance.clone()),
    ))
}

/// `uu` has the same member set as `u`.
pub fn belief_is_idempotent(store: &mut ElemStore, u: &Belief) -> Result<bool, MonoidError> {
    Ok(belief_product(store, u, u)?.same_members(u))
}

/// `u# = ⟨{U E# V | U, E, V ∈ u, E idempotent}⟩` for idempotent `u`.
pub fn belief_iterate(store: &mut ElemStore, u: &Belief) -> Result<Belief, MonoidError> {
    if !belief_is_idempotent(store, u)? {
        return Err(MonoidError::NotIdempotent);
    }
    iterate_idempotent(store, u)
}

fn iterate_idempotent(store: &mut ElemStore, u: &Belief) -> Result<Belief, MonoidError> {
    let mut seed = Vec::new();
    for &e in u.members.iter() {
        if !store.is_idempotent(e) {
            continue;
        }
        let e_sharp = store.iterate(e)?;
        for &x in u.members.iter() {
            let left = store.product(x, e_sharp)?;
            for &y in u.members.iter() {
                seed.push(store.product(left, y)?);
            }
        }
    }
    // An idempotent belief always holds an idempotent element (finite
    // semigroups contain idempotents), so the seed is nonempty.
    debug_assert!(!seed.is_empty());
    let members = set_closure(&seed, store)?;
    Ok(Belief::new(members, WordExpr::iter(u.provenance.clone())))
}

/// The generator `a = {(B^{a,τ}, B^{a,τ}) | τ stationary}`.
pub fn generator_belief(g: &Game, store: &mut ElemStore, a: usize) -> Result<Belief, MonoidError> {
    let members = g
        .stationary_tables()
        .iter()
        .map(|table| store.intern(g.base_matrix(a, table)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Belief::new(members, WordExpr::letter(a)))
}

pub fn unit_belief(store: &mut ElemStore) -> Result<Belief, MonoidError> {
    Ok(Belief::new(vec![store.unit()?], Arc::new(WordExpr::Unit)))
}

/// A closed extended belief monoid (or a partial one, inside [`Exhausted`]).
#[derive(Debug, Clone)]
pub struct BeliefMonoid {
    pub store: ElemStore,
    /// In discovery order.
    pub beliefs: Vec<Belief>,
    index: HashMap<Arc<[ElemId]>, usize>,
    pub unit: usize,
    /// Belief index of each letter's generator, in `A1` order.
    pub generators: Vec<usize>,
    /// Whether each belief is idempotent, for beliefs that have been visited.
    idempotent: Vec<Option<bool>>,
}

/// Budget exhaustion during closure, with everything discovered so far.
#[derive(Debug, Clone)]
pub struct Exhausted {
    pub error: MonoidError,
    pub partial: Box<BeliefMonoid>,
}

enum Product {
    Known(ElemId),
    Fresh(ElemId, ElemId, ExtElem),
}

impl BeliefMonoid {
    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    pub fn get(&self, i: usize) -> &Belief {
        &self.beliefs[i]
    }

    /// Index of the belief with exactly these members.
    pub fn find(&self, members: &[ElemId]) -> Option<usize> {
        self.index.get(members).copied()
    }

    pub fn is_idempotent(&self, i: usize) -> Option<bool> {
        self.idempotent[i]
    }

    fn insert(&mut self, belief: Belief, cap: usize) -> Result<usize, MonoidError> {
        if let Some(&i) = self.index.get(&belief.members) {
            return Ok(i);
        }
        if self.beliefs.len() >= cap {
            return Err(MonoidError::BeliefBudget {
                cap,
                size: self.beliefs.len(),
            });
        }
        let i = self.beliefs.len();
        self.index.insert(belief.members.clone(), i);
        self.beliefs.push(belief);
        self.idempotent.push(None);
        Ok(i)
    }

    fn raw_product(&self, l: usize, r: usize) -> Vec<Product> {
        let (u, v) = (&self.beliefs[l], &self.beliefs[r]);
        let mut out = Vec::with_capacity(u.len() * v.len());
        for &x in u.members.iter() {
            for &y in v.members.iter() {
                out.push(match self.store.cached_product(x, y) {
                    Some(id) => Product::Known(id),
                    None => Product::Fresh(x, y, self.store.get(x).mul(self.store.get(y))),
                });
            }
        }
        out
    }

    fn commit(&mut self, raw: Vec<Product>) -> Result<Vec<ElemId>, MonoidError> {
        raw.into_iter()
            .map(|p| match p {
                Product::Known(id) => Ok(id),
                Product::Fresh(x, y, e) => self.store.commit_product(x, y, e),
            })
            .collect()
    }

    fn close(&mut self, cfg: &ClosureConfig) -> Result<(), MonoidError> {
        // Every belief of the closure is a product of atoms: letters and
        // iterations of idempotent beliefs. Right-multiplying everything by
        // every atom therefore reaches the whole closure.
        let mut atoms: Vec<usize> = self.generators.clone();
        atoms.dedup();
        let mut done: Vec<usize> = Vec::new();
        loop {
            let fresh = self.beliefs.len() - done.len();
            done.extend(std::iter::repeat_n(0, fresh));
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for (i, d) in done.iter_mut().enumerate() {
                if self.idempotent[i].is_none() {
                    pairs.push((i, i));
                }
                pairs.extend(atoms[*d..].iter().map(|&a| (i, a)));
                *d = atoms.len();
            }
            if pairs.is_empty() {
                return Ok(());
            }
            for chunk in pairs.chunks(CHUNK) {
                let raw: Vec<Vec<Product>> = if cfg.parallel && chunk.len() > 1 {
                    chunk
                        .par_iter()
                        .map(|&(l, r)| self.raw_product(l, r))
                        .collect()
                } else {
                    chunk.iter().map(|&(l, r)| self.raw_product(l, r)).collect()
                };
                for (&(l, r), raw) in chunk.iter().zip(raw) {
                    let members = self.commit(raw)?;
                    let prov = WordExpr::concat(
                        self.beliefs[l].provenance.clone(),
                        self.beliefs[r].provenance.clone(),
                    );
                    let product = Belief::new(members, prov);
                    if l == r && self.idempotent[l].is_none() {
                        let square_is_self = product.same_members(&self.beliefs[l]);
                        self.idempotent[l] = Some(square_is_self);
                        if square_is_self {
                            let u = self.beliefs[l].clone();
                            let it = iterate_idempotent(&mut self.store, &u)?;
                            // An iteration already present is a product of
                            // existing atoms and adds nothing new as an atom.
                            let before = self.beliefs.len();
                            let k = self.insert(it, cfg.max_beliefs)?;
                            if k == before {
                                atoms.push(k);
                            }
                        }
                    }
                    self.insert(product, cfg.max_beliefs)?;
                }
            }
        }
    }
}

/// Closes `{a | a ∈ A1} ∪ {{(1,1)}}` under product and iteration.
///
/// Runs in rounds. Each round squares the beliefs not yet tested for
/// idempotency (iterating the idempotent ones) and multiplies every belief
/// on the right by the atoms it has not met yet; atoms are the letters and
/// the iterations found so far. Products are computed concurrently and
/// committed in a fixed order, so discovery order (unit, letters, then
/// round by round) and the expression kept for each belief, the first one
/// that produced it, do not depend on scheduling.
pub fn close_belief_monoid(g: &Game, cfg: &ClosureConfig) -> Result<BeliefMonoid, Exhausted> {
    let mut monoid = BeliefMonoid {
        store: ElemStore::with_cap(g.num_s1(), cfg.max_elems),
        beliefs: Vec::new(),
        index: HashMap::new(),
        unit: 0,
        generators: Vec::new(),
        idempotent: Vec::new(),
    };
    let result = (|| {
        let unit = unit_belief(&mut monoid.store)?;
        monoid.unit = monoid.insert(unit, cfg.max_beliefs)?;
        for a in 0..g.num_a1() {
            let gen = generator_belief(g, &mut monoid.store, a)?;
            let idx = monoid.insert(gen, cfg.max_beliefs)?;
            monoid.generators.push(idx);
        }
        monoid.close(cfg)
    })();
    match result {
        Ok(()) => Ok(monoid),
        Err(error) => Err(Exhausted {
            error,
            partial: Box::new(monoid),
        }),
    }
}

/// Every member sends `s0` only into `finals`.
pub fn is_reachability_witness(store: &ElemStore, u: &Belief, s0: usize, finals: &[usize]) -> bool {
    let allowed = finals.iter().fold(0u64, |acc, &f| acc | 1 << f);
    u.members
        .iter()
        .all(|&m| store.get(m).action.row(s0) & !allowed == 0)
}

/// The first reachability witness in discovery order.
pub fn find_reachability_witness(
    monoid: &BeliefMonoid,
    s0: usize,
    finals: &[usize],
) -> Option<(usize, Arc<WordExpr>)> {
    monoid
        .beliefs
        .iter()
        .position(|u| is_reachability_witness(&monoid.store, u, s0, finals))
        .map(|i| (i, monoid.beliefs[i].provenance.clone()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leak {
    /// First belief (in discovery order) holding the leaking element.
    pub belief: usize,
    pub elem: ElemId,
    /// Recurrent states `(r, r')` with `U(r, r') = 0` and `Ũ(r, r') = 1`.
    pub pair: (usize, usize),
}

/// Every leaking element that is a member of some belief, once each.
pub fn find_leaks(monoid: &BeliefMonoid) -> Vec<Leak> {
    let mut seen = vec![false; monoid.store.len()];
    let mut leaks = Vec::new();
    for (b, belief) in monoid.beliefs.iter().enumerate() {
        for &m in belief.members.iter() {
            if std::mem::replace(&mut seen[m.index()], true) {
                continue;
            }
            if let Some(pair) = monoid.store.leak(m) {
                leaks.push(Leak {
                    belief: b,
                    elem: m,
                    pair,
                });
            }
        }
    }
    leaks
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    MaxminOne { belief: usize, expr: Arc<WordExpr> },
    NotMaxminOne,
    NotLeaktight,
    BudgetExhausted,
}

impl Answer {
    pub fn code(&self) -> &'static str {
        match self {
            Answer::MaxminOne { .. } => "maxmin_one",
            Answer::NotMaxminOne => "not_maxmin_one",
            Answer::NotLeaktight => "not_leaktight",
            Answer::BudgetExhausted => "budget_exhausted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    /// `None` when the closure stopped early without finding a leak.
    pub leaktight: Option<bool>,
    pub leaks: Vec<Leak>,
    pub answer: Answer,
    pub beliefs: usize,
    pub elements: usize,
    pub budget_hit: Option<MonoidError>,
}

/// Closure, leak scan, then witness search. The answer is only
/// `MaxminOne`/`NotMaxminOne` for leaktight games.
pub fn decide(g: &Game, cfg: &ClosureConfig) -> Verdict {
    let (monoid, budget_hit) = match close_belief_monoid(g, cfg) {
        Ok(m) => (m, None),
        Err(Exhausted { error, partial }) => (*partial, Some(error)),
    };
    let leaks = find_leaks(&monoid);
    let (leaktight, answer) = match (&budget_hit, leaks.is_empty()) {
        (Some(_), true) => (None, Answer::BudgetExhausted),
        (Some(_), false) => (Some(false), Answer::BudgetExhausted),
        (None, false) => (Some(false), Answer::NotLeaktight),
        (None, true) => {
            let finals: Vec<usize> = g.finals().collect();
            let answer = match find_reachability_witness(&monoid, g.initial(), &finals) {
                Some((belief, expr)) => Answer::MaxminOne { belief, expr },
                None => Answer::NotMaxminOne,
            };
            (Some(true), answer)
        }
    };
    Verdict {
        leaktight,
        leaks,
        answer,
        beliefs: monoid.len(),
        elements: monoid.store.len(),
        budget_hit,
    }
}

/// Machine-readable form of a [`Verdict`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictReport {
    pub leaktight: Option<bool>,
    pub answer: &'static str,
    pub witness_expr: Option<String>,
    pub leaks: Vec<[String; 2]>,
    pub sizes: Sizes,
    pub budget: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sizes {
    pub beliefs: usize,
    pub elements: usize,
}

impl Verdict {
    pub fn report(&self, g: &Game) -> VerdictReport {
        let names = g.s1_names();
        let mut leaks: Vec<[String; 2]> = Vec::new();
        for leak in &self.leaks {
            let pair = [names[leak.pair.0].clone(), names[leak.pair.1].clone()];
            if !leaks.contains(&pair) {
                leaks.push(pair);
            }
        }
        VerdictReport {
            leaktight: self.leaktight,
            answer: self.answer.code(),
            witness_expr: match &self.answer {
                Answer::MaxminOne { expr, .. } => Some(expr.display(g.a1_names()).to_string()),
                _ => None,
            },
            leaks,
            sizes: Sizes {
                beliefs: self.beliefs,
                elements: self.elements,
            },
            budget: self.budget_hit.as_ref().map(ToString::to_string),
        }
    }
}

impl VerdictReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// `key: value` lines carrying the same fields as the JSON form.
    pub fn to_text(&self) -> String {
        let yes_no = |b: Option<bool>| match b {
            Some(true) => "yes",
            Some(false) => "no",
            None => "unknown",
        };
        let mut out = format!(
            "leaktight: {}\nanswer: {}\n",
            yes_no(self.leaktight),
            self.answer
        );
        if let Some(w) = &self.witness_expr {
            out.push_str(&format!("witness: {w}\n"));
        }
        if self.leaks.is_empty() {
            out.push_str("leaks: none\n");
        } else {
            let pairs: Vec<String> = self
                .leaks
                .iter()
                .map(|[r, s]| format!("({r}, {s})"))
                .collect();
            out.push_str(&format!("leaks: {}\n", pairs.join(" ")));
        }
        out.push_str(&format!(
            "beliefs: {}\nelements: {}\n",
            self.sizes.beliefs, self.sizes.elements
        ));
        if let Some(b) = &self.budget {
            out.push_str(&format!("budget: {b}\n"));
        }
        out
    }
}
