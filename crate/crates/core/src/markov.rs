//! The extended Markov monoid: pairs `(U, Ũ)` of boolean matrices, where the
//! support part `Ũ` remembers every edge that iteration removed from the
//! action part `U`.

use std::collections::HashMap;
use std::fmt;

use crate::matrix::{bits, BitMatrix};

/// Default cap on the number of interned extended elements.
pub const DEFAULT_MAX_ELEMS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonoidError {
    #[error("dimension mismatch: {left}x{left} against {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("iteration is only defined on idempotent elements")]
    NotIdempotent,
    #[error("element budget exhausted: cap {cap}, {size} elements interned")]
    ElementBudget { cap: usize, size: usize },
    #[error("belief budget exhausted: cap {cap}, {size} beliefs discovered")]
    BeliefBudget { cap: usize, size: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElem {
    pub action: BitMatrix,
    pub support: BitMatrix,
}

impl ExtElem {
    pub fn unit(dim: usize) -> Self {
        ExtElem {
            action: BitMatrix::identity(dim),
            support: BitMatrix::identity(dim),
        }
    }

    /// The pair `(B, B)` attached to a one-step support matrix.
    pub fn generator(base: BitMatrix) -> Self {
        ExtElem {
            support: base.clone(),
            action: base,
        }
    }

    pub fn dim(&self) -> usize {
        self.action.dim()
    }

    pub fn product(&self, other: &ExtElem) -> Result<ExtElem, MonoidError> {
        Ok(ExtElem {
            action: self.action.product(&other.action)?,
            support: self.support.product(&other.support)?,
        })
    }

    pub(crate) fn mul(&self, other: &ExtElem) -> ExtElem {
        ExtElem {
            action: self.action.mul(&other.action),
            support: self.support.mul(&other.support),
        }
    }

    /// Both components idempotent.
    pub fn is_idempotent(&self) -> bool {
        self.action.is_idempotent() && self.support.is_idempotent()
    }

    /// `(E, Ẽ)# = (E#, Ẽ)`.
    pub fn iterate(&self) -> Result<ExtElem, MonoidError> {
        if !self.is_idempotent() {
            return Err(MonoidError::NotIdempotent);
        }
        Ok(self.iterate_unchecked())
    }

    fn iterate_unchecked(&self) -> ExtElem {
        ExtElem {
            action: self.action.iterate_unchecked(),
            support: self.support.clone(),
        }
    }

    /// Returns the least pair `(r, r')` of action-recurrent states with
    /// `U(r, r') = 0` and `Ũ(r, r') = 1`, provided the element is idempotent.
    pub fn leak(&self) -> Option<(usize, usize)> {
        if !self.is_idempotent() {
            return None;
        }
        let rec = self.action.recurrent_mask();
        bits(rec).find_map(|r| {
            let hidden = self.support.row(r) & !self.action.row(r) & rec;
            bits(hidden).next().map(|r2| (r, r2))
        })
    }
}

impl fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.action, self.support)
    }
}

/// Dense id of an interned [`ExtElem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemId(pub u32);

impl ElemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Interning table for extended elements. Ids are handed out in allocation
/// order, so any deterministic sequence of `intern` calls yields the same ids.
/// Products and iterations are memoized by id.
#[derive(Debug, Clone)]
pub struct ElemStore {
    dim: usize,
    cap: usize,
    elems: Vec<ExtElem>,
    idempotent: Vec<bool>,
    ids: HashMap<ExtElem, ElemId>,
    products: HashMap<(ElemId, ElemId), ElemId>,
    iterations: HashMap<ElemId, ElemId>,
}

impl ElemStore {
    pub fn new(dim: usize) -> Self {
        Self::with_cap(dim, DEFAULT_MAX_ELEMS)
    }

    pub fn with_cap(dim: usize, cap: usize) -> Self {
        ElemStore {
            dim,
            cap,
            elems: Vec::new(),
            idempotent: Vec::new(),
            ids: HashMap::new(),
            products: HashMap::new(),
            iterations: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn get(&self, id: ElemId) -> &ExtElem {
        &self.elems[id.index()]
    }

    pub fn lookup(&self, e: &ExtElem) -> Option<ElemId> {
        self.ids.get(e).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = ElemId> {
        (0..self.elems.len() as u32).map(ElemId)
    }

    pub fn is_idempotent(&self, id: ElemId) -> bool {
        self.idempotent[id.index()]
    }

    pub fn intern(&mut self, e: ExtElem) -> Result<ElemId, MonoidError> {
        if e.dim() != self.dim {
            return Err(MonoidError::DimensionMismatch {
                left: self.dim,
                right: e.dim(),
            });
        }
        if let Some(&id) = self.ids.get(&e) {
            return Ok(id);
        }
        if self.elems.len() >= self.cap {
            return Err(MonoidError::ElementBudget {
                cap: self.cap,
                size: self.elems.len(),
            });
        }
        let id = ElemId(self.elems.len() as u32);
        self.idempotent.push(e.is_idempotent());
        self.ids.insert(e.clone(), id);
        self.elems.push(e);
        Ok(id)
    }

    pub fn unit(&mut self) -> Result<ElemId, MonoidError> {
        self.intern(ExtElem::unit(self.dim))
    }

    /// Memoized product, if it has been computed before.
    pub fn cached_product(&self, a: ElemId, b: ElemId) -> Option<ElemId> {
        self.products.get(&(a, b)).copied()
    }

    /// Records that `a·b` is the (already computed) element `e` and interns it.
    pub(crate) fn commit_product(
        &mut self,
        a: ElemId,
        b: ElemId,
        e: ExtElem,
    ) -> Result<ElemId, MonoidError> {
        let id = self.intern(e)?;
        self.products.insert((a, b), id);
        Ok(id)
    }

    pub fn product(&mut self, a: ElemId, b: ElemId) -> Result<ElemId, MonoidError> {
        if let Some(id) = self.cached_product(a, b) {
            return Ok(id);
        }
        let e = self.get(a).mul(self.get(b));
        self.commit_product(a, b, e)
    }

    pub fn iterate(&mut self, a: ElemId) -> Result<ElemId, MonoidError> {
        if let Some(&id) = self.iterations.get(&a) {
            return Ok(id);
        }
        if !self.is_idempotent(a) {
            return Err(MonoidError::NotIdempotent);
        }
        let e = self.get(a).iterate_unchecked();
        let id = self.intern(e)?;
        self.iterations.insert(a, id);
        Ok(id)
    }

    pub fn leak(&self, id: ElemId) -> Option<(usize, usize)> {
        if self.is_idempotent(id) {
            self.get(id).leak()
        } else {
            None
        }
    }
}

/// Least superset of `seed` closed under product and iteration.
///
/// Elements are visited in discovery order (the seed sorted by id first);
/// when element `i` is visited it is multiplied on both sides with every
/// element visited so far, and iterated if idempotent. Returns the closure
/// as a sorted id list.
pub fn set_closure(seed: &[ElemId], store: &mut ElemStore) -> Result<Vec<ElemId>, MonoidError> {
    let mut order: Vec<ElemId> = seed.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut seen: std::collections::HashSet<ElemId> = order.iter().copied().collect();
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        for j in 0..=i {
            let y = order[j];
            for (l, r) in [(y, x), (x, y)] {
                let p = store.product(l, r)?;
                if seen.insert(p) {
                    order.push(p);
                }
            }
        }
        if store.is_idempotent(x) {
            let it = store.iterate(x)?;
            if seen.insert(it) {
                order.push(it);
            }
        }
        i += 1;
    }
    order.sort_unstable();
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(text: &str) -> BitMatrix {
        text.parse().unwrap()
    }

    #[test]
    fn unit_pair_is_neutral() {
        let e = ExtElem {
            action: m("11\n01"),
            support: m("11\n11"),
        };
        let one = ExtElem::unit(2);
        assert_eq!(one.product(&e).unwrap(), e);
        assert_eq!(e.product(&one).unwrap(), e);
        assert_eq!(one.iterate().unwrap(), one);
    }

    #[test]
    fn iteration_keeps_support() {
        let b = m("1001\n1001\n0010\n0001");
        let e = ExtElem::generator(b.clone());
        let it = e.iterate().unwrap();
        assert_eq!(it.action, m("0001\n0001\n0010\n0001"));
        assert_eq!(it.support, b);
        assert_eq!(it.iterate().unwrap(), it);
    }

    #[test]
    fn pair_idempotency_needs_both_components() {
        let e = ExtElem {
            action: m("10\n01"),
            support: m("01\n10"),
        };
        assert!(!e.is_idempotent());
        assert_eq!(e.iterate(), Err(MonoidError::NotIdempotent));
    }

    #[test]
    fn leak_detection() {
        assert_eq!(ExtElem::unit(3).leak(), None);
        // states c, r, s: action c->c, r->c, s->s; support additionally c->s, r->s
        let leaky = ExtElem {
            action: m("100\n100\n001"),
            support: m("101\n101\n001"),
        };
        assert_eq!(leaky.leak(), Some((0, 2)));
        // same support but not idempotent: no leak reported
        let not_idem = ExtElem {
            action: m("100\n100\n001"),
            support: m("101\n100\n001"),
        };
        assert!(!not_idem.is_idempotent());
        assert_eq!(not_idem.leak(), None);
    }

    #[test]
    fn interning_is_stable() {
        let mut store = ElemStore::new(2);
        let a = store.intern(ExtElem::unit(2)).unwrap();
        let b = store.intern(ExtElem::generator(m("11\n01"))).unwrap();
        assert_eq!(store.intern(ExtElem::unit(2)).unwrap(), a);
        assert_eq!((a, b), (ElemId(0), ElemId(1)));
        assert!(store.intern(ExtElem::unit(3)).is_err());
    }

    #[test]
    fn budget_is_reported() {
        let mut store = ElemStore::with_cap(2, 1);
        store.unit().unwrap();
        let err = store.intern(ExtElem::generator(m("11\n01"))).unwrap_err();
        assert_eq!(err, MonoidError::ElementBudget { cap: 1, size: 1 });
    }

    #[test]
    fn closure_of_unit() {
        let mut store = ElemStore::new(3);
        let one = store.unit().unwrap();
        assert_eq!(set_closure(&[one], &mut store).unwrap(), vec![one]);
    }

    #[test]
    fn closure_is_idempotent() {
        let mut store = ElemStore::new(3);
        let a = store
            .intern(ExtElem::generator(m("110\n001\n001")))
            .unwrap();
        let b = store
            .intern(ExtElem::generator(m("010\n100\n001")))
            .unwrap();
        let once = set_closure(&[a, b], &mut store).unwrap();
        let twice = set_closure(&once, &mut store).unwrap();
        assert_eq!(once, twice);
    }
}
