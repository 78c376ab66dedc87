//! Square boolean matrices over the maximizer states, stored as one `u64`
//! bitset per row.

use std::fmt;
use std::str::FromStr;

use crate::markov::MonoidError;

/// Largest supported number of maximizer states.
pub const MAX_DIM: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMatrix {
    dim: usize,
    rows: Box<[u64]>,
}

impl BitMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "matrix dimension {dim} exceeds {MAX_DIM}");
        BitMatrix {
            dim,
            rows: vec![0; dim].into_boxed_slice(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for s in 0..dim {
            m.rows[s] = 1 << s;
        }
        m
    }

    /// Builds a matrix from explicit 0/1 rows.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (s, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), rows.len(), "row {s} has wrong length");
            for (t, &bit) in row.iter().enumerate() {
                if bit != 0 {
                    m.set(s, t, true);
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, s: usize, t: usize) -> bool {
        self.rows[s] >> t & 1 == 1
    }

    pub fn set(&mut self, s: usize, t: usize, value: bool) {
        if value {
            self.rows[s] |= 1 << t;
        } else {
            self.rows[s] &= !(1 << t);
        }
    }

    /// Successor set of `s` as a bitmask.
    #[inline]
    pub fn row(&self, s: usize) -> u64 {
        self.rows[s]
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        bits(self.rows[s])
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    /// Boolean product: `(UV)(s,t) = 1` iff some `s'` has `U(s,s') = V(s',t) = 1`.
    pub fn product(&self, other: &BitMatrix) -> Result<BitMatrix, MonoidError> {
        if self.dim != other.dim {
            return Err(MonoidError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self.mul(other))
    }

    pub(crate) fn mul(&self, other: &BitMatrix) -> BitMatrix {
        debug_assert_eq!(self.dim, other.dim);
        let rows = self
            .rows
            .iter()
            .map(|&r| bits(r).fold(0u64, |acc, mid| acc | other.rows[mid]))
            .collect();
        BitMatrix {
            dim: self.dim,
            rows,
        }
    }

    pub fn is_idempotent(&self) -> bool {
        self.mul(self) == *self
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = Self::zeros(self.dim);
        for s in 0..self.dim {
            for u in self.successors(s) {
                t.rows[u] |= 1 << s;
            }
        }
        t
    }

    /// Bitmask of the states `t` such that every successor of `t` leads back
    /// to `t` in one step.
    pub fn recurrent_mask(&self) -> u64 {
        let cols = self.transpose();
        (0..self.dim)
            .filter(|&t| self.rows[t] & !cols.rows[t] == 0)
            .fold(0u64, |acc, t| acc | 1 << t)
    }

    pub fn recurrent_states(&self) -> Vec<usize> {
        bits(self.recurrent_mask()).collect()
    }

    /// Iteration of an idempotent matrix: keeps exactly the edges that end
    /// in a recurrent state.
    pub fn iterate(&self) -> Result<BitMatrix, MonoidError> {
        if !self.is_idempotent() {
            return Err(MonoidError::NotIdempotent);
        }
        Ok(self.iterate_unchecked())
    }

    pub(crate) fn iterate_unchecked(&self) -> BitMatrix {
        let keep = self.recurrent_mask();
        BitMatrix {
            dim: self.dim,
            rows: self.rows.iter().map(|&r| r & keep).collect(),
        }
    }

    /// Entrywise `self <= other`.
    pub fn is_below(&self, other: &BitMatrix) -> bool {
        self.dim == other.dim
            && self
                .rows
                .iter()
                .zip(other.rows.iter())
                .all(|(&a, &b)| a & !b == 0)
    }
}

/// Indices of the set bits of `mask`, ascending.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let t = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(t)
        }
    })
}

/// One row per line, entries `0`/`1` separated by single spaces.
impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in 0..self.dim {
            for t in 0..self.dim {
                if t > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(if self.get(s, t) { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.dim)
            .map(|s| {
                (0..self.dim)
                    .map(|t| if self.get(s, t) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed matrix text: {0}")]
pub struct MatrixParseError(String);

/// Parses the pretty-print format. Whitespace between entries is optional.
impl FromStr for BitMatrix {
    type Err = MatrixParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let rows: Vec<Vec<u8>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        other => Err(MatrixParseError(format!("unexpected character {other:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        if rows.len() > MAX_DIM {
            return Err(MatrixParseError(format!("more than {MAX_DIM} rows")));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != rows.len()) {
            return Err(MatrixParseError(format!(
                "row {bad} is not of length {}",
                rows.len()
            )));
        }
        Ok(BitMatrix::from_rows(&rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(text: &str) -> BitMatrix {
        text.parse().unwrap()
    }

    #[test]
    fn identity_is_unit() {
        let u = m("1101\n1001\n0010\n0001");
        let one = BitMatrix::identity(4);
        assert_eq!(one.product(&u).unwrap(), u);
        assert_eq!(u.product(&one).unwrap(), u);
    }

    #[test]
    fn zero_absorbs() {
        let u = m("11\n01");
        let z = BitMatrix::zeros(2);
        assert_eq!(z.product(&u).unwrap(), z);
    }

    #[test]
    fn dimension_mismatch() {
        let err = BitMatrix::identity(2).product(&BitMatrix::identity(3));
        assert_eq!(
            err,
            Err(MonoidError::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn recurrence() {
        assert_eq!(BitMatrix::identity(3).recurrent_states(), vec![0, 1, 2]);
        // i -> {i, f}, f -> {f}: only f is recurrent.
        assert_eq!(m("11\n01").recurrent_states(), vec![1]);
        // an empty row is vacuously recurrent
        assert_eq!(m("00\n01").recurrent_states(), vec![0, 1]);
    }

    #[test]
    fn iteration_examples() {
        let b_aa = m("1001\n1001\n0010\n0001");
        assert_eq!(b_aa.iterate().unwrap(), m("0001\n0001\n0010\n0001"));
        let b_ab = m("1100\n0100\n0010\n0001");
        assert_eq!(b_ab.iterate().unwrap(), m("0100\n0100\n0010\n0001"));
        assert_eq!(
            BitMatrix::identity(4).iterate().unwrap(),
            BitMatrix::identity(4)
        );
    }

    #[test]
    fn iteration_rejects_non_idempotent() {
        // a 2-cycle squares to the identity
        assert_eq!(m("01\n10").iterate(), Err(MonoidError::NotIdempotent));
    }

    #[test]
    fn display_round_trip() {
        let u = m("1001\n1001\n0010\n0001");
        assert_eq!(u.to_string(), "1 0 0 1\n1 0 0 1\n0 0 1 0\n0 0 0 1\n");
        assert_eq!(u.to_string().parse::<BitMatrix>().unwrap(), u);
    }

    #[test]
    fn parse_rejects_ragged() {
        assert!("10\n1".parse::<BitMatrix>().is_err());
        assert!("12\n01".parse::<BitMatrix>().is_err());
    }
}
