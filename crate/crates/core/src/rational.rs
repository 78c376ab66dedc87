//! Exact rational helpers: literal parsing, printing, dense matrices.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::matrix::BitMatrix;

pub type Rational = BigRational;

/// Parses `p/q`, an integer, or a finite decimal such as `0.25`, exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = parse_int(num)?;
        let den: BigInt = parse_int(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let num = parse_int(&digits)?;
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(Rational::new(num, den))
}

fn parse_int(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix('-').unwrap_or(text);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Dense square matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(dim: usize) -> Self {
        RatMatrix {
            dim,
            entries: vec![Rational::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for s in 0..dim {
            m.entries[s * dim + s] = Rational::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, s: usize, t: usize) -> &Rational {
        &self.entries[s * self.dim + t]
    }

    pub fn get_mut(&mut self, s: usize, t: usize) -> &mut Rational {
        &mut self.entries[s * self.dim + t]
    }

    pub fn row(&self, s: usize) -> &[Rational] {
        &self.entries[s * self.dim..(s + 1) * self.dim]
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for s in 0..n {
            for k in 0..n {
                let a = self.get(s, k);
                if a.is_zero() {
                    continue;
                }
                for t in 0..n {
                    let b = other.get(k, t);
                    if !b.is_zero() {
                        out.entries[s * n + t] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![Rational::zero(); self.dim];
        for (s, p) in v.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (t, q) in self.row(s).iter().enumerate() {
                if !q.is_zero() {
                    out[t] += p * q;
                }
            }
        }
        out
    }

    pub fn row_sum(&self, s: usize) -> Rational {
        self.row(s).iter().fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn is_stochastic(&self) -> bool {
        (0..self.dim).all(|s| self.row_sum(s).is_one())
            && self.entries.iter().all(|x| !x.is_negative())
    }

    /// Positivity pattern.
    pub fn support(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.dim);
        for s in 0..self.dim {
            for t in 0..self.dim {
                if self.get(s, t).is_positive() {
                    m.set(s, t, true);
                }
            }
        }
        m
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in 0..self.dim {
            let row: Vec<String> = self.row(s).iter().map(fmt_rational).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
