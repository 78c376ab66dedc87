//! Word expressions: recipes built from letters, concatenation and
//! iteration. The `n`-th materialization of `(e)#` repeats the
//! materialization of `e` `n` times.
//!
//! Text form: `expr := letter | expr expr | "(" expr ")#"`.

use std::fmt;
use std::sync::Arc;

use crate::game::{tokenize_letters, Word};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WordExpr {
    /// The empty word.
    Unit,
    Letter(usize),
    Concat(Arc<WordExpr>, Arc<WordExpr>),
    Iter(Arc<WordExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("malformed expression: {0}")]
    Syntax(String),
    #[error("materialized word would have length {0}, above the cap {1}")]
    TooLong(u128, usize),
}

impl WordExpr {
    pub fn letter(a: usize) -> Arc<Self> {
        Arc::new(WordExpr::Letter(a))
    }

    pub fn concat(l: Arc<WordExpr>, r: Arc<WordExpr>) -> Arc<Self> {
        match (&*l, &*r) {
            (WordExpr::Unit, _) => r,
            (_, WordExpr::Unit) => l,
            _ => Arc::new(WordExpr::Concat(l, r)),
        }
    }

    pub fn iter(e: Arc<WordExpr>) -> Arc<Self> {
        Arc::new(WordExpr::Iter(e))
    }

    /// Nesting depth of iterations.
    pub fn iteration_depth(&self) -> usize {
        match self {
            WordExpr::Unit | WordExpr::Letter(_) => 0,
            WordExpr::Concat(l, r) => l.iteration_depth().max(r.iteration_depth()),
            WordExpr::Iter(e) => 1 + e.iteration_depth(),
        }
    }

    /// Length of `materialize(n)`, saturating at `u128::MAX`.
    pub fn materialized_len(&self, n: usize) -> u128 {
        match self {
            WordExpr::Unit => 0,
            WordExpr::Letter(_) => 1,
            WordExpr::Concat(l, r) => l.materialized_len(n).saturating_add(r.materialized_len(n)),
            WordExpr::Iter(e) => e.materialized_len(n).saturating_mul(n as u128),
        }
    }

    /// Letter ↦ itself, concatenation ↦ concatenation, `(e)#` ↦ `n` copies of `e`.
    pub fn materialize(&self, n: usize) -> Word {
        let mut out = Vec::new();
        self.push_word(n, &mut out);
        Word(out)
    }

    /// As [`materialize`](Self::materialize), refusing words longer than `cap`.
    pub fn materialize_capped(&self, n: usize, cap: usize) -> Result<Word, ExprError> {
        let len = self.materialized_len(n);
        if len > cap as u128 {
            return Err(ExprError::TooLong(len, cap));
        }
        Ok(self.materialize(n))
    }

    fn push_word(&self, n: usize, out: &mut Vec<usize>) {
        match self {
            WordExpr::Unit => {}
            WordExpr::Letter(a) => out.push(*a),
            WordExpr::Concat(l, r) => {
                l.push_word(n, out);
                r.push_word(n, out);
            }
            WordExpr::Iter(e) => {
                let start = out.len();
                e.push_word(n, out);
                let end = out.len();
                for _ in 1..n {
                    out.extend_from_within(start..end);
                }
                if n == 0 {
                    out.truncate(start);
                }
            }
        }
    }

    /// Text form using the given letter names. Juxtaposed items are separated
    /// by a space unless every letter name is a single character.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            names,
            spaced: names.iter().any(|n| n.chars().count() != 1),
        }
    }

    /// Parses the text form over a fixed alphabet; runs of letters are split
    /// by longest match.
    pub fn parse(text: &str, alphabet: &[String]) -> Result<Arc<WordExpr>, ExprError> {
        let tokens = lex(text)?;
        let mut pos = 0;
        let e = parse_seq(&tokens, &mut pos, alphabet)?;
        if pos != tokens.len() {
            return Err(ExprError::Syntax("unbalanced `)#`".into()));
        }
        Ok(e)
    }

    /// Parses without a known alphabet: every non-space character outside
    /// the `(`, `)#` punctuation is a letter. Returns the alphabet in order
    /// of first appearance.
    pub fn parse_chars(text: &str) -> Result<(Arc<WordExpr>, Vec<String>), ExprError> {
        let mut alphabet: Vec<String> = Vec::new();
        for c in text.chars() {
            if !c.is_whitespace()
                && !"()#".contains(c)
                && !alphabet.iter().any(|a| a.starts_with(c))
            {
                alphabet.push(c.to_string());
            }
        }
        let e = Self::parse(text, &alphabet)?;
        Ok((e, alphabet))
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a WordExpr,
    names: &'a [String],
    spaced: bool,
}

impl ExprDisplay<'_> {
    fn write(&self, e: &WordExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            WordExpr::Unit => Ok(()),
            WordExpr::Letter(a) => f.write_str(&self.names[*a]),
            WordExpr::Concat(l, r) => {
                self.write(l, f)?;
                if self.spaced {
                    f.write_str(" ")?;
                }
                self.write(r, f)
            }
            WordExpr::Iter(inner) => {
                f.write_str("(")?;
                self.write(inner, f)?;
                f.write_str(")#")
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Open,
    CloseIter,
    Letters(&'a str),
}

fn lex(text: &str) -> Result<Vec<Token<'_>>, ExprError> {
    let mut tokens = Vec::new();
    let mut rest = text;
    loop {
        rest = rest.trim_start();
        let Some(c) = rest.chars().next() else {
            return Ok(tokens);
        };
        match c {
            '(' => {
                tokens.push(Token::Open);
                rest = &rest[1..];
            }
            ')' => {
                rest = rest[1..]
                    .strip_prefix('#')
                    .ok_or_else(|| ExprError::Syntax("`)` must be followed by `#`".into()))?;
                tokens.push(Token::CloseIter);
            }
            '#' => return Err(ExprError::Syntax("stray `#`".into())),
            _ => {
                let end = rest
                    .find(|c: char| c.is_whitespace() || "()#".contains(c))
                    .unwrap_or(rest.len());
                tokens.push(Token::Letters(&rest[..end]));
                rest = &rest[end..];
            }
        }
    }
}

fn parse_seq(
    tokens: &[Token<'_>],
    pos: &mut usize,
    alphabet: &[String],
) -> Result<Arc<WordExpr>, ExprError> {
    let mut acc = Arc::new(WordExpr::Unit);
    while let Some(tok) = tokens.get(*pos) {
        let item = match tok {
            Token::CloseIter => break,
            Token::Letters(run) => {
                *pos += 1;
                let letters = tokenize_letters(run, alphabet).map_err(ExprError::Syntax)?;
                letters
                    .into_iter()
                    .map(WordExpr::letter)
                    .fold(Arc::new(WordExpr::Unit), WordExpr::concat)
            }
            Token::Open => {
                *pos += 1;
                let inner = parse_seq(tokens, pos, alphabet)?;
                if tokens.get(*pos) != Some(&Token::CloseIter) {
                    return Err(ExprError::Syntax("missing `)#`".into()));
                }
                *pos += 1;
                if matches!(*inner, WordExpr::Unit) {
                    return Err(ExprError::Syntax("empty iteration `()#`".into()));
                }
                WordExpr::iter(inner)
            }
        };
        acc = WordExpr::concat(acc, item);
    }
    Ok(acc)
}
