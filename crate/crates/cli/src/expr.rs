//! Polynomial expressions for class restrictions, e.g. `chi(1,-1)^2 + 3*u1*u2`.
//!
//! Grammar:
//! ```text
//! expr  := ['-'] term (('+' | '-') term)*
//! term  := power ('*' power)*
//! power := atom ['^' ['-'] int]
//! atom  := int | var | period | 'chi' '(' int (',' int)* ')' | '(' expr ')'
//! ```
//! Variables are `u` (rank one), `u1`, `u_1`, ...; the periodicity element is
//! `beta` or `vN`.  Only the periodicity element takes negative exponents.

use gkm_core::classifying::character_class;
use gkm_core::lattice::Character;
use gkm_core::scalar::{Period, Theory};
use gkm_core::series::TruncatedSeries;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    /// Byte offset into the expression.
    pub offset: usize,
    pub message: String,
}

impl ExprError {
    fn at(offset: usize, message: impl Into<String>) -> ExprError {
        ExprError { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Comma,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let tok = match c {
            ' ' | '\t' => {
                i += 1;
                continue;
            }
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '^' => Token::Caret,
            ',' => Token::Comma,
            '(' => Token::Open,
            ')' => Token::Close,
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..i].parse().map_err(|_| ExprError::at(start, "integer out of range"))?;
                out.push((start, Token::Int(n)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
                continue;
            }
            other => return Err(ExprError::at(start, format!("unexpected character '{other}'"))),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

enum Value {
    Series(TruncatedSeries),
    /// The periodicity element, kept apart so it can take negative powers.
    Period,
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    theory: &'a Theory,
    rank: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ExprError::at(self.offset(), format!("expected {what}")))
        }
    }

    fn zero(&self) -> TruncatedSeries {
        TruncatedSeries::zero(self.theory.ring(), self.rank, self.theory.truncation())
    }

    fn constant(&self, c: gkm_core::scalar::Scalar) -> TruncatedSeries {
        TruncatedSeries::constant(self.theory.ring(), self.rank, self.theory.truncation(), c)
    }

    fn series(&self, v: Value) -> TruncatedSeries {
        match v {
            Value::Series(s) => s,
            Value::Period => self.constant(self.theory.ring().period_power(1)),
        }
    }

    fn combine(
        &self,
        offset: usize,
        r: Result<TruncatedSeries, gkm_core::series::SeriesError>,
    ) -> Result<TruncatedSeries, ExprError> {
        r.map_err(|e| ExprError::at(offset, format!("cannot combine terms: {e}")))
    }

    fn expr(&mut self) -> Result<TruncatedSeries, ExprError> {
        let negate = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let first = self.term()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            let at = self.offset();
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = self.combine(at, acc.add(&t))?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = self.combine(at, acc.sub(&t))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<TruncatedSeries, ExprError> {
        let mut acc = self.power()?;
        while self.peek() == Some(&Token::Star) {
            let at = self.offset();
            self.pos += 1;
            let rhs = self.power()?;
            acc = self.combine(at, acc.mul(&rhs))?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<TruncatedSeries, ExprError> {
        let base = self.atom()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(self.series(base));
        }
        self.pos += 1;
        let at = self.offset();
        let negative = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let k = match self.peek() {
            Some(&Token::Int(k)) => k,
            _ => return Err(ExprError::at(self.offset(), "expected an integer exponent")),
        };
        self.pos += 1;
        let k = if negative { -k } else { k };
        match base {
            Value::Period => {
                let k = i32::try_from(k).map_err(|_| ExprError::at(at, "exponent out of range"))?;
                Ok(self.constant(self.theory.ring().period_power(k)))
            }
            Value::Series(s) => {
                if k < 0 {
                    return Err(ExprError::at(at, "negative exponents apply only to the periodicity element"));
                }
                let k = u32::try_from(k).map_err(|_| ExprError::at(at, "exponent out of range"))?;
                self.combine(at, s.pow(k))
            }
        }
    }

    fn atom(&mut self) -> Result<Value, ExprError> {
        let at = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(ExprError::at(at, "unexpected end of expression"));
        };
        self.pos += 1;
        match tok {
            Token::Int(n) => Ok(Value::Series(self.constant(self.theory.ring().int(n)))),
            Token::Open => {
                let inner = self.expr()?;
                self.expect(Token::Close, "')'")?;
                Ok(Value::Series(inner))
            }
            Token::Ident(name) if name == "chi" => self.character(at),
            Token::Ident(name) => self.identifier(&name, at),
            _ => Err(ExprError::at(at, "expected a number, variable or '('")),
        }
    }

    fn character(&mut self, at: usize) -> Result<Value, ExprError> {
        self.expect(Token::Open, "'(' after chi")?;
        let mut entries = Vec::new();
        loop {
            let negative = if self.peek() == Some(&Token::Minus) {
                self.pos += 1;
                true
            } else {
                false
            };
            match self.peek() {
                Some(&Token::Int(k)) => entries.push(if negative { -k } else { k }),
                _ => return Err(ExprError::at(self.offset(), "expected an integer character entry")),
            }
            self.pos += 1;
            match self.peek() {
                Some(Token::Comma) => self.pos += 1,
                Some(Token::Close) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(ExprError::at(self.offset(), "expected ',' or ')'")),
            }
        }
        if entries.len() != self.rank {
            return Err(ExprError::at(
                at,
                format!("character has {} entries, torus rank is {}", entries.len(), self.rank),
            ));
        }
        let fgl = self.theory.fgl().map_err(|e| ExprError::at(at, e.to_string()))?;
        let chi = character_class(fgl, &Character(entries)).map_err(|e| ExprError::at(at, e.to_string()))?;
        Ok(Value::Series(chi))
    }

    fn identifier(&self, name: &str, at: usize) -> Result<Value, ExprError> {
        let ring = self.theory.ring();
        if ring.period.name().as_deref() == Some(name) {
            return Ok(Value::Period);
        }
        let var = if name == "u" && self.rank == 1 {
            Some(0)
        } else {
            name.strip_prefix('u')
                .map(|rest| rest.strip_prefix('_').unwrap_or(rest))
                .and_then(|digits| digits.parse::<usize>().ok())
                .filter(|&i| i >= 1 && i <= self.rank)
                .map(|i| i - 1)
        };
        match var {
            Some(i) => Ok(Value::Series(TruncatedSeries::variable(ring, self.rank, self.theory.truncation(), i))),
            None if matches!(ring.period, Period::None) && (name == "beta" || name.starts_with('v')) => Err(
                ExprError::at(at, format!("theory {} has no periodicity element '{name}'", self.theory.kind().name())),
            ),
            None => Err(ExprError::at(at, format!("unknown symbol '{name}'"))),
        }
    }
}

/// Evaluate an expression as a series in `rank` variables over the theory.
pub fn parse_series(src: &str, theory: &Theory, rank: usize) -> Result<TruncatedSeries, ExprError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, end: src.len(), theory, rank };
    if p.peek().is_none() {
        return Ok(p.zero());
    }
    let value = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(ExprError::at(p.offset(), "unexpected trailing input"));
    }
    Ok(value)
}
