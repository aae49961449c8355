//! Recursive-descent parser for polynomial input.
//!
//! ```text
//! expr   := ("+" | "-")? term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := base ("^" nat)?
//! base   := nat | ident | "(" expr ")"
//! ```
//!
//! Whitespace is insignificant. Identifiers are an ASCII letter followed by
//! letters, digits, or underscores. Exponents must be non-negative integer
//! literals, which keeps every parsed instance Diophantine by construction.
//! The optional leading sign is the one extension over the base grammar; it
//! lets every canonical printout (which may lead with a negative term)
//! re-parse to the same term set.

use super::{DiophantineError, Polynomial};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;

/// Parses `text` into a canonical [`Polynomial`].
///
/// Variables take their order of first appearance in the text; that order
/// later defines the mode order of the Fock encoding.
pub fn parse_polynomial(text: &str) -> Result<Polynomial, DiophantineError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(DiophantineError::EmptyInput);
    }

    let mut variables: Vec<String> = Vec::new();
    for (token, _) in &tokens {
        if let Token::Ident(name) = token {
            if !variables.contains(name) {
                variables.push(name.clone());
            }
        }
    }
    if variables.is_empty() {
        return Err(DiophantineError::NoVariables);
    }

    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
        variables: &variables,
    };
    let raw = parser.expr()?;
    parser.expect_end()?;

    Polynomial::new(
        variables.clone(),
        raw.terms.into_iter().map(|(e, c)| (c, e)).collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Nat(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, DiophantineError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' => {
                tokens.push((Token::Plus, start));
                i += 1;
            }
            b'-' => {
                tokens.push((Token::Minus, start));
                i += 1;
            }
            b'*' => {
                tokens.push((Token::Star, start));
                i += 1;
            }
            b'^' => {
                tokens.push((Token::Caret, start));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, start));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, start));
                i += 1;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                let value: BigInt = digits.parse().expect("digit run parses");
                tokens.push((Token::Nat(value), start));
            }
            b if b.is_ascii_alphabetic() => {
                i += 1;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(DiophantineError::Syntax {
                    position: start,
                    message: format!("unexpected character `{}`", other as char),
                });
            }
        }
    }
    Ok(tokens)
}

/// Sparse polynomial under construction: exponent tuple -> coefficient.
struct RawPoly {
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl RawPoly {
    fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    fn constant(k: usize, value: BigInt) -> Self {
        let mut p = Self::zero();
        if !value.is_zero() {
            p.terms.insert(vec![0; k], value);
        }
        p
    }

    fn variable(k: usize, index: usize) -> Self {
        let mut exps = vec![0u32; k];
        exps[index] = 1;
        let mut p = Self::zero();
        p.terms.insert(exps, BigInt::from(1));
        p
    }

    fn one(k: usize) -> Self {
        Self::constant(k, BigInt::from(1))
    }

    fn add_assign(&mut self, other: RawPoly, sign: i8) {
        for (exps, coeff) in other.terms {
            let entry = self.terms.entry(exps).or_insert_with(BigInt::zero);
            if sign >= 0 {
                *entry += coeff;
            } else {
                *entry -= coeff;
            }
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    fn mul(&self, other: &RawPoly) -> Result<RawPoly, DiophantineError> {
        let mut product = RawPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut exps = Vec::with_capacity(ea.len());
                for (&x, &y) in ea.iter().zip(eb) {
                    exps.push(
                        x.checked_add(y)
                            .ok_or(DiophantineError::ExponentOverflow)?,
                    );
                }
                let entry = product.terms.entry(exps).or_insert_with(BigInt::zero);
                *entry += ca * cb;
            }
        }
        product.terms.retain(|_, c| !c.is_zero());
        Ok(product)
    }

    fn pow(&self, k: usize, mut exponent: u32) -> Result<RawPoly, DiophantineError> {
        let mut result = RawPoly::one(k);
        let mut base = RawPoly {
            terms: self.terms.clone(),
        };
        while exponent > 0 {
            if exponent & 1 == 1 {
                result = result.mul(&base)?;
            }
            exponent >>= 1;
            if exponent > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }
}

struct Parser<'a> {
    tokens: &'a [(Token, usize)],
    pos: usize,
    end: usize,
    variables: &'a [String],
}

impl<'a> Parser<'a> {
    fn k(&self) -> usize {
        self.variables.len()
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|&(_, p)| p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t);
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> DiophantineError {
        DiophantineError::Syntax {
            position: self.here(),
            message: message.into(),
        }
    }

    fn expect_end(&self) -> Result<(), DiophantineError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn expr(&mut self) -> Result<RawPoly, DiophantineError> {
        let mut sign: i8 = 1;
        if let Some(Token::Plus | Token::Minus) = self.peek() {
            if matches!(self.bump(), Some(Token::Minus)) {
                sign = -1;
            }
        }
        let mut acc = RawPoly::zero();
        acc.add_assign(self.term()?, sign);
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    acc.add_assign(t, 1);
                }
                Some(Token::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    acc.add_assign(t, -1);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RawPoly, DiophantineError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.bump();
            let f = self.factor()?;
            acc = acc.mul(&f)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RawPoly, DiophantineError> {
        let base = self.base()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            let position = self.here();
            match self.bump() {
                Some(Token::Nat(n)) => {
                    let exponent = u32::try_from(n.clone()).map_err(|_| {
                        DiophantineError::Syntax {
                            position,
                            message: "exponent too large".into(),
                        }
                    })?;
                    return base.pow(self.k(), exponent);
                }
                _ => {
                    return Err(DiophantineError::Syntax {
                        position,
                        message: "exponent must be a non-negative integer literal".into(),
                    });
                }
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<RawPoly, DiophantineError> {
        let position = self.here();
        match self.bump() {
            Some(Token::Nat(n)) => Ok(RawPoly::constant(self.k(), n.clone())),
            Some(Token::Ident(name)) => {
                let index = self
                    .variables
                    .iter()
                    .position(|v| v == name)
                    .expect("identifier collected in first pass");
                Ok(RawPoly::variable(self.k(), index))
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(DiophantineError::Syntax {
                        position: self.previous_or_end(),
                        message: "expected `)`".into(),
                    }),
                }
            }
            _ => Err(DiophantineError::Syntax {
                position,
                message: "expected a number, variable, or `(`".into(),
            }),
        }
    }

    fn previous_or_end(&self) -> usize {
        self.tokens
            .get(self.pos.saturating_sub(1))
            .map(|&(_, p)| p)
            .unwrap_or(self.end)
    }
}
