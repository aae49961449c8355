//! Multivariate Diophantine polynomials: parsing, exact integer evaluation,
//! and the bounded brute-force minimum oracle.
//!
//! All arithmetic is arbitrary precision, so substitution checks are exact.
//! A polynomial is kept in canonical form: no two terms share an exponent
//! tuple, no term has a zero coefficient, and terms are ordered by descending
//! graded-lexicographic order. Variables are ordered by first appearance in
//! the source text, which fixes the polynomial-to-mode mapping downstream.
//!
//! The zero polynomial (e.g. the canonical form of `x - x`) prints as `0`,
//! which is the one printout that does not re-parse: the grammar requires at
//! least one variable to appear.

mod parser;

pub use parser::parse_polynomial;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Default cap on the number of points a brute-force scan may visit.
pub const DEFAULT_SCAN_GUARD: u128 = 100_000_000;

#[derive(Debug, Error)]
pub enum DiophantineError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("empty input")]
    EmptyInput,
    #[error("polynomial mentions no variables")]
    NoVariables,
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("exponent overflow while expanding a product")]
    ExponentOverflow,
    #[error("search space of {points} points exceeds the guard of {guard}")]
    SearchSpaceTooLarge { points: u128, guard: u128 },
}

/// A candidate solution: one non-negative integer per variable.
///
/// Occupation-number tuples read from Fock states convert into points via
/// [`EvaluationPoint::from_occupations`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EvaluationPoint {
    values: Vec<u64>,
}

impl EvaluationPoint {
    pub fn new(values: Vec<u64>) -> Self {
        Self { values }
    }

    pub fn from_occupations(tuple: &[u32]) -> Self {
        Self {
            values: tuple.iter().map(|&n| u64::from(n)).collect(),
        }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl fmt::Display for EvaluationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// One canonical term: a nonzero coefficient times a monomial given by one
/// exponent per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coefficient: BigInt,
    pub exponents: Vec<u32>,
}

/// Descending graded-lexicographic term order: higher total degree first,
/// ties broken lexicographically on the exponent tuple.
fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&e| u64::from(e)).sum();
    let db: u64 = b.iter().map(|&e| u64::from(e)).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// A multivariate polynomial with integer coefficients, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    variables: Vec<String>,
    terms: Vec<Term>,
}

impl Polynomial {
    /// Canonicalizes `terms` over the given variables: merges equal exponent
    /// tuples, drops zero coefficients, sorts by descending grlex order.
    pub fn new(
        variables: Vec<String>,
        terms: Vec<(BigInt, Vec<u32>)>,
    ) -> Result<Self, DiophantineError> {
        if variables.is_empty() {
            return Err(DiophantineError::NoVariables);
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(DiophantineError::DuplicateVariable(v.clone()));
            }
        }
        let k = variables.len();
        let mut merged: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (coefficient, exponents) in terms {
            if exponents.len() != k {
                return Err(DiophantineError::DimensionMismatch {
                    expected: k,
                    got: exponents.len(),
                });
            }
            let entry = merged.entry(exponents).or_insert_with(BigInt::zero);
            *entry += coefficient;
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponents, coefficient)| Term {
                coefficient,
                exponents,
            })
            .collect();
        terms.sort_by(|a, b| grlex(&b.exponents, &a.exponents));
        Ok(Self { variables, terms })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Terms in descending graded-lexicographic order.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u64 {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().map(|&e| u64::from(e)).sum())
            .max()
            .unwrap_or(0)
    }

    /// Exact value of the polynomial at a non-negative integer point.
    pub fn evaluate(&self, at: &EvaluationPoint) -> Result<BigInt, DiophantineError> {
        if at.len() != self.num_variables() {
            return Err(DiophantineError::DimensionMismatch {
                expected: self.num_variables(),
                got: at.len(),
            });
        }
        let mut acc = BigInt::zero();
        for term in &self.terms {
            let mut v = term.coefficient.clone();
            for (&x, &e) in at.values().iter().zip(&term.exponents) {
                if e > 0 {
                    v *= Pow::pow(&BigInt::from(x), e);
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// `evaluate(at)^2`; always non-negative.
    pub fn evaluate_squared(&self, at: &EvaluationPoint) -> Result<BigInt, DiophantineError> {
        let v = self.evaluate(at)?;
        Ok(&v * &v)
    }

    /// Exhaustive scan of `[0, bound]^k` under the default point guard.
    pub fn brute_force_minimum(&self, bound: u64) -> Result<BruteForceResult, DiophantineError> {
        self.brute_force_minimum_guarded(bound, DEFAULT_SCAN_GUARD)
    }

    /// Exhaustive scan of `[0, bound]^k` for the minimum of the squared
    /// polynomial. Returns all argmin points in lexicographic order.
    pub fn brute_force_minimum_guarded(
        &self,
        bound: u64,
        guard: u128,
    ) -> Result<BruteForceResult, DiophantineError> {
        let k = self.num_variables();
        let side = u128::from(bound) + 1;
        match side.checked_pow(k as u32) {
            Some(points) if points <= guard => {}
            Some(points) => {
                return Err(DiophantineError::SearchSpaceTooLarge { points, guard });
            }
            None => {
                return Err(DiophantineError::SearchSpaceTooLarge {
                    points: u128::MAX,
                    guard,
                });
            }
        }

        let mut min_value: Option<BigInt> = None;
        let mut argmin: Vec<EvaluationPoint> = Vec::new();
        let mut point = vec![0u64; k];
        loop {
            let at = EvaluationPoint::new(point.clone());
            let value = self.evaluate_squared(&at)?;
            match &min_value {
                Some(m) if value > *m => {}
                Some(m) if value == *m => argmin.push(at),
                _ => {
                    min_value = Some(value);
                    argmin = vec![at];
                }
            }
            // odometer over [0, bound]^k, last coordinate fastest
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(BruteForceResult {
                        min_value: min_value.expect("at least one point scanned"),
                        argmin,
                        bound,
                    });
                }
                i -= 1;
                if point[i] < bound {
                    point[i] += 1;
                    break;
                }
                point[i] = 0;
            }
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            let negative = term.coefficient.is_negative();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let magnitude = term.coefficient.abs();
            let monomial: Vec<String> = self
                .variables
                .iter()
                .zip(&term.exponents)
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| if e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            if monomial.is_empty() {
                write!(f, "{magnitude}")?;
            } else {
                if !magnitude.is_one() {
                    write!(f, "{magnitude}*")?;
                }
                write!(f, "{}", monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Outcome of the bounded exhaustive scan: the minimum of the squared
/// polynomial over `[0, bound]^k` and every point attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceResult {
    pub min_value: BigInt,
    pub argmin: Vec<EvaluationPoint>,
    pub bound: u64,
}

impl BruteForceResult {
    pub fn has_zero(&self) -> bool {
        self.min_value.is_zero()
    }
}
