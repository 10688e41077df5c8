//! Ordinals below ω^ω in Cantor normal form.
//!
//! An [`Ordinal`] is a finite sum `ω^e₁·c₁ + … + ω^eₙ·cₙ` with strictly
//! decreasing exponents and positive coefficients. The empty sum is 0.
//! Values are always canonical, so structural equality is ordinal equality
//! and the derived ordering is the ordinal ordering.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One `ω^exp · coeff` summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    // Field order matters: the derived `Ord` compares exponent first.
    pub exp: u32,
    pub coeff: u64,
}

impl Term {
    pub fn new(exp: u32, coeff: u64) -> Self {
        Term { exp, coeff }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("zero has no trailing term")]
    ZeroHasNoTrailingTerm,
    #[error("non-canonical term list at term {index}: {reason}")]
    NonCanonical { index: usize, reason: &'static str },
    #[error("coefficient overflow")]
    Overflow,
}

/// An ordinal below ω^ω.
///
/// The derived `Ord` is the ordinal order: term lists compare
/// lexicographically by `(exp, coeff)` and a proper prefix is smaller.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ordinal {
    terms: Vec<Term>,
}

impl Ordinal {
    pub const ZERO: Ordinal = Ordinal { terms: Vec::new() };

    pub fn zero() -> Self {
        Ordinal::ZERO
    }

    pub fn one() -> Self {
        Ordinal::finite(1)
    }

    /// ω
    pub fn omega() -> Self {
        Ordinal::monomial(1, 1)
    }

    pub fn finite(n: u64) -> Self {
        Ordinal::monomial(0, n)
    }

    /// ω^exp · coeff (0 when `coeff` is 0).
    pub fn monomial(exp: u32, coeff: u64) -> Self {
        if coeff == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![Term::new(exp, coeff)],
            }
        }
    }

    /// ω^exp
    pub fn omega_pow(exp: u32) -> Self {
        Ordinal::monomial(exp, 1)
    }

    /// Builds an ordinal from an already canonical term list.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self, OrdinalError> {
        for (i, t) in terms.iter().enumerate() {
            if t.coeff == 0 {
                return Err(OrdinalError::NonCanonical {
                    index: i,
                    reason: "zero coefficient",
                });
            }
            if i > 0 && terms[i - 1].exp <= t.exp {
                return Err(OrdinalError::NonCanonical {
                    index: i,
                    reason: "exponents not strictly decreasing",
                });
            }
        }
        Ok(Ordinal { terms })
    }

    /// Ordinal sum of the given summands, left to right. This is the only
    /// entry point that accepts non-canonical input.
    pub fn normalize(terms: &[Term]) -> Self {
        terms.iter().fold(Ordinal::zero(), |acc, t| {
            acc.add(&Ordinal::monomial(t.exp, t.coeff))
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.iter().all(|t| t.exp == 0)
    }

    /// The natural number value, if finite.
    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [Term { exp: 0, coeff }] => Some(*coeff),
            _ => None,
        }
    }

    pub fn leading_exponent(&self) -> Option<u32> {
        self.terms.first().map(|t| t.exp)
    }

    /// Exponent of the smallest term; for a nonzero ordinal this is its
    /// Cantor-Bendixson level inside any ordinal interval containing it.
    pub fn trailing_exponent(&self) -> Result<u32, OrdinalError> {
        self.terms
            .last()
            .map(|t| t.exp)
            .ok_or(OrdinalError::ZeroHasNoTrailingTerm)
    }

    /// Coefficient of `ω^exp` (0 if absent).
    pub fn coefficient(&self, exp: u32) -> u64 {
        self.terms
            .iter()
            .find(|t| t.exp == exp)
            .map_or(0, |t| t.coeff)
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.terms.last(), Some(t) if t.exp > 0)
    }

    pub fn is_successor(&self) -> bool {
        matches!(self.terms.last(), Some(t) if t.exp == 0)
    }

    pub fn successor(&self) -> Self {
        self.add(&Ordinal::one())
    }

    /// The immediate predecessor of a successor ordinal.
    pub fn predecessor(&self) -> Option<Self> {
        let last = self.terms.last()?;
        if last.exp != 0 {
            return None;
        }
        let mut terms = self.terms.clone();
        let n = terms.len() - 1;
        if terms[n].coeff == 1 {
            terms.pop();
        } else {
            terms[n].coeff -= 1;
        }
        Some(Ordinal { terms })
    }

    /// Ordinal addition `self + rhs`. Terms of `self` below the leading
    /// exponent of `rhs` are absorbed.
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(lead) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = self
            .terms
            .iter()
            .copied()
            .take_while(|t| t.exp >= lead.exp)
            .collect();
        match terms.last_mut() {
            Some(t) if t.exp == lead.exp => {
                t.coeff = t
                    .coeff
                    .checked_add(lead.coeff)
                    .expect("ordinal coefficient overflow");
                terms.extend_from_slice(&rhs.terms[1..]);
            }
            _ => terms.extend_from_slice(&rhs.terms),
        }
        Ordinal { terms }
    }

    /// Drops every term with exponent below `exp`, i.e. rounds down to the
    /// largest multiple of ω^exp not exceeding `self`.
    pub fn truncate_below(&self, exp: u32) -> Ordinal {
        Ordinal {
            terms: self
                .terms
                .iter()
                .copied()
                .take_while(|t| t.exp >= exp)
                .collect(),
        }
    }
}

pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

impl std::ops::Add for &Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::add(self, rhs)
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::finite(n)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match (t.exp, t.coeff) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => f.write_str("w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ordinal literal error at byte {position}: {message}")]
pub struct ParseOrdinalError {
    pub position: usize,
    pub message: String,
}

impl FromStr for Ordinal {
    type Err = ParseOrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LiteralParser::new(s).parse_sum()
    }
}

/// Recursive-descent parser for `sum := term ("+" term)*`,
/// `term := "w" ("^" nat)? ("*" posnat)? | nat`.
struct LiteralParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> LiteralParser<'a> {
    fn new(s: &'a str) -> Self {
        LiteralParser {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseOrdinalError> {
        Err(ParseOrdinalError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn nat(&mut self) -> Result<u64, ParseOrdinalError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a natural number");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        digits.parse::<u64>().or_else(|_| {
            self.pos = start;
            self.err("number too large")
        })
    }

    fn term(&mut self) -> Result<(usize, Term), ParseOrdinalError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let mut exp = 1u64;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    exp = self.nat()?;
                }
                let exp = u32::try_from(exp).or_else(|_| self.err("exponent too large"))?;
                let mut coeff = 1;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    let at = self.pos;
                    coeff = self.nat()?;
                    if coeff == 0 {
                        self.pos = at;
                        return self.err("coefficient must be positive");
                    }
                }
                Ok((start, Term::new(exp, coeff)))
            }
            Some(c) if c.is_ascii_digit() => Ok((start, Term::new(0, self.nat()?))),
            Some(_) => self.err("expected 'w' or a natural number"),
            None => self.err("unexpected end of input"),
        }
    }

    fn parse_sum(&mut self) -> Result<Ordinal, ParseOrdinalError> {
        let mut terms: Vec<Term> = Vec::new();
        loop {
            let (at, t) = self.term()?;
            if t.coeff == 0 {
                // A bare "0" is only valid as the whole literal.
                if !terms.is_empty() || self.peek().is_some() {
                    self.pos = at;
                    return self.err("zero term inside a sum");
                }
                return Ok(Ordinal::zero());
            }
            if let Some(prev) = terms.last() {
                if prev.exp <= t.exp {
                    self.pos = at;
                    return self.err("exponents must be strictly decreasing");
                }
            }
            terms.push(t);
            match self.peek() {
                None => break,
                Some(b'+') => self.pos += 1,
                Some(_) => return self.err("expected '+' or end of input"),
            }
        }
        Ok(Ordinal { terms })
    }
}

impl Serialize for Ordinal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    /// Ordinals below ω³ as coefficient triples (c₂, c₁, c₀); the ordinal
    /// order is the lexicographic order on triples.
    type Triple = (u64, u64, u64);

    fn triple_add(a: Triple, b: Triple) -> Triple {
        if b.0 > 0 {
            (a.0 + b.0, b.1, b.2)
        } else if b.1 > 0 {
            (a.0, a.1 + b.1, b.2)
        } else {
            (a.0, a.1, a.2 + b.2)
        }
    }

    fn from_triple(t: Triple) -> Ordinal {
        Ordinal::normalize(&[Term::new(2, t.0), Term::new(1, t.1), Term::new(0, t.2)])
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&Ordinal::zero(), &Ordinal::zero()), Ordering::Equal);
        assert_eq!(
            compare(&Ordinal::omega(), &Ordinal::finite(5)),
            Ordering::Greater
        );
        // Oracle: (3,2,0) vs (3,0,7) lexicographically.
        assert_eq!((3, 2, 0).cmp(&(3, 0, 7)), Ordering::Greater);
        assert_eq!(
            compare(&o("w^2*3 + w*2"), &o("w^2*3 + 7")),
            Ordering::Greater
        );
    }

    #[test]
    fn add_examples() {
        assert_eq!(Ordinal::omega().add(&Ordinal::one()), o("w + 1"));
        assert_eq!(Ordinal::finite(3).add(&Ordinal::omega()), Ordinal::omega());
        assert_eq!(triple_add((2, 1, 0), (0, 4, 0)), (2, 5, 0));
        assert_eq!(o("w^2*2 + w").add(&o("w*4")), o("w^2*2 + w*5"));
    }

    #[test]
    fn trailing_and_limit() {
        assert_eq!(o("w^2*3 + w*2").trailing_exponent(), Ok(1));
        assert_eq!(o("7").trailing_exponent(), Ok(0));
        assert_eq!(o("w^3").trailing_exponent(), Ok(3));
        assert_eq!(
            Ordinal::zero().trailing_exponent(),
            Err(OrdinalError::ZeroHasNoTrailingTerm)
        );
        assert!(o("w*2").is_limit());
        assert!(!o("w + 1").is_limit());
        assert!(!Ordinal::zero().is_limit());
        assert_eq!(o("w^2").successor(), o("w^2 + 1"));
        assert_eq!(o("w + 3").predecessor(), Some(o("w + 2")));
        assert_eq!(o("w + 1").predecessor(), Some(o("w")));
        assert_eq!(o("w").predecessor(), None);
    }

    #[test]
    fn literal_grammar() {
        assert_eq!(o("w^3*2 + w + 4").to_string(), "w^3*2 + w + 4");
        assert_eq!(o("0"), Ordinal::zero());
        assert_eq!(o("w"), Ordinal::omega());
        assert_eq!(o("  w ^ 2 *3+w*  2 "), o("w^2*3 + w*2"));
        assert_eq!(o("w^0*3"), Ordinal::finite(3));
        let err = "w^^2".parse::<Ordinal>().unwrap_err();
        assert_eq!(err.position, 2);
        assert!("w + w^2".parse::<Ordinal>().is_err());
        assert!("w + 0".parse::<Ordinal>().is_err());
        assert!("w*0".parse::<Ordinal>().is_err());
        assert!("".parse::<Ordinal>().is_err());
        assert!("w +".parse::<Ordinal>().is_err());
        assert!("3 4".parse::<Ordinal>().is_err());
    }

    #[test]
    fn from_terms_rejects_non_canonical() {
        assert!(Ordinal::from_terms(vec![Term::new(1, 1), Term::new(2, 1)]).is_err());
        assert!(Ordinal::from_terms(vec![Term::new(1, 0)]).is_err());
        assert_eq!(
            Ordinal::normalize(&[Term::new(1, 1), Term::new(2, 1)]),
            Ordinal::omega_pow(2)
        );
    }

    #[test]
    fn agrees_with_triple_oracle() {
        // 200 deterministic triples covering zeros and small coefficients.
        let sample: Vec<Triple> = (0..200u64)
            .map(|i| (i % 3, (i / 3) % 4, (i * 7) % 5))
            .collect();
        for &a in &sample {
            for &b in &sample {
                let (oa, ob) = (from_triple(a), from_triple(b));
                assert_eq!(oa.cmp(&ob), a.cmp(&b), "{a:?} vs {b:?}");
                assert_eq!(oa.add(&ob), from_triple(triple_add(a, b)), "{a:?} + {b:?}");
            }
        }
    }

    fn arb_ordinal() -> impl Strategy<Value = Ordinal> {
        prop::collection::vec((0u32..6, 0u64..5), 0..5).prop_map(|ts| {
            let terms: Vec<Term> = ts.into_iter().map(|(e, c)| Term::new(e, c)).collect();
            Ordinal::normalize(&terms)
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(a in arb_ordinal()) {
            prop_assert_eq!(a.to_string().parse::<Ordinal>().unwrap(), a);
        }

        #[test]
        fn add_laws(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.add(&Ordinal::zero()), a.clone());
            prop_assert_eq!(Ordinal::zero().add(&a), a.clone());
            prop_assert_eq!(a.successor().cmp(&a), Ordering::Greater);
        }

        #[test]
        fn trailing_exponent_of_sum(beta in arb_ordinal(), xi in 0u32..5, c in 1u64..4) {
            let ok = beta.is_zero() || beta.trailing_exponent().unwrap() > xi;
            prop_assume!(ok);
            let p = beta.add(&Ordinal::monomial(xi, c));
            prop_assert_eq!(p.trailing_exponent().unwrap(), xi);
        }
    }
}
