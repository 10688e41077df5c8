//! The compact scattered space `[0, λ]` and its Cantor-Bendixson structure.
//!
//! In an ordinal interval the Cantor-Bendixson level of a nonzero point is the
//! exponent of its last CNF term (successors are isolated, `ω·3` survives one
//! derivative, `ω²` two, ...), and 0 is isolated. Everything here is exact.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::clopen::{ClopenSet, Lower};
use crate::ordinal::{Ordinal, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("the top point of a space must be positive")]
    EmptyTop,
    #[error("point {point} lies outside [0, {lambda}]")]
    PointOutsideSpace { point: Ordinal, lambda: Ordinal },
    #[error("requested {requested} levels but the space has height {height}")]
    LevelOutOfRange { requested: u32, height: u32 },
    #[error("per_level must be at least 1")]
    EmptyPerLevel,
    #[error(
        "sample with per_level {per_level} over {levels} levels exceeds the 64-bit index range"
    )]
    SampleTooLarge { per_level: u64, levels: u32 },
}

/// The closed ordinal interval `[0, λ]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    lambda: Ordinal,
}

impl Space {
    pub fn new(lambda: Ordinal) -> Result<Self, SpaceError> {
        if lambda.is_zero() {
            return Err(SpaceError::EmptyTop);
        }
        Ok(Space { lambda })
    }

    pub fn lambda(&self) -> &Ordinal {
        &self.lambda
    }

    pub fn contains(&self, p: &Ordinal) -> bool {
        p <= &self.lambda
    }

    /// The unique α with `p ∈ I(X^(α))`.
    pub fn point_level(&self, p: &Ordinal) -> Result<u32, SpaceError> {
        if !self.contains(p) {
            return Err(SpaceError::PointOutsideSpace {
                point: p.clone(),
                lambda: self.lambda.clone(),
            });
        }
        Ok(p.trailing_exponent().unwrap_or(0))
    }

    /// Largest Cantor-Bendixson level of any point, attained at `ω^e` where
    /// `e` is the leading exponent of λ.
    pub fn max_level(&self) -> u32 {
        self.lambda.leading_exponent().unwrap_or(0)
    }

    /// `hgt(X)`: always the successor `max_level + 1`.
    pub fn height(&self) -> Ordinal {
        Ordinal::finite(u64::from(self.max_level()) + 1)
    }

    pub fn cardinal_sequence(&self) -> Vec<Cardinality> {
        let top = self.max_level();
        (0..=top)
            .map(|level| {
                if level < top {
                    Cardinality::Aleph0
                } else if top == 0 {
                    // Finite space {0, …, n}.
                    Cardinality::Fin(self.lambda.coefficient(0) + 1)
                } else {
                    // ω^top·c ≤ λ exactly for c up to the leading coefficient.
                    Cardinality::Fin(self.lambda.coefficient(top))
                }
            })
            .collect()
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[0, {}]", self.lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cardinality {
    Fin(u64),
    Aleph0,
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Fin(n) => write!(f, "{n}"),
            Cardinality::Aleph0 => f.write_str("aleph0"),
        }
    }
}

impl Serialize for Cardinality {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cardinality::Fin(n) => s.serialize_u64(*n),
            Cardinality::Aleph0 => s.serialize_str("aleph0"),
        }
    }
}

/// The union of all sampled levels, indexed by mixed-radix codes.
///
/// With radix `B = per_level + 1`, code `n = Σ dₑ·Bᵉ` stands for the ordinal
/// `Σ ω^e·dₑ`, so integer order is ordinal order. The hierarchical sample is
/// exactly the codes `1..=T·B^top`, where `top` is the highest sampled level
/// and `T` the number of top-level points; a code's level is its number of
/// trailing zero digits. The level-η points in the gap just below a sampled
/// point `p` of higher level are `a + ω^η·j` (`1 ≤ j ≤ per_level`), `a` being
/// the previous sampled point of level above η.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleGrid {
    lambda: Ordinal,
    radix: u64,
    top: u32,
    top_count: u64,
    total: u64,
    powers: Vec<u64>,
}

impl SampleGrid {
    fn new(space: &Space, levels: u32, per_level: u64) -> Result<Self, SpaceError> {
        let top = levels - 1;
        let too_large = SpaceError::SampleTooLarge { per_level, levels };
        let radix = per_level.checked_add(1).ok_or(too_large.clone())?;
        // ω^top·i ≤ λ for every i when λ has a higher leading exponent,
        // otherwise up to λ's leading coefficient.
        let top_count = if space.max_level() > top {
            per_level
        } else {
            per_level.min(space.lambda().coefficient(top))
        };
        let mut powers = vec![1u64];
        for _ in 0..=top {
            let next = powers
                .last()
                .unwrap()
                .checked_mul(radix)
                .ok_or(too_large.clone())?;
            powers.push(next);
        }
        let total = top_count
            .checked_mul(powers[top as usize])
            .ok_or(too_large)?;
        Ok(SampleGrid {
            lambda: space.lambda().clone(),
            radix,
            top,
            top_count,
            total,
            powers,
        })
    }

    pub fn per_level(&self) -> u64 {
        self.radix - 1
    }

    /// Number of sampled points over all levels.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn lambda(&self) -> &Ordinal {
        &self.lambda
    }

    fn pow(&self, e: u32) -> u64 {
        self.powers[e as usize]
    }

    pub fn ordinal_of(&self, mut code: u64) -> Ordinal {
        let mut terms = Vec::new();
        for e in (0..=self.top).rev() {
            let d = code / self.pow(e);
            code %= self.pow(e);
            if d > 0 {
                terms.push(Term::new(e, d));
            }
        }
        Ordinal::from_terms(terms).expect("digits give a canonical term list")
    }

    /// Code of `p` when `p` is digit-representable, regardless of sampling.
    fn exact_code(&self, p: &Ordinal) -> Option<u64> {
        let mut code = 0u64;
        for t in p.terms() {
            if t.exp > self.top || t.coeff >= self.radix {
                return None;
            }
            code += t.coeff * self.pow(t.exp);
        }
        Some(code)
    }

    /// Smallest code whose ordinal is `≥ a`; `total + 1` when there is none.
    fn code_ceil(&self, a: &Ordinal) -> u64 {
        let none = self.total + 1;
        if a.leading_exponent().is_some_and(|e| e > self.top) {
            return none;
        }
        let mut prefix = 0u64;
        for t in a.terms() {
            if t.coeff >= self.radix {
                // Every code sharing the higher digits is below `a`; bump the
                // next digit up.
                let step = self.powers[t.exp as usize + 1];
                return prefix.checked_add(step).map_or(none, |c| c.min(none));
            }
            prefix += t.coeff * self.pow(t.exp);
        }
        prefix.min(none)
    }

    /// Smallest code whose ordinal is `> a`.
    fn code_above(&self, a: &Ordinal) -> u64 {
        self.code_ceil(&a.successor())
    }

    fn code_above_lower(&self, lower: &Lower) -> u64 {
        match lower {
            Lower::Bottom => 0,
            Lower::Open(a) => self.code_above(a),
        }
    }

    fn level_of_code(&self, code: u64) -> u32 {
        let mut level = 0;
        let mut c = code;
        while level < self.top && c.is_multiple_of(self.radix) {
            c /= self.radix;
            level += 1;
        }
        level
    }

    fn level_len(&self, level: u32) -> u64 {
        self.count_below(level, u64::MAX)
    }

    /// Number of level-`level` codes in `[1, x)`.
    fn count_below(&self, level: u32, x: u64) -> u64 {
        let step = self.pow(level);
        if level == self.top {
            let y = x.min(self.total.saturating_add(1));
            y.saturating_sub(1) / step
        } else {
            let y = x.min(self.total);
            let m = y.saturating_sub(1) / step;
            m - m / self.radix
        }
    }

    fn select(&self, level: u32, i: u64) -> u64 {
        let step = self.pow(level);
        if level == self.top {
            (i + 1) * step
        } else {
            let per_block = self.radix - 1;
            (i + i / per_block + 1) * step
        }
    }

    /// First sampled point (any level) in `(lower, upper]`.
    pub fn first_point_in(&self, lower: &Lower, upper: &Ordinal) -> Option<Ordinal> {
        let code = self.code_above_lower(lower).max(1);
        (code <= self.total && code < self.code_above(upper)).then(|| self.ordinal_of(code))
    }
}

/// A finite sample `E_ξ` of one Cantor-Bendixson level, backed by a shared
/// [`SampleGrid`]. Points are strictly increasing and addressable by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSample {
    level: u32,
    grid: Arc<SampleGrid>,
}

impl LevelSample {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn grid(&self) -> &Arc<SampleGrid> {
        &self.grid
    }

    pub fn len(&self) -> u64 {
        self.grid.level_len(self.level)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, index: u64) -> Option<Ordinal> {
        (index < self.len()).then(|| self.grid.ordinal_of(self.grid.select(self.level, index)))
    }

    pub fn iter(&self) -> impl Iterator<Item = Ordinal> + '_ {
        (0..self.len()).map(move |i| self.grid.ordinal_of(self.grid.select(self.level, i)))
    }

    pub fn contains(&self, p: &Ordinal) -> bool {
        match self.grid.exact_code(p) {
            Some(code) if code >= 1 && code <= self.grid.total => {
                self.grid.level_of_code(code) == self.level
            }
            _ => false,
        }
    }

    /// The higher-level sampled point whose gap `p` was placed in, or `None`
    /// for top-level points and non-members.
    pub fn anchor(&self, p: &Ordinal) -> Option<Ordinal> {
        if !self.contains(p) || self.level == self.grid.top {
            return None;
        }
        let block = self.grid.pow(self.level + 1);
        let code = self.grid.exact_code(p)?;
        Some(self.grid.ordinal_of((code / block + 1) * block))
    }

    /// Index range of the sampled points lying in `(lower, upper]`.
    pub fn index_range(&self, lower: &Lower, upper: &Ordinal) -> std::ops::Range<u64> {
        let lo = self
            .grid
            .count_below(self.level, self.grid.code_above_lower(lower));
        let hi = self
            .grid
            .count_below(self.level, self.grid.code_above(upper));
        lo..hi.max(lo)
    }

    /// Index of the first sampled point `≥ p` (`len()` if none).
    pub fn first_at_or_after(&self, p: &Ordinal) -> u64 {
        self.grid.count_below(self.level, self.grid.code_ceil(p))
    }

    /// Up to `limit` sampled points lying in `set`, in increasing order.
    pub fn points_in(&self, set: &ClopenSet, limit: usize) -> Vec<Ordinal> {
        let mut out = Vec::new();
        for iv in set.intervals() {
            for i in self.index_range(&iv.lower, &iv.upper) {
                if out.len() >= limit {
                    return out;
                }
                out.push(self.get(i).expect("index in range"));
            }
        }
        out
    }
}

/// Hierarchical samples of levels `0..levels`, top level first filled with
/// `ω^(levels−1)·i` for `1 ≤ i ≤ per_level` (capped by λ), each lower level
/// placing `per_level` points in the gap below every higher sampled point.
pub fn level_sample(
    space: &Space,
    levels: u32,
    per_level: u64,
) -> Result<Vec<LevelSample>, SpaceError> {
    let height = space.max_level() + 1;
    if levels > height {
        return Err(SpaceError::LevelOutOfRange {
            requested: levels,
            height,
        });
    }
    if per_level == 0 {
        return Err(SpaceError::EmptyPerLevel);
    }
    if levels == 0 {
        return Ok(Vec::new());
    }
    let grid = Arc::new(SampleGrid::new(space, levels, per_level)?);
    Ok((0..levels)
        .map(|level| LevelSample {
            level,
            grid: Arc::clone(&grid),
        })
        .collect())
}

/// Default sample density for `levels` sampled levels: `2^levels + 1`.
pub fn default_per_level(levels: u32) -> u64 {
    (1u64 << levels) + 1
}
