//! Clopen subsets of `[0, λ]` as normalized finite unions of half-open
//! intervals `(a, b]`, plus finite subalgebras and the trace map.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{atoms, SetAlgebra};
use crate::bitset::BitSet;
use crate::ordinal::Ordinal;
use crate::space::{LevelSample, Space};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClopenError {
    #[error("operands live in different spaces ([0, {left}] vs [0, {right}])")]
    SpaceMismatch { left: Ordinal, right: Ordinal },
    #[error("interval ({lower}, {upper}] is empty or reversed")]
    EmptyInterval { lower: String, upper: Ordinal },
    #[error("interval endpoint {upper} exceeds the top point {lambda}")]
    OutsideSpace { upper: Ordinal, lambda: Ordinal },
    #[error("cannot build a separating algebra from an empty point set")]
    EmptyPointSet,
    #[error("malformed clopen literal at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

/// Left end of an interval. `Bottom` makes the interval closed at 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lower {
    Bottom,
    Open(Ordinal),
}

impl Lower {
    fn below(&self, p: &Ordinal) -> bool {
        match self {
            Lower::Bottom => true,
            Lower::Open(a) => a < p,
        }
    }
}

impl fmt::Display for Lower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lower::Bottom => f.write_str("BOTTOM"),
            Lower::Open(a) => write!(f, "{a}"),
        }
    }
}

/// The interval `(lower, upper]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lower: Lower,
    pub upper: Ordinal,
}

impl Interval {
    pub fn contains(&self, p: &Ordinal) -> bool {
        self.lower.below(p) && p <= &self.upper
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lower {
            Lower::Bottom => write!(f, "[0,{}]", self.upper),
            Lower::Open(a) => write!(f, "({a},{}]", self.upper),
        }
    }
}

/// A clopen subset of `[0, λ]`.
///
/// Intervals are sorted, pairwise disjoint and never adjacent, so equal sets
/// have identical representations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClopenSet {
    lambda: Ordinal,
    intervals: Vec<Interval>,
}

impl ClopenSet {
    pub fn empty(space: &Space) -> Self {
        ClopenSet {
            lambda: space.lambda().clone(),
            intervals: Vec::new(),
        }
    }

    pub fn full(space: &Space) -> Self {
        ClopenSet {
            lambda: space.lambda().clone(),
            intervals: vec![Interval {
                lower: Lower::Bottom,
                upper: space.lambda().clone(),
            }],
        }
    }

    /// `[0, x]`
    pub fn initial_segment(space: &Space, x: &Ordinal) -> Result<Self, ClopenError> {
        ClopenSet::from_intervals(space, [(Lower::Bottom, x.clone())])
    }

    /// `(lower, upper]`
    pub fn interval(space: &Space, lower: Lower, upper: Ordinal) -> Result<Self, ClopenError> {
        ClopenSet::from_intervals(space, [(lower, upper)])
    }

    /// Union of arbitrary (possibly overlapping) intervals.
    pub fn from_intervals(
        space: &Space,
        intervals: impl IntoIterator<Item = (Lower, Ordinal)>,
    ) -> Result<Self, ClopenError> {
        let mut raw = Vec::new();
        for (lower, upper) in intervals {
            if let Lower::Open(a) = &lower {
                if a >= &upper {
                    return Err(ClopenError::EmptyInterval {
                        lower: lower.to_string(),
                        upper,
                    });
                }
            }
            if !space.contains(&upper) {
                return Err(ClopenError::OutsideSpace {
                    upper,
                    lambda: space.lambda().clone(),
                });
            }
            raw.push(Interval { lower, upper });
        }
        raw.sort();
        let mut out: Vec<Interval> = Vec::with_capacity(raw.len());
        for iv in raw {
            if let Some(last) = out.last_mut() {
                let touches = match &iv.lower {
                    Lower::Bottom => true,
                    Lower::Open(a) => a <= &last.upper,
                };
                if touches {
                    if iv.upper > last.upper {
                        last.upper = iv.upper;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        Ok(ClopenSet {
            lambda: space.lambda().clone(),
            intervals: out,
        })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn lambda(&self) -> &Ordinal {
        &self.lambda
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, p: &Ordinal) -> bool {
        let i = self.intervals.partition_point(|iv| &iv.upper < p);
        self.intervals.get(i).is_some_and(|iv| iv.lower.below(p))
    }

    fn check_space(&self, other: &ClopenSet) -> Result<(), ClopenError> {
        if self.lambda != other.lambda {
            return Err(ClopenError::SpaceMismatch {
                left: self.lambda.clone(),
                right: other.lambda.clone(),
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet, ClopenError> {
        self.check_space(other)?;
        Ok(self.combine(other, |a, b| a || b))
    }

    pub fn intersect(&self, other: &ClopenSet) -> Result<ClopenSet, ClopenError> {
        self.check_space(other)?;
        Ok(self.combine(other, |a, b| a && b))
    }

    pub fn difference(&self, other: &ClopenSet) -> Result<ClopenSet, ClopenError> {
        self.check_space(other)?;
        Ok(self.combine(other, |a, b| a && !b))
    }

    /// `[0, λ] ∖ self`
    pub fn complement(&self) -> ClopenSet {
        self.combine(self, |a, _| !a)
    }

    pub fn is_subset(&self, other: &ClopenSet) -> Result<bool, ClopenError> {
        Ok(self.difference(other)?.is_empty())
    }

    /// Pointwise Boolean combination. Membership is constant on each
    /// elementary piece `(t_j, t_{j+1}]` between consecutive endpoints, so it
    /// is enough to test the right end of each piece.
    fn combine(&self, other: &ClopenSet, op: impl Fn(bool, bool) -> bool) -> ClopenSet {
        let mut cuts: BTreeSet<&Ordinal> = BTreeSet::new();
        for iv in self.intervals.iter().chain(&other.intervals) {
            if let Lower::Open(a) = &iv.lower {
                cuts.insert(a);
            }
            cuts.insert(&iv.upper);
        }
        cuts.insert(&self.lambda);
        let mut out: Vec<Interval> = Vec::new();
        let mut prev = Lower::Bottom;
        let mut prev_included = false;
        for t in cuts {
            let included = op(self.contains(t), other.contains(t));
            if included {
                match out.last_mut() {
                    Some(last) if prev_included => last.upper = t.clone(),
                    _ => out.push(Interval {
                        lower: prev.clone(),
                        upper: t.clone(),
                    }),
                }
            }
            prev_included = included;
            prev = Lower::Open(t.clone());
        }
        ClopenSet {
            lambda: self.lambda.clone(),
            intervals: out,
        }
    }

    /// Bit `i` is set iff `witness[i]` belongs to the set.
    pub fn trace(&self, witness: &[Ordinal]) -> BitSet {
        BitSet::from_indices(
            witness.len(),
            witness
                .iter()
                .enumerate()
                .filter(|(_, p)| self.contains(p))
                .map(|(i, _)| i),
        )
    }

    /// Parses the textual form `[0,w], (w*2, w^2]` (or `empty`) over `space`.
    pub fn parse(space: &Space, text: &str) -> Result<Self, ClopenError> {
        parse_clopen(space, text)
    }
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("empty");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

fn parse_clopen(space: &Space, text: &str) -> Result<ClopenSet, ClopenError> {
    let err = |position: usize, message: &str| ClopenError::Parse {
        position,
        message: message.to_string(),
    };
    if text.trim() == "empty" {
        return Ok(ClopenSet::empty(space));
    }
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut intervals = Vec::new();
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let open = match bytes.get(pos) {
            Some(b'[') => false,
            Some(b'(') => true,
            _ => return Err(err(pos, "expected '[' or '('")),
        };
        let start = pos + 1;
        let comma = text[start..]
            .find(',')
            .map(|i| start + i)
            .ok_or_else(|| err(start, "expected ','"))?;
        let close = text[comma..]
            .find(']')
            .map(|i| comma + i)
            .ok_or_else(|| err(comma, "expected ']'"))?;
        let parse_ord = |s: &str, at: usize| {
            s.parse::<Ordinal>()
                .map_err(|e| err(at + e.position, &e.message))
        };
        let left = parse_ord(&text[start..comma], start)?;
        let right = parse_ord(&text[comma + 1..close], comma + 1)?;
        let lower = if open {
            Lower::Open(left)
        } else if left.is_zero() {
            Lower::Bottom
        } else {
            return Err(err(start, "closed intervals must start at 0"));
        };
        intervals.push((lower, right));
        pos = close + 1;
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        match bytes.get(pos) {
            None => break,
            Some(b',') => pos += 1,
            Some(_) => return Err(err(pos, "expected ',' between intervals")),
        }
    }
    ClopenSet::from_intervals(space, intervals)
}

impl SetAlgebra for Space {
    type Set = ClopenSet;

    fn full(&self) -> ClopenSet {
        ClopenSet::full(self)
    }

    fn intersect(&self, a: &ClopenSet, b: &ClopenSet) -> ClopenSet {
        debug_assert!(self.belongs(a) && self.belongs(b));
        a.combine(b, |x, y| x && y)
    }

    fn complement(&self, a: &ClopenSet) -> ClopenSet {
        a.complement()
    }

    fn difference(&self, a: &ClopenSet, b: &ClopenSet) -> ClopenSet {
        debug_assert!(self.belongs(a) && self.belongs(b));
        a.combine(b, |x, y| x && !y)
    }

    fn is_empty(&self, a: &ClopenSet) -> bool {
        a.is_empty()
    }

    fn belongs(&self, a: &ClopenSet) -> bool {
        a.lambda() == self.lambda()
    }
}

/// A clopen algebra that can report the atom containing a point.
pub trait AtomicAlgebra {
    fn space(&self) -> &Space;
    fn atom_containing(&self, p: &Ordinal) -> ClopenSet;
}

/// The finite subalgebra generated by explicit clopen generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    space: Space,
    generators: Vec<ClopenSet>,
    atoms: Vec<ClopenSet>,
}

impl FiniteAlgebra {
    pub fn generated_by(space: &Space, generators: Vec<ClopenSet>) -> Result<Self, ClopenError> {
        for g in &generators {
            if !space.belongs(g) {
                return Err(ClopenError::SpaceMismatch {
                    left: space.lambda().clone(),
                    right: g.lambda().clone(),
                });
            }
        }
        let mut atom_list = atoms(space, &generators);
        atom_list.sort();
        Ok(FiniteAlgebra {
            space: space.clone(),
            generators,
            atoms: atom_list,
        })
    }

    pub fn generators(&self) -> &[ClopenSet] {
        &self.generators
    }

    pub fn atoms(&self) -> &[ClopenSet] {
        &self.atoms
    }

    /// All `2^atoms` elements, ordered by atom-subset bitmask. Only sensible
    /// for small algebras.
    pub fn elements(&self) -> Vec<ClopenSet> {
        let n = self.atoms.len();
        assert!(n < 20, "algebra with {n} atoms is too large to enumerate");
        (0u32..1 << n)
            .map(|mask| {
                self.atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(ClopenSet::empty(&self.space), |acc, (_, a)| {
                        acc.union(a).expect("same space")
                    })
            })
            .collect()
    }

    /// Whether `set` is a union of atoms.
    pub fn contains_element(&self, set: &ClopenSet) -> bool {
        self.space.belongs(set)
            && self.atoms.iter().all(|a| {
                let inside = a.intersect(set).expect("same space");
                inside.is_empty() || &inside == a
            })
    }
}

impl AtomicAlgebra for FiniteAlgebra {
    fn space(&self) -> &Space {
        &self.space
    }

    fn atom_containing(&self, p: &Ordinal) -> ClopenSet {
        self.atoms
            .iter()
            .find(|a| a.contains(p))
            .cloned()
            .unwrap_or_else(|| ClopenSet::empty(&self.space))
    }
}

/// Algebra generated by `[0, x]` for each given point; any two distinct
/// points are separated by the initial segment ending at the smaller one.
pub fn separating_algebra(space: &Space, points: &[Ordinal]) -> Result<FiniteAlgebra, ClopenError> {
    if points.is_empty() {
        return Err(ClopenError::EmptyPointSet);
    }
    let mut sorted: Vec<&Ordinal> = points.iter().collect();
    sorted.sort();
    sorted.dedup();
    let generators = sorted
        .into_iter()
        .map(|x| ClopenSet::initial_segment(space, x))
        .collect::<Result<Vec<_>, _>>()?;
    FiniteAlgebra::generated_by(space, generators)
}

/// The separating algebra of a (possibly huge) level sample, kept implicit:
/// its atoms are the gaps `(s_{i−1}, s_i]` between consecutive sampled points
/// plus the final gap up to λ.
#[derive(Clone, Debug)]
pub struct SampleAlgebra {
    space: Space,
    sample: LevelSample,
}

impl SampleAlgebra {
    pub fn new(space: &Space, sample: &LevelSample) -> Self {
        SampleAlgebra {
            space: space.clone(),
            sample: sample.clone(),
        }
    }

    pub fn atom_count(&self) -> u64 {
        let n = self.sample.len();
        let last_is_top = self.sample.get(n.wrapping_sub(1)).as_ref() == Some(self.space.lambda());
        if last_is_top {
            n
        } else {
            n + 1
        }
    }

    /// Whether `set` is an element of the algebra: every endpoint is a
    /// sampled point (or λ).
    pub fn contains_element(&self, set: &ClopenSet) -> bool {
        set.intervals().iter().all(|iv| {
            let lower_ok = match &iv.lower {
                Lower::Bottom => true,
                Lower::Open(a) => self.sample.contains(a),
            };
            lower_ok && (self.sample.contains(&iv.upper) || &iv.upper == self.space.lambda())
        })
    }
}

impl AtomicAlgebra for SampleAlgebra {
    fn space(&self) -> &Space {
        &self.space
    }

    fn atom_containing(&self, p: &Ordinal) -> ClopenSet {
        let i = self.sample.first_at_or_after(p);
        let lower = match i.checked_sub(1).and_then(|j| self.sample.get(j)) {
            Some(a) => Lower::Open(a),
            None => Lower::Bottom,
        };
        let upper = self
            .sample
            .get(i)
            .unwrap_or_else(|| self.space.lambda().clone());
        ClopenSet::interval(&self.space, lower, upper).expect("gap is a nonempty interval")
    }
}

/// Outcome of [`cell_hitting_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HittingCheck {
    Passed,
    /// A nonempty cell containing no witness point.
    Missed(ClopenSet),
}

impl HittingCheck {
    pub fn passed(&self) -> bool {
        matches!(self, HittingCheck::Passed)
    }
}

/// Checks that every nonempty Boolean cell of the combined generators of
/// `algebras` contains a witness point. When it does, the trace onto the
/// witness is injective on the generated algebra.
pub fn cell_hitting_check(
    space: &Space,
    algebras: &[FiniteAlgebra],
    witness: &[Ordinal],
) -> HittingCheck {
    let generators: Vec<ClopenSet> = algebras
        .iter()
        .flat_map(|a| a.generators().iter().cloned())
        .collect();
    let mut cells = atoms(space, &generators);
    cells.sort();
    for cell in cells {
        if !witness.iter().any(|p| cell.contains(p)) {
            return HittingCheck::Missed(cell);
        }
    }
    HittingCheck::Passed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn sp(s: &str) -> Space {
        Space::new(o(s)).unwrap()
    }

    fn c(space: &Space, s: &str) -> ClopenSet {
        ClopenSet::parse(space, s).unwrap()
    }

    #[test]
    fn boolean_examples() {
        let x = sp("w");
        assert_eq!(c(&x, "[0,1]").complement(), c(&x, "(1,w]"));
        assert_eq!(
            c(&x, "[0,1]").intersect(&c(&x, "(0,2]")).unwrap(),
            c(&x, "(0,1]")
        );
        assert_eq!(
            c(&x, "[0,1]").union(&c(&x, "(1,3]")).unwrap(),
            c(&x, "[0,3]")
        );
        assert_eq!(
            c(&x, "[0,1]")
                .union(&c(&x, "(1,3]"))
                .unwrap()
                .intervals()
                .len(),
            1
        );
        let other = c(&sp("w*2"), "[0,1]");
        assert!(matches!(
            c(&x, "[0,1]").union(&other),
            Err(ClopenError::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn membership() {
        let x = sp("w");
        assert!(c(&x, "(0,w]").contains(&o("w")));
        assert!(!c(&x, "(0,w]").contains(&o("0")));
        assert!(c(&x, "[0,1]")
            .intersect(&c(&x, "(2,5]"))
            .unwrap()
            .is_empty());
        assert!(c(&x, "[0,3], (5,w]").contains(&o("17")));
        assert!(!c(&x, "[0,3], (5,w]").contains(&o("4")));
    }

    #[test]
    fn rendering_round_trip() {
        let x = sp("w^2");
        let s = c(&x, "[0,w] , (w*2, w^2]");
        assert_eq!(s.to_string(), "[0,w], (w*2,w^2]");
        assert_eq!(c(&x, &s.to_string()), s);
        assert_eq!(c(&x, "empty"), ClopenSet::empty(&x));
        assert!(ClopenSet::parse(&x, "[1,2]").is_err());
        assert!(ClopenSet::parse(&x, "(3,2]").is_err());
        assert!(ClopenSet::parse(&x, "(3,w^3]").is_err());
        assert!(ClopenSet::parse(&x, "(3,w^^3]").is_err());
        // Overlapping input is normalized.
        assert_eq!(c(&x, "(1,5], (3,9], [0,1]"), c(&x, "[0,9]"));
    }

    #[test]
    fn separating_algebra_examples() {
        let x = sp("w");
        let alg = separating_algebra(&x, &[o("1"), o("3")]).unwrap();
        assert_eq!(alg.generators(), &[c(&x, "[0,1]"), c(&x, "[0,3]")]);
        let g = &alg.generators()[0];
        assert!(g.contains(&o("1")) && !g.contains(&o("3")));

        let alg = separating_algebra(&x, &[o("5")]).unwrap();
        let elems: BTreeSet<ClopenSet> = alg.elements().into_iter().collect();
        let expected: BTreeSet<ClopenSet> = ["empty", "[0,5]", "(5,w]", "[0,w]"]
            .iter()
            .map(|s| c(&x, s))
            .collect();
        assert_eq!(elems, expected);

        let alg = separating_algebra(&x, &[o("1"), o("3"), o("5")]).unwrap();
        let expected: Vec<ClopenSet> = ["[0,1]", "(1,3]", "(3,5]", "(5,w]"]
            .iter()
            .map(|s| c(&x, s))
            .collect();
        assert_eq!(alg.atoms(), expected.as_slice());
        // Brute-force cell enumeration over the three generators agrees.
        let gens = alg.generators();
        let mut nonempty = 0;
        for s in 0..8u32 {
            let cell = (0..3).fold(ClopenSet::full(&x), |acc, i| {
                let g = if s >> i & 1 == 0 {
                    gens[i].clone()
                } else {
                    gens[i].complement()
                };
                acc.intersect(&g).unwrap()
            });
            if !cell.is_empty() {
                nonempty += 1;
            }
        }
        assert_eq!(nonempty, 4);

        assert_eq!(separating_algebra(&x, &[]), Err(ClopenError::EmptyPointSet));
    }

    #[test]
    fn trace_examples() {
        let x = sp("w*2");
        let w: Vec<Ordinal> = ["0", "1", "2", "3"].iter().map(|s| o(s)).collect();
        assert_eq!(c(&x, "(0,2]").trace(&w), BitSet::from_indices(4, [1, 2]));
        assert!(ClopenSet::empty(&x).trace(&w).is_empty());
        let w: Vec<Ordinal> = ["1", "w", "w + 1"].iter().map(|s| o(s)).collect();
        assert_eq!(c(&x, "[0,w]").trace(&w), BitSet::from_indices(3, [0, 1]));
    }

    #[test]
    fn hitting_examples() {
        let x = sp("w");
        let one = separating_algebra(&x, &[o("1")]).unwrap();
        assert!(cell_hitting_check(&x, std::slice::from_ref(&one), &[o("0"), o("5")]).passed());
        assert_eq!(
            cell_hitting_check(&x, &[one], &[o("0"), o("1")]),
            HittingCheck::Missed(c(&x, "(1,w]"))
        );
        let two = separating_algebra(&x, &[o("1"), o("3")]).unwrap();
        assert!(cell_hitting_check(&x, &[two], &[o("0"), o("2"), o("7")]).passed());
    }

    #[test]
    fn sample_algebra_atoms() {
        let x = sp("w^2");
        let samples = crate::space::level_sample(&x, 2, 2).unwrap();
        let alg = SampleAlgebra::new(&x, &samples[0]);
        // Level 0 = {1, 2, w+1, w+2}.
        assert_eq!(alg.atom_containing(&o("0")), c(&x, "[0,1]"));
        assert_eq!(alg.atom_containing(&o("w")), c(&x, "(2,w + 1]"));
        assert_eq!(alg.atom_containing(&o("w*5")), c(&x, "(w + 2,w^2]"));
        assert_eq!(alg.atom_count(), 5);
        assert!(alg.contains_element(&c(&x, "(2,w + 1], (w + 2,w^2]")));
        assert!(!alg.contains_element(&c(&x, "(2,w]")));
        let explicit = separating_algebra(&x, &samples[0].iter().collect::<Vec<_>>()).unwrap();
        assert_eq!(explicit.atoms().len() as u64, alg.atom_count());
        for a in explicit.atoms() {
            let top = &a.intervals()[0].upper;
            assert_eq!(&alg.atom_containing(top), a);
        }
    }
}
