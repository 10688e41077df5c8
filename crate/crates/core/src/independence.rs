//! Independent sequences of sets: cells, independence tests, the
//! cell-splitting extension step and bounded search for long independent
//! sequences.
//!
//! A sequence `⟨K_0, …, K_{n−1}⟩` is independent when every cell
//! `⋂ K_i^{s(i)}` is nonempty, where `K⁰ = K` and `K¹` is the complement.
//! Sign patterns are encoded as integers: bit `i` of the pattern is `s(i)`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::{atoms, SetAlgebra};
use crate::clopen::{AtomicAlgebra, ClopenSet};
use crate::ordinal::Ordinal;
use crate::space::LevelSample;

/// A sign pattern `s ∈ {0,1}^n`, bit `i` holding `s(i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignPattern {
    pub bits: u64,
    pub len: usize,
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("ε");
        }
        for i in 0..self.len {
            write!(f, "{}", self.bits >> i & 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndependenceError {
    #[error("member {index} is not a set over the sequence's universe")]
    UniverseMismatch { index: usize },
    #[error("sequences of length {0} have too many cells to enumerate")]
    TooLong(usize),
}

/// A finite sequence of sets over one universe.
#[derive(Clone, Debug)]
pub struct IndepSequence<U: SetAlgebra> {
    universe: U,
    members: Vec<U::Set>,
}

impl<U: SetAlgebra> IndepSequence<U> {
    pub fn new(universe: U, members: Vec<U::Set>) -> Result<Self, IndependenceError> {
        if let Some(index) = members.iter().position(|m| !universe.belongs(m)) {
            return Err(IndependenceError::UniverseMismatch { index });
        }
        if members.len() >= 64 {
            return Err(IndependenceError::TooLong(members.len()));
        }
        Ok(IndepSequence { universe, members })
    }

    pub fn universe(&self) -> &U {
        &self.universe
    }

    pub fn members(&self) -> &[U::Set] {
        &self.members
    }

    pub fn is_independent(&self) -> bool {
        is_independent(&self.universe, &self.members)
    }

    pub fn cells(&self) -> BTreeMap<SignPattern, U::Set> {
        let len = self.members.len();
        cells(&self.universe, &self.members)
            .into_iter()
            .enumerate()
            .map(|(bits, cell)| {
                (
                    SignPattern {
                        bits: bits as u64,
                        len,
                    },
                    cell,
                )
            })
            .collect()
    }

    pub fn first_empty_cell(&self) -> Option<SignPattern> {
        first_empty_cell(&self.universe, &self.members)
    }
}

/// All `2^n` cells, indexed by sign pattern. They partition the universe.
pub fn cells<U: SetAlgebra>(universe: &U, members: &[U::Set]) -> Vec<U::Set> {
    let mut out = vec![universe.full()];
    for k in members {
        let inside: Vec<U::Set> = out.iter().map(|c| universe.intersect(c, k)).collect();
        let outside: Vec<U::Set> = out.iter().map(|c| universe.difference(c, k)).collect();
        out = inside;
        out.extend(outside);
    }
    out
}

/// Depth-first search for an empty cell, pruning on empty partial
/// intersections.
pub fn first_empty_cell<U: SetAlgebra>(universe: &U, members: &[U::Set]) -> Option<SignPattern> {
    fn go<U: SetAlgebra>(
        u: &U,
        members: &[U::Set],
        i: usize,
        acc: &U::Set,
        bits: u64,
    ) -> Option<u64> {
        if u.is_empty(acc) {
            return Some(bits);
        }
        let k = members.get(i)?;
        go(u, members, i + 1, &u.intersect(acc, k), bits)
            .or_else(|| go(u, members, i + 1, &u.difference(acc, k), bits | 1 << i))
    }
    go(universe, members, 0, &universe.full(), 0).map(|bits| SignPattern {
        bits,
        len: members.len(),
    })
}

/// Every cell nonempty. The empty sequence is independent.
pub fn is_independent<U: SetAlgebra>(universe: &U, members: &[U::Set]) -> bool {
    first_empty_cell(universe, members).is_none()
}

/// Whether `candidate` splits every one of `cells`, i.e. whether appending
/// it to an independent sequence with these cells keeps it independent.
pub fn splits_all<U: SetAlgebra>(universe: &U, cells: &[U::Set], candidate: &U::Set) -> bool {
    cells.iter().all(|c| {
        !universe.is_empty(&universe.intersect(c, candidate))
            && !universe.is_empty(&universe.difference(c, candidate))
    })
}

/// Length of the longest independent sequence drawn without reuse from
/// `family`, capped at `budget`.
///
/// Order does not matter for independence, so only increasing index
/// combinations are explored. A branch of length `n` is abandoned when the
/// algebra generated by the family has fewer than `2^(n+1)` atoms.
pub fn max_independent_length<U: SetAlgebra>(
    universe: &U,
    family: &[U::Set],
    budget: usize,
) -> usize {
    let atom_count = atoms(universe, family).len();
    let ceiling = usize::BITS as usize - 1 - atom_count.max(1).leading_zeros() as usize;
    let cap = budget.min(ceiling).min(family.len());

    fn search<U: SetAlgebra>(
        u: &U,
        family: &[U::Set],
        start: usize,
        cells: &[U::Set],
        depth: usize,
        cap: usize,
        best: &mut usize,
    ) {
        *best = (*best).max(depth);
        if *best >= cap || depth + (family.len() - start) <= *best {
            return;
        }
        for i in start..family.len() {
            if splits_all(u, cells, &family[i]) {
                let mut next = Vec::with_capacity(cells.len() * 2);
                for c in cells {
                    next.push(u.intersect(c, &family[i]));
                    next.push(u.difference(c, &family[i]));
                }
                search(u, family, i + 1, &next, depth + 1, cap, best);
                if *best >= cap {
                    return;
                }
            }
        }
    }

    let mut best = 0;
    if cap > 0 {
        search(universe, family, 0, &[universe.full()], 0, cap, &mut best);
    }
    best
}

/// Witness points available to the splitting step.
pub trait WitnessPoints {
    /// Up to `limit` witness points inside `set`, increasing.
    fn points_in(&self, set: &ClopenSet, limit: usize) -> Vec<Ordinal>;
}

impl WitnessPoints for LevelSample {
    fn points_in(&self, set: &ClopenSet, limit: usize) -> Vec<Ordinal> {
        LevelSample::points_in(self, set, limit)
    }
}

impl WitnessPoints for [Ordinal] {
    fn points_in(&self, set: &ClopenSet, limit: usize) -> Vec<Ordinal> {
        let mut pts: Vec<Ordinal> = self
            .iter()
            .filter(|p| set.contains(p))
            .take(limit)
            .cloned()
            .collect();
        pts.sort();
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("cell {pattern} meets the witness set in {found} point(s), need 2: {cell}")]
    InsufficientWitnesses {
        pattern: SignPattern,
        cell: ClopenSet,
        found: usize,
    },
    #[error("the algebra cannot split the witness points of cell {pattern}: {cell}")]
    CannotSeparate {
        pattern: SignPattern,
        cell: ClopenSet,
    },
}

/// Witness points examined per cell when looking for a separable pair.
const POINTS_PER_CELL: usize = 64;

/// Finds `H` in `algebra` such that, for every cell `c` of `current`, both
/// `c ∩ H` and `c ∖ H` contain witness points.
///
/// Greedy: per cell, pick two witness points lying in different atoms whose
/// atoms are not already committed the other way, put the first atom in `H`
/// and keep the second out. `H` is the union of the atoms committed in.
pub fn split_cell_extension<A, W>(
    algebra: &A,
    witness: &W,
    current: &[ClopenSet],
) -> Result<ClopenSet, SplitError>
where
    A: AtomicAlgebra,
    W: WitnessPoints + ?Sized,
{
    let space = algebra.space();
    let cell_list = cells(space, current);
    let n = current.len();
    let mut committed: BTreeMap<ClopenSet, bool> = BTreeMap::new();
    let mut per_cell: Vec<(ClopenSet, Vec<Ordinal>)> = Vec::with_capacity(cell_list.len());
    for (bits, cell) in cell_list.into_iter().enumerate() {
        let pattern = SignPattern {
            bits: bits as u64,
            len: n,
        };
        let pts = witness.points_in(&cell, POINTS_PER_CELL);
        if pts.len() < 2 {
            return Err(SplitError::InsufficientWitnesses {
                pattern,
                found: pts.len(),
                cell,
            });
        }
        let tagged: Vec<(Ordinal, ClopenSet)> = pts
            .into_iter()
            .map(|p| {
                let a = algebra.atom_containing(&p);
                (p, a)
            })
            .collect();
        let choice = tagged.iter().enumerate().find_map(|(i, (_, a_in))| {
            if committed.get(a_in) == Some(&false) {
                return None;
            }
            tagged
                .iter()
                .enumerate()
                .find(|(j, (_, a_out))| {
                    *j != i && a_out != a_in && committed.get(a_out) != Some(&true)
                })
                .map(|(_, (_, a_out))| (a_in.clone(), a_out.clone()))
        });
        let Some((a_in, a_out)) = choice else {
            return Err(SplitError::CannotSeparate { pattern, cell });
        };
        committed.insert(a_in, true);
        committed.insert(a_out, false);
        per_cell.push((cell, tagged.into_iter().map(|(p, _)| p).collect()));
    }
    let h = committed
        .into_iter()
        .filter(|(_, inside)| *inside)
        .fold(ClopenSet::empty(space), |acc, (atom, _)| {
            acc.union(&atom).expect("same space")
        });
    for (bits, (cell, pts)) in per_cell.iter().enumerate() {
        let inside = pts.iter().any(|p| h.contains(p));
        let outside = pts.iter().any(|p| !h.contains(p));
        if !(inside && outside) {
            return Err(SplitError::CannotSeparate {
                pattern: SignPattern {
                    bits: bits as u64,
                    len: n,
                },
                cell: cell.clone(),
            });
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitset::{BitSet, BitUniverse};
    use crate::clopen::separating_algebra;
    use crate::space::Space;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn bs(n: usize, xs: &[usize]) -> BitSet {
        BitSet::from_indices(n, xs.iter().copied())
    }

    #[test]
    fn independence_examples() {
        let x = Space::new(o("w")).unwrap();
        let seq = vec![
            ClopenSet::parse(&x, "[0,1]").unwrap(),
            ClopenSet::parse(&x, "(0,2]").unwrap(),
        ];
        assert!(is_independent(&x, &seq));
        let cs = cells(&x, &seq);
        let shown: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["(0,1]", "(1,2]", "[0,0]", "(2,w]"]);

        let u = BitUniverse::new(4);
        assert!(is_independent(&u, &[]));
        let seq = [bs(4, &[0, 1]), bs(4, &[0, 1, 2])];
        assert!(!is_independent(&u, &seq));
        assert_eq!(
            first_empty_cell(&u, &seq),
            Some(SignPattern { bits: 0b10, len: 2 })
        );
    }

    #[test]
    fn cells_examples() {
        let u = BitUniverse::new(3);
        assert_eq!(
            cells(&u, &[bs(3, &[0, 1])]),
            vec![bs(3, &[0, 1]), bs(3, &[2])]
        );
        assert_eq!(cells(&u, &[]), vec![bs(3, &[0, 1, 2])]);
        let seq = IndepSequence::new(u, vec![bs(3, &[0, 1])]).unwrap();
        let keyed: Vec<String> = seq.cells().keys().map(|k| k.to_string()).collect();
        assert_eq!(keyed, ["0", "1"]);
        assert!(IndepSequence::new(BitUniverse::new(3), vec![bs(4, &[0])]).is_err());
    }

    #[test]
    fn max_length_examples() {
        // Algebra with atoms {0,1}, {2}, {3}: all 8 unions.
        let u = BitUniverse::new(4);
        let atoms_ = [bs(4, &[0, 1]), bs(4, &[2]), bs(4, &[3])];
        let family: Vec<BitSet> = (0..8u32)
            .map(|m| {
                (0..3)
                    .filter(|i| m >> i & 1 == 1)
                    .fold(BitSet::new(4), |acc, i| acc.union(&atoms_[i]))
            })
            .collect();
        assert_eq!(max_independent_length(&u, &family, 10), 1);

        assert_eq!(
            max_independent_length(&u, &[bs(4, &[0, 1]), bs(4, &[1, 2])], 10),
            2
        );

        // 16 subsets of {0..15}: the 4 coordinate bits, plus 12 filler sets.
        let u = BitUniverse::new(16);
        let mut family: Vec<BitSet> = (0..4)
            .map(|b| BitSet::from_indices(16, (0..16).filter(|x| x >> b & 1 == 1)))
            .collect();
        for i in 0..12 {
            family.push(BitSet::from_indices(16, [i]));
        }
        assert_eq!(max_independent_length(&u, &family, 10), 4);
        assert_eq!(max_independent_length(&u, &family, 3), 3);
    }

    /// Brute force over every ordered subsequence.
    fn longest_by_brute_force(u: &BitUniverse, family: &[BitSet]) -> usize {
        fn go(
            u: &BitUniverse,
            family: &[BitSet],
            used: &mut Vec<bool>,
            seq: &mut Vec<BitSet>,
        ) -> usize {
            let mut best = seq.len();
            for i in 0..family.len() {
                if used[i] {
                    continue;
                }
                seq.push(family[i].clone());
                if is_independent(u, seq) {
                    used[i] = true;
                    best = best.max(go(u, family, used, seq));
                    used[i] = false;
                }
                seq.pop();
            }
            best
        }
        go(u, family, &mut vec![false; family.len()], &mut Vec::new())
    }

    #[test]
    fn max_length_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(2..8);
            let u = BitUniverse::new(n);
            let family: Vec<BitSet> = (0..rng.gen_range(0..6))
                .map(|_| BitSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.5))))
                .collect();
            assert_eq!(
                max_independent_length(&u, &family, 64),
                longest_by_brute_force(&u, &family)
            );
        }
    }

    #[test]
    fn split_examples() {
        let x = Space::new(o("w")).unwrap();
        let pts = [o("1"), o("3"), o("5"), o("7")];
        let alg = separating_algebra(&x, &pts).unwrap();
        let current = vec![ClopenSet::parse(&x, "[0,3]").unwrap()];
        let h = split_cell_extension(&alg, &pts[..], &current).unwrap();
        assert!(alg.contains_element(&h));
        let mut extended = current.clone();
        extended.push(h.clone());
        assert!(is_independent(&x, &extended));
        for cell in cells(&x, &extended) {
            assert!(
                pts.iter().any(|p| cell.contains(p)),
                "cell {cell} misses the witness"
            );
        }
        assert_eq!(h, ClopenSet::parse(&x, "[0,1], (3,5]").unwrap());

        let two = [o("1"), o("3")];
        let alg = separating_algebra(&x, &two).unwrap();
        let h = split_cell_extension(&alg, &two[..], &[]).unwrap();
        assert!(h.contains(&o("1")) != h.contains(&o("3")));

        let one = [o("1")];
        let alg = separating_algebra(&x, &one).unwrap();
        assert!(matches!(
            split_cell_extension(&alg, &one[..], &[]),
            Err(SplitError::InsufficientWitnesses { found: 1, .. })
        ));
    }

    #[test]
    fn split_reports_unseparable_points() {
        let x = Space::new(o("w")).unwrap();
        // Algebra {[0,5]} cannot split witnesses 1 and 3.
        let alg = separating_algebra(&x, &[o("5")]).unwrap();
        let witness = [o("1"), o("3")];
        assert!(matches!(
            split_cell_extension(&alg, &witness[..], &[]),
            Err(SplitError::CannotSeparate { .. })
        ));
    }
}
