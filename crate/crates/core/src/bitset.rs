//! Fixed-universe bitsets, the finite backend for families over `D = {0, …, n−1}`.

use std::fmt;

use crate::algebra::SetAlgebra;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet {
            len,
            words: vec![!0; len.div_ceil(WORD)],
        };
        s.clear_tail();
        s
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << rem) - 1;
            }
        }
    }

    /// Size of the universe, not the number of members.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit {i} outside universe of size {}",
            self.len
        );
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn union(&self, other: &BitSet) -> BitSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &BitSet) -> BitSet {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> BitSet {
        let mut s = BitSet {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.clear_tail();
        s
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    fn zip(&self, other: &BitSet, f: impl Fn(u64, u64) -> u64) -> BitSet {
        assert_eq!(self.len, other.len, "bitset universe mismatch");
        BitSet {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// The power set of `{0, …, size−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitUniverse {
    pub size: usize,
}

impl BitUniverse {
    pub fn new(size: usize) -> Self {
        BitUniverse { size }
    }
}

impl SetAlgebra for BitUniverse {
    type Set = BitSet;

    fn full(&self) -> BitSet {
        BitSet::full(self.size)
    }

    fn intersect(&self, a: &BitSet, b: &BitSet) -> BitSet {
        a.intersection(b)
    }

    fn complement(&self, a: &BitSet) -> BitSet {
        a.complement()
    }

    fn difference(&self, a: &BitSet, b: &BitSet) -> BitSet {
        a.difference(b)
    }

    fn is_empty(&self, a: &BitSet) -> bool {
        a.is_empty()
    }

    fn belongs(&self, a: &BitSet) -> bool {
        a.universe() == self.size
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = BitSet::from_indices(70, [0, 1, 65]);
        let b = BitSet::from_indices(70, [1, 2, 69]);
        assert_eq!(a.intersection(&b), BitSet::from_indices(70, [1]));
        assert_eq!(a.union(&b).count(), 5);
        assert_eq!(a.complement().count(), 67);
        assert!(!a.complement().contains(65));
        assert!(a.complement().contains(69));
        assert_eq!(BitSet::full(70).complement(), BitSet::new(70));
        assert_eq!(a.to_string(), "{0,1,65}");
        assert!(BitSet::from_indices(70, [1]).is_subset(&a));
    }
}
