//! The set-algebra interface shared by the clopen and bitset backends.

use std::fmt::Debug;
use std::hash::Hash;

/// A Boolean algebra of subsets of a fixed universe.
///
/// Implementors are the universe itself (an ordinal space or a finite index
/// set); sets are plain values of `Self::Set`.
pub trait SetAlgebra {
    type Set: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn full(&self) -> Self::Set;
    fn intersect(&self, a: &Self::Set, b: &Self::Set) -> Self::Set;
    fn complement(&self, a: &Self::Set) -> Self::Set;
    fn is_empty(&self, a: &Self::Set) -> bool;

    fn difference(&self, a: &Self::Set, b: &Self::Set) -> Self::Set {
        self.intersect(a, &self.complement(b))
    }

    /// Whether `a` is a set over this universe.
    fn belongs(&self, a: &Self::Set) -> bool;
}

/// Atoms of the subalgebra generated by `generators`, by iterated splitting
/// of the partition `{universe}`. Only nonempty parts are kept, so the result
/// is the set of nonempty Boolean cells in generation order.
pub fn atoms<U: SetAlgebra>(universe: &U, generators: &[U::Set]) -> Vec<U::Set> {
    let mut parts = vec![universe.full()];
    parts.retain(|p| !universe.is_empty(p));
    for g in generators {
        let mut next = Vec::with_capacity(parts.len() * 2);
        for p in &parts {
            let inside = universe.intersect(p, g);
            let outside = universe.difference(p, g);
            if !universe.is_empty(&inside) {
                next.push(inside);
            }
            if !universe.is_empty(&outside) {
                next.push(outside);
            }
        }
        parts = next;
    }
    parts
}
