//! Cantor-Bendixson analysis of ordinal intervals `[0, λ]`, independent
//! families of clopen sets and the rank of the independence tree, with an
//! experiment harness checking the finite forms of the rank lower bounds.

pub mod algebra;
pub mod bitset;
pub mod clopen;
pub mod independence;
pub mod lab;
pub mod ordinal;
pub mod rank_tree;
pub mod space;

pub use algebra::SetAlgebra;
pub use bitset::{BitSet, BitUniverse};
pub use clopen::{ClopenSet, FiniteAlgebra, Lower};
pub use ordinal::Ordinal;
pub use rank_tree::{Families, FamilySequence, TreeNode};
pub use space::{Cardinality, LevelSample, Space};

/// Ordinals are always held in Cantor normal form.
pub type OrdinalCNF = Ordinal;
