//! The independence tree `T(⟨C_ξ : ξ < γ⟩)` and its rank.
//!
//! Nodes are sets of pairs `(ξ, H)` with distinct indices whose members form
//! an independent sequence; children add one pair. Independence does not
//! depend on the order of the members, so nodes are keyed by their pair set
//! and the tree is evaluated as a memoized DAG. Trees over finite families
//! are finite, so the rank of the root is simply its height.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use dashmap::DashMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::SetAlgebra;
use crate::bitset::{BitSet, BitUniverse};
use crate::independence::splits_all;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("subsequence length {m} exceeds the number of families {gamma}")]
    SubsequenceTooLong { m: usize, gamma: usize },
    #[error("member {member} of family {family} is not a set over the universe")]
    UniverseMismatch { family: usize, member: usize },
    #[error("set {set:?} in family {family} is not a strictly increasing list")]
    UnsortedSet { family: usize, set: Vec<usize> },
    #[error("element {element} in family {family} is outside the universe of size {universe}")]
    ElementOutOfRange {
        family: usize,
        element: usize,
        universe: usize,
    },
}

/// An indexed sequence of finite families of sets over one universe.
///
/// Each family is kept sorted and duplicate-free, so member indices are
/// canonical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Families<U: SetAlgebra> {
    universe: U,
    families: Vec<Vec<U::Set>>,
}

/// Families of bitsets over `{0, …, universe_size−1}`.
pub type FamilySequence = Families<BitUniverse>;

impl<U: SetAlgebra> Families<U> {
    pub fn new(universe: U, families: Vec<Vec<U::Set>>) -> Result<Self, RankError> {
        let mut families = families;
        for (family, members) in families.iter_mut().enumerate() {
            if let Some(member) = members.iter().position(|m| !universe.belongs(m)) {
                return Err(RankError::UniverseMismatch { family, member });
            }
            members.sort();
            members.dedup();
        }
        Ok(Families { universe, families })
    }

    pub fn universe(&self) -> &U {
        &self.universe
    }

    pub fn families(&self) -> &[Vec<U::Set>] {
        &self.families
    }

    /// γ, the number of families.
    pub fn gamma(&self) -> usize {
        self.families.len()
    }

    pub fn member(&self, family: usize, index: usize) -> &U::Set {
        &self.families[family][index]
    }

    /// The subsequence `⟨C_{ξ_μ}⟩` for the given (increasing) indices.
    pub fn subsequence(&self, indices: &[usize]) -> Self
    where
        U: Clone,
    {
        Families {
            universe: self.universe.clone(),
            families: indices.iter().map(|&i| self.families[i].clone()).collect(),
        }
    }

    fn node_cells(&self, node: &TreeNode) -> Vec<U::Set> {
        let mut cells = vec![self.universe.full()];
        for &(f, m) in &node.pairs {
            let h = self.member(f, m);
            let mut next = Vec::with_capacity(cells.len() * 2);
            for c in &cells {
                next.push(self.universe.intersect(c, h));
                next.push(self.universe.difference(c, h));
            }
            cells = next;
        }
        cells
    }

    fn children_with_cells(
        &self,
        node: &TreeNode,
        cells: &[U::Set],
    ) -> Vec<(TreeNode, Vec<U::Set>)> {
        let used: BTreeSet<usize> = node.pairs.iter().map(|&(f, _)| f).collect();
        let mut out = Vec::new();
        for (f, members) in self.families.iter().enumerate() {
            if used.contains(&f) {
                continue;
            }
            for (m, h) in members.iter().enumerate() {
                if splits_all(&self.universe, cells, h) {
                    let mut next = Vec::with_capacity(cells.len() * 2);
                    for c in cells {
                        next.push(self.universe.intersect(c, h));
                        next.push(self.universe.difference(c, h));
                    }
                    out.push((node.with(f, m), next));
                }
            }
        }
        out
    }

    /// All one-pair extensions of `node` that stay independent.
    pub fn children(&self, node: &TreeNode) -> Vec<TreeNode> {
        let cells = self.node_cells(node);
        self.children_with_cells(node, &cells)
            .into_iter()
            .map(|(n, _)| n)
            .collect()
    }

    /// `ρ` of the root, memoized on pair sets.
    pub fn rank(&self) -> usize {
        self.rank_of(&TreeNode::root())
    }

    /// `ρ(node)`.
    pub fn rank_of(&self, node: &TreeNode) -> usize {
        let mut memo = HashMap::new();
        let cells = self.node_cells(node);
        self.rho(node, &cells, &mut memo)
    }

    fn rho(&self, node: &TreeNode, cells: &[U::Set], memo: &mut HashMap<TreeNode, usize>) -> usize {
        if let Some(&r) = memo.get(node) {
            return r;
        }
        let r = self
            .children_with_cells(node, cells)
            .into_iter()
            .map(|(child, child_cells)| self.rho(&child, &child_cells, memo) + 1)
            .max()
            .unwrap_or(0);
        memo.insert(node.clone(), r);
        r
    }

    /// Same value as [`Families::rank`], evaluating subtrees on the rayon pool
    /// with a shared insert-if-absent memo.
    pub fn rank_parallel(&self) -> usize
    where
        U: Sync,
    {
        let memo: DashMap<TreeNode, usize> = DashMap::new();
        let root = TreeNode::root();
        let cells = self.node_cells(&root);
        self.rho_parallel(&root, &cells, &memo)
    }

    fn rho_parallel(
        &self,
        node: &TreeNode,
        cells: &[U::Set],
        memo: &DashMap<TreeNode, usize>,
    ) -> usize
    where
        U: Sync,
    {
        if let Some(r) = memo.get(node) {
            return *r;
        }
        let r = self
            .children_with_cells(node, cells)
            .into_par_iter()
            .map(|(child, child_cells)| self.rho_parallel(&child, &child_cells, memo) + 1)
            .max()
            .unwrap_or(0);
        *memo.entry(node.clone()).or_insert(r)
    }

    /// `min rank(T(⟨C_{ξ_μ} : μ < m⟩))` over strictly increasing index
    /// sequences of length `m`.
    pub fn mrank(&self, m: usize) -> Result<usize, RankError>
    where
        U: Clone,
    {
        let gamma = self.gamma();
        if m > gamma {
            return Err(RankError::SubsequenceTooLong { m, gamma });
        }
        let mut best = usize::MAX;
        for_each_combination(gamma, m, &mut |idx| {
            best = best.min(self.subsequence(idx).rank());
        });
        Ok(best)
    }

    /// Every node reachable from the root with its children, in key order.
    pub fn explore(&self) -> BTreeMap<TreeNode, Vec<TreeNode>> {
        let mut seen: BTreeMap<TreeNode, Vec<TreeNode>> = BTreeMap::new();
        let mut stack = vec![(TreeNode::root(), vec![self.universe.full()])];
        while let Some((node, cells)) = stack.pop() {
            if seen.contains_key(&node) {
                continue;
            }
            let kids = self.children_with_cells(&node, &cells);
            seen.insert(node, kids.iter().map(|(k, _)| k.clone()).collect());
            for (k, c) in kids {
                if !seen.contains_key(&k) {
                    stack.push((k, c));
                }
            }
        }
        seen
    }

    /// Graphviz rendering of the explored tree. Nodes are numbered in pair-set
    /// order and labelled with their sorted `(ξ, H)` pairs.
    pub fn to_dot(&self, label: impl Fn(&U::Set) -> String) -> String {
        let explored = self.explore();
        let ids: BTreeMap<&TreeNode, usize> =
            explored.keys().enumerate().map(|(i, n)| (n, i)).collect();
        let mut out = String::from("digraph rank_tree {\n  node [shape=box];\n");
        for (node, id) in &ids {
            let text = if node.pairs.is_empty() {
                "root".to_string()
            } else {
                node.pairs
                    .iter()
                    .map(|&(f, m)| format!("({f},{})", label(self.member(f, m))))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let _ = writeln!(out, "  n{id} [label=\"{}\"];", text.replace('"', "\\\""));
        }
        for (node, kids) in &explored {
            for k in kids {
                let _ = writeln!(out, "  n{} -> n{};", ids[node], ids[k]);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Calls `f` on every strictly increasing `k`-subset of `0..n`.
pub fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(n: usize, k: usize, start: usize, acc: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if acc.len() == k {
            f(acc);
            return;
        }
        for i in start..=n - (k - acc.len()) {
            acc.push(i);
            go(n, k, i + 1, acc, f);
            acc.pop();
        }
    }
    if k <= n {
        go(n, k, 0, &mut Vec::with_capacity(k), f);
    }
}

/// A node of the tree: pairs `(family index, member index)`, sorted by
/// family index.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeNode {
    pairs: Vec<(usize, usize)>,
}

impl TreeNode {
    pub fn root() -> Self {
        TreeNode::default()
    }

    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort();
        TreeNode { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn depth(&self) -> usize {
        self.pairs.len()
    }

    fn with(&self, family: usize, member: usize) -> TreeNode {
        let mut pairs = self.pairs.clone();
        let at = pairs.partition_point(|&(f, _)| f < family);
        pairs.insert(at, (family, member));
        TreeNode { pairs }
    }
}

/// Unmemoized rank over ordered member sequences, with independence decided
/// by collecting the membership signature of every element of the universe.
/// Exponential; meant as an oracle for small instances.
pub fn rank_naive(fs: &FamilySequence) -> usize {
    fn signatures_complete(universe: usize, seq: &[&BitSet]) -> bool {
        let mut seen = BTreeSet::new();
        for x in 0..universe {
            let sig: Vec<bool> = seq.iter().map(|h| h.contains(x)).collect();
            seen.insert(sig);
        }
        seen.len() == 1 << seq.len()
    }
    fn rho<'a>(fs: &'a FamilySequence, seq: &mut Vec<&'a BitSet>, used: &mut Vec<bool>) -> usize {
        let mut best = 0;
        for f in 0..fs.gamma() {
            if used[f] {
                continue;
            }
            for h in &fs.families[f] {
                seq.push(h);
                if signatures_complete(fs.universe.size, seq) {
                    used[f] = true;
                    best = best.max(rho(fs, seq, used) + 1);
                    used[f] = false;
                }
                seq.pop();
            }
        }
        best
    }
    rho(fs, &mut Vec::new(), &mut vec![false; fs.gamma()])
}

/// Limits within which [`rank_naive`] is offered by the command line.
pub const NAIVE_MAX_UNIVERSE: usize = 8;
pub const NAIVE_MAX_MEMBERS: usize = 16;

/// On-disk form: `{"universe": n, "families": [[[0,1], [2]], …]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub universe: usize,
    pub families: Vec<Vec<Vec<usize>>>,
}

impl FamilySequence {
    pub fn universe_size(&self) -> usize {
        self.universe.size
    }

    pub fn from_file(file: &FamilyFile) -> Result<Self, RankError> {
        let mut families = Vec::with_capacity(file.families.len());
        for (family, sets) in file.families.iter().enumerate() {
            let mut members = Vec::with_capacity(sets.len());
            for set in sets {
                if set.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(RankError::UnsortedSet {
                        family,
                        set: set.clone(),
                    });
                }
                if let Some(&element) = set.iter().find(|&&x| x >= file.universe) {
                    return Err(RankError::ElementOutOfRange {
                        family,
                        element,
                        universe: file.universe,
                    });
                }
                members.push(BitSet::from_indices(file.universe, set.iter().copied()));
            }
            families.push(members);
        }
        Families::new(BitUniverse::new(file.universe), families)
    }

    pub fn to_file(&self) -> FamilyFile {
        FamilyFile {
            universe: self.universe.size,
            families: self
                .families
                .iter()
                .map(|members| members.iter().map(|h| h.iter().collect()).collect())
                .collect(),
        }
    }

    pub fn total_members(&self) -> usize {
        self.families.iter().map(Vec::len).sum()
    }

    pub fn dot(&self) -> String {
        self.to_dot(|h| h.to_string())
    }
}
