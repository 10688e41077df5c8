//! Experiments on finite instances of the rank lower bounds.
//!
//! * [`run_bigrank_experiment`] builds, inside `[0, ω^k]`, a tree of special
//!   nodes from level samples and separating algebras, and reports the rank of
//!   the traced independence tree (target: `k`).
//! * [`run_trace_experiment`] checks that tracing clopen families onto a
//!   witness set which hits every cell preserves the tree rank.
//! * [`run_random_families`] collects rank statistics of uniformly random
//!   bitset families. This is a heuristic only and models nothing about
//!   generic extensions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bitset::{BitSet, BitUniverse};
use crate::clopen::{
    cell_hitting_check, separating_algebra, ClopenSet, FiniteAlgebra, HittingCheck, Lower,
    SampleAlgebra,
};
use crate::independence::{cells, is_independent, split_cell_extension, SplitError};
use crate::ordinal::Ordinal;
use crate::rank_tree::{Families, FamilySequence};
use crate::space::{level_sample, LevelSample, Space, SpaceError};

pub const MAX_CHAIN_K: u32 = 6;
pub const MAX_TRACE_K: u32 = 4;
pub const MAX_RANDOM_UNIVERSE: usize = 24;
pub const MAX_RANDOM_GAMMA: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("k = {k} is outside 1..={max}")]
    KOutOfRange { k: u32, max: u32 },
    #[error("universe {0} exceeds the limit of {MAX_RANDOM_UNIVERSE}")]
    UniverseTooLarge(usize),
    #[error("gamma {0} exceeds the limit of {MAX_RANDOM_GAMMA}")]
    GammaTooLarge(usize),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Parameters {
    pub k: u32,
    pub per_level: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Snapshot of one node `(ξ⃗, H⃗)` of the special chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainNode {
    pub levels: Vec<u32>,
    pub members: Vec<String>,
    pub cells: usize,
    pub special: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExperimentReport {
    pub parameters: Parameters,
    pub achieved_rank: usize,
    pub target: usize,
    pub witness_chain: Vec<ChainNode>,
    pub special_nodes: usize,
    pub special_nodes_failed: usize,
    pub status: Status,
    pub diagnostics: Vec<String>,
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: special-chain")?;
        writeln!(f, "k: {}", self.parameters.k)?;
        writeln!(f, "per_level: {}", self.parameters.per_level)?;
        writeln!(f, "target: {}", self.target)?;
        writeln!(f, "achieved_rank: {}", self.achieved_rank)?;
        writeln!(f, "special_nodes: {}", self.special_nodes)?;
        writeln!(f, "special_nodes_failed: {}", self.special_nodes_failed)?;
        writeln!(f, "status: {}", self.status)?;
        writeln!(f, "chain:")?;
        for node in &self.witness_chain {
            let levels: Vec<String> = node.levels.iter().map(u32::to_string).collect();
            writeln!(
                f,
                "  levels [{}] cells {} special {}",
                levels.join(","),
                node.cells,
                node.special
            )?;
            writeln!(
                f,
                "    H = {}",
                node.members.last().map_or("", String::as_str)
            )?;
        }
        writeln!(f, "diagnostics:")?;
        for d in &self.diagnostics {
            writeln!(f, "  {d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct SpecialNode {
    levels: Vec<u32>,
    members: Vec<ClopenSet>,
}

type GrowFailure = Box<(SpecialNode, u32, SplitError)>;

struct ChainBuilder<'a> {
    samples: &'a [LevelSample],
    algebras: Vec<SampleAlgebra>,
    nodes: Vec<SpecialNode>,
}

impl ChainBuilder<'_> {
    /// Records `node` and extends it to every lower level, depth first.
    fn grow(&mut self, node: SpecialNode) -> Result<(), GrowFailure> {
        let last = *node.levels.last().expect("special nodes are nonempty");
        self.nodes.push(node.clone());
        for eta in (0..last).rev() {
            let e = eta as usize;
            let h = split_cell_extension(&self.algebras[e], &self.samples[e], &node.members)
                .map_err(|err| Box::new((node.clone(), eta, err)))?;
            let mut child = node.clone();
            child.levels.push(eta);
            child.members.push(h);
            self.grow(child)?;
        }
        Ok(())
    }
}

/// Builds the special-node tree over `[0, ω^k]` and reports the rank of the
/// resulting independence tree.
///
/// Every strictly decreasing level sequence is extended through
/// [`split_cell_extension`], so each special node ending at level `ξ` has a
/// special child at every `η < ξ`. The members chosen at level `ξ` form
/// `C_ξ`; the clopens are traced onto one sampled point per piece of their
/// joint partition, which yields the same tree as tracing onto every sampled
/// point.
pub fn run_bigrank_experiment(k: u32, per_level: u64) -> Result<ExperimentReport, LabError> {
    if !(1..=MAX_CHAIN_K).contains(&k) {
        return Err(LabError::KOutOfRange {
            k,
            max: MAX_CHAIN_K,
        });
    }
    let space = Space::new(Ordinal::omega_pow(k))?;
    let samples = level_sample(&space, k, per_level)?;
    let mut builder = ChainBuilder {
        samples: &samples,
        algebras: samples
            .iter()
            .map(|s| SampleAlgebra::new(&space, s))
            .collect(),
        nodes: Vec::new(),
    };
    let mut diagnostics = vec![format!(
        "sampled points: {} over levels 0..{}",
        samples[0].grid().total(),
        k
    )];

    let mut failure = None;
    for xi in (0..k).rev() {
        let x = xi as usize;
        let grown = split_cell_extension(&builder.algebras[x], &samples[x], &[])
            .map_err(|err| {
                Box::new((
                    SpecialNode {
                        levels: Vec::new(),
                        members: Vec::new(),
                    },
                    xi,
                    err,
                ))
            })
            .and_then(|h| {
                builder.grow(SpecialNode {
                    levels: vec![xi],
                    members: vec![h],
                })
            });
        if let Err(f) = grown {
            failure = Some(f);
            break;
        }
    }
    if let Some(f) = &failure {
        let (node, eta, err) = &**f;
        let levels: Vec<String> = node.levels.iter().map(u32::to_string).collect();
        diagnostics.push(format!(
            "extension of node [{}] to level {eta} failed: {err}",
            levels.join(",")
        ));
    }

    // Special-node check: every cell is nonempty and meets the sample of the
    // node's last level.
    let mut special_failed = 0;
    let mut witness_chain = Vec::new();
    let main_chain: Vec<u32> = (0..k).rev().collect();
    for node in &builder.nodes {
        let last = *node.levels.last().expect("nonempty") as usize;
        let node_cells = cells(&space, &node.members);
        let special = is_independent(&space, &node.members)
            && node_cells
                .iter()
                .all(|c| !samples[last].points_in(c, 1).is_empty());
        if !special {
            special_failed += 1;
        }
        if main_chain.starts_with(&node.levels) {
            witness_chain.push(ChainNode {
                levels: node.levels.clone(),
                members: node.members.iter().map(ToString::to_string).collect(),
                cells: node_cells.len(),
                special,
            });
        }
    }

    let mut by_level: Vec<BTreeSet<ClopenSet>> = vec![BTreeSet::new(); k as usize];
    for node in &builder.nodes {
        let level = *node.levels.last().expect("nonempty") as usize;
        by_level[level].insert(node.members.last().expect("nonempty").clone());
    }
    let chosen: Vec<&ClopenSet> = by_level.iter().flatten().collect();
    let (witness, unsampled) = joint_piece_witness(&space, &samples[0], &chosen);
    diagnostics.push(format!(
        "members per level: [{}]",
        by_level
            .iter()
            .map(|l| l.len().to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    diagnostics.push(format!(
        "trace witness: {} points ({} joint pieces without sampled points)",
        witness.len(),
        unsampled
    ));
    let traced = Families::new(
        BitUniverse::new(witness.len()),
        by_level
            .iter()
            .map(|l| l.iter().map(|h| h.trace(&witness)).collect())
            .collect(),
    )
    .expect("traces live over the witness universe");
    let achieved_rank = traced.rank();
    let target = k as usize;
    Ok(ExperimentReport {
        parameters: Parameters {
            k,
            per_level,
            seed: None,
        },
        achieved_rank,
        target,
        witness_chain,
        special_nodes: builder.nodes.len(),
        special_nodes_failed: special_failed,
        status: if achieved_rank >= target {
            Status::Pass
        } else {
            Status::Fail
        },
        diagnostics,
    })
}

/// One sampled point from each piece of the partition cut out by the
/// endpoints of `sets`. Each set is a union of pieces, so tracing onto these
/// representatives loses nothing relative to tracing onto the full sample.
/// Also returns the number of pieces containing no sampled point.
fn joint_piece_witness(
    space: &Space,
    any_level: &LevelSample,
    sets: &[&ClopenSet],
) -> (Vec<Ordinal>, usize) {
    let mut cuts: BTreeSet<&Ordinal> = BTreeSet::new();
    for s in sets {
        for iv in s.intervals() {
            if let Lower::Open(a) = &iv.lower {
                cuts.insert(a);
            }
            cuts.insert(&iv.upper);
        }
    }
    cuts.insert(space.lambda());
    let grid = any_level.grid();
    let mut witness = Vec::new();
    let mut unsampled = 0;
    let mut prev = Lower::Bottom;
    for t in cuts {
        match grid.first_point_in(&prev, t) {
            Some(p) => witness.push(p),
            None => unsampled += 1,
        }
        prev = Lower::Open(t.clone());
    }
    (witness, unsampled)
}

/// Smallest `per_level` in `1..=max` for which the experiment passes.
pub fn sweep_per_level(k: u32, max_per_level: u64) -> Result<Option<u64>, LabError> {
    for p in 1..=max_per_level {
        if run_bigrank_experiment(k, p)?.status == Status::Pass {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceViolation {
    pub trial: usize,
    pub interval_rank: usize,
    pub traced_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub parameters: Parameters,
    pub trials: usize,
    pub hitting_passed: usize,
    pub hitting_failed: usize,
    pub ranks_equal: usize,
    pub violations: Vec<TraceViolation>,
    pub rank_histogram: BTreeMap<usize, usize>,
    pub first_missed_cell: Option<String>,
    pub status: Status,
}

impl fmt::Display for TraceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: trace")?;
        writeln!(f, "k: {}", self.parameters.k)?;
        writeln!(f, "per_level: {}", self.parameters.per_level)?;
        writeln!(f, "seed: {}", self.parameters.seed.unwrap_or_default())?;
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "hitting_passed: {}", self.hitting_passed)?;
        writeln!(f, "hitting_failed: {}", self.hitting_failed)?;
        writeln!(f, "ranks_equal: {}", self.ranks_equal)?;
        writeln!(f, "violations: {}", self.violations.len())?;
        for v in &self.violations {
            writeln!(
                f,
                "  trial {} interval_rank {} traced_rank {}",
                v.trial, v.interval_rank, v.traced_rank
            )?;
        }
        for (rank, count) in &self.rank_histogram {
            writeln!(f, "rank {rank}: {count}")?;
        }
        if let Some(cell) = &self.first_missed_cell {
            writeln!(f, "first_missed_cell: {cell}")?;
        }
        writeln!(f, "status: {}", self.status)
    }
}

/// Outcome of one trace trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceTrial {
    /// Some cell missed the witness; ranks were not compared.
    Skipped(ClopenSet),
    Compared {
        interval_rank: usize,
        traced_rank: usize,
    },
}

/// Rank of the clopen families and of their traces onto `witness`, when the
/// witness hits every cell of the combined generators.
pub fn trace_trial(space: &Space, algebras: &[FiniteAlgebra], witness: &[Ordinal]) -> TraceTrial {
    if let HittingCheck::Missed(cell) = cell_hitting_check(space, algebras, witness) {
        return TraceTrial::Skipped(cell);
    }
    let families: Vec<Vec<ClopenSet>> = algebras.iter().map(FiniteAlgebra::elements).collect();
    let traced: Vec<Vec<BitSet>> = families
        .iter()
        .map(|f| f.iter().map(|h| h.trace(witness)).collect())
        .collect();
    let interval_rank = Families::new(space.clone(), families)
        .expect("same space")
        .rank();
    let traced_rank = Families::new(BitUniverse::new(witness.len()), traced)
        .expect("witness universe")
        .rank();
    TraceTrial::Compared {
        interval_rank,
        traced_rank,
    }
}

/// Random trials over `[0, ω^k]`: each `B_ξ` is generated by one or two
/// random initial segments `[0, x]` with `x` in the level-ξ sample, and the
/// witness keeps each sampled point (and λ) with probability 1/2.
pub fn run_trace_experiment(
    k: u32,
    per_level: u64,
    trials: usize,
    seed: u64,
) -> Result<TraceReport, LabError> {
    if !(1..=MAX_TRACE_K).contains(&k) {
        return Err(LabError::KOutOfRange {
            k,
            max: MAX_TRACE_K,
        });
    }
    let space = Space::new(Ordinal::omega_pow(k))?;
    let samples = level_sample(&space, k, per_level)?;
    let level_points: Vec<Vec<Ordinal>> = samples.iter().map(|s| s.iter().collect()).collect();
    let mut candidates: Vec<Ordinal> = level_points.iter().flatten().cloned().collect();
    candidates.push(space.lambda().clone());
    candidates.sort();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<(Vec<FiniteAlgebra>, Vec<Ordinal>)> = (0..trials)
        .map(|_| {
            let algebras = level_points
                .iter()
                .map(|pts| {
                    let g = rng.gen_range(1..=2).min(pts.len());
                    let chosen: Vec<Ordinal> = pts.choose_multiple(&mut rng, g).cloned().collect();
                    separating_algebra(&space, &chosen).expect("nonempty sample")
                })
                .collect();
            let witness = candidates
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect();
            (algebras, witness)
        })
        .collect();

    let outcomes: Vec<TraceTrial> = inputs
        .par_iter()
        .map(|(algebras, witness)| trace_trial(&space, algebras, witness))
        .collect();

    let mut report = TraceReport {
        parameters: Parameters {
            k,
            per_level,
            seed: Some(seed),
        },
        trials,
        hitting_passed: 0,
        hitting_failed: 0,
        ranks_equal: 0,
        violations: Vec::new(),
        rank_histogram: BTreeMap::new(),
        first_missed_cell: None,
        status: Status::Pass,
    };
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            TraceTrial::Skipped(cell) => {
                report.hitting_failed += 1;
                report
                    .first_missed_cell
                    .get_or_insert_with(|| cell.to_string());
            }
            TraceTrial::Compared {
                interval_rank,
                traced_rank,
            } => {
                report.hitting_passed += 1;
                *report.rank_histogram.entry(interval_rank).or_default() += 1;
                if interval_rank == traced_rank {
                    report.ranks_equal += 1;
                } else {
                    report.violations.push(TraceViolation {
                        trial,
                        interval_rank,
                        traced_rank,
                    });
                }
            }
        }
    }
    if !report.violations.is_empty() {
        report.status = Status::Fail;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankStats {
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    pub histogram: BTreeMap<usize, usize>,
}

impl RankStats {
    fn from_values(values: &[usize]) -> Self {
        let mut histogram = BTreeMap::new();
        for &v in values {
            *histogram.entry(v).or_default() += 1;
        }
        let sum: usize = values.iter().sum();
        RankStats {
            mean: if values.is_empty() {
                0.0
            } else {
                sum as f64 / values.len() as f64
            },
            min: values.iter().copied().min().unwrap_or(0),
            max: values.iter().copied().max().unwrap_or(0),
            histogram,
        }
    }
}

impl fmt::Display for RankStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hist: Vec<String> = self
            .histogram
            .iter()
            .map(|(r, c)| format!("{r}:{c}"))
            .collect();
        write!(
            f,
            "mean {:.4} min {} max {} histogram {}",
            self.mean,
            self.min,
            self.max,
            hist.join(" ")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomParameters {
    pub universe: usize,
    pub gamma: usize,
    pub members_per_family: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomFamiliesReport {
    pub parameters: RandomParameters,
    pub rank: RankStats,
    /// Statistics of `mrank(m)` for `m = 0..=gamma`.
    pub mrank: Vec<RankStats>,
}

impl fmt::Display for RandomFamiliesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.parameters;
        writeln!(f, "experiment: random-families (heuristic)")?;
        writeln!(
            f,
            "universe: {} gamma: {} members: {} trials: {} seed: {}",
            p.universe, p.gamma, p.members_per_family, p.trials, p.seed
        )?;
        writeln!(f, "rank: {}", self.rank)?;
        for (m, stats) in self.mrank.iter().enumerate() {
            writeln!(f, "mrank({m}): {stats}")?;
        }
        Ok(())
    }
}

/// `trials` independent family sequences: `gamma` families of `members`
/// uniformly random subsets of `{0, …, universe−1}`.
pub fn random_family_sequences(
    universe: usize,
    gamma: usize,
    members: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<FamilySequence>, LabError> {
    if universe > MAX_RANDOM_UNIVERSE {
        return Err(LabError::UniverseTooLarge(universe));
    }
    if gamma > MAX_RANDOM_GAMMA {
        return Err(LabError::GammaTooLarge(gamma));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..trials)
        .map(|_| {
            let families = (0..gamma)
                .map(|_| {
                    (0..members)
                        .map(|_| {
                            BitSet::from_indices(
                                universe,
                                (0..universe).filter(|_| rng.gen_bool(0.5)),
                            )
                        })
                        .collect()
                })
                .collect();
            Families::new(BitUniverse::new(universe), families).expect("members over the universe")
        })
        .collect())
}

/// Rank and mrank statistics over random family sequences.
pub fn run_random_families(
    universe: usize,
    gamma: usize,
    members: usize,
    trials: usize,
    seed: u64,
) -> Result<RandomFamiliesReport, LabError> {
    let instances = random_family_sequences(universe, gamma, members, trials, seed)?;
    Ok(summarize_random(&instances, universe, gamma, members, seed))
}

pub fn summarize_random(
    instances: &[FamilySequence],
    universe: usize,
    gamma: usize,
    members: usize,
    seed: u64,
) -> RandomFamiliesReport {
    let per_instance: Vec<(usize, Vec<usize>)> = instances
        .par_iter()
        .map(|fs| {
            let mranks = (0..=gamma)
                .map(|m| fs.mrank(m).expect("m ≤ gamma"))
                .collect();
            (fs.rank(), mranks)
        })
        .collect();
    let ranks: Vec<usize> = per_instance.iter().map(|(r, _)| *r).collect();
    let mrank = (0..=gamma)
        .map(|m| {
            RankStats::from_values(&per_instance.iter().map(|(_, ms)| ms[m]).collect::<Vec<_>>())
        })
        .collect();
    RandomFamiliesReport {
        parameters: RandomParameters {
            universe,
            gamma,
            members_per_family: members,
            trials: instances.len(),
            seed,
        },
        rank: RankStats::from_values(&ranks),
        mrank,
    }
}
