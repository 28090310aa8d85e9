// SPDX-License-Identifier: Apache-2.0

//! Physics-aware coarsening of a placed netlist into macro nodes.
//!
//! The procedure has three steps:
//!
//! 1. **Atomic clusters.** Flip-flops are visited in a seeded pseudorandom
//!    order. Each runs a breadth-first search over driver-to-sink fanout and
//!    claims every unclaimed logic cell it reaches. The search does not claim
//!    or expand flip-flops or cells that another flip-flop already owns. Logic
//!    outside every flip-flop cone stays unclaimed.
//! 2. **High-spread filtering.** An atomic cluster whose member cells have
//!    `max(sigma_x, sigma_y) > spread_threshold` becomes a macro on its own and
//!    never absorbs another cluster.
//! 3. **Gravity-aligned merging.** The remaining clusters are visited in the
//!    same order. Each joins the first open macro (in creation order) that has
//!    the same control net, whose running member-cell centroid is closer than
//!    `merge_distance` (Manhattan, unit die) to the cluster centroid, and whose
//!    seed cluster's gravity vector has cosine similarity above
//!    `cos_threshold` with the cluster's gravity vector. Otherwise the cluster
//!    opens a new macro.
//!
//! The gravity vector of a flip-flop points from the flip-flop to the centroid
//! of its one-hop neighbors: the sinks it drives and the drivers of the nets it
//! sinks.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::activity::{log_toggles, ActivityMap};
use crate::graph::{manhattan, GraphError, RawGraph};
use crate::netlist::{CellKind, PlacedNetlist};
use crate::rng::SplitMix64;

/// Number of per-node features in a clustered graph.
pub const MACRO_FEATURE_DIM: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarsenConfig {
    pub seed: u64,
    pub spread_threshold: f64,
    pub merge_distance: f64,
    pub cos_threshold: f64,
}

impl CoarsenConfig {
    pub const DEFAULT_SPREAD_THRESHOLD: f64 = 0.05;
    pub const DEFAULT_MERGE_DISTANCE: f64 = 0.05;
    pub const DEFAULT_COS_THRESHOLD: f64 = 0.9;

    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError { field: name, value: v })
            }
        };
        positive("spread_threshold", self.spread_threshold)?;
        positive("merge_distance", self.merge_distance)?;
        if !(self.cos_threshold > -1.0 && self.cos_threshold <= 1.0) {
            return Err(ConfigError { field: "cos_threshold", value: self.cos_threshold });
        }
        Ok(())
    }
}

impl Default for CoarsenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            spread_threshold: Self::DEFAULT_SPREAD_THRESHOLD,
            merge_distance: Self::DEFAULT_MERGE_DISTANCE,
            cos_threshold: Self::DEFAULT_COS_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub value: f64,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field {
            "cos_threshold" => write!(f, "cos_threshold must lie in (-1, 1], got {}", self.value),
            field => write!(f, "{field} must be positive and finite, got {}", self.value),
        }
    }
}

impl core::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GravityVector {
    pub dx: f64,
    pub dy: f64,
}

impl GravityVector {
    pub fn norm(&self) -> f64 {
        libm::hypot(self.dx, self.dy)
    }

    pub fn is_zero(&self) -> bool {
        self.dx == 0.0 && self.dy == 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomicCluster {
    pub owner_ff: String,
    /// Member cell ids in ascending order; includes the owner.
    pub members: Vec<String>,
    pub centroid: (f64, f64),
    pub spread: (f64, f64),
    pub gravity: GravityVector,
    pub control_net: Option<String>,
    owner_index: usize,
    member_indices: Vec<usize>,
}

impl AtomicCluster {
    pub fn owner_index(&self) -> usize {
        self.owner_index
    }

    /// Member cell indices in claiming (BFS) order, owner first.
    pub fn member_indices(&self) -> &[usize] {
        &self.member_indices
    }

    pub fn max_spread(&self) -> f64 {
        self.spread.0.max(self.spread.1)
    }
}

/// Output of [`form_atomic_clusters`].
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicClusters {
    /// One cluster per flip-flop, in the seeded visiting order.
    pub clusters: Vec<AtomicCluster>,
    /// Logic cells no flip-flop cone reached, ascending id.
    pub unclaimed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MacroNode {
    /// Indices into the atomic cluster list, in merge order. The first is the
    /// seed cluster.
    pub atomics: Vec<usize>,
    /// Member cell ids in ascending order.
    pub members: Vec<String>,
    pub control_net: Option<String>,
    /// `[cx, cy, sigma_x, sigma_y, ln(1+size), n_ff, n_logic,
    /// ln(1+max_toggle), ln(1+sum_toggle), nonzero_toggle_cells]`.
    pub features: [f64; MACRO_FEATURE_DIM],
    /// Set when the seed cluster was too spread out to merge.
    pub bypassed: bool,
}

impl MacroNode {
    pub fn centroid(&self) -> (f64, f64) {
        (self.features[0], self.features[1])
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// One accepted merge, recorded with the predicate values observed at the
/// time it happened.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeEvent {
    pub atomic: usize,
    pub macro_index: usize,
    pub distance: f64,
    pub cosine: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Merging {
    pub macros: Vec<MacroNode>,
    pub merges: Vec<MergeEvent>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusteredEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusteredGraph {
    pub design_name: String,
    pub nodes: Vec<MacroNode>,
    /// Undirected, stored once with `src < dst`, ascending.
    pub edges: Vec<ClusteredEdge>,
    /// Claimed cell id to macro index.
    pub assignment: BTreeMap<String, usize>,
    pub unclaimed_logic: usize,
}

/// Seeded visiting order over the netlist's flip-flops.
///
/// Flip-flops are listed in ascending id order and then shuffled with
/// [`SplitMix64::shuffle`] seeded by `seed`.
pub fn flip_flop_order(n: &PlacedNetlist, seed: u64) -> Vec<usize> {
    let mut ffs: Vec<usize> = n.sorted_indices().filter(|&i| n.cell(i).kind.is_ff()).collect();
    SplitMix64::new(seed).shuffle(&mut ffs);
    ffs
}

pub fn form_atomic_clusters(n: &PlacedNetlist, seed: u64) -> AtomicClusters {
    let order = flip_flop_order(n, seed);
    let mut claimed = alloc::vec![false; n.cells().len()];
    for &ff in &order {
        claimed[ff] = true;
    }

    let mut clusters = Vec::with_capacity(order.len());
    let mut queue = VecDeque::new();
    for &ff in &order {
        let mut members = alloc::vec![ff];
        queue.clear();
        queue.push_back(ff);
        while let Some(u) = queue.pop_front() {
            for &v in n.fanout(u) {
                if claimed[v] || n.cell(v).kind == CellKind::FlipFlop {
                    continue;
                }
                claimed[v] = true;
                members.push(v);
                queue.push_back(v);
            }
        }
        clusters.push(atomic_from_members(n, ff, members));
    }

    let mut unclaimed: Vec<String> = n
        .cells()
        .iter()
        .enumerate()
        .filter(|&(i, _)| !claimed[i])
        .map(|(_, c)| c.id.clone())
        .collect();
    unclaimed.sort_unstable();

    AtomicClusters { clusters, unclaimed }
}

fn atomic_from_members(n: &PlacedNetlist, ff: usize, member_indices: Vec<usize>) -> AtomicCluster {
    let mut members: Vec<String> = member_indices.iter().map(|&i| n.cell(i).id.clone()).collect();
    members.sort_unstable();
    AtomicCluster {
        owner_ff: n.cell(ff).id.clone(),
        members,
        centroid: centroid(n, &member_indices),
        spread: spread(n, &member_indices),
        gravity: gravity_vector(n, ff),
        control_net: n.cell(ff).control_net.clone(),
        owner_index: ff,
        member_indices,
    }
}

fn centroid(n: &PlacedNetlist, members: &[usize]) -> (f64, f64) {
    let (sx, sy) = members.iter().fold((0.0, 0.0), |(sx, sy), &i| {
        let (x, y) = n.unit_position(i);
        (sx + x, sy + y)
    });
    let k = members.len() as f64;
    (sx / k, sy / k)
}

/// Population standard deviation of the members' unit coordinates.
///
/// Two passes (mean, then squared deviations) so that coincident members give
/// exactly zero.
pub fn spread(n: &PlacedNetlist, members: &[usize]) -> (f64, f64) {
    assert!(!members.is_empty(), "spread of an empty member set");
    let (cx, cy) = centroid(n, members);
    let (vx, vy) = members.iter().fold((0.0, 0.0), |(vx, vy), &i| {
        let (x, y) = n.unit_position(i);
        (vx + (x - cx) * (x - cx), vy + (y - cy) * (y - cy))
    });
    let k = members.len() as f64;
    (libm::sqrt(vx / k), libm::sqrt(vy / k))
}

/// Cells adjacent to `cell` through a driver-sink pair, ascending, deduplicated.
pub fn one_hop_neighbors(n: &PlacedNetlist, cell: usize) -> Vec<usize> {
    let mut v: Vec<usize> = n.fanout(cell).iter().chain(n.fanin(cell)).copied().collect();
    v.sort_unstable();
    v.dedup();
    v.retain(|&c| c != cell);
    v
}

pub fn gravity_vector(n: &PlacedNetlist, ff: usize) -> GravityVector {
    let neighbors = one_hop_neighbors(n, ff);
    if neighbors.is_empty() {
        return GravityVector::default();
    }
    let (cx, cy) = centroid(n, &neighbors);
    let (fx, fy) = n.unit_position(ff);
    GravityVector { dx: cx - fx, dy: cy - fy }
}

/// Cosine of the angle between two gravity vectors; 0 if either is zero.
pub fn cosine_similarity(a: GravityVector, b: GravityVector) -> f64 {
    if a.is_zero() || b.is_zero() {
        return 0.0;
    }
    let c = (a.dx * b.dx + a.dy * b.dy) / (a.norm() * b.norm());
    c.clamp(-1.0, 1.0)
}

/// The three merge predicates, evaluated for one candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeCheck {
    pub same_control: bool,
    pub distance: f64,
    pub cosine: f64,
}

impl MergeCheck {
    pub fn evaluate(
        atomic: &AtomicCluster,
        macro_control: &Option<String>,
        macro_centroid: (f64, f64),
        seed_gravity: GravityVector,
    ) -> Self {
        Self {
            same_control: atomic.control_net == *macro_control,
            distance: manhattan(atomic.centroid, macro_centroid),
            cosine: cosine_similarity(atomic.gravity, seed_gravity),
        }
    }

    pub fn accepts(&self, cfg: &CoarsenConfig) -> bool {
        self.same_control && self.distance < cfg.merge_distance && self.cosine > cfg.cos_threshold
    }
}

struct OpenMacro {
    atomics: Vec<usize>,
    cells: Vec<usize>,
    sum: (f64, f64),
    bypassed: bool,
}

impl OpenMacro {
    fn new(n: &PlacedNetlist, atomic_index: usize, atomic: &AtomicCluster, bypassed: bool) -> Self {
        let mut m = Self {
            atomics: Vec::new(),
            cells: Vec::new(),
            sum: (0.0, 0.0),
            bypassed,
        };
        m.absorb(n, atomic_index, atomic);
        m
    }

    fn absorb(&mut self, n: &PlacedNetlist, atomic_index: usize, atomic: &AtomicCluster) {
        self.atomics.push(atomic_index);
        for &c in &atomic.member_indices {
            let (x, y) = n.unit_position(c);
            self.sum.0 += x;
            self.sum.1 += y;
            self.cells.push(c);
        }
    }

    fn running_centroid(&self) -> (f64, f64) {
        let k = self.cells.len() as f64;
        (self.sum.0 / k, self.sum.1 / k)
    }
}

/// Steps II and III over clusters produced by [`form_atomic_clusters`].
pub fn merge_clusters(
    atomics: &[AtomicCluster],
    cfg: &CoarsenConfig,
    n: &PlacedNetlist,
    a: &ActivityMap,
) -> Merging {
    let mut open: Vec<OpenMacro> = Vec::new();
    let mut merges = Vec::new();

    for (ai, atomic) in atomics.iter().enumerate() {
        if atomic.max_spread() > cfg.spread_threshold {
            open.push(OpenMacro::new(n, ai, atomic, true));
            continue;
        }
        let target = open.iter().enumerate().find_map(|(mi, m)| {
            if m.bypassed {
                return None;
            }
            let seed = &atomics[m.atomics[0]];
            let check = MergeCheck::evaluate(atomic, &seed.control_net, m.running_centroid(), seed.gravity);
            check.accepts(cfg).then_some((mi, check))
        });
        match target {
            Some((mi, check)) => {
                open[mi].absorb(n, ai, atomic);
                merges.push(MergeEvent {
                    atomic: ai,
                    macro_index: mi,
                    distance: check.distance,
                    cosine: check.cosine,
                });
            }
            None => open.push(OpenMacro::new(n, ai, atomic, false)),
        }
    }

    let macros = open
        .into_iter()
        .map(|m| {
            let control_net = atomics[m.atomics[0]].control_net.clone();
            let features = macro_features(n, a, &m.cells);
            let mut members: Vec<String> = m.cells.iter().map(|&c| n.cell(c).id.clone()).collect();
            members.sort_unstable();
            MacroNode {
                atomics: m.atomics,
                members,
                control_net,
                features,
                bypassed: m.bypassed,
            }
        })
        .collect();

    Merging { macros, merges }
}

/// The 10 aggregated features of a macro with the given member cells.
pub fn macro_features(n: &PlacedNetlist, a: &ActivityMap, cells: &[usize]) -> [f64; MACRO_FEATURE_DIM] {
    let (cx, cy) = centroid(n, cells);
    let (sx, sy) = spread(n, cells);
    let n_ff = cells.iter().filter(|&&c| n.cell(c).kind.is_ff()).count();
    let mut max_t = 0u64;
    let mut sum_t = 0u64;
    let mut nonzero = 0usize;
    for &c in cells {
        let t = a.toggles_or_zero(&n.cell(c).id);
        max_t = max_t.max(t);
        sum_t = sum_t.saturating_add(t);
        if t > 0 {
            nonzero += 1;
        }
    }
    [
        cx,
        cy,
        sx,
        sy,
        libm::log1p(cells.len() as f64),
        n_ff as f64,
        (cells.len() - n_ff) as f64,
        log_toggles(max_t),
        log_toggles(sum_t),
        nonzero as f64,
    ]
}

/// Runs all three steps and builds the macro-level graph.
pub fn build_clustered_graph(
    n: &PlacedNetlist,
    a: &ActivityMap,
    cfg: &CoarsenConfig,
) -> Result<ClusteredGraph, GraphError> {
    let atomics = form_atomic_clusters(n, cfg.seed);
    let merging = merge_clusters(&atomics.clusters, cfg, n, a);
    clustered_graph_from(n, &merging, atomics.unclaimed.len())
}

/// Assembles the clustered graph for an already computed merging.
pub fn clustered_graph_from(
    n: &PlacedNetlist,
    merging: &Merging,
    unclaimed_logic: usize,
) -> Result<ClusteredGraph, GraphError> {
    if merging.macros.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let mut owner = alloc::vec![usize::MAX; n.cells().len()];
    let mut assignment = BTreeMap::new();
    for (mi, m) in merging.macros.iter().enumerate() {
        for id in &m.members {
            let c = n.cell_index(id).expect("macro member from this netlist");
            owner[c] = mi;
            assignment.insert(id.clone(), mi);
        }
    }

    let mut pairs = BTreeSet::new();
    for (d, s) in n.driver_sink_pairs() {
        let (md, ms) = (owner[d], owner[s]);
        if md != usize::MAX && ms != usize::MAX && md != ms {
            pairs.insert((md.min(ms), md.max(ms)));
        }
    }
    let nodes = merging.macros.clone();
    let edges = pairs
        .into_iter()
        .map(|(src, dst)| ClusteredEdge {
            src,
            dst,
            weight: manhattan(nodes[src].centroid(), nodes[dst].centroid()),
        })
        .collect();

    Ok(ClusteredGraph {
        design_name: n.design_name().into(),
        nodes,
        edges,
        assignment,
        unclaimed_logic,
    })
}

/// Raw node count over macro count.
pub fn compression_ratio(raw: &RawGraph, clustered: &ClusteredGraph) -> f64 {
    raw.nodes.len() as f64 / clustered.nodes.len() as f64
}
