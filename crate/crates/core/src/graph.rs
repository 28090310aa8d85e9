// SPDX-License-Identifier: Apache-2.0

//! Raw (fine-grained) graph construction.
//!
//! Nodes are every flip-flop plus the logic cells within `hops` levels of
//! combinational fanout from some flip-flop (one level by default). Edges come
//! from star-expanding each net into driver-sink pairs; a pair becomes an
//! undirected edge when both endpoints are nodes. Edge weights are Manhattan
//! distances on the unit die.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::activity::ActivityMap;
use crate::netlist::{CellKind, PlacedNetlist};

/// Number of per-node features in a raw graph.
pub const RAW_FEATURE_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct RawNode {
    pub cell_id: String,
    /// `[unit_x, unit_y, is_ff, ln(1 + toggles)]`.
    pub features: [f64; RAW_FEATURE_DIM],
}

/// Undirected edge stored once with `src < dst`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawGraph {
    pub design_name: String,
    pub nodes: Vec<RawNode>,
    pub edges: Vec<RawEdge>,
    pub node_index: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphError {
    EmptyGraph,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::EmptyGraph => f.write_str("graph has no nodes"),
        }
    }
}

impl core::error::Error for GraphError {}

pub fn manhattan(a: (f64, f64), b: (f64, f64)) -> f64 {
    libm::fabs(a.0 - b.0) + libm::fabs(a.1 - b.1)
}

/// Builds the raw graph with the default one-hop fanout rule.
pub fn build_raw_graph(n: &PlacedNetlist, a: &ActivityMap) -> Result<RawGraph, GraphError> {
    build_raw_graph_with_hops(n, a, 1)
}

/// Builds the raw graph keeping logic up to `hops` fanout levels from a
/// flip-flop. Expansion never passes through a flip-flop.
pub fn build_raw_graph_with_hops(
    n: &PlacedNetlist,
    a: &ActivityMap,
    hops: usize,
) -> Result<RawGraph, GraphError> {
    let members = raw_node_set(n, hops);
    if members.is_empty() {
        return Err(GraphError::EmptyGraph);
    }

    // Node order is ascending cell id.
    let mut ordered: Vec<usize> = members.into_iter().collect();
    ordered.sort_unstable_by(|&l, &r| n.cell(l).id.cmp(&n.cell(r).id));

    let mut position = alloc::vec![usize::MAX; n.cells().len()];
    let mut node_index = BTreeMap::new();
    let mut nodes = Vec::with_capacity(ordered.len());
    for (node, &cell_idx) in ordered.iter().enumerate() {
        let cell = n.cell(cell_idx);
        let (ux, uy) = n.unit_position(cell_idx);
        position[cell_idx] = node;
        node_index.insert(cell.id.clone(), node);
        nodes.push(RawNode {
            cell_id: cell.id.clone(),
            features: [ux, uy, if cell.kind.is_ff() { 1.0 } else { 0.0 }, a.log_activity(&cell.id)],
        });
    }

    let mut pairs = BTreeSet::new();
    for (d, s) in n.driver_sink_pairs() {
        let (pd, ps) = (position[d], position[s]);
        if pd != usize::MAX && ps != usize::MAX && pd != ps {
            pairs.insert((pd.min(ps), pd.max(ps)));
        }
    }
    let edges = pairs
        .into_iter()
        .map(|(src, dst)| {
            let ps = (nodes[src].features[0], nodes[src].features[1]);
            let pd = (nodes[dst].features[0], nodes[dst].features[1]);
            RawEdge { src, dst, weight: manhattan(ps, pd) }
        })
        .collect();

    Ok(RawGraph {
        design_name: n.design_name().into(),
        nodes,
        edges,
        node_index,
    })
}

fn raw_node_set(n: &PlacedNetlist, hops: usize) -> BTreeSet<usize> {
    let mut depth = alloc::vec![usize::MAX; n.cells().len()];
    let mut queue = VecDeque::new();
    for (i, c) in n.cells().iter().enumerate() {
        if c.kind == CellKind::FlipFlop {
            depth[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(u) = queue.pop_front() {
        if depth[u] >= hops {
            continue;
        }
        for &v in n.fanout(u) {
            if n.cell(v).kind == CellKind::Logic && depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    (0..depth.len()).filter(|&i| depth[i] != usize::MAX).collect()
}

impl RawGraph {
    pub fn total_edge_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}
