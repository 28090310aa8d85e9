// SPDX-License-Identifier: Apache-2.0

//! Placed-netlist graph construction for clock-tree analysis.
//!
//! This crate is `no_std` (it needs `alloc`) and holds every pure algorithm of
//! the pipeline:
//!
//! * [`netlist`]: placed-netlist domain types and coordinate normalization.
//! * [`activity`]: per-cell toggle counts and the log-activity feature.
//! * [`graph`]: the fine-grained ("raw") flip-flop-centric graph.
//! * [`coarsen`]: atomic cluster formation, high-spread filtering and
//!   gravity-aligned merging into 10-feature macro nodes.
//! * [`gap`]: QoR labels, gap vectors and Pareto distance ranking.
//! * [`knobs`], [`synth`], [`surrogate`]: the seeded synthetic corpus.
//! * [`rng`]: the pinned SplitMix64 generator used for every random draw.
//!
//! File formats, archives and the command-line tool live in the `ctsbench`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod activity;
pub mod coarsen;
pub mod gap;
pub mod graph;
pub mod knobs;
pub mod netlist;
pub mod rng;
pub mod surrogate;
pub mod synth;

pub use activity::ActivityMap;
pub use coarsen::{build_clustered_graph, ClusteredGraph, CoarsenConfig};
pub use gap::{DesignGroup, GapVector, QorRecord};
pub use graph::{build_raw_graph, RawGraph};
pub use netlist::{CellKind, Net, NetlistError, PlacedCell, PlacedNetlist};
