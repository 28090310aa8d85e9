// SPDX-License-Identifier: Apache-2.0

//! Placed gate-level netlists.
//!
//! A [`PlacedNetlist`] is validated once at construction and immutable
//! afterwards. Coordinates are kept in microns; [`PlacedNetlist::unit_position`]
//! and [`normalize_coords`] map them onto the unit square of the die.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellKind {
    FlipFlop,
    Logic,
}

impl CellKind {
    pub fn is_ff(self) -> bool {
        matches!(self, CellKind::FlipFlop)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlacedCell {
    pub id: String,
    pub kind: CellKind,
    /// Lower-left x in microns.
    pub x: f64,
    /// Lower-left y in microns.
    pub y: f64,
    /// Library cell name. Carried through, never interpreted.
    pub master: String,
    /// Reset/enable domain of a flip-flop.
    pub control_net: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Net {
    pub id: String,
    pub driver: String,
    pub sinks: Vec<String>,
}

/// Broad class of a [`NetlistError`], used for user-facing error names.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Reference,
    Invariant,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NetlistError {
    UnknownCell { net: String, cell: String },
    EmptyId,
    DuplicateCell(String),
    DuplicateNet(String),
    InvalidDie { width: f64, height: f64 },
    NonFiniteCoordinate(String),
    OutOfDie { cell: String, x: f64, y: f64 },
    ControlNetOnLogic(String),
    EmptySinks(String),
    SelfLoop { net: String, cell: String },
    DuplicateSink { net: String, cell: String },
    NoFlipFlops,
}

impl NetlistError {
    pub fn class(&self) -> ErrorClass {
        match self {
            NetlistError::UnknownCell { .. } => ErrorClass::Reference,
            _ => ErrorClass::Invariant,
        }
    }
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetlistError::UnknownCell { net, cell } => {
                write!(f, "net '{net}' references unknown cell '{cell}'")
            }
            NetlistError::EmptyId => f.write_str("empty cell or net id"),
            NetlistError::DuplicateCell(id) => write!(f, "duplicate cell id '{id}'"),
            NetlistError::DuplicateNet(id) => write!(f, "duplicate net id '{id}'"),
            NetlistError::InvalidDie { width, height } => {
                write!(f, "die must be positive and finite, got {width} x {height}")
            }
            NetlistError::NonFiniteCoordinate(id) => {
                write!(f, "cell '{id}' has a non-finite coordinate")
            }
            NetlistError::OutOfDie { cell, x, y } => {
                write!(f, "cell '{cell}' at ({x}, {y}) lies outside the die")
            }
            NetlistError::ControlNetOnLogic(id) => {
                write!(f, "logic cell '{id}' carries a control net")
            }
            NetlistError::EmptySinks(id) => write!(f, "net '{id}' has no sinks"),
            NetlistError::SelfLoop { net, cell } => {
                write!(f, "net '{net}' lists its driver '{cell}' as a sink")
            }
            NetlistError::DuplicateSink { net, cell } => {
                write!(f, "net '{net}' lists sink '{cell}' twice")
            }
            NetlistError::NoFlipFlops => f.write_str("netlist contains no flip-flops"),
        }
    }
}

impl core::error::Error for NetlistError {}

/// A validated placed netlist.
///
/// Besides the cells and nets as given, construction precomputes the
/// driver-to-sink adjacency (`fanout`) and its reverse (`fanin`) by cell
/// index. Both lists are sorted and deduplicated.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedNetlist {
    design_name: String,
    die_width: f64,
    die_height: f64,
    cells: Vec<PlacedCell>,
    nets: Vec<Net>,
    index: BTreeMap<String, usize>,
    fanout: Vec<Vec<usize>>,
    fanin: Vec<Vec<usize>>,
}

impl PlacedNetlist {
    pub fn new(
        design_name: impl Into<String>,
        die_width: f64,
        die_height: f64,
        cells: Vec<PlacedCell>,
        nets: Vec<Net>,
    ) -> Result<Self, NetlistError> {
        if !(die_width.is_finite() && die_height.is_finite() && die_width > 0.0 && die_height > 0.0)
        {
            return Err(NetlistError::InvalidDie { width: die_width, height: die_height });
        }

        let mut index = BTreeMap::new();
        for (i, cell) in cells.iter().enumerate() {
            if cell.id.is_empty() {
                return Err(NetlistError::EmptyId);
            }
            if index.insert(cell.id.clone(), i).is_some() {
                return Err(NetlistError::DuplicateCell(cell.id.clone()));
            }
            if !(cell.x.is_finite() && cell.y.is_finite()) {
                return Err(NetlistError::NonFiniteCoordinate(cell.id.clone()));
            }
            if cell.x < 0.0 || cell.y < 0.0 || cell.x > die_width || cell.y > die_height {
                return Err(NetlistError::OutOfDie { cell: cell.id.clone(), x: cell.x, y: cell.y });
            }
            if cell.kind == CellKind::Logic && cell.control_net.is_some() {
                return Err(NetlistError::ControlNetOnLogic(cell.id.clone()));
            }
        }
        if !cells.iter().any(|c| c.kind.is_ff()) {
            return Err(NetlistError::NoFlipFlops);
        }

        let mut fanout = alloc::vec![Vec::new(); cells.len()];
        let mut fanin = alloc::vec![Vec::new(); cells.len()];
        let mut net_ids = BTreeSet::new();
        for net in &nets {
            if net.id.is_empty() {
                return Err(NetlistError::EmptyId);
            }
            if !net_ids.insert(net.id.as_str()) {
                return Err(NetlistError::DuplicateNet(net.id.clone()));
            }
            let lookup = |cell: &str| {
                index.get(cell).copied().ok_or_else(|| NetlistError::UnknownCell {
                    net: net.id.clone(),
                    cell: cell.into(),
                })
            };
            let driver = lookup(&net.driver)?;
            if net.sinks.is_empty() {
                return Err(NetlistError::EmptySinks(net.id.clone()));
            }
            let mut seen = BTreeSet::new();
            for sink in &net.sinks {
                let s = lookup(sink)?;
                if s == driver {
                    return Err(NetlistError::SelfLoop { net: net.id.clone(), cell: sink.clone() });
                }
                if !seen.insert(s) {
                    return Err(NetlistError::DuplicateSink {
                        net: net.id.clone(),
                        cell: sink.clone(),
                    });
                }
                fanout[driver].push(s);
                fanin[s].push(driver);
            }
        }
        for list in fanout.iter_mut().chain(fanin.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }

        Ok(Self {
            design_name: design_name.into(),
            die_width,
            die_height,
            cells,
            nets,
            index,
            fanout,
            fanin,
        })
    }

    pub fn design_name(&self) -> &str {
        &self.design_name
    }

    pub fn die_width(&self) -> f64 {
        self.die_width
    }

    pub fn die_height(&self) -> f64 {
        self.die_height
    }

    pub fn cells(&self) -> &[PlacedCell] {
        &self.cells
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn cell(&self, idx: usize) -> &PlacedCell {
        &self.cells[idx]
    }

    pub fn cell_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Cell indices in ascending cell-id order.
    pub fn sorted_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.index.values().copied()
    }

    /// Sinks of every net driven by `idx`.
    pub fn fanout(&self, idx: usize) -> &[usize] {
        &self.fanout[idx]
    }

    /// Drivers of every net that has `idx` as a sink.
    pub fn fanin(&self, idx: usize) -> &[usize] {
        &self.fanin[idx]
    }

    pub fn flip_flop_count(&self) -> usize {
        self.cells.iter().filter(|c| c.kind.is_ff()).count()
    }

    /// Position of cell `idx` on the unit die.
    pub fn unit_position(&self, idx: usize) -> (f64, f64) {
        let c = &self.cells[idx];
        (c.x / self.die_width, c.y / self.die_height)
    }

    /// Driver/sink index pairs of every net, star-expanded, in net order.
    pub fn driver_sink_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nets.iter().flat_map(move |net| {
            let d = self.index[&net.driver];
            net.sinks.iter().map(move |s| (d, self.index[s]))
        })
    }
}

/// Maps every cell id to its die-normalized coordinates.
pub fn normalize_coords(n: &PlacedNetlist) -> BTreeMap<String, (f64, f64)> {
    (0..n.cells.len())
        .map(|i| (n.cells[i].id.clone(), n.unit_position(i)))
        .collect()
}
