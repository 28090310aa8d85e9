// SPDX-License-Identifier: Apache-2.0

//! The `.pnl.json` placed-netlist interchange format.
//!
//! ```json
//! {
//!   "design_name": "top",
//!   "die_width": 100.0,
//!   "die_height": 80.0,
//!   "cells": [
//!     {"id": "f0", "kind": "ff", "x": 1.0, "y": 2.0, "master": "DFF_X1", "control_net": "rst"},
//!     {"id": "g0", "kind": "logic", "x": 3.0, "y": 2.0, "master": "NAND2_X1"}
//!   ],
//!   "nets": [{"id": "n0", "driver": "f0", "sinks": ["g0"]}]
//! }
//! ```
//!
//! Unknown fields are rejected. Writing is byte-deterministic: fields are
//! emitted in the order above, floats in shortest round-trip form, two-space
//! indentation and a trailing newline.

use ctsbench_core::netlist::{CellKind, ErrorClass, Net, NetlistError, PlacedCell, PlacedNetlist};
use serde::{Deserialize, Serialize};

pub const EXTENSION: &str = "pnl.json";

#[derive(Debug, thiserror::Error)]
pub enum NetlistParseError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("{0}")]
    Reference(NetlistError),
    #[error("{0}")]
    Invariant(NetlistError),
}

impl NetlistParseError {
    pub fn name(&self) -> &'static str {
        match self {
            NetlistParseError::Syntax { .. } => "SyntaxError",
            NetlistParseError::Reference(_) => "ReferenceError",
            NetlistParseError::Invariant(_) => "InvariantError",
        }
    }
}

impl From<NetlistError> for NetlistParseError {
    fn from(e: NetlistError) -> Self {
        match e.class() {
            ErrorClass::Reference => NetlistParseError::Reference(e),
            ErrorClass::Invariant => NetlistParseError::Invariant(e),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    design_name: String,
    die_width: f64,
    die_height: f64,
    cells: Vec<CellDoc>,
    nets: Vec<NetDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Ff,
    Logic,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellDoc {
    id: String,
    kind: KindDoc,
    x: f64,
    y: f64,
    master: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    control_net: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetDoc {
    id: String,
    driver: String,
    sinks: Vec<String>,
}

pub fn parse_netlist(bytes: &[u8]) -> Result<PlacedNetlist, NetlistParseError> {
    let doc: Document = serde_json::from_slice(bytes).map_err(|e| NetlistParseError::Syntax {
        line: e.line(),
        reason: e.to_string(),
    })?;
    let cells = doc
        .cells
        .into_iter()
        .map(|c| PlacedCell {
            id: c.id,
            kind: match c.kind {
                KindDoc::Ff => CellKind::FlipFlop,
                KindDoc::Logic => CellKind::Logic,
            },
            x: c.x,
            y: c.y,
            master: c.master,
            control_net: c.control_net,
        })
        .collect();
    let nets = doc
        .nets
        .into_iter()
        .map(|n| Net { id: n.id, driver: n.driver, sinks: n.sinks })
        .collect();
    Ok(PlacedNetlist::new(doc.design_name, doc.die_width, doc.die_height, cells, nets)?)
}

pub fn write_netlist(n: &PlacedNetlist) -> Vec<u8> {
    let doc = Document {
        design_name: n.design_name().to_owned(),
        die_width: n.die_width(),
        die_height: n.die_height(),
        cells: n
            .cells()
            .iter()
            .map(|c| CellDoc {
                id: c.id.clone(),
                kind: if c.kind.is_ff() { KindDoc::Ff } else { KindDoc::Logic },
                x: c.x,
                y: c.y,
                master: c.master.clone(),
                control_net: c.control_net.clone(),
            })
            .collect(),
        nets: n
            .nets()
            .iter()
            .map(|net| NetDoc {
                id: net.id.clone(),
                driver: net.driver.clone(),
                sinks: net.sinks.clone(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("netlist documents always serialize");
    out.push(b'\n');
    out
}
