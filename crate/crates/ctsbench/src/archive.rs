// SPDX-License-Identifier: Apache-2.0

//! The `.ctsg` graph archive.
//!
//! Layout, little-endian throughout:
//!
//! | bytes                      | content                                   |
//! |----------------------------|-------------------------------------------|
//! | 4                          | header length `h` (u32)                   |
//! | `h`                        | header, compact UTF-8 JSON                |
//! | `4 * nodes * feature_dim`  | `node_features`, f32 row-major            |
//! | `8 * 2 * edges`            | `edge_index`, i64, source row then target |
//! | `4 * edges`                | `edge_weights`, f32                       |
//!
//! Header keys in order: `schema_version` (1), `design_name`, `graph_kind`
//! (`raw` or `clustered`), `node_count`, `edge_count`, `feature_dim` (4 for
//! raw, 10 for clustered), `seed`, `config`. `config` echoes the build
//! parameters: `hops` for raw graphs, the three coarsening thresholds for
//! clustered graphs.

use std::fmt;
use std::path::Path;

use ctsbench_core::coarsen::{ClusteredGraph, CoarsenConfig, MACRO_FEATURE_DIM};
use ctsbench_core::graph::{RawGraph, RAW_FEATURE_DIM};
use serde::{Deserialize, Serialize};

pub const EXTENSION: &str = "ctsg";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Raw,
    Clustered,
}

impl GraphKind {
    pub fn feature_dim(self) -> usize {
        match self {
            GraphKind::Raw => RAW_FEATURE_DIM,
            GraphKind::Clustered => MACRO_FEATURE_DIM,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Raw => "raw",
            GraphKind::Clustered => "clustered",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hops: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spread_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cos_threshold: Option<f64>,
}

impl ConfigEcho {
    pub fn raw(hops: u32) -> Self {
        Self { hops: Some(hops), spread_threshold: None, merge_distance: None, cos_threshold: None }
    }

    pub fn clustered(cfg: &CoarsenConfig) -> Self {
        Self {
            hops: None,
            spread_threshold: Some(cfg.spread_threshold),
            merge_distance: Some(cfg.merge_distance),
            cos_threshold: Some(cfg.cos_threshold),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveHeader {
    pub schema_version: u32,
    pub design_name: String,
    pub graph_kind: GraphKind,
    pub node_count: u64,
    pub edge_count: u64,
    pub feature_dim: u32,
    pub seed: u64,
    pub config: ConfigEcho,
}

/// A graph as stored on disk: header plus the three tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphArchive {
    pub header: ArchiveHeader,
    pub node_features: Vec<f32>,
    /// `2 * edge_count` entries: all sources, then all targets.
    pub edge_index: Vec<i64>,
    pub edge_weights: Vec<f32>,
}

/// Header and payload disagree, or a section is malformed.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("archive section '{section}': expected {expected}, found {actual}")]
pub struct FormatError {
    pub section: &'static str,
    pub expected: String,
    pub actual: String,
}

impl FormatError {
    pub fn name(&self) -> &'static str {
        "FormatError"
    }
}

fn format_error(section: &'static str, expected: impl fmt::Display, actual: impl fmt::Display) -> FormatError {
    FormatError { section, expected: expected.to_string(), actual: actual.to_string() }
}

impl GraphArchive {
    pub fn from_raw(g: &RawGraph, seed: u64, hops: u32) -> Self {
        let node_features = g.nodes.iter().flat_map(|n| n.features.map(|v| v as f32)).collect();
        let edges: Vec<_> = g.edges.iter().map(|e| (e.src, e.dst, e.weight)).collect();
        Self::assemble(
            &g.design_name,
            GraphKind::Raw,
            g.nodes.len(),
            node_features,
            &edges,
            seed,
            ConfigEcho::raw(hops),
        )
    }

    pub fn from_clustered(g: &ClusteredGraph, cfg: &CoarsenConfig) -> Self {
        let node_features = g.nodes.iter().flat_map(|n| n.features.map(|v| v as f32)).collect();
        let edges: Vec<_> = g.edges.iter().map(|e| (e.src, e.dst, e.weight)).collect();
        Self::assemble(
            &g.design_name,
            GraphKind::Clustered,
            g.nodes.len(),
            node_features,
            &edges,
            cfg.seed,
            ConfigEcho::clustered(cfg),
        )
    }

    fn assemble(
        design_name: &str,
        kind: GraphKind,
        nodes: usize,
        node_features: Vec<f32>,
        edges: &[(usize, usize, f64)],
        seed: u64,
        config: ConfigEcho,
    ) -> Self {
        let mut edge_index = Vec::with_capacity(2 * edges.len());
        edge_index.extend(edges.iter().map(|e| e.0 as i64));
        edge_index.extend(edges.iter().map(|e| e.1 as i64));
        Self {
            header: ArchiveHeader {
                schema_version: SCHEMA_VERSION,
                design_name: design_name.to_owned(),
                graph_kind: kind,
                node_count: nodes as u64,
                edge_count: edges.len() as u64,
                feature_dim: kind.feature_dim() as u32,
                seed,
                config,
            },
            node_features,
            edge_index,
            edge_weights: edges.iter().map(|e| e.2 as f32).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.header.node_count as usize
    }

    pub fn edge_count(&self) -> usize {
        self.header.edge_count as usize
    }

    /// Row `i` of the node feature matrix.
    pub fn node_row(&self, i: usize) -> &[f32] {
        let d = self.header.feature_dim as usize;
        &self.node_features[i * d..(i + 1) * d]
    }

    pub fn encode(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&self.header).expect("archive headers always serialize");
        let payload = 4 * self.node_features.len() + 8 * self.edge_index.len() + 4 * self.edge_weights.len();
        let mut out = Vec::with_capacity(4 + header.len() + payload);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for v in &self.node_features {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.edge_index {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.edge_weights {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FormatError> {
        let (header, mut rest) = split_header(bytes)?;
        let nodes = usize::try_from(header.node_count).map_err(|_| format_error("header", "addressable node_count", header.node_count))?;
        let edges = usize::try_from(header.edge_count).map_err(|_| format_error("header", "addressable edge_count", header.edge_count))?;
        let dim = header.feature_dim as usize;

        let mut take = |section: &'static str, count: Option<usize>, width: usize| {
            let len = count
                .and_then(|c| c.checked_mul(width))
                .ok_or_else(|| format_error(section, "a representable length", "overflow"))?;
            if rest.len() < len {
                return Err(format_error(section, format_args!("{len} bytes"), format_args!("{} bytes", rest.len())));
            }
            let (head, tail) = rest.split_at(len);
            rest = tail;
            Ok(head)
        };
        let node_features = take("node_features", nodes.checked_mul(dim), 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect();
        let edge_index: Vec<i64> = take("edge_index", edges.checked_mul(2), 8)?
            .chunks_exact(8)
            .map(|c| i64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let edge_weights = take("edge_weights", Some(edges), 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect();
        if !rest.is_empty() {
            return Err(format_error("trailer", "end of file", format_args!("{} extra bytes", rest.len())));
        }
        if let Some(bad) = edge_index.iter().find(|&&i| i < 0 || i as u64 >= header.node_count) {
            return Err(format_error("edge_index", format_args!("indices in 0..{}", header.node_count), bad));
        }
        Ok(Self { header, node_features, edge_index, edge_weights })
    }
}

fn split_header(bytes: &[u8]) -> Result<(ArchiveHeader, &[u8]), FormatError> {
    if bytes.len() < 4 {
        return Err(format_error("header_length", "4 bytes", format_args!("{} bytes", bytes.len())));
    }
    let len = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    let body = &bytes[4..];
    if body.len() < len {
        return Err(format_error("header", format_args!("{len} bytes"), format_args!("{} bytes", body.len())));
    }
    let header: ArchiveHeader =
        serde_json::from_slice(&body[..len]).map_err(|e| format_error("header", "valid header JSON", e))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(format_error("header.schema_version", SCHEMA_VERSION, header.schema_version));
    }
    if header.feature_dim != 4 && header.feature_dim != 10 {
        return Err(format_error("header.feature_dim", "4 or 10", header.feature_dim));
    }
    let want = header.graph_kind.feature_dim() as u32;
    if header.feature_dim != want {
        return Err(format_error(
            "header.feature_dim",
            format_args!("{want} for a {} graph", header.graph_kind),
            header.feature_dim,
        ));
    }
    Ok((header, &body[len..]))
}

/// Parses and checks the header alone, ignoring the payload.
pub fn decode_header(bytes: &[u8]) -> Result<ArchiveHeader, FormatError> {
    split_header(bytes).map(|(h, _)| h)
}

pub fn write_archive(archive: &GraphArchive, path: &Path) -> crate::Result<()> {
    std::fs::write(path, archive.encode()).map_err(|e| crate::Error::io(path, e))
}

pub fn read_archive(path: &Path) -> crate::Result<GraphArchive> {
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path, e))?;
    Ok(GraphArchive::decode(&bytes)?)
}
