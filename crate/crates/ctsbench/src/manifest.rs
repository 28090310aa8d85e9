// SPDX-License-Identifier: Apache-2.0

//! `manifest.csv`: one row per (placement, CTS variant).
//!
//! Columns, in order:
//!
//! ```text
//! design_name, placement_id, cts_variant_id,
//! synth_strategy, aspect_ratio, io_mode, core_utilization, target_density,
//! time_driven, routability_driven,
//! sink_max_dia, max_wire_length, cluster_size, buffer_distance,
//! skew_setup, skew_hold, worst_slack_setup, worst_slack_hold, tns_setup,
//! tns_hold, total_power, dynamic_power, static_power, wirelength,
//! cell_utilization, clock_buffers, clock_inverters, routing_buffers,
//! repair_buffers,
//! g_skew, g_power, g_wl, pareto_distance,
//! raw_graph_path, clustered_graph_path
//! ```
//!
//! Boolean knobs are written as `0`/`1`. The four gap columns are empty in a
//! skeleton manifest and filled by [`fill_gaps`]. Graph paths are relative to
//! the manifest's directory. Rows are kept sorted by design, placement and
//! variant id.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ctsbench_core::gap::{pareto_distance, DesignGroup, GapError, GroupMinima, QorRecord, SkewMetric};
use ctsbench_core::knobs::{CtsKnobs, PlacementKnobs, SynthStrategy};
use serde::{Deserialize, Serialize};

use crate::archive::{self, GraphKind};

pub const FILE_NAME: &str = "manifest.csv";

/// Largest tolerated difference between stored and recomputed gap columns.
pub const GAP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRow {
    pub design_name: String,
    pub placement_id: String,
    pub cts_variant_id: String,

    pub synth_strategy: String,
    pub aspect_ratio: f64,
    pub io_mode: u8,
    pub core_utilization: f64,
    pub target_density: f64,
    pub time_driven: u8,
    pub routability_driven: u8,

    pub sink_max_dia: u32,
    pub max_wire_length: u32,
    pub cluster_size: u32,
    pub buffer_distance: u32,

    pub skew_setup: f64,
    pub skew_hold: f64,
    pub worst_slack_setup: f64,
    pub worst_slack_hold: f64,
    pub tns_setup: f64,
    pub tns_hold: f64,
    pub total_power: f64,
    pub dynamic_power: f64,
    pub static_power: f64,
    pub wirelength: f64,
    pub cell_utilization: f64,
    pub clock_buffers: u64,
    pub clock_inverters: u64,
    pub routing_buffers: u64,
    pub repair_buffers: u64,

    pub g_skew: Option<f64>,
    pub g_power: Option<f64>,
    pub g_wl: Option<f64>,
    pub pareto_distance: Option<f64>,

    pub raw_graph_path: String,
    pub clustered_graph_path: String,
}

pub const COLUMNS: [&str; 35] = [
    "design_name",
    "placement_id",
    "cts_variant_id",
    "synth_strategy",
    "aspect_ratio",
    "io_mode",
    "core_utilization",
    "target_density",
    "time_driven",
    "routability_driven",
    "sink_max_dia",
    "max_wire_length",
    "cluster_size",
    "buffer_distance",
    "skew_setup",
    "skew_hold",
    "worst_slack_setup",
    "worst_slack_hold",
    "tns_setup",
    "tns_hold",
    "total_power",
    "dynamic_power",
    "static_power",
    "wirelength",
    "cell_utilization",
    "clock_buffers",
    "clock_inverters",
    "routing_buffers",
    "repair_buffers",
    "g_skew",
    "g_power",
    "g_wl",
    "pareto_distance",
    "raw_graph_path",
    "clustered_graph_path",
];

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest line {line}: {reason}")]
    Syntax { line: u64, reason: String },
    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("{design} {run}: stored {column} = {stored:?}, recomputed {recomputed}")]
    InconsistentGap { design: String, run: String, column: &'static str, stored: Option<f64>, recomputed: f64 },
    #[error("{}: header says {found} graph, manifest column expects {expected}", path.display())]
    KindMismatch { path: PathBuf, expected: GraphKind, found: GraphKind },
}

impl ManifestError {
    pub fn name(&self) -> &'static str {
        match self {
            ManifestError::Syntax { .. } => "SyntaxError",
            ManifestError::MissingArtifact(_) => "MissingArtifactError",
            ManifestError::InconsistentGap { .. } => "InconsistentGapError",
            ManifestError::KindMismatch { .. } => "FormatError",
        }
    }
}

impl ManifestRow {
    pub fn new(
        design_name: &str,
        placement_id: &str,
        cts_variant_id: &str,
        p: &PlacementKnobs,
        c: &CtsKnobs,
        q: &QorRecord,
    ) -> Self {
        let dir = format!("{design_name}/{placement_id}");
        Self {
            design_name: design_name.to_owned(),
            placement_id: placement_id.to_owned(),
            cts_variant_id: cts_variant_id.to_owned(),
            synth_strategy: p.synth_strategy.name().to_owned(),
            aspect_ratio: p.aspect_ratio,
            io_mode: p.io_mode.into(),
            core_utilization: p.core_utilization,
            target_density: p.target_density,
            time_driven: p.time_driven.into(),
            routability_driven: p.routability_driven.into(),
            sink_max_dia: c.sink_max_dia,
            max_wire_length: c.max_wire_length,
            cluster_size: c.cluster_size,
            buffer_distance: c.buffer_distance,
            skew_setup: q.skew_setup,
            skew_hold: q.skew_hold,
            worst_slack_setup: q.worst_slack_setup,
            worst_slack_hold: q.worst_slack_hold,
            tns_setup: q.tns_setup,
            tns_hold: q.tns_hold,
            total_power: q.total_power,
            dynamic_power: q.dynamic_power,
            static_power: q.static_power,
            wirelength: q.wirelength,
            cell_utilization: q.cell_utilization,
            clock_buffers: q.clock_buffers,
            clock_inverters: q.clock_inverters,
            routing_buffers: q.routing_buffers,
            repair_buffers: q.repair_buffers,
            g_skew: None,
            g_power: None,
            g_wl: None,
            pareto_distance: None,
            raw_graph_path: format!("{dir}/raw.{}", archive::EXTENSION),
            clustered_graph_path: format!("{dir}/clustered.{}", archive::EXTENSION),
        }
    }

    /// `placement_id/cts_variant_id`, unique within a design.
    pub fn run_id(&self) -> String {
        format!("{}/{}", self.placement_id, self.cts_variant_id)
    }

    pub fn qor(&self) -> QorRecord {
        QorRecord {
            skew_setup: self.skew_setup,
            skew_hold: self.skew_hold,
            worst_slack_setup: self.worst_slack_setup,
            worst_slack_hold: self.worst_slack_hold,
            tns_setup: self.tns_setup,
            tns_hold: self.tns_hold,
            total_power: self.total_power,
            dynamic_power: self.dynamic_power,
            static_power: self.static_power,
            wirelength: self.wirelength,
            cell_utilization: self.cell_utilization,
            clock_buffers: self.clock_buffers,
            clock_inverters: self.clock_inverters,
            routing_buffers: self.routing_buffers,
            repair_buffers: self.repair_buffers,
        }
    }

    pub fn graph_path(&self, kind: GraphKind) -> &str {
        match kind {
            GraphKind::Raw => &self.raw_graph_path,
            GraphKind::Clustered => &self.clustered_graph_path,
        }
    }

    fn sort_key(&self) -> (&str, &str, &str) {
        (&self.design_name, &self.placement_id, &self.cts_variant_id)
    }

    fn check(&self) -> Result<(), String> {
        self.synth_strategy
            .parse::<SynthStrategy>()
            .map_err(|_| format!("unknown synth_strategy '{}'", self.synth_strategy))?;
        for (name, v) in [
            ("io_mode", self.io_mode),
            ("time_driven", self.time_driven),
            ("routability_driven", self.routability_driven),
        ] {
            if v > 1 {
                return Err(format!("{name} must be 0 or 1, got {v}"));
            }
        }
        self.qor().validate().map_err(|m| format!("invalid {m}"))
    }
}

pub fn sort_rows(rows: &mut [ManifestRow]) {
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn parse_manifest(bytes: &[u8]) -> Result<Vec<ManifestRow>, ManifestError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().map_err(|e| ManifestError::Syntax { line: 1, reason: e.to_string() })?;
    if header.iter().ne(COLUMNS) {
        return Err(ManifestError::Syntax { line: 1, reason: "columns differ from the manifest schema".into() });
    }
    let mut rows = Vec::new();
    for record in reader.deserialize::<ManifestRow>() {
        let row = record.map_err(|e| ManifestError::Syntax {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        row.check()
            .map_err(|reason| ManifestError::Syntax { line: rows.len() as u64 + 2, reason })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Serializes rows in their given order. Floats use shortest round-trip form.
pub fn manifest_bytes(rows: &[ManifestRow]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("manifest rows always serialize");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn read_manifest(path: &Path) -> crate::Result<Vec<ManifestRow>> {
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path, e))?;
    Ok(parse_manifest(&bytes)?)
}

/// Sorts and writes `rows` to `path`.
pub fn write_manifest(path: &Path, rows: &mut [ManifestRow]) -> crate::Result<()> {
    sort_rows(rows);
    std::fs::write(path, manifest_bytes(rows)).map_err(|e| crate::Error::io(path, e))
}

fn design_groups(rows: &[ManifestRow]) -> BTreeMap<&str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        groups.entry(&r.design_name).or_default().push(i);
    }
    groups
}

/// The gap columns each row should carry, in row order.
pub fn recompute_gaps(rows: &[ManifestRow]) -> Result<Vec<[f64; 4]>, GapError> {
    let mut out = vec![[0.0; 4]; rows.len()];
    for (design, members) in design_groups(rows) {
        let group = DesignGroup {
            design_name: design.to_owned(),
            runs: members.iter().map(|&i| (rows[i].run_id(), rows[i].qor())).collect(),
        };
        let minima = GroupMinima::of(&group, SkewMetric::Setup)?;
        for (&i, (_, q)) in members.iter().zip(&group.runs) {
            let g = minima.gap(q, SkewMetric::Setup);
            out[i] = [g.skew, g.power, g.wl, pareto_distance(g)];
        }
    }
    Ok(out)
}

/// Fills the gap columns per design group. Running it twice changes nothing.
pub fn fill_gaps(rows: &mut [ManifestRow]) -> Result<(), GapError> {
    let gaps = recompute_gaps(rows)?;
    for (row, [s, p, w, d]) in rows.iter_mut().zip(gaps) {
        row.g_skew = Some(s);
        row.g_power = Some(p);
        row.g_wl = Some(w);
        row.pareto_distance = Some(d);
    }
    Ok(())
}

/// Checks that stored gap columns match a recomputation from the QoR columns.
pub fn audit_gaps(rows: &[ManifestRow]) -> crate::Result<()> {
    let gaps = recompute_gaps(rows)?;
    for (row, want) in rows.iter().zip(gaps) {
        let stored = [row.g_skew, row.g_power, row.g_wl, row.pareto_distance];
        for ((column, have), want) in ["g_skew", "g_power", "g_wl", "pareto_distance"].into_iter().zip(stored).zip(want) {
            if !have.is_some_and(|v| (v - want).abs() <= GAP_TOLERANCE) {
                return Err(ManifestError::InconsistentGap {
                    design: row.design_name.clone(),
                    run: row.run_id(),
                    column,
                    stored: have,
                    recomputed: want,
                }
                .into());
            }
        }
    }
    Ok(())
}

/// Opens every graph path of every row under `root` and validates it.
pub fn audit_artifacts(root: &Path, rows: &[ManifestRow]) -> crate::Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for row in rows {
        for kind in [GraphKind::Raw, GraphKind::Clustered] {
            let rel = row.graph_path(kind);
            if !seen.insert(rel) {
                continue;
            }
            let path = root.join(rel);
            if !path.is_file() {
                return Err(ManifestError::MissingArtifact(path).into());
            }
            let found = archive::read_archive(&path)?.header.graph_kind;
            if found != kind {
                return Err(ManifestError::KindMismatch { path, expected: kind, found }.into());
            }
        }
    }
    Ok(())
}

/// Sorts the rows, audits archives and gap columns, then writes
/// `<root>/manifest.csv`.
pub fn assemble_manifest(root: &Path, mut rows: Vec<ManifestRow>) -> crate::Result<PathBuf> {
    sort_rows(&mut rows);
    audit_artifacts(root, &rows)?;
    audit_gaps(&rows)?;
    let path = root.join(FILE_NAME);
    write_manifest(&path, &mut rows)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(design: &str, pid: &str, skew: f64, power: f64, wl: f64) -> ManifestRow {
        let p = PlacementKnobs {
            synth_strategy: SynthStrategy::Delay2,
            aspect_ratio: 1.4,
            io_mode: true,
            core_utilization: 55.5,
            target_density: 0.6,
            time_driven: false,
            routability_driven: true,
        };
        let c = CtsKnobs { sink_max_dia: 40, max_wire_length: 200, cluster_size: 20, buffer_distance: 100 };
        let q = QorRecord {
            skew_setup: skew,
            skew_hold: 0.8 * skew,
            worst_slack_setup: 0.1,
            worst_slack_hold: -0.01,
            tns_setup: 0.0,
            tns_hold: -0.03,
            total_power: power,
            dynamic_power: power * 0.9,
            static_power: power * 0.1,
            wirelength: wl,
            cell_utilization: 55.0,
            clock_buffers: 4,
            clock_inverters: 2,
            routing_buffers: 1,
            repair_buffers: 0,
        };
        ManifestRow::new(design, pid, "c000", &p, &c, &q)
    }

    #[test]
    fn csv_round_trip_and_column_order() {
        let mut rows = vec![row("b", "p001", 0.1, 0.02, 1000.0), row("a", "p000", 0.2, 1e-7, 1234.5)];
        sort_rows(&mut rows);
        assert_eq!(rows[0].design_name, "a");
        let bytes = manifest_bytes(&rows);
        let text = std::str::from_utf8(&bytes).unwrap();
        assert_eq!(text.lines().next().unwrap(), COLUMNS.join(","));
        assert!(text.lines().nth(1).unwrap().contains(",DELAY2,1.4,1,55.5,0.6,0,1,"));
        assert_eq!(parse_manifest(&bytes).unwrap(), rows);
    }

    #[test]
    fn hand_built_pair() {
        let mut rows = vec![row("d", "p000", 100.0, 2.0, 5000.0), row("d", "p001", 150.0, 1.0, 4000.0)];
        fill_gaps(&mut rows).unwrap();
        assert_eq!((rows[0].g_skew, rows[0].g_power, rows[0].g_wl), (Some(1.0), Some(2.0), Some(1.25)));
        assert!((rows[0].pareto_distance.unwrap() - 1.0308).abs() < 1e-4);
        assert!((rows[1].pareto_distance.unwrap() - 0.5).abs() < 1e-12);
        audit_gaps(&rows).unwrap();
        let before = rows.clone();
        fill_gaps(&mut rows).unwrap();
        assert_eq!(rows, before);
    }

    #[test]
    fn single_run_group_has_zero_distance() {
        let mut rows = vec![row("solo", "p000", 0.3, 0.01, 5.0)];
        fill_gaps(&mut rows).unwrap();
        assert_eq!(rows[0].pareto_distance, Some(0.0));
    }

    #[test]
    fn stale_gap_detected() {
        let mut rows = vec![row("d", "p000", 0.1, 0.01, 5.0), row("d", "p001", 0.2, 0.01, 5.0)];
        assert_eq!(audit_gaps(&rows).unwrap_err().name(), "InconsistentGapError");
        fill_gaps(&mut rows).unwrap();
        rows[1].g_skew = Some(rows[1].g_skew.unwrap() + 1e-6);
        assert_eq!(audit_gaps(&rows).unwrap_err().name(), "InconsistentGapError");
    }

    #[test]
    fn bad_cells_are_syntax_errors() {
        let rows = vec![row("d", "p000", 0.1, 0.01, 5.0)];
        let text = String::from_utf8(manifest_bytes(&rows)).unwrap();
        for (from, to) in [("DELAY2", "FAST9"), (",1,55.5", ",3,55.5"), (",0.1,0.08", ",x,0.08")] {
            let broken = text.replacen(from, to, 1);
            assert_ne!(broken, text);
            assert_eq!(parse_manifest(broken.as_bytes()).unwrap_err().name(), "SyntaxError", "{to}");
        }
        let header_swapped = text.replacen("design_name,placement_id", "placement_id,design_name", 1);
        assert!(parse_manifest(header_swapped.as_bytes()).is_err());
    }
}
