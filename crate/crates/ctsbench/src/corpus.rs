// SPDX-License-Identifier: Apache-2.0

//! On-disk synthetic corpus.
//!
//! ```text
//! <out>/manifest.csv
//! <out>/<design>/<placement_id>/netlist.pnl.json
//! <out>/<design>/<placement_id>/activity.saif
//! <out>/<design>/<placement_id>/raw.ctsg          (written by the build stage)
//! <out>/<design>/<placement_id>/clustered.ctsg    (written by the build stage)
//! ```

use std::path::{Path, PathBuf};

use ctsbench_core::activity::ActivityMap;
use ctsbench_core::coarsen::{build_clustered_graph, ClusteredGraph, CoarsenConfig};
use ctsbench_core::graph::{build_raw_graph_with_hops, RawGraph};
use ctsbench_core::netlist::PlacedNetlist;
use ctsbench_core::surrogate::surrogate_qor;
use ctsbench_core::synth::{generate_netlist, plan_corpus, CorpusSpec, PlacementPlan};
use rayon::prelude::*;

use crate::activity_io::{read_activity, write_saif};
use crate::archive::{write_archive, GraphArchive, GraphKind};
use crate::manifest::{self, ManifestRow};
use crate::netlist_io::{parse_netlist, write_netlist};

pub const NETLIST_FILE: &str = "netlist.pnl.json";
pub const ACTIVITY_FILE: &str = "activity.saif";
/// Simulation window written into generated SAIF files.
pub const SAIF_DURATION: u64 = 1_000_000;

pub fn placement_dir(root: &Path, design: &str, placement_id: &str) -> PathBuf {
    root.join(design).join(placement_id)
}

pub fn archive_path(root: &Path, design: &str, placement_id: &str, kind: GraphKind) -> PathBuf {
    placement_dir(root, design, placement_id).join(format!("{kind}.{}", crate::archive::EXTENSION))
}

/// Builds both graphs, warning when some cells have no activity entry.
pub fn build_graphs(
    n: &PlacedNetlist,
    a: &ActivityMap,
    cfg: &CoarsenConfig,
    hops: usize,
) -> crate::Result<(RawGraph, ClusteredGraph)> {
    cfg.validate()?;
    let missing = a.count_missing(n.cells().iter().map(|c| c.id.as_str()));
    if missing > 0 {
        log::warn!("{}: {missing} cells have no activity entry, using 0 toggles", n.design_name());
    }
    let raw = build_raw_graph_with_hops(n, a, hops)?;
    let clustered = build_clustered_graph(n, a, cfg)?;
    Ok((raw, clustered))
}

/// Everything generated for one placement, before it touches the disk.
pub struct GeneratedPlacement {
    pub plan: PlacementPlan,
    pub netlist: PlacedNetlist,
    pub activity: ActivityMap,
    pub rows: Vec<ManifestRow>,
}

pub fn generate_placement(plan: &PlacementPlan, cfg: &CoarsenConfig, hops: usize) -> crate::Result<GeneratedPlacement> {
    let (netlist, activity) = generate_netlist(&plan.design_name, &plan.knobs, plan.shape, plan.netlist_seed);
    let (raw, clustered) = build_graphs(&netlist, &activity, cfg, hops)?;
    let rows = plan
        .variants
        .iter()
        .map(|v| {
            let q = surrogate_qor(&netlist, &activity, &raw, &clustered, &v.knobs, v.qor_seed);
            ManifestRow::new(&plan.design_name, &plan.placement_id, &v.variant_id, &plan.knobs, &v.knobs, &q)
        })
        .collect();
    Ok(GeneratedPlacement { plan: plan.clone(), netlist, activity, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusSummary {
    pub designs: usize,
    pub placements: usize,
    pub rows: usize,
}

fn write_file(path: &Path, bytes: &[u8]) -> crate::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| crate::Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| crate::Error::io(path, e))
}

/// Writes netlists, SAIF activity and the skeleton manifest under `out`.
///
/// The surrogate QoR in the manifest depends on the clustered graph, so `cfg`
/// and `hops` must match what the build stage will use.
pub fn generate_corpus(spec: &CorpusSpec, out: &Path, cfg: &CoarsenConfig, hops: usize) -> crate::Result<CorpusSummary> {
    spec.validate()?;
    cfg.validate()?;
    let plans = plan_corpus(spec);
    let placements: Vec<GeneratedPlacement> = plans
        .par_iter()
        .map(|p| {
            let g = generate_placement(p, cfg, hops)?;
            let dir = placement_dir(out, &p.design_name, &p.placement_id);
            write_file(&dir.join(NETLIST_FILE), &write_netlist(&g.netlist))?;
            write_file(&dir.join(ACTIVITY_FILE), &write_saif(&g.activity, SAIF_DURATION))?;
            log::debug!("generated {}/{}", p.design_name, p.placement_id);
            Ok(g)
        })
        .collect::<crate::Result<_>>()?;
    let mut rows: Vec<ManifestRow> = placements.into_iter().flat_map(|g| g.rows).collect();
    manifest::write_manifest(&out.join(manifest::FILE_NAME), &mut rows)?;
    Ok(CorpusSummary { designs: spec.n_designs, placements: plans.len(), rows: rows.len() })
}

pub fn load_netlist(path: &Path) -> crate::Result<PlacedNetlist> {
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path, e))?;
    Ok(parse_netlist(&bytes)?)
}

/// Reads the netlist and activity file of one placement.
pub fn load_placement(root: &Path, design: &str, placement_id: &str) -> crate::Result<(PlacedNetlist, ActivityMap)> {
    let dir = placement_dir(root, design, placement_id);
    Ok((load_netlist(&dir.join(NETLIST_FILE))?, read_activity(&dir.join(ACTIVITY_FILE))?))
}

/// Distinct `(design, placement_id)` pairs listed in the corpus manifest, in
/// manifest order.
pub fn placements(root: &Path) -> crate::Result<Vec<(String, String)>> {
    let rows = manifest::read_manifest(&root.join(manifest::FILE_NAME))?;
    let mut out: Vec<(String, String)> = rows.into_iter().map(|r| (r.design_name, r.placement_id)).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Writes both archives for one placement; returns the in-memory graphs.
pub fn build_placement_archives(
    root: &Path,
    design: &str,
    placement_id: &str,
    cfg: &CoarsenConfig,
    hops: usize,
) -> crate::Result<(RawGraph, ClusteredGraph)> {
    let (n, a) = load_placement(root, design, placement_id)?;
    let (raw, clustered) = build_graphs(&n, &a, cfg, hops)?;
    write_archive(
        &GraphArchive::from_raw(&raw, cfg.seed, hops as u32),
        &archive_path(root, design, placement_id, GraphKind::Raw),
    )?;
    write_archive(
        &GraphArchive::from_clustered(&clustered, cfg),
        &archive_path(root, design, placement_id, GraphKind::Clustered),
    )?;
    Ok((raw, clustered))
}

/// Builds archives for every placement of the corpus in parallel.
pub fn build_corpus_archives(root: &Path, cfg: &CoarsenConfig, hops: usize) -> crate::Result<usize> {
    let list = placements(root)?;
    list.par_iter()
        .try_for_each(|(d, p)| build_placement_archives(root, d, p, cfg, hops).map(drop))?;
    Ok(list.len())
}
