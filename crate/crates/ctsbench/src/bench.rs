// SPDX-License-Identifier: Apache-2.0

//! Efficiency measurements over a corpus: compression, footprint, runtime.
//!
//! [`write_report`] produces, in the output directory:
//!
//! * `efficiency.csv`: one row per placement with the columns of
//!   [`PlacementEfficiency`] except the three timings.
//! * `efficiency.json`: `{"mode", "placements": [...], "aggregates": {column:
//!   {"mean", "min", "max"}}}` over the same columns.
//! * `timings.csv`: `design_name, placement_id, mode, repetitions,
//!   build_time_raw, build_time_clustered, coarsen_time` in seconds, and
//!   `timings.json` with their aggregates. Only these two files vary between
//!   identical runs.
//! * `compression_scatter.csv` / `.svg`: raw against clustered node count per
//!   placement.
//! * `efficiency_bars.csv` / `.svg`: per-design mean node compression, edge
//!   compression, archive footprint ratio and in-memory ratio.
//!
//! Byte counts: `raw_bytes`/`clustered_bytes` are `.ctsg` sizes;
//! `*_memory_bytes` estimate the heap and inline size of the in-memory graph
//! structures. `edge_compression` divides by `max(clustered_edges, 1)`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use ctsbench_core::coarsen::{
    build_clustered_graph, form_atomic_clusters, merge_clusters, ClusteredEdge, ClusteredGraph, CoarsenConfig,
    MacroNode,
};
use ctsbench_core::graph::{build_raw_graph_with_hops, RawEdge, RawGraph, RawNode};
use rayon::prelude::*;
use serde::Serialize;

use crate::archive::GraphArchive;
use crate::corpus;

pub const DEFAULT_REPETITIONS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    /// One placement at a time; timings are latencies.
    Latency,
    /// Placements measured concurrently; timings reflect throughput.
    Throughput,
}

impl BenchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchMode::Latency => "latency",
            BenchMode::Throughput => "throughput",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub repetitions: usize,
    pub mode: BenchMode,
    pub hops: usize,
    /// Added inside every timed region. Only meant for tests of the timer.
    #[doc(hidden)]
    pub injected_delay: Duration,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { repetitions: DEFAULT_REPETITIONS, mode: BenchMode::Latency, hops: 1, injected_delay: Duration::ZERO }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlacementEfficiency {
    pub design_name: String,
    pub placement_id: String,
    pub raw_nodes: usize,
    pub raw_edges: usize,
    pub clustered_nodes: usize,
    pub clustered_edges: usize,
    pub node_compression: f64,
    pub edge_compression: f64,
    pub raw_bytes: usize,
    pub clustered_bytes: usize,
    pub footprint_ratio: f64,
    pub raw_memory_bytes: usize,
    pub clustered_memory_bytes: usize,
    pub memory_ratio: f64,
    #[serde(skip)]
    pub timings: Timings,
}

/// Median seconds over the repetitions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub build_time_raw: f64,
    pub build_time_clustered: f64,
    pub coarsen_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyReport {
    pub mode: BenchMode,
    pub repetitions: usize,
    pub placements: Vec<PlacementEfficiency>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let (mut sum, mut n, mut min, mut max) = (0.0, 0usize, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            sum += v;
            n += 1;
            min = min.min(v);
            max = max.max(v);
        }
        Self { mean: sum / n as f64, min, max }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn timed<T>(reps: usize, delay: Duration, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut samples = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let out = f();
        if !delay.is_zero() {
            std::thread::sleep(delay);
        }
        samples.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    (last.expect("at least one repetition"), median(samples))
}

fn string_bytes(s: &str) -> usize {
    std::mem::size_of::<String>() + s.len()
}

/// Estimated bytes held by a raw graph's structures.
pub fn raw_memory_bytes(g: &RawGraph) -> usize {
    let nodes: usize = g.nodes.iter().map(|n| std::mem::size_of::<RawNode>() + n.cell_id.len()).sum();
    let index: usize = g.node_index.keys().map(|k| string_bytes(k) + std::mem::size_of::<usize>()).sum();
    nodes + index + g.edges.len() * std::mem::size_of::<RawEdge>()
}

/// Estimated bytes held by a clustered graph's structures.
pub fn clustered_memory_bytes(g: &ClusteredGraph) -> usize {
    let nodes: usize = g
        .nodes
        .iter()
        .map(|m| {
            std::mem::size_of::<MacroNode>()
                + m.atomics.len() * std::mem::size_of::<usize>()
                + m.members.iter().map(|s| string_bytes(s)).sum::<usize>()
                + m.control_net.as_ref().map_or(0, |s| s.len())
        })
        .sum();
    let assignment: usize = g.assignment.keys().map(|k| string_bytes(k) + std::mem::size_of::<usize>()).sum();
    nodes + assignment + g.edges.len() * std::mem::size_of::<ClusteredEdge>()
}

fn measure(root: &Path, design: &str, pid: &str, cfg: &CoarsenConfig, opts: &BenchOptions) -> crate::Result<PlacementEfficiency> {
    let (n, a) = corpus::load_placement(root, design, pid)?;
    let reps = opts.repetitions;
    let (raw, build_time_raw) = timed(reps, opts.injected_delay, || build_raw_graph_with_hops(&n, &a, opts.hops));
    let raw = raw?;
    let (_, coarsen_time) = timed(reps, opts.injected_delay, || {
        let atomics = form_atomic_clusters(&n, cfg.seed);
        merge_clusters(&atomics.clusters, cfg, &n, &a)
    });
    let (clustered, build_time_clustered) = timed(reps, opts.injected_delay, || build_clustered_graph(&n, &a, cfg));
    let clustered = clustered?;

    let raw_bytes = GraphArchive::from_raw(&raw, cfg.seed, opts.hops as u32).encode().len();
    let clustered_bytes = GraphArchive::from_clustered(&clustered, cfg).encode().len();
    let raw_mem = raw_memory_bytes(&raw);
    let clustered_mem = clustered_memory_bytes(&clustered);
    Ok(PlacementEfficiency {
        design_name: design.to_owned(),
        placement_id: pid.to_owned(),
        raw_nodes: raw.nodes.len(),
        raw_edges: raw.edges.len(),
        clustered_nodes: clustered.nodes.len(),
        clustered_edges: clustered.edges.len(),
        node_compression: raw.nodes.len() as f64 / clustered.nodes.len() as f64,
        edge_compression: raw.edges.len() as f64 / clustered.edges.len().max(1) as f64,
        raw_bytes,
        clustered_bytes,
        footprint_ratio: raw_bytes as f64 / clustered_bytes as f64,
        raw_memory_bytes: raw_mem,
        clustered_memory_bytes: clustered_mem,
        memory_ratio: raw_mem as f64 / clustered_mem as f64,
        timings: Timings { build_time_raw, build_time_clustered, coarsen_time },
    })
}

/// Measures every placement listed in `<root>/manifest.csv`.
pub fn run_benchmark(root: &Path, cfg: &CoarsenConfig, opts: &BenchOptions) -> crate::Result<EfficiencyReport> {
    cfg.validate()?;
    if opts.repetitions == 0 {
        return Err(crate::Error::Usage("repetitions must be at least 1".into()));
    }
    let list = corpus::placements(root)?;
    let placements = match opts.mode {
        BenchMode::Latency => list.iter().map(|(d, p)| measure(root, d, p, cfg, opts)).collect::<crate::Result<Vec<_>>>()?,
        BenchMode::Throughput => list.par_iter().map(|(d, p)| measure(root, d, p, cfg, opts)).collect::<crate::Result<Vec<_>>>()?,
    };
    Ok(EfficiencyReport { mode: opts.mode, repetitions: opts.repetitions, placements })
}

const RATIO_COLUMNS: [&str; 12] = [
    "raw_nodes",
    "raw_edges",
    "clustered_nodes",
    "clustered_edges",
    "node_compression",
    "edge_compression",
    "raw_bytes",
    "clustered_bytes",
    "footprint_ratio",
    "raw_memory_bytes",
    "clustered_memory_bytes",
    "memory_ratio",
];

impl PlacementEfficiency {
    fn numeric(&self) -> [f64; 12] {
        [
            self.raw_nodes as f64,
            self.raw_edges as f64,
            self.clustered_nodes as f64,
            self.clustered_edges as f64,
            self.node_compression,
            self.edge_compression,
            self.raw_bytes as f64,
            self.clustered_bytes as f64,
            self.footprint_ratio,
            self.raw_memory_bytes as f64,
            self.clustered_memory_bytes as f64,
            self.memory_ratio,
        ]
    }
}

fn empty_guard(report: &EfficiencyReport) -> crate::Result<()> {
    if report.placements.is_empty() {
        return Err(crate::Error::Report { context: "bench", message: "report has no placements".into() });
    }
    Ok(())
}

impl EfficiencyReport {
    pub fn mean_node_compression(&self) -> f64 {
        Aggregate::of(self.placements.iter().map(|p| p.node_compression)).mean
    }

    pub fn aggregates(&self) -> Vec<(&'static str, Aggregate)> {
        RATIO_COLUMNS
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, Aggregate::of(self.placements.iter().map(|p| p.numeric()[i]))))
            .collect()
    }

    pub fn timing_aggregates(&self) -> Vec<(&'static str, Aggregate)> {
        let t = |f: fn(&Timings) -> f64| Aggregate::of(self.placements.iter().map(|p| f(&p.timings)));
        vec![
            ("build_time_raw", t(|t| t.build_time_raw)),
            ("build_time_clustered", t(|t| t.build_time_clustered)),
            ("coarsen_time", t(|t| t.coarsen_time)),
        ]
    }

    /// Fixed-width table for terminals.
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "mode: {} ({} repetitions, median seconds)", self.mode.as_str(), self.repetitions).unwrap();
        writeln!(
            s,
            "{:<18} {:>6} {:>6} {:>6} {:>6} {:>7} {:>7} {:>7} {:>9} {:>9}",
            "placement", "rawN", "rawE", "macN", "macE", "nodeX", "edgeX", "bytesX", "raw_s", "clus_s"
        )
        .unwrap();
        for p in &self.placements {
            writeln!(
                s,
                "{:<18} {:>6} {:>6} {:>6} {:>6} {:>7.2} {:>7.2} {:>7.2} {:>9.6} {:>9.6}",
                format!("{}/{}", p.design_name, p.placement_id),
                p.raw_nodes,
                p.raw_edges,
                p.clustered_nodes,
                p.clustered_edges,
                p.node_compression,
                p.edge_compression,
                p.footprint_ratio,
                p.timings.build_time_raw,
                p.timings.build_time_clustered,
            )
            .unwrap();
        }
        if !self.placements.is_empty() {
            for (name, a) in self.aggregates().into_iter().filter(|(n, _)| n.ends_with("compression") || n.ends_with("ratio")) {
                writeln!(s, "{name}: mean {:.4} min {:.4} max {:.4}", a.mean, a.min, a.max).unwrap();
            }
        }
        s
    }

    fn efficiency_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &self.placements {
            w.serialize(p).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    fn efficiency_json(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Doc<'a> {
            mode: BenchMode,
            placements: &'a [PlacementEfficiency],
            aggregates: std::collections::BTreeMap<&'static str, Aggregate>,
        }
        let doc = Doc { mode: self.mode, placements: &self.placements, aggregates: self.aggregates().into_iter().collect() };
        let mut out = serde_json::to_vec_pretty(&doc).expect("report serializes");
        out.push(b'\n');
        out
    }

    fn timings_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["design_name", "placement_id", "mode", "repetitions", "build_time_raw", "build_time_clustered", "coarsen_time"])
            .expect("in-memory write");
        for p in &self.placements {
            let t = p.timings;
            w.write_record([
                p.design_name.clone(),
                p.placement_id.clone(),
                self.mode.as_str().to_owned(),
                self.repetitions.to_string(),
                t.build_time_raw.to_string(),
                t.build_time_clustered.to_string(),
                t.coarsen_time.to_string(),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    fn timings_json(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Doc {
            mode: BenchMode,
            repetitions: usize,
            aggregates: std::collections::BTreeMap<&'static str, Aggregate>,
        }
        let doc = Doc { mode: self.mode, repetitions: self.repetitions, aggregates: self.timing_aggregates().into_iter().collect() };
        let mut out = serde_json::to_vec_pretty(&doc).expect("report serializes");
        out.push(b'\n');
        out
    }
}

pub const REPORT_FILES: [&str; 4] = ["efficiency.csv", "efficiency.json", "timings.csv", "timings.json"];
pub const FIGURE_FILES: [&str; 4] =
    ["compression_scatter.csv", "compression_scatter.svg", "efficiency_bars.csv", "efficiency_bars.svg"];
/// Report files whose content depends on wall-clock time.
pub const TIMING_FILES: [&str; 2] = ["timings.csv", "timings.json"];

fn put(dir: &Path, name: &str, bytes: &[u8]) -> crate::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| crate::Error::io(path, e))
}

/// Writes the report files and figures into `dir`.
pub fn write_report(report: &EfficiencyReport, dir: &Path) -> crate::Result<()> {
    empty_guard(report)?;
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    put(dir, "efficiency.csv", &report.efficiency_csv())?;
    put(dir, "efficiency.json", &report.efficiency_json())?;
    put(dir, "timings.csv", &report.timings_csv())?;
    put(dir, "timings.json", &report.timings_json())?;
    plot_report(report, dir)
}

/// Per-design means of the four ratios, in design order.
pub fn design_bars(report: &EfficiencyReport) -> Vec<(String, [f64; 4])> {
    let mut groups: std::collections::BTreeMap<&str, Vec<&PlacementEfficiency>> = Default::default();
    for p in &report.placements {
        groups.entry(&p.design_name).or_default().push(p);
    }
    groups
        .into_iter()
        .map(|(d, ps)| {
            let mean = |f: fn(&PlacementEfficiency) -> f64| ps.iter().map(|p| f(p)).sum::<f64>() / ps.len() as f64;
            (
                d.to_owned(),
                [
                    mean(|p| p.node_compression),
                    mean(|p| p.edge_compression),
                    mean(|p| p.footprint_ratio),
                    mean(|p| p.memory_ratio),
                ],
            )
        })
        .collect()
}

const BAR_SERIES: [(&str, &str); 4] = [
    ("node_compression", "#4c72b0"),
    ("edge_compression", "#dd8452"),
    ("footprint_ratio", "#55a868"),
    ("memory_ratio", "#c44e52"),
];

/// Emits the scatter and bar figures with their data files.
pub fn plot_report(report: &EfficiencyReport, dir: &Path) -> crate::Result<()> {
    empty_guard(report)?;
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["design_name", "placement_id", "raw_nodes", "clustered_nodes"]).expect("in-memory write");
    for p in &report.placements {
        w.write_record([&p.design_name, &p.placement_id, &p.raw_nodes.to_string(), &p.clustered_nodes.to_string()])
            .expect("in-memory write");
    }
    put(dir, "compression_scatter.csv", &w.into_inner().expect("in-memory flush"))?;
    put(dir, "compression_scatter.svg", scatter_svg(report).as_bytes())?;

    let bars = design_bars(report);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["design_name"];
    header.extend(BAR_SERIES.iter().map(|s| s.0));
    w.write_record(&header).expect("in-memory write");
    for (d, v) in &bars {
        let mut rec = vec![d.clone()];
        rec.extend(v.iter().map(|x| x.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    put(dir, "efficiency_bars.csv", &w.into_inner().expect("in-memory flush"))?;
    put(dir, "efficiency_bars.svg", bars_svg(&bars).as_bytes())
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0).unwrap();
    let (x0, y0, x1) = (MARGIN, H - MARGIN, W - MARGIN / 2.0);
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{}" stroke="black"/>"#, MARGIN / 1.5).unwrap();
    s
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&m| m >= v).unwrap_or(10.0 * mag)
}

fn y_ticks(s: &mut String, top: f64, label: &str) {
    let plot_h = H - MARGIN - MARGIN / 1.5;
    for i in 0..=4 {
        let v = top * i as f64 / 4.0;
        let y = H - MARGIN - plot_h * i as f64 / 4.0;
        writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{MARGIN}" y2="{y:.1}" stroke="black"/>"#, MARGIN - 4.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN - 6.0, y + 4.0, trim_num(v)).unwrap();
    }
    writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{label}</text>"#,
        H / 2.0,
        H / 2.0
    )
    .unwrap();
}

fn trim_num(v: f64) -> String {
    let t = format!("{v:.2}");
    t.trim_end_matches('0').trim_end_matches('.').to_owned()
}

fn scatter_svg(report: &EfficiencyReport) -> String {
    let xmax = nice_max(report.placements.iter().map(|p| p.raw_nodes).max().unwrap_or(1) as f64);
    let ymax = nice_max(report.placements.iter().map(|p| p.clustered_nodes).max().unwrap_or(1) as f64);
    let (plot_w, plot_h) = (W - 1.5 * MARGIN, H - MARGIN - MARGIN / 1.5);
    let mut s = svg_open("Raw vs clustered node count");
    y_ticks(&mut s, ymax, "clustered nodes");
    for i in 0..=4 {
        let v = xmax * i as f64 / 4.0;
        let x = MARGIN + plot_w * i as f64 / 4.0;
        writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#, H - MARGIN + 16.0, trim_num(v)).unwrap();
    }
    writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">raw nodes</text>"#, MARGIN + plot_w / 2.0, H - 16.0).unwrap();
    for p in &report.placements {
        let x = MARGIN + plot_w * p.raw_nodes as f64 / xmax;
        let y = H - MARGIN - plot_h * p.clustered_nodes as f64 / ymax;
        writeln!(
            s,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#4c72b0" fill-opacity="0.8"><title>{}/{}</title></circle>"##,
            p.design_name, p.placement_id
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn bars_svg(bars: &[(String, [f64; 4])]) -> String {
    let top = nice_max(bars.iter().flat_map(|(_, v)| v.iter().copied()).fold(0.0, f64::max));
    let (plot_w, plot_h) = (W - 1.5 * MARGIN, H - MARGIN - MARGIN / 1.5);
    let mut s = svg_open("Per-design efficiency ratios");
    y_ticks(&mut s, top, "ratio (raw / clustered)");
    let slot = plot_w / bars.len() as f64;
    let bar_w = slot * 0.8 / BAR_SERIES.len() as f64;
    for (i, (design, values)) in bars.iter().enumerate() {
        let x0 = MARGIN + slot * i as f64 + slot * 0.1;
        for (j, (v, (name, color))) in values.iter().zip(BAR_SERIES).enumerate() {
            let h = plot_h * v / top;
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{bar_w:.2}" height="{h:.2}" fill="{color}"><title>{design} {name} {v:.4}</title></rect>"#,
                x0 + bar_w * j as f64,
                H - MARGIN - h
            )
            .unwrap();
        }
        writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{design}</text>"#, x0 + slot * 0.4, H - MARGIN + 16.0).unwrap();
    }
    for (j, (name, color)) in BAR_SERIES.iter().enumerate() {
        let y = MARGIN / 1.5 + 14.0 * j as f64;
        writeln!(s, r#"<rect x="{}" y="{y}" width="10" height="10" fill="{color}"/>"#, W - 170.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, W - 155.0, y + 9.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
