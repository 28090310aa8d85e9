// SPDX-License-Identifier: Apache-2.0

//! Analytic stand-in for post-CTS QoR labels.
//!
//! The values are synthetic. They exist so that gap scoring and manifests have
//! realistic-looking, knob-sensitive targets; none of it models a real clock
//! tree. All lengths are in microns, times in ns, power in W.
//!
//! Inputs derived from the design:
//!
//! * `n_ff`: flip-flop count; `n_cells`: all cells.
//! * `disp`: RMS distance of flip-flops from their centroid.
//! * `span`: half-perimeter of the flip-flop bounding box.
//! * `toggles`: sum of toggle counts over all cells.
//! * `raw_wl`: total raw-graph edge weight times the die diagonal.
//! * `macros`: clustered node count.
//! * `j`: jitter in `[0.95, 1.05)`, the first draw of `SplitMix64(seed)`.
//!
//! Formulas, with `cs`, `smd`, `mwl`, `bd` the CTS knobs:
//!
//! ```text
//! skew_setup        = SKEW_FLOOR + 0.01 * disp * sqrt(smd / 35) / sqrt(cs) * j
//! skew_hold         = 0.8 * skew_setup
//! clock_buffers     = ceil(n_ff / cs) + floor(span / bd)
//! clock_inverters   = floor(clock_buffers / 2)
//! clock_wl          = 0.5 * disp * n_ff
//! wirelength        = raw_wl + clock_wl + n_cells
//! routing_buffers   = floor(wirelength / (50 * mwl))
//! dynamic_power     = 2e-9 * toggles * j
//!                   + 5e-7 * (n_ff + clock_buffers + clock_inverters)
//!                   + 1e-9 * wirelength
//! worst_slack_setup = 0.25 - 2 * skew_setup - 0.0005 * span * (macros / n_ff)
//! worst_slack_hold  = 0.05 + 0.3 * skew_hold - 0.2 * skew_setup
//! tns_setup         = min(0, worst_slack_setup) * ceil(0.1 * n_ff)
//! tns_hold          = min(0, worst_slack_hold) * ceil(0.1 * n_ff)
//! repair_buffers    = floor(20 * max(0, -worst_slack_setup)) + floor(10 * skew_setup)
//! static_power      = 5e-9 * (n_cells + all buffer and inverter counts)
//! total_power       = dynamic_power + static_power
//! cell_utilization  = min(100, 100 * (n_cells + clock_buffers + clock_inverters)
//!                               * CELL_AREA_UM2 / die_area)
//! ```

use crate::activity::ActivityMap;
use crate::coarsen::ClusteredGraph;
use crate::gap::QorRecord;
use crate::graph::RawGraph;
use crate::knobs::CtsKnobs;
use crate::netlist::PlacedNetlist;
use crate::rng::SplitMix64;
use crate::synth::CELL_AREA_UM2;

/// Setup skew of a design whose flip-flops all coincide, in ns.
pub const SKEW_FLOOR: f64 = 0.005;

/// Design statistics the surrogate consumes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignStats {
    pub n_ff: usize,
    pub n_cells: usize,
    pub dispersion: f64,
    pub span: f64,
    pub toggles: u64,
    pub raw_wirelength: f64,
    pub macros: usize,
    pub die_area: f64,
}

impl DesignStats {
    pub fn measure(n: &PlacedNetlist, a: &ActivityMap, raw: &RawGraph, clustered: &ClusteredGraph) -> Self {
        let ffs: alloc::vec::Vec<(f64, f64)> =
            n.cells().iter().filter(|c| c.kind.is_ff()).map(|c| (c.x, c.y)).collect();
        let k = ffs.len() as f64;
        let (sx, sy) = ffs.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.0, sy + p.1));
        let (cx, cy) = (sx / k, sy / k);
        let msd = ffs.iter().map(|p| (p.0 - cx) * (p.0 - cx) + (p.1 - cy) * (p.1 - cy)).sum::<f64>() / k;
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &ffs {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let diag = libm::hypot(n.die_width(), n.die_height());
        Self {
            n_ff: ffs.len(),
            n_cells: n.cells().len(),
            dispersion: libm::sqrt(msd),
            span: (x1 - x0) + (y1 - y0),
            toggles: n.cells().iter().map(|c| a.toggles_or_zero(&c.id)).fold(0u64, u64::saturating_add),
            raw_wirelength: raw.total_edge_weight() * diag,
            macros: clustered.nodes.len(),
            die_area: n.die_width() * n.die_height(),
        }
    }
}

pub fn surrogate_qor(
    n: &PlacedNetlist,
    a: &ActivityMap,
    raw: &RawGraph,
    clustered: &ClusteredGraph,
    k: &CtsKnobs,
    seed: u64,
) -> QorRecord {
    surrogate_from_stats(&DesignStats::measure(n, a, raw, clustered), k, seed)
}

pub fn surrogate_from_stats(s: &DesignStats, k: &CtsKnobs, seed: u64) -> QorRecord {
    let j = 0.95 + 0.1 * SplitMix64::new(seed).next_f64();
    let cs = k.cluster_size as f64;
    let n_ff = s.n_ff as f64;

    let skew_setup = SKEW_FLOOR + 0.01 * s.dispersion * libm::sqrt(k.sink_max_dia as f64 / 35.0) / libm::sqrt(cs) * j;
    let skew_hold = 0.8 * skew_setup;

    let clock_buffers = s.n_ff.div_ceil(k.cluster_size as usize) as u64 + libm::floor(s.span / k.buffer_distance as f64) as u64;
    let clock_inverters = clock_buffers / 2;

    let clock_wl = 0.5 * s.dispersion * n_ff;
    let wirelength = s.raw_wirelength + clock_wl + s.n_cells as f64;
    let routing_buffers = libm::floor(wirelength / (50.0 * k.max_wire_length as f64)) as u64;

    let dynamic_power = 2e-9 * s.toggles as f64 * j
        + 5e-7 * (n_ff + (clock_buffers + clock_inverters) as f64)
        + 1e-9 * wirelength;

    let worst_slack_setup = 0.25 - 2.0 * skew_setup - 0.0005 * s.span * (s.macros as f64 / n_ff);
    let worst_slack_hold = 0.05 + 0.3 * skew_hold - 0.2 * skew_setup;
    let endpoints = libm::ceil(0.1 * n_ff);
    let tns_setup = worst_slack_setup.min(0.0) * endpoints;
    let tns_hold = worst_slack_hold.min(0.0) * endpoints;
    let repair_buffers =
        libm::floor(20.0 * (-worst_slack_setup).max(0.0)) as u64 + libm::floor(10.0 * skew_setup) as u64;

    let inserted = clock_buffers + clock_inverters + routing_buffers + repair_buffers;
    let static_power = 5e-9 * (s.n_cells as u64 + inserted) as f64;
    let cell_utilization =
        (100.0 * (s.n_cells as u64 + clock_buffers + clock_inverters) as f64 * CELL_AREA_UM2 / s.die_area).min(100.0);

    QorRecord {
        skew_setup,
        skew_hold,
        worst_slack_setup,
        worst_slack_hold,
        tns_setup,
        tns_hold,
        total_power: dynamic_power + static_power,
        dynamic_power,
        static_power,
        wirelength,
        cell_utilization,
        clock_buffers,
        clock_inverters,
        routing_buffers,
        repair_buffers,
    }
}
