// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic placed netlists and corpus planning.
//!
//! The generator imitates the structure that matters to clock-tree analysis
//! rather than any real library:
//!
//! * Flip-flops sit in tight banks. Every bank shares one control net drawn
//!   from a small pool of reset domains (or none) and a common pull direction.
//! * Each flip-flop drives a combinational cone 1-3 levels deep. Cone cells
//!   are laid out along the bank's pull direction, one step per level, with
//!   placement noise that shrinks as target density grows.
//! * Cone leaves capture into other flip-flops of the same bank, and
//!   occasionally into a flip-flop of another bank.
//! * A few input-side logic cells feed cone gates without being reachable from
//!   any flip-flop.
//! * Toggle counts are Pareto-distributed with a share of idle cells.
//!
//! Knobs perturb the statistics: DELAY strategies deepen cones, AREA
//! strategies keep them shallow; `time_driven` tightens banks and enlarges
//! them; `routability_driven` loosens logic placement; `io_mode` adds input
//! logic. The die area is `cells * CELL_AREA_UM2 / utilization` with
//! `height = width * aspect_ratio`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::activity::ActivityMap;
use crate::knobs::{sample_cts_knobs, sample_placement_knobs, CtsKnobs, PlacementKnobs};
use crate::netlist::{CellKind, Net, PlacedCell, PlacedNetlist};
use crate::rng::{derive_seed, SplitMix64};

/// Nominal standard-cell footprint used to size the die.
pub const CELL_AREA_UM2: f64 = 10.0;

/// Distance between consecutive cone levels along the pull direction, in
/// unit-die coordinates.
const LEVEL_STEP: f64 = 0.02;
/// Base per-axis logic placement noise before density scaling.
const LOGIC_NOISE: f64 = 0.0025;
/// Share of cells with zero toggles.
const IDLE_SHARE: f64 = 0.08;
/// Pareto tail index and scale of toggle counts.
const TOGGLE_ALPHA: f64 = 1.3;
const TOGGLE_SCALE: f64 = 8.0;
const TOGGLE_CAP: f64 = 1.0e7;

const LOGIC_MASTERS: [&str; 6] = ["NAND2_X1", "NOR2_X1", "INV_X1", "AOI21_X1", "XOR2_X1", "BUF_X2"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignShape {
    pub cells: usize,
    pub ff_fraction: f64,
}

impl DesignShape {
    /// Flip-flop count: `round(cells * ff_fraction)` clamped to `1..=cells-1`.
    pub fn flip_flops(&self) -> usize {
        let want = libm::round(self.cells as f64 * self.ff_fraction) as usize;
        want.clamp(1, self.cells.saturating_sub(1).max(1))
    }
}

struct Tuning {
    max_depth: u64,
    bank_size: (u64, u64),
    bank_radius: f64,
    logic_noise: f64,
    input_share: f64,
    cross_bank_share: f64,
}

impl Tuning {
    fn from_knobs(k: &PlacementKnobs) -> Self {
        let level = k.synth_strategy.level();
        let max_depth = if k.synth_strategy.is_delay() {
            if level >= 2 { 3 } else { 2 }
        } else if level >= 1 {
            2
        } else {
            1
        };
        let (bank_size, bank_radius) = if k.time_driven { ((4, 8), 0.004) } else { ((3, 6), 0.006) };
        let mut logic_noise = LOGIC_NOISE / k.target_density;
        if k.routability_driven {
            logic_noise *= 1.25;
        }
        Self {
            max_depth,
            bank_size,
            bank_radius,
            logic_noise,
            input_share: if k.io_mode { 0.04 } else { 0.02 },
            cross_bank_share: 0.1,
        }
    }
}

/// Die width and height in microns.
pub fn die_dimensions(knobs: &PlacementKnobs, cells: usize) -> (f64, f64) {
    let area = cells as f64 * CELL_AREA_UM2 / (knobs.core_utilization / 100.0);
    let width = libm::sqrt(area / knobs.aspect_ratio);
    (width, width * knobs.aspect_ratio)
}

struct Bank {
    ffs: Vec<usize>,
}

/// Generates one placed netlist and its toggle table. `shape.cells >= 2`.
pub fn generate_netlist(
    design_name: &str,
    knobs: &PlacementKnobs,
    shape: DesignShape,
    seed: u64,
) -> (PlacedNetlist, ActivityMap) {
    assert!(shape.cells >= 2, "a synthetic design needs at least two cells");
    let mut rng = SplitMix64::new(seed);
    let tuning = Tuning::from_knobs(knobs);
    let (width, height) = die_dimensions(knobs, shape.cells);

    let n_ff = shape.flip_flops();
    let n_logic = shape.cells - n_ff;
    let n_inputs = ((n_logic as f64 * tuning.input_share) as usize).min(n_logic.saturating_sub(n_ff));
    let n_cone = n_logic - n_inputs;

    // Unit-die positions, converted to microns at the end.
    let mut pos: Vec<(f64, f64)> = Vec::with_capacity(shape.cells);
    let mut cells: Vec<PlacedCell> = Vec::with_capacity(shape.cells);
    let mut nets: Vec<Net> = Vec::new();
    let mut net_counter = 0usize;
    let mut new_net = |driver: &str, sinks: Vec<String>, nets: &mut Vec<Net>| {
        nets.push(Net { id: format!("n{net_counter:05}"), driver: driver.into(), sinks });
        net_counter += 1;
    };

    // Control-net pool: `None` plus one domain per 48 flip-flops.
    let n_domains = 1 + n_ff / 48;

    // Banks of flip-flops.
    let mut banks: Vec<Bank> = Vec::new();
    let mut ff_dir: Vec<f64> = Vec::with_capacity(n_ff);
    let mut ff_bank: Vec<usize> = Vec::with_capacity(n_ff);
    let mut next_ff = 0;
    while next_ff < n_ff {
        let size = rng.range_inclusive(tuning.bank_size.0, tuning.bank_size.1) as usize;
        let size = size.min(n_ff - next_ff);
        let center = (rng.uniform(0.06, 0.94), rng.uniform(0.06, 0.94));
        let theta = rng.uniform(0.0, core::f64::consts::TAU);
        let domain = rng.below(n_domains as u64 + 1) as usize;
        let control = (domain > 0).then(|| format!("rst_{}", domain - 1));
        let bank = banks.len();
        let mut members = Vec::with_capacity(size);
        for _ in 0..size {
            let idx = cells.len();
            let p = (
                clamp_unit(center.0 + tuning.bank_radius * rng.normal()),
                clamp_unit(center.1 + tuning.bank_radius * rng.normal()),
            );
            pos.push(p);
            cells.push(PlacedCell {
                id: format!("ff{idx:05}"),
                kind: CellKind::FlipFlop,
                x: 0.0,
                y: 0.0,
                master: if control.is_some() { "DFFR_X1".into() } else { "DFF_X1".into() },
                control_net: control.clone(),
            });
            ff_dir.push(theta + 0.1 * rng.normal());
            ff_bank.push(bank);
            members.push(idx);
        }
        banks.push(Bank { ffs: members });
        next_ff += size;
    }

    // Combinational cones.
    let base = n_cone / n_ff;
    let mut extra = n_cone % n_ff;
    let mut leaves: Vec<(usize, usize)> = Vec::new();
    let mut cone_gates: Vec<usize> = Vec::new();
    for ff in 0..n_ff {
        let mut k = base;
        if extra > 0 && (rng.chance(0.5) || n_ff - ff <= extra) {
            k += 1;
            extra -= 1;
        }
        if k == 0 {
            continue;
        }
        let (dx, dy) = (libm::cos(ff_dir[ff]), libm::sin(ff_dir[ff]));
        let mut level_of: Vec<u64> = Vec::with_capacity(k);
        let mut parent_of: Vec<Option<usize>> = Vec::with_capacity(k);
        let mut gate_ids: Vec<usize> = Vec::with_capacity(k);
        let mut deepest = 0;
        for j in 0..k {
            let level = if j == 0 { 1 } else { 1 + rng.below(tuning.max_depth.min(deepest + 1)) };
            deepest = deepest.max(level);
            let parent = if level == 1 {
                None
            } else {
                let candidates: Vec<usize> = (0..j).filter(|&i| level_of[i] == level - 1).collect();
                Some(*rng.pick(&candidates).expect("previous level is populated"))
            };
            let idx = cells.len();
            let (fx, fy) = pos[ff];
            let reach = LEVEL_STEP * level as f64;
            pos.push((
                clamp_unit(fx + dx * reach + tuning.logic_noise * rng.normal()),
                clamp_unit(fy + dy * reach + tuning.logic_noise * rng.normal()),
            ));
            cells.push(PlacedCell {
                id: format!("g{idx:05}"),
                kind: CellKind::Logic,
                x: 0.0,
                y: 0.0,
                master: (*rng.pick(&LOGIC_MASTERS).unwrap()).into(),
                control_net: None,
            });
            level_of.push(level);
            parent_of.push(parent);
            gate_ids.push(idx);
            cone_gates.push(idx);
        }

        let level1: Vec<String> = (0..k)
            .filter(|&i| level_of[i] == 1)
            .map(|i| cells[gate_ids[i]].id.clone())
            .collect();
        let ff_id = cells[ff].id.clone();
        new_net(&ff_id, level1, &mut nets);
        for i in 0..k {
            let children: Vec<String> = (0..k)
                .filter(|&c| parent_of[c] == Some(i))
                .map(|c| cells[gate_ids[c]].id.clone())
                .collect();
            if children.is_empty() {
                leaves.push((gate_ids[i], ff));
            } else {
                let id = cells[gate_ids[i]].id.clone();
                new_net(&id, children, &mut nets);
            }
        }
    }

    // Capture paths from cone leaves into other flip-flops.
    for &(leaf, owner) in &leaves {
        let bank = &banks[ff_bank[owner]];
        let target = if rng.chance(tuning.cross_bank_share) && banks.len() > 1 {
            let other = nearest_bank(&banks, &pos, ff_bank[owner]);
            rng.pick(&banks[other].ffs).copied()
        } else if rng.chance(0.6) {
            let others: Vec<usize> = bank.ffs.iter().copied().filter(|&f| f != owner).collect();
            rng.pick(&others).copied()
        } else {
            None
        };
        if let Some(t) = target {
            let leaf_id = cells[leaf].id.clone();
            new_net(&leaf_id, alloc::vec![cells[t].id.clone()], &mut nets);
        }
    }

    // Input-side logic that no flip-flop reaches.
    for _ in 0..n_inputs {
        let idx = cells.len();
        pos.push((rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)));
        cells.push(PlacedCell {
            id: format!("g{idx:05}"),
            kind: CellKind::Logic,
            x: 0.0,
            y: 0.0,
            master: "BUF_X2".into(),
            control_net: None,
        });
        let fan = 1 + rng.below(2) as usize;
        let mut sinks: Vec<String> = Vec::with_capacity(fan);
        for _ in 0..fan {
            if let Some(&g) = rng.pick(&cone_gates) {
                let id = cells[g].id.clone();
                if !sinks.contains(&id) {
                    sinks.push(id);
                }
            }
        }
        if !sinks.is_empty() {
            let id = cells[idx].id.clone();
            new_net(&id, sinks, &mut nets);
        }
    }

    for (cell, &(ux, uy)) in cells.iter_mut().zip(&pos) {
        cell.x = ux * width;
        cell.y = uy * height;
    }

    let mut activity = ActivityMap::new();
    for cell in &cells {
        activity.insert(cell.id.clone(), draw_toggles(&mut rng)).expect("cell ids are unique");
    }

    let netlist = PlacedNetlist::new(design_name, width, height, cells, nets)
        .expect("generator output satisfies netlist invariants");
    (netlist, activity)
}

/// Generates a netlist with arbitrary topology: random drivers and sinks,
/// flip-flops that may drive flip-flops, cells scattered or stacked in a few
/// hot spots, and control nets drawn from `{none, ctl_a, ctl_b}`. Useful for
/// property tests that should not lean on the structured generator. Needs
/// `cells >= 2`; cell 0 is always a flip-flop.
pub fn scrambled_netlist(seed: u64, cells: usize) -> (PlacedNetlist, ActivityMap) {
    assert!(cells >= 2, "a scrambled design needs at least two cells");
    let mut rng = SplitMix64::new(seed);
    let ff_share = rng.uniform(0.1, 0.6);
    let spots: Vec<(f64, f64)> = (0..1 + rng.below(4)).map(|_| (rng.next_f64(), rng.next_f64())).collect();
    let spot_radius = rng.uniform(0.0, 0.05);
    let mut placed = Vec::with_capacity(cells);
    for i in 0..cells {
        let is_ff = i == 0 || rng.chance(ff_share);
        let (ux, uy) = if rng.chance(0.6) {
            let c = *rng.pick(&spots).expect("at least one spot");
            (clamp_unit(c.0 + spot_radius * rng.normal()), clamp_unit(c.1 + spot_radius * rng.normal()))
        } else {
            (rng.next_f64(), rng.next_f64())
        };
        let control = if is_ff {
            [None, Some("ctl_a"), Some("ctl_b")][rng.below(3) as usize].map(String::from)
        } else {
            None
        };
        placed.push(PlacedCell {
            id: format!("c{i:04}"),
            kind: if is_ff { CellKind::FlipFlop } else { CellKind::Logic },
            x: ux * 100.0,
            y: uy * 60.0,
            master: if is_ff { "DFF_X1".into() } else { "NAND2_X1".into() },
            control_net: control,
        });
    }
    let mut nets = Vec::new();
    for _ in 0..rng.below(2 * cells as u64 + 1) {
        let driver = rng.below(cells as u64) as usize;
        let mut sinks: Vec<String> = Vec::new();
        for _ in 0..1 + rng.below(4) {
            let s = rng.below(cells as u64) as usize;
            let id = &placed[s].id;
            if s != driver && !sinks.contains(id) {
                sinks.push(id.clone());
            }
        }
        if !sinks.is_empty() {
            nets.push(Net { id: format!("n{:04}", nets.len()), driver: placed[driver].id.clone(), sinks });
        }
    }
    let mut activity = ActivityMap::new();
    for c in &placed {
        if rng.chance(0.9) {
            activity.insert(c.id.clone(), draw_toggles(&mut rng)).expect("cell ids are unique");
        }
    }
    let netlist = PlacedNetlist::new("scrambled", 100.0, 60.0, placed, nets).expect("scrambled output is valid");
    (netlist, activity)
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn draw_toggles(rng: &mut SplitMix64) -> u64 {
    if rng.chance(IDLE_SHARE) {
        return 0;
    }
    let u = 1.0 - rng.next_f64();
    let t = TOGGLE_SCALE * libm::pow(u, -1.0 / TOGGLE_ALPHA);
    t.min(TOGGLE_CAP) as u64
}

fn nearest_bank(banks: &[Bank], pos: &[(f64, f64)], from: usize) -> usize {
    let center = |b: &Bank| {
        let k = b.ffs.len() as f64;
        let (sx, sy) = b.ffs.iter().fold((0.0, 0.0), |(sx, sy), &f| (sx + pos[f].0, sy + pos[f].1));
        (sx / k, sy / k)
    };
    let c0 = center(&banks[from]);
    (0..banks.len())
        .filter(|&b| b != from)
        .min_by(|&a, &b| {
            let da = crate::graph::manhattan(c0, center(&banks[a]));
            let db = crate::graph::manhattan(c0, center(&banks[b]));
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .expect("at least two banks")
}

/// Sizes and seed of a synthetic corpus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusSpec {
    pub n_designs: usize,
    pub placements_per_design: usize,
    pub cts_per_placement: usize,
    /// Inclusive range of cells per design.
    pub cells: (usize, usize),
    /// Half-open range of flip-flop fractions per design.
    pub ff_fraction: (f64, f64),
    pub seed: u64,
}

impl CorpusSpec {
    /// The pinned corpus used for compression and determinism checks.
    pub const REFERENCE: CorpusSpec = CorpusSpec {
        n_designs: 5,
        placements_per_design: 4,
        cts_per_placement: 10,
        cells: (300, 500),
        ff_fraction: (0.15, 0.25),
        seed: 2026,
    };

    pub fn validate(&self) -> Result<(), CorpusSpecError> {
        if self.n_designs == 0 || self.placements_per_design == 0 || self.cts_per_placement == 0 {
            return Err(CorpusSpecError("design, placement and CTS counts must be at least 1"));
        }
        if self.cells.0 < 2 || self.cells.0 > self.cells.1 {
            return Err(CorpusSpecError("cell range must satisfy 2 <= min <= max"));
        }
        let (lo, hi) = self.ff_fraction;
        if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
            return Err(CorpusSpecError("flip-flop fraction range must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn placement_count(&self) -> usize {
        self.n_designs * self.placements_per_design
    }

    pub fn row_count(&self) -> usize {
        self.placement_count() * self.cts_per_placement
    }
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self::REFERENCE
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusSpecError(pub &'static str);

impl fmt::Display for CorpusSpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl core::error::Error for CorpusSpecError {}

#[derive(Clone, Debug, PartialEq)]
pub struct CtsVariantPlan {
    pub variant_id: String,
    pub knobs: CtsKnobs,
    pub qor_seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlacementPlan {
    pub design_name: String,
    pub placement_id: String,
    pub shape: DesignShape,
    pub knobs: PlacementKnobs,
    pub netlist_seed: u64,
    pub variants: Vec<CtsVariantPlan>,
}

pub fn design_name(index: usize) -> String {
    format!("design_{index:02}")
}

/// Expands a corpus spec into per-placement plans, ordered by design then
/// placement.
///
/// Every random draw comes from a stream derived from `(seed, purpose,
/// indices...)`, so a placement's plan does not depend on how many other
/// placements or variants exist.
pub fn plan_corpus(spec: &CorpusSpec) -> Vec<PlacementPlan> {
    let mut plans = Vec::with_capacity(spec.placement_count());
    for d in 0..spec.n_designs {
        let mut design_rng = SplitMix64::new(derive_seed(spec.seed, &[0, d as u64]));
        let cells = design_rng.range_inclusive(spec.cells.0 as u64, spec.cells.1 as u64) as usize;
        let ff_fraction = design_rng.uniform(spec.ff_fraction.0, spec.ff_fraction.1);
        let shape = DesignShape { cells, ff_fraction };
        for p in 0..spec.placements_per_design {
            let (d64, p64) = (d as u64, p as u64);
            let knobs = sample_placement_knobs(&mut SplitMix64::new(derive_seed(spec.seed, &[1, d64, p64])));
            let mut cts_rng = SplitMix64::new(derive_seed(spec.seed, &[2, d64, p64]));
            let variants = (0..spec.cts_per_placement)
                .map(|v| CtsVariantPlan {
                    variant_id: format!("c{v:03}"),
                    knobs: sample_cts_knobs(&mut cts_rng),
                    qor_seed: derive_seed(spec.seed, &[4, d64, p64, v as u64]),
                })
                .collect();
            plans.push(PlacementPlan {
                design_name: design_name(d),
                placement_id: format!("p{p:03}"),
                shape,
                knobs,
                netlist_seed: derive_seed(spec.seed, &[3, d64, p64]),
                variants,
            });
        }
    }
    plans
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knobs::{SynthStrategy, ASPECT_RATIOS};

    fn knobs(ar: f64) -> PlacementKnobs {
        PlacementKnobs {
            synth_strategy: SynthStrategy::Delay2,
            aspect_ratio: ar,
            io_mode: true,
            core_utilization: 55.0,
            target_density: 0.6,
            time_driven: false,
            routability_driven: true,
        }
    }

    #[test]
    fn minimal_design() {
        let (n, a) = generate_netlist("tiny", &knobs(1.0), DesignShape { cells: 2, ff_fraction: 0.5 }, 1);
        assert_eq!(n.cells().len(), 2);
        assert_eq!(n.flip_flop_count(), 1);
        assert_eq!(n.nets().len(), 1);
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn aspect_ratio_shapes_the_die() {
        for ar in ASPECT_RATIOS {
            let (n, _) = generate_netlist("ar", &knobs(ar), DesignShape { cells: 200, ff_fraction: 0.2 }, 3);
            assert!((n.die_height() / n.die_width() - ar).abs() < 1e-9);
            let area = n.die_width() * n.die_height();
            assert!((area - 200.0 * CELL_AREA_UM2 / 0.55).abs() < 1e-6);
        }
    }

    #[test]
    fn same_seed_same_design() {
        let shape = DesignShape { cells: 300, ff_fraction: 0.2 };
        let a = generate_netlist("d", &knobs(1.4), shape, 42);
        let b = generate_netlist("d", &knobs(1.4), shape, 42);
        assert_eq!(a, b);
        let c = generate_netlist("d", &knobs(1.4), shape, 43);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn all_strategies_generate_valid_designs() {
        for (i, s) in SynthStrategy::ALL.into_iter().enumerate() {
            for time_driven in [false, true] {
                let k = PlacementKnobs { synth_strategy: s, time_driven, ..knobs(0.7) };
                let (n, a) = generate_netlist("s", &k, DesignShape { cells: 150, ff_fraction: 0.2 }, i as u64);
                assert_eq!(n.cells().len(), 150);
                assert_eq!(a.len(), 150);
            }
        }
    }

    #[test]
    fn plan_counts_and_determinism() {
        let spec = CorpusSpec {
            n_designs: 2,
            placements_per_design: 3,
            cts_per_placement: 10,
            ..CorpusSpec::REFERENCE
        };
        assert!(spec.validate().is_ok());
        let plan = plan_corpus(&spec);
        assert_eq!(plan.len(), 6);
        assert_eq!(plan.iter().map(|p| p.variants.len()).sum::<usize>(), 60);
        assert_eq!(spec.row_count(), 60);
        assert_eq!(plan, plan_corpus(&spec));
        assert!(plan.iter().all(|p| p.knobs.in_range() && p.variants.iter().all(|v| v.knobs.in_range())));
        // Placements of one design share its shape.
        assert_eq!(plan[0].shape, plan[2].shape);
    }

    #[test]
    fn default_row_count() {
        let spec = CorpusSpec { n_designs: 5, placements_per_design: 97, cts_per_placement: 10, ..CorpusSpec::REFERENCE };
        assert!((4850..=4860).contains(&spec.row_count()));
    }

    #[test]
    fn spec_validation() {
        let bad = CorpusSpec { n_designs: 0, ..CorpusSpec::REFERENCE };
        assert!(bad.validate().is_err());
        let bad = CorpusSpec { ff_fraction: (0.0, 0.5), ..CorpusSpec::REFERENCE };
        assert!(bad.validate().is_err());
        let bad = CorpusSpec { cells: (1, 5), ..CorpusSpec::REFERENCE };
        assert!(bad.validate().is_err());
    }
}
