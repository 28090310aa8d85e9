// SPDX-License-Identifier: Apache-2.0

//! Placement and CTS randomization knobs and their sampler.
//!
//! | knob               | range / set                     | draw              |
//! |--------------------|---------------------------------|-------------------|
//! | synth_strategy     | AREA0-2, DELAY0-4               | uniform over 8    |
//! | aspect_ratio       | 0.7, 1.0, 1.4, 2.0              | uniform over 4    |
//! | io_mode            | 0 (random pin), 1 (standard)    | fair coin         |
//! | core_utilization   | 40 - 70 %                       | uniform, cont.    |
//! | target_density     | util/100 + [0.0, 0.20]          | uniform offset    |
//! | time_driven        | 0 / 1                           | fair coin         |
//! | routability_driven | 0 / 1                           | fair coin         |
//! | sink_max_dia       | 35 - 70 µm                      | uniform integer   |
//! | max_wire_length    | 130 - 280 µm                    | uniform integer   |
//! | cluster_size       | 12 - 30 sinks                   | uniform integer   |
//! | buffer_distance    | 70 - 150 µm                     | uniform integer   |

use core::fmt;
use core::str::FromStr;

use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SynthStrategy {
    Area0,
    Area1,
    Area2,
    Delay0,
    Delay1,
    Delay2,
    Delay3,
    Delay4,
}

impl SynthStrategy {
    pub const ALL: [SynthStrategy; 8] = [
        SynthStrategy::Area0,
        SynthStrategy::Area1,
        SynthStrategy::Area2,
        SynthStrategy::Delay0,
        SynthStrategy::Delay1,
        SynthStrategy::Delay2,
        SynthStrategy::Delay3,
        SynthStrategy::Delay4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthStrategy::Area0 => "AREA0",
            SynthStrategy::Area1 => "AREA1",
            SynthStrategy::Area2 => "AREA2",
            SynthStrategy::Delay0 => "DELAY0",
            SynthStrategy::Delay1 => "DELAY1",
            SynthStrategy::Delay2 => "DELAY2",
            SynthStrategy::Delay3 => "DELAY3",
            SynthStrategy::Delay4 => "DELAY4",
        }
    }

    pub fn is_delay(self) -> bool {
        self >= SynthStrategy::Delay0
    }

    /// Effort level within the family: 0..=2 for AREA, 0..=4 for DELAY.
    pub fn level(self) -> u32 {
        match self {
            SynthStrategy::Area0 | SynthStrategy::Delay0 => 0,
            SynthStrategy::Area1 | SynthStrategy::Delay1 => 1,
            SynthStrategy::Area2 | SynthStrategy::Delay2 => 2,
            SynthStrategy::Delay3 => 3,
            SynthStrategy::Delay4 => 4,
        }
    }
}

impl fmt::Display for SynthStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownStrategy;

impl fmt::Display for UnknownStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown synthesis strategy")
    }
}

impl FromStr for SynthStrategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or(UnknownStrategy)
    }
}

pub const ASPECT_RATIOS: [f64; 4] = [0.7, 1.0, 1.4, 2.0];
pub const UTILIZATION_RANGE: (f64, f64) = (40.0, 70.0);
pub const DENSITY_HEADROOM: f64 = 0.20;
pub const SINK_MAX_DIA_RANGE: (u32, u32) = (35, 70);
pub const MAX_WIRE_LENGTH_RANGE: (u32, u32) = (130, 280);
pub const CLUSTER_SIZE_RANGE: (u32, u32) = (12, 30);
pub const BUFFER_DISTANCE_RANGE: (u32, u32) = (70, 150);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlacementKnobs {
    pub synth_strategy: SynthStrategy,
    /// Die height over die width.
    pub aspect_ratio: f64,
    pub io_mode: bool,
    /// Percent.
    pub core_utilization: f64,
    /// Fraction; at least `core_utilization / 100`.
    pub target_density: f64,
    pub time_driven: bool,
    pub routability_driven: bool,
}

impl PlacementKnobs {
    pub fn in_range(&self) -> bool {
        let headroom = self.target_density - self.core_utilization / 100.0;
        ASPECT_RATIOS.contains(&self.aspect_ratio)
            && (UTILIZATION_RANGE.0..=UTILIZATION_RANGE.1).contains(&self.core_utilization)
            && (-1e-12..=DENSITY_HEADROOM + 1e-12).contains(&headroom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CtsKnobs {
    /// µm
    pub sink_max_dia: u32,
    /// µm
    pub max_wire_length: u32,
    /// sinks
    pub cluster_size: u32,
    /// µm
    pub buffer_distance: u32,
}

impl CtsKnobs {
    pub fn in_range(&self) -> bool {
        let within = |v: u32, (lo, hi): (u32, u32)| (lo..=hi).contains(&v);
        within(self.sink_max_dia, SINK_MAX_DIA_RANGE)
            && within(self.max_wire_length, MAX_WIRE_LENGTH_RANGE)
            && within(self.cluster_size, CLUSTER_SIZE_RANGE)
            && within(self.buffer_distance, BUFFER_DISTANCE_RANGE)
    }
}

pub fn sample_placement_knobs(rng: &mut SplitMix64) -> PlacementKnobs {
    let synth_strategy = SynthStrategy::ALL[rng.below(8) as usize];
    let aspect_ratio = ASPECT_RATIOS[rng.below(4) as usize];
    let io_mode = rng.chance(0.5);
    let core_utilization = rng.uniform(UTILIZATION_RANGE.0, UTILIZATION_RANGE.1);
    let target_density = core_utilization / 100.0 + rng.uniform(0.0, DENSITY_HEADROOM);
    let time_driven = rng.chance(0.5);
    let routability_driven = rng.chance(0.5);
    PlacementKnobs {
        synth_strategy,
        aspect_ratio,
        io_mode,
        core_utilization,
        target_density,
        time_driven,
        routability_driven,
    }
}

pub fn sample_cts_knobs(rng: &mut SplitMix64) -> CtsKnobs {
    let mut int = |(lo, hi): (u32, u32)| rng.range_inclusive(lo as u64, hi as u64) as u32;
    CtsKnobs {
        sink_max_dia: int(SINK_MAX_DIA_RANGE),
        max_wire_length: int(MAX_WIRE_LENGTH_RANGE),
        cluster_size: int(CLUSTER_SIZE_RANGE),
        buffer_distance: int(BUFFER_DISTANCE_RANGE),
    }
}

/// One placement draw followed by one CTS draw from the same stream.
pub fn sample_knobs(rng: &mut SplitMix64) -> (PlacementKnobs, CtsKnobs) {
    let p = sample_placement_knobs(rng);
    let c = sample_cts_knobs(rng);
    (p, c)
}
