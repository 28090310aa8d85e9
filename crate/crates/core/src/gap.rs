// SPDX-License-Identifier: Apache-2.0

//! QoR labels and Pareto-gap scoring.
//!
//! Each run of a design is normalized against the best value observed for that
//! design on three axes (clock skew, total power, wirelength):
//!
//! ```text
//! G_i = [ skew_i / min(skew), power_i / min(power), wl_i / min(wl) ]
//! D_i = sqrt((G_skew - 1)^2 + (G_power - 1)^2 + (G_wl - 1)^2)
//! ```
//!
//! `D = 0` marks a run that attains all three minima at once.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// The 15 post-CTS labels of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct QorRecord {
    /// ns
    pub skew_setup: f64,
    /// ns
    pub skew_hold: f64,
    /// ns
    pub worst_slack_setup: f64,
    /// ns
    pub worst_slack_hold: f64,
    /// ns
    pub tns_setup: f64,
    /// ns
    pub tns_hold: f64,
    /// W
    pub total_power: f64,
    /// W
    pub dynamic_power: f64,
    /// W
    pub static_power: f64,
    /// µm
    pub wirelength: f64,
    /// percent
    pub cell_utilization: f64,
    pub clock_buffers: u64,
    pub clock_inverters: u64,
    pub routing_buffers: u64,
    pub repair_buffers: u64,
}

impl QorRecord {
    /// Column names in their canonical order.
    pub const METRIC_NAMES: [&'static str; 15] = [
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
    ];

    /// Checks finiteness and sign/range constraints. Returns the first
    /// offending metric name.
    pub fn validate(&self) -> Result<(), &'static str> {
        let reals = [
            ("skew_setup", self.skew_setup),
            ("skew_hold", self.skew_hold),
            ("worst_slack_setup", self.worst_slack_setup),
            ("worst_slack_hold", self.worst_slack_hold),
            ("tns_setup", self.tns_setup),
            ("tns_hold", self.tns_hold),
            ("total_power", self.total_power),
            ("dynamic_power", self.dynamic_power),
            ("static_power", self.static_power),
            ("wirelength", self.wirelength),
            ("cell_utilization", self.cell_utilization),
        ];
        if let Some((name, _)) = reals.iter().find(|(_, v)| !v.is_finite()) {
            return Err(name);
        }
        for (name, v) in [
            ("total_power", self.total_power),
            ("dynamic_power", self.dynamic_power),
            ("static_power", self.static_power),
            ("wirelength", self.wirelength),
        ] {
            if v < 0.0 {
                return Err(name);
            }
        }
        if !(0.0..=100.0).contains(&self.cell_utilization) {
            return Err("cell_utilization");
        }
        Ok(())
    }

    pub fn skew(&self, metric: SkewMetric) -> f64 {
        match metric {
            SkewMetric::Setup => self.skew_setup,
            SkewMetric::Hold => self.skew_hold,
        }
    }
}

/// Which skew label feeds the skew axis of the gap vector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SkewMetric {
    #[default]
    Setup,
    Hold,
}

impl SkewMetric {
    fn name(self) -> &'static str {
        match self {
            SkewMetric::Setup => "skew_setup",
            SkewMetric::Hold => "skew_hold",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapVector {
    pub skew: f64,
    pub power: f64,
    pub wl: f64,
}

impl GapVector {
    pub const IDEAL: GapVector = GapVector { skew: 1.0, power: 1.0, wl: 1.0 };
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignGroup {
    pub design_name: String,
    pub runs: Vec<(String, QorRecord)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GapError {
    EmptyGroup { design: String },
    NonPositiveMin { design: String, metric: &'static str, value: f64 },
}

impl fmt::Display for GapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapError::EmptyGroup { design } => write!(f, "design '{design}' has no runs"),
            GapError::NonPositiveMin { design, metric, value } => write!(
                f,
                "design '{design}': minimum {metric} is {value}, gap ratios need a positive minimum"
            ),
        }
    }
}

impl core::error::Error for GapError {}

/// Per-design minima of the three gap axes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupMinima {
    pub skew: f64,
    pub power: f64,
    pub wl: f64,
}

impl GroupMinima {
    pub fn of(group: &DesignGroup, metric: SkewMetric) -> Result<Self, GapError> {
        if group.runs.is_empty() {
            return Err(GapError::EmptyGroup { design: group.design_name.clone() });
        }
        let min_of = |f: &dyn Fn(&QorRecord) -> f64| {
            group.runs.iter().map(|(_, q)| f(q)).fold(f64::INFINITY, f64::min)
        };
        let minima = Self {
            skew: min_of(&|q| q.skew(metric)),
            power: min_of(&|q| q.total_power),
            wl: min_of(&|q| q.wirelength),
        };
        for (name, v) in [(metric.name(), minima.skew), ("total_power", minima.power), ("wirelength", minima.wl)] {
            if v.is_nan() || v <= 0.0 {
                return Err(GapError::NonPositiveMin {
                    design: group.design_name.clone(),
                    metric: name,
                    value: v,
                });
            }
        }
        Ok(minima)
    }

    pub fn gap(&self, run: &QorRecord, metric: SkewMetric) -> GapVector {
        GapVector {
            skew: run.skew(metric) / self.skew,
            power: run.total_power / self.power,
            wl: run.wirelength / self.wl,
        }
    }
}

/// Gap vector of `run` against the minima of `group`, with skew bound to
/// `skew_setup`.
pub fn gap_vector(run: &QorRecord, group: &DesignGroup) -> Result<GapVector, GapError> {
    gap_vector_with(run, group, SkewMetric::Setup)
}

pub fn gap_vector_with(
    run: &QorRecord,
    group: &DesignGroup,
    metric: SkewMetric,
) -> Result<GapVector, GapError> {
    Ok(GroupMinima::of(group, metric)?.gap(run, metric))
}

/// Euclidean distance from the ideal anchor `[1, 1, 1]`.
pub fn pareto_distance(g: GapVector) -> f64 {
    let (a, b, c) = (g.skew - 1.0, g.power - 1.0, g.wl - 1.0);
    libm::sqrt(a * a + b * b + c * c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredRun {
    pub run_id: String,
    pub gap: GapVector,
    pub distance: f64,
}

/// Scores every run of `group` and ranks them by ascending distance, ties
/// broken by run id.
pub fn score_group(group: &DesignGroup) -> Result<Vec<ScoredRun>, GapError> {
    score_group_with(group, SkewMetric::Setup)
}

pub fn score_group_with(group: &DesignGroup, metric: SkewMetric) -> Result<Vec<ScoredRun>, GapError> {
    let minima = GroupMinima::of(group, metric)?;
    let mut scored: Vec<ScoredRun> = group
        .runs
        .iter()
        .map(|(id, q)| {
            let gap = minima.gap(q, metric);
            ScoredRun { run_id: id.clone(), gap, distance: pareto_distance(gap) }
        })
        .collect();
    scored.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.run_id.cmp(&b.run_id)));
    Ok(scored)
}
