// SPDX-License-Identifier: Apache-2.0

//! End-to-end run: gen, build, gap, bench.
//!
//! After each stage the run records a key (a digest of the parameters the
//! stage depends on) and SHA-256 digests of its outputs in
//! `<out>/.ctsbench-state.json`. With `resume` set, a stage is skipped when
//! its key matches and every recorded output still has its recorded digest;
//! once one stage runs, all later ones run too.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ctsbench_core::coarsen::CoarsenConfig;
use ctsbench_core::synth::CorpusSpec;
use serde::{Deserialize, Serialize};

use crate::archive::GraphKind;
use crate::bench::{self, BenchOptions, EfficiencyReport};
use crate::corpus::{self, CorpusSummary};
use crate::digest::{bytes_sha256, file_sha256};
use crate::manifest;

pub const STATE_FILE: &str = ".ctsbench-state.json";
pub const BENCH_DIR: &str = "bench";

/// Files under the output tree whose bytes legitimately differ between two
/// runs with identical parameters.
pub const NONDETERMINISTIC_FILES: [&str; 3] = [STATE_FILE, "bench/timings.csv", "bench/timings.json"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Gen,
    Build,
    Gap,
    Bench,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Gen, Stage::Build, Stage::Gap, Stage::Bench];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Gen => "gen",
            Stage::Build => "build",
            Stage::Gap => "gap",
            Stage::Bench => "bench",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage '{s}'"))
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub spec: CorpusSpec,
    pub cfg: CoarsenConfig,
    pub hops: usize,
    pub bench: BenchOptions,
    pub resume: bool,
    pub stop_after: Option<Stage>,
}

impl PipelineOptions {
    /// Options for `spec` with the coarsening seed tied to the corpus seed.
    pub fn new(spec: CorpusSpec) -> Self {
        Self {
            spec,
            cfg: CoarsenConfig::with_seed(spec.seed),
            hops: 1,
            bench: BenchOptions::default(),
            resume: false,
            stop_after: None,
        }
    }
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub ran: Vec<Stage>,
    pub skipped: Vec<Stage>,
    pub corpus: Option<CorpusSummary>,
    pub report: Option<EfficiencyReport>,
}

#[derive(Default, Serialize, Deserialize)]
struct State {
    stages: BTreeMap<String, StageRecord>,
}

#[derive(Serialize, Deserialize)]
struct StageRecord {
    key: String,
    outputs: BTreeMap<String, String>,
}

impl State {
    fn load(path: &Path) -> State {
        std::fs::read(path).ok().and_then(|b| serde_json::from_slice(&b).ok()).unwrap_or_default()
    }

    fn save(&self, path: &Path) -> crate::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("state serializes");
        bytes.push(b'\n');
        std::fs::write(path, bytes).map_err(|e| crate::Error::io(path, e))
    }

    fn is_fresh(&self, root: &Path, stage: Stage, key: &str) -> bool {
        let Some(rec) = self.stages.get(stage.name()) else { return false };
        rec.key == key
            && !rec.outputs.is_empty()
            && rec.outputs.iter().all(|(rel, sha)| file_sha256(&root.join(rel)).is_ok_and(|s| &s == sha))
    }
}

fn stage_key(parts: &[&str]) -> String {
    bytes_sha256(parts.join("\n").as_bytes())
}

fn digests(root: &Path, rels: impl IntoIterator<Item = String>) -> crate::Result<BTreeMap<String, String>> {
    rels.into_iter().map(|rel| Ok((rel.clone(), file_sha256(&root.join(&rel))?))).collect()
}

fn placement_files(root: &Path, names: &[&str]) -> crate::Result<Vec<String>> {
    Ok(corpus::placements(root)?
        .into_iter()
        .flat_map(|(d, p)| names.iter().map(move |n| format!("{d}/{p}/{n}")).collect::<Vec<_>>())
        .collect())
}

fn in_stage<T>(stage: Stage, r: crate::Result<T>) -> crate::Result<T> {
    r.map_err(|e| crate::Error::Stage { stage: stage.name(), source: Box::new(e) })
}

/// Runs the pipeline into `out`, stopping after `opts.stop_after` if set.
pub fn run_pipeline(out: &Path, opts: &PipelineOptions) -> crate::Result<PipelineOutcome> {
    opts.spec.validate()?;
    opts.cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| crate::Error::io(out, e))?;
    let state_path = out.join(STATE_FILE);
    let mut state = if opts.resume { State::load(&state_path) } else { State::default() };

    let s = &opts.spec;
    let c = &opts.cfg;
    let gen_key = stage_key(&[
        "gen",
        &format!("{:?}", s),
        &format!("{:?}", (c.seed, c.spread_threshold.to_bits(), c.merge_distance.to_bits(), c.cos_threshold.to_bits())),
        &opts.hops.to_string(),
    ]);
    let build_key = stage_key(&["build", &gen_key]);
    let gap_key = stage_key(&["gap", &build_key]);
    let bench_key = stage_key(&["bench", &gap_key, &opts.bench.repetitions.to_string(), opts.bench.mode.as_str()]);

    let mut outcome = PipelineOutcome { ran: vec![], skipped: vec![], corpus: None, report: None };
    let mut dirty = false;
    for (stage, key) in [(Stage::Gen, &gen_key), (Stage::Build, &build_key), (Stage::Gap, &gap_key), (Stage::Bench, &bench_key)] {
        let manifest_ok = out.join(manifest::FILE_NAME).is_file();
        if opts.resume && !dirty && manifest_ok && state.is_fresh(out, stage, key) {
            log::info!("stage {stage}: up to date, skipped");
            outcome.skipped.push(stage);
        } else {
            dirty = true;
            log::info!("stage {stage}: running");
            let outputs = in_stage(stage, run_stage(stage, out, opts, &mut outcome))?;
            state.stages.insert(stage.name().into(), StageRecord { key: key.clone(), outputs });
            for later in Stage::ALL.iter().filter(|&&l| l > stage) {
                state.stages.remove(later.name());
            }
            state.save(&state_path)?;
            outcome.ran.push(stage);
        }
        if opts.stop_after == Some(stage) {
            break;
        }
    }
    Ok(outcome)
}

fn run_stage(
    stage: Stage,
    out: &Path,
    opts: &PipelineOptions,
    outcome: &mut PipelineOutcome,
) -> crate::Result<BTreeMap<String, String>> {
    match stage {
        Stage::Gen => {
            outcome.corpus = Some(corpus::generate_corpus(&opts.spec, out, &opts.cfg, opts.hops)?);
            digests(out, placement_files(out, &[corpus::NETLIST_FILE, corpus::ACTIVITY_FILE])?)
        }
        Stage::Build => {
            corpus::build_corpus_archives(out, &opts.cfg, opts.hops)?;
            let names = [GraphKind::Raw, GraphKind::Clustered].map(|k| format!("{k}.{}", crate::archive::EXTENSION));
            digests(out, placement_files(out, &[&names[0], &names[1]])?)
        }
        Stage::Gap => {
            let mut rows = manifest::read_manifest(&out.join(manifest::FILE_NAME))?;
            manifest::fill_gaps(&mut rows)?;
            manifest::assemble_manifest(out, rows)?;
            digests(out, [manifest::FILE_NAME.to_owned()])
        }
        Stage::Bench => {
            let report = bench::run_benchmark(out, &opts.cfg, &opts.bench)?;
            bench::write_report(&report, &out.join(BENCH_DIR))?;
            outcome.report = Some(report);
            let files = bench::REPORT_FILES.iter().chain(&bench::FIGURE_FILES).filter(|f| !bench::TIMING_FILES.contains(f));
            digests(out, files.map(|f| format!("{BENCH_DIR}/{f}")))
        }
    }
}
