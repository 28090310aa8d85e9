// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use ctsbench::bench::{BenchMode, BenchOptions};
use ctsbench::core::synth::CorpusSpec;
use ctsbench::pipeline::PipelineOptions;

pub fn small_spec(seed: u64) -> CorpusSpec {
    CorpusSpec { n_designs: 2, placements_per_design: 2, cts_per_placement: 10, cells: (120, 200), seed, ..CorpusSpec::REFERENCE }
}

pub fn quick_options(spec: CorpusSpec) -> PipelineOptions {
    PipelineOptions {
        bench: BenchOptions { repetitions: 1, mode: BenchMode::Latency, ..BenchOptions::default() },
        ..PipelineOptions::new(spec)
    }
}

pub fn ctsbench(args: &[&str]) -> Output {
    ctsbench_in(None, args, &[])
}

pub fn ctsbench_in(dir: Option<&Path>, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ctsbench"));
    cmd.args(args).env_remove("CTSBENCH_SEED");
    if let Some(d) = dir {
        cmd.current_dir(d);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}
