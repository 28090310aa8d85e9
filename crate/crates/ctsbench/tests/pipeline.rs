// SPDX-License-Identifier: Apache-2.0

mod common;

use std::time::Duration;

use common::{quick_options, small_spec};
use ctsbench::archive::{decode_header, GraphKind};
use ctsbench::bench::{self, BenchMode, BenchOptions};
use ctsbench::core::coarsen::CoarsenConfig;
use ctsbench::core::synth::CorpusSpec;
use ctsbench::corpus;
use ctsbench::digest::{combined_digest, tree_digest};
use ctsbench::manifest::{self, assemble_manifest, audit_artifacts, audit_gaps, read_manifest};
use ctsbench::pipeline::{run_pipeline, Stage, NONDETERMINISTIC_FILES};

#[test]
fn gen_writes_layout_and_skeleton() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CorpusSpec { n_designs: 2, placements_per_design: 3, cts_per_placement: 10, cells: (60, 90), ..CorpusSpec::REFERENCE };
    let s = corpus::generate_corpus(&spec, dir.path(), &CoarsenConfig::with_seed(spec.seed), 1).unwrap();
    assert_eq!((s.designs, s.placements, s.rows), (2, 6, 60));
    let rows = read_manifest(&dir.path().join("manifest.csv")).unwrap();
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| r.pareto_distance.is_none()));
    for (d, p) in corpus::placements(dir.path()).unwrap() {
        let (n, a) = corpus::load_placement(dir.path(), &d, &p).unwrap();
        assert_eq!(a.count_missing(n.cells().iter().map(|c| c.id.as_str())), 0);
    }
    let mut sorted = rows.clone();
    manifest::sort_rows(&mut sorted);
    assert_eq!(sorted, rows);
}

#[test]
fn assembled_manifest_passes_audit_and_detects_damage() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let spec = CorpusSpec { n_designs: 1, placements_per_design: 2, cts_per_placement: 10, cells: (80, 120), ..CorpusSpec::REFERENCE };
    let mut opts = quick_options(spec);
    opts.stop_after = Some(Stage::Gap);
    run_pipeline(root, &opts).unwrap();

    let text = std::fs::read_to_string(root.join("manifest.csv")).unwrap();
    assert_eq!(text.lines().count(), 21);
    let rows = read_manifest(&root.join("manifest.csv")).unwrap();
    audit_artifacts(root, &rows).unwrap();
    audit_gaps(&rows).unwrap();

    let mut stale = rows.clone();
    stale[3].total_power *= 0.5;
    assert_eq!(audit_gaps(&stale).unwrap_err().name(), "InconsistentGapError");

    let victim = root.join(&rows[0].clustered_graph_path);
    let bytes = std::fs::read(&victim).unwrap();
    std::fs::write(&victim, &bytes[..bytes.len() - 5]).unwrap();
    assert_eq!(assemble_manifest(root, rows.clone()).unwrap_err().name(), "FormatError");

    std::fs::remove_file(&victim).unwrap();
    let err = assemble_manifest(root, rows.clone()).unwrap_err();
    assert_eq!(err.name(), "MissingArtifactError");
    assert!(err.to_string().contains("clustered.ctsg"), "{err}");

    let mut redirected = rows;
    redirected[0].raw_graph_path = redirected[0].raw_graph_path.replace("p000", "p999");
    assert_eq!(audit_artifacts(root, &redirected).unwrap_err().name(), "MissingArtifactError");
}

#[test]
fn pipeline_twice_gives_identical_trees() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let opts = quick_options(small_spec(31));
    run_pipeline(a.path(), &opts).unwrap();
    run_pipeline(b.path(), &opts).unwrap();
    let ta = tree_digest(a.path(), &NONDETERMINISTIC_FILES).unwrap();
    let tb = tree_digest(b.path(), &NONDETERMINISTIC_FILES).unwrap();
    assert_eq!(ta, tb);
    assert!(ta.contains_key("bench/efficiency.json") && ta.contains_key("design_01/p001/raw.ctsg"));

    let c = tempfile::tempdir().unwrap();
    run_pipeline(c.path(), &quick_options(small_spec(32))).unwrap();
    assert_ne!(combined_digest(&ta), combined_digest(&tree_digest(c.path(), &NONDETERMINISTIC_FILES).unwrap()));
}

#[test]
fn resume_skips_finished_stages() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mut opts = quick_options(small_spec(5));
    opts.stop_after = Some(Stage::Build);
    let first = run_pipeline(root, &opts).unwrap();
    assert_eq!(first.ran, [Stage::Gen, Stage::Build]);

    let netlist = root.join("design_00/p000/netlist.pnl.json");
    let stamp = std::fs::metadata(&netlist).unwrap().modified().unwrap();
    std::thread::sleep(Duration::from_millis(20));

    opts.stop_after = None;
    opts.resume = true;
    let second = run_pipeline(root, &opts).unwrap();
    assert_eq!(second.skipped, [Stage::Gen, Stage::Build]);
    assert_eq!(second.ran, [Stage::Gap, Stage::Bench]);
    assert_eq!(std::fs::metadata(&netlist).unwrap().modified().unwrap(), stamp);

    let third = run_pipeline(root, &opts).unwrap();
    assert_eq!(third.skipped, Stage::ALL);

    // A damaged archive forces the build stage and everything after it.
    std::fs::write(root.join("design_01/p000/raw.ctsg"), b"junk").unwrap();
    let fourth = run_pipeline(root, &opts).unwrap();
    assert_eq!(fourth.skipped, [Stage::Gen]);
    assert_eq!(fourth.ran, [Stage::Build, Stage::Gap, Stage::Bench]);

    let fresh = tempfile::tempdir().unwrap();
    run_pipeline(fresh.path(), &quick_options(small_spec(5))).unwrap();
    assert_eq!(
        tree_digest(root, &NONDETERMINISTIC_FILES).unwrap(),
        tree_digest(fresh.path(), &NONDETERMINISTIC_FILES).unwrap()
    );
}

#[test]
fn failing_stage_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut opts = quick_options(small_spec(6));
    opts.stop_after = Some(Stage::Gap);
    run_pipeline(dir.path(), &opts).unwrap();
    // A plain file where the bench directory belongs.
    std::fs::write(dir.path().join("bench"), b"").unwrap();
    opts.stop_after = None;
    opts.resume = true;
    let err = run_pipeline(dir.path(), &opts).unwrap_err();
    assert!(err.to_string().contains("bench"), "{err}");
    assert!(matches!(err, ctsbench::Error::Stage { stage: "bench", .. }), "{err:?}");
}

#[test]
fn bench_ratios_agree_with_archive_headers() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let outcome = run_pipeline(root, &quick_options(small_spec(8))).unwrap();
    let report = outcome.report.unwrap();
    assert_eq!(report.placements.len(), 4);
    for p in &report.placements {
        let header = |k| {
            let bytes = std::fs::read(corpus::archive_path(root, &p.design_name, &p.placement_id, k)).unwrap();
            (decode_header(&bytes).unwrap(), bytes.len())
        };
        let (raw, raw_len) = header(GraphKind::Raw);
        let (clu, clu_len) = header(GraphKind::Clustered);
        assert_eq!(p.node_compression, raw.node_count as f64 / clu.node_count as f64);
        assert_eq!((p.raw_bytes, p.clustered_bytes), (raw_len, clu_len));
        assert_eq!(p.raw_edges as u64, raw.edge_count);
    }
}

#[test]
fn repetitions_change_times_not_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut opts = quick_options(small_spec(9));
    opts.stop_after = Some(Stage::Gen);
    run_pipeline(dir.path(), &opts).unwrap();
    let cfg = opts.cfg;
    let one = bench::run_benchmark(dir.path(), &cfg, &BenchOptions { repetitions: 1, ..Default::default() }).unwrap();
    let five = bench::run_benchmark(dir.path(), &cfg, &BenchOptions { repetitions: 5, ..Default::default() }).unwrap();
    let strip = |r: &bench::EfficiencyReport| {
        r.placements.iter().map(|p| bench::PlacementEfficiency { timings: Default::default(), ..p.clone() }).collect::<Vec<_>>()
    };
    assert_eq!(strip(&one), strip(&five));
    let par = bench::run_benchmark(dir.path(), &cfg, &BenchOptions { repetitions: 1, mode: BenchMode::Throughput, ..Default::default() }).unwrap();
    assert_eq!(strip(&par), strip(&one));
    assert_eq!(par.mode.as_str(), "throughput");
}

#[test]
fn injected_delay_raises_medians() {
    let dir = tempfile::tempdir().unwrap();
    let mut opts = quick_options(CorpusSpec { n_designs: 1, placements_per_design: 1, cts_per_placement: 1, cells: (60, 60), ..CorpusSpec::REFERENCE });
    opts.stop_after = Some(Stage::Gen);
    run_pipeline(dir.path(), &opts).unwrap();
    let run = |ms| {
        let o = BenchOptions { repetitions: 3, injected_delay: Duration::from_millis(ms), ..Default::default() };
        bench::run_benchmark(dir.path(), &opts.cfg, &o).unwrap().placements[0].timings
    };
    let (base, slow) = (run(0), run(15));
    assert!(slow.build_time_raw >= base.build_time_raw.max(0.015));
    assert!(slow.coarsen_time >= 0.015 && slow.build_time_clustered >= 0.015);
    assert!(base.build_time_raw >= 0.0);
}

#[test]
fn no_merge_compression_is_raw_over_flip_flops() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CorpusSpec { n_designs: 1, placements_per_design: 2, cts_per_placement: 1, cells: (100, 150), ..CorpusSpec::REFERENCE };
    let cfg = CoarsenConfig { merge_distance: 1e-300, ..CoarsenConfig::with_seed(spec.seed) };
    corpus::generate_corpus(&spec, dir.path(), &cfg, 1).unwrap();
    let report = bench::run_benchmark(dir.path(), &cfg, &BenchOptions { repetitions: 1, ..Default::default() }).unwrap();
    for p in &report.placements {
        let (n, _) = corpus::load_placement(dir.path(), &p.design_name, &p.placement_id).unwrap();
        assert_eq!(p.clustered_nodes, n.flip_flop_count());
        assert_eq!(p.node_compression, p.raw_nodes as f64 / n.flip_flop_count() as f64);
    }
}

#[test]
fn figures_count_and_regeneration() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CorpusSpec { n_designs: 5, placements_per_design: 1, cts_per_placement: 1, cells: (60, 80), ..CorpusSpec::REFERENCE };
    let outcome = run_pipeline(dir.path(), &quick_options(spec)).unwrap();
    let report = outcome.report.unwrap();
    let bars = std::fs::read_to_string(dir.path().join("bench/efficiency_bars.csv")).unwrap();
    assert_eq!(bars.lines().count(), 6);
    let svgs: Vec<_> = std::fs::read_dir(dir.path().join("bench"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "svg"))
        .collect();
    assert_eq!(svgs.len(), 2);

    let again = tempfile::tempdir().unwrap();
    bench::plot_report(&report, again.path()).unwrap();
    for f in bench::FIGURE_FILES {
        assert_eq!(
            std::fs::read(again.path().join(f)).unwrap(),
            std::fs::read(dir.path().join("bench").join(f)).unwrap(),
            "{f}"
        );
    }
}
