// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test -p ctsbench --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ctsbench::activity_io::{parse_activity_csv, parse_saif, write_activity_csv, write_saif};
use ctsbench::archive::GraphArchive;
use ctsbench::bench::{BenchMode, BenchOptions};
use ctsbench::core::activity::ActivityMap;
use ctsbench::core::coarsen::{build_clustered_graph, form_atomic_clusters, CoarsenConfig};
use ctsbench::core::gap::{pareto_distance, score_group, DesignGroup, GapVector, QorRecord};
use ctsbench::core::graph::build_raw_graph;
use ctsbench::core::knobs::sample_knobs;
use ctsbench::core::netlist::PlacedNetlist;
use ctsbench::core::rng::SplitMix64;
use ctsbench::core::synth::{generate_netlist, scrambled_netlist, CorpusSpec, DesignShape};
use ctsbench::digest::tree_digest;
use ctsbench::manifest::{assemble_manifest, read_manifest};
use ctsbench::netlist_io::{parse_netlist, write_netlist};
use ctsbench::pipeline::{run_pipeline, PipelineOptions, NONDETERMINISTIC_FILES};

const CORPUS_SIZE: usize = 1000;
const MAX_CELLS: usize = 500;
const EDGE_CHECK_MAX_CELLS: usize = 200;
const PARTITION_BUDGET: Duration = Duration::from_secs(60);
const GAP_FIXTURE_TOL: f64 = 1e-9;
const ANCHOR_TOL: f64 = 1e-12;
const SCALE_GROUPS: usize = 100;
const COMPRESSION_BAND: (f64, f64) = (8.0, 16.0);
/// Mean node compression of the reference corpus at default thresholds.
const GOLDEN_COMPRESSION: f64 = 10.477605964463978;
const ROUND_TRIPS: usize = 1000;

type Check = Result<String, String>;

struct Sample {
    netlist: PlacedNetlist,
    activity: ActivityMap,
    seed: u64,
}

fn sample(i: usize) -> Sample {
    let mut rng = SplitMix64::new(0xACCE_0000 + i as u64);
    let cells = 2 + rng.below((MAX_CELLS - 1) as u64) as usize;
    let seed = rng.next_u64();
    let (netlist, activity) = if i.is_multiple_of(2) {
        let (knobs, _) = sample_knobs(&mut rng);
        let shape = DesignShape { cells, ff_fraction: rng.uniform(0.1, 0.4) };
        generate_netlist(&format!("acc{i:04}"), &knobs, shape, seed)
    } else {
        scrambled_netlist(seed, cells)
    };
    Sample { netlist, activity, seed }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn partition(corpus: &[Sample]) -> Check {
    let start = Instant::now();
    let mut macros = 0;
    for (i, s) in corpus.iter().enumerate() {
        let n = &s.netlist;
        let g = build_clustered_graph(n, &s.activity, &CoarsenConfig::with_seed(s.seed)).map_err(|e| e.to_string())?;
        let atomics = form_atomic_clusters(n, s.seed);
        let mut seen = BTreeMap::new();
        for (mi, m) in g.nodes.iter().enumerate() {
            for c in &m.members {
                ensure(seen.insert(c.as_str(), mi).is_none(), || format!("netlist {i}: {c} in two macros"))?;
            }
        }
        for (c, &mi) in &g.assignment {
            ensure(seen.get(c.as_str()) == Some(&mi), || format!("netlist {i}: assignment of {c} disagrees"))?;
        }
        ensure(seen.len() == g.assignment.len(), || format!("netlist {i}: assignment misses members"))?;
        let mut owners: BTreeMap<&str, usize> = BTreeMap::new();
        for a in &atomics.clusters {
            *owners.entry(a.owner_ff.as_str()).or_default() += 1;
        }
        for c in n.cells().iter().filter(|c| c.kind.is_ff()) {
            ensure(owners.get(c.id.as_str()) == Some(&1), || format!("netlist {i}: ff {} owns {:?} atomics", c.id, owners.get(c.id.as_str())))?;
            ensure(seen.contains_key(c.id.as_str()), || format!("netlist {i}: ff {} unassigned", c.id))?;
        }
        macros += g.nodes.len();
    }
    let took = start.elapsed();
    ensure(took < PARTITION_BUDGET, || format!("took {took:.1?}, budget {PARTITION_BUDGET:?}"))?;
    Ok(format!("{} netlists, {macros} macros, 0 violations, {took:.1?}", corpus.len()))
}

fn unit(n: &PlacedNetlist, id: &str) -> (f64, f64) {
    n.unit_position(n.cell_index(id).expect("member exists"))
}

fn mean(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let (x, y) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    (x / k, y / k)
}

fn max_sigma(points: &[(f64, f64)]) -> f64 {
    let (cx, cy) = mean(points);
    let k = points.len() as f64;
    let vx = points.iter().map(|p| (p.0 - cx).powi(2)).sum::<f64>() / k;
    let vy = points.iter().map(|p| (p.1 - cy).powi(2)).sum::<f64>() / k;
    vx.sqrt().max(vy.sqrt())
}

fn gravity(n: &PlacedNetlist, ff: &str) -> (f64, f64) {
    let mut nbrs = BTreeSet::new();
    for net in n.nets() {
        if net.driver == ff {
            nbrs.extend(net.sinks.iter().map(String::as_str));
        }
        if net.sinks.iter().any(|s| s == ff) {
            nbrs.insert(net.driver.as_str());
        }
    }
    nbrs.remove(ff);
    if nbrs.is_empty() {
        return (0.0, 0.0);
    }
    let c = mean(&nbrs.iter().map(|id| unit(n, id)).collect::<Vec<_>>());
    let f = unit(n, ff);
    (c.0 - f.0, c.1 - f.1)
}

fn cosine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (na, nb) = (a.0.hypot(a.1), b.0.hypot(b.1));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    ((a.0 * b.0 + a.1 * b.1) / (na * nb)).clamp(-1.0, 1.0)
}

fn spread_bypass(corpus: &[Sample]) -> Check {
    let mut multi = 0;
    let mut bypassed = 0;
    for (i, s) in corpus.iter().enumerate() {
        let n = &s.netlist;
        let cfg = CoarsenConfig::with_seed(s.seed);
        let g = build_clustered_graph(n, &s.activity, &cfg).map_err(|e| e.to_string())?;
        let atomics = form_atomic_clusters(n, s.seed);
        for m in &g.nodes {
            let sigmas: Vec<f64> = m
                .atomics
                .iter()
                .map(|&a| max_sigma(&atomics.clusters[a].members.iter().map(|c| unit(n, c)).collect::<Vec<_>>()))
                .collect();
            if m.atomics.len() > 1 {
                multi += 1;
                for (a, sigma) in m.atomics.iter().zip(&sigmas) {
                    ensure(*sigma <= cfg.spread_threshold + 1e-12, || {
                        format!("netlist {i}: atomic {a} with sigma {sigma} merged into a macro of {}", m.atomics.len())
                    })?;
                }
            } else if sigmas[0] > cfg.spread_threshold + 1e-12 {
                bypassed += 1;
            }
        }
    }
    ensure(bypassed > 0 && multi > 0, || format!("degenerate corpus: {bypassed} bypassed, {multi} multi-atomic"))?;
    Ok(format!("{multi} multi-atomic macros clean, {bypassed} high-spread singletons"))
}

/// Replays greedy first-fit from the netlist alone and compares the outcome.
fn merge_audit(corpus: &[Sample]) -> Check {
    let mut merges = 0;
    for (i, s) in corpus.iter().enumerate() {
        let n = &s.netlist;
        let cfg = CoarsenConfig::with_seed(s.seed);
        let g = build_clustered_graph(n, &s.activity, &cfg).map_err(|e| e.to_string())?;
        let atomics = form_atomic_clusters(n, s.seed);

        struct Open {
            atomics: Vec<usize>,
            cells: Vec<(f64, f64)>,
            control: Option<String>,
            gravity: (f64, f64),
            bypassed: bool,
        }
        let mut open: Vec<Open> = Vec::new();
        for (ai, a) in atomics.clusters.iter().enumerate() {
            let cells: Vec<(f64, f64)> = a.members.iter().map(|c| unit(n, c)).collect();
            let control = n.cell(n.cell_index(&a.owner_ff).unwrap()).control_net.clone();
            let grav = gravity(n, &a.owner_ff);
            if max_sigma(&cells) > cfg.spread_threshold {
                open.push(Open { atomics: vec![ai], cells, control, gravity: grav, bypassed: true });
                continue;
            }
            let centroid = mean(&cells);
            let hit = open.iter().position(|m| {
                let c = mean(&m.cells);
                let d = (c.0 - centroid.0).abs() + (c.1 - centroid.1).abs();
                !m.bypassed && m.control == control && d < cfg.merge_distance && cosine(grav, m.gravity) > cfg.cos_threshold
            });
            match hit {
                Some(mi) => {
                    let m = &mut open[mi];
                    let c = mean(&m.cells);
                    let d = (c.0 - centroid.0).abs() + (c.1 - centroid.1).abs();
                    let cos = cosine(grav, m.gravity);
                    ensure(d < cfg.merge_distance && cos > cfg.cos_threshold, || format!("netlist {i}: replay accepted d={d} cos={cos}"))?;
                    m.atomics.push(ai);
                    m.cells.extend(cells);
                    merges += 1;
                }
                None => open.push(Open { atomics: vec![ai], cells, control, gravity: grav, bypassed: false }),
            }
        }

        ensure(open.len() == g.nodes.len(), || format!("netlist {i}: replay has {} macros, library {}", open.len(), g.nodes.len()))?;
        for (mi, (want, have)) in open.iter().zip(&g.nodes).enumerate() {
            ensure(want.atomics == have.atomics, || format!("netlist {i}: macro {mi} atomics {:?} vs {:?}", want.atomics, have.atomics))?;
            ensure(want.bypassed == have.bypassed, || format!("netlist {i}: macro {mi} bypass flag differs"))?;
            for &a in &have.atomics {
                let owner = &atomics.clusters[a].owner_ff;
                let ctl = &n.cell(n.cell_index(owner).unwrap()).control_net;
                ensure(*ctl == have.control_net, || format!("netlist {i}: macro {mi} mixes control nets"))?;
            }
        }
    }
    ensure(merges > 0, || "no merges in corpus".into())?;
    Ok(format!("{merges} merges replayed, all with d < 0.05 and cos > 0.9"))
}

fn edges(corpus: &[Sample]) -> Check {
    let mut checked = 0;
    let mut total = 0;
    for (i, s) in corpus.iter().enumerate().filter(|(_, s)| s.netlist.cells().len() <= EDGE_CHECK_MAX_CELLS) {
        let n = &s.netlist;
        let g = build_clustered_graph(n, &s.activity, &CoarsenConfig::with_seed(s.seed)).map_err(|e| e.to_string())?;
        let owner: BTreeMap<&str, usize> =
            g.nodes.iter().enumerate().flat_map(|(mi, m)| m.members.iter().map(move |c| (c.as_str(), mi))).collect();
        let mut want = BTreeSet::new();
        for net in n.nets() {
            for sink in &net.sinks {
                if let (Some(&a), Some(&b)) = (owner.get(net.driver.as_str()), owner.get(sink.as_str())) {
                    if a != b {
                        want.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
        let have: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.src, e.dst)).collect();
        let have_set: BTreeSet<_> = have.iter().copied().collect();
        ensure(have.len() == have_set.len(), || format!("netlist {i}: duplicate edges"))?;
        ensure(have_set == want, || format!("netlist {i}: {} edges vs brute force {}", have_set.len(), want.len()))?;
        checked += 1;
        total += want.len();
    }
    ensure(checked > 100, || format!("only {checked} small netlists"))?;
    Ok(format!("{checked} netlists <= {EDGE_CHECK_MAX_CELLS} cells, {total} edges exact"))
}

fn qor(skew: f64, power: f64, wl: f64) -> QorRecord {
    QorRecord {
        skew_setup: skew,
        skew_hold: skew,
        worst_slack_setup: 0.0,
        worst_slack_hold: 0.0,
        tns_setup: 0.0,
        tns_hold: 0.0,
        total_power: power,
        dynamic_power: power,
        static_power: 0.0,
        wirelength: wl,
        cell_utilization: 50.0,
        clock_buffers: 0,
        clock_inverters: 0,
        routing_buffers: 0,
        repair_buffers: 0,
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() <= tol, || format!("{what}: {a} vs {b}"))
}

fn gap() -> Check {
    let pair = DesignGroup {
        design_name: "fixture".into(),
        runs: vec![("A".into(), qor(100.0, 2.0, 5000.0)), ("B".into(), qor(150.0, 1.0, 4000.0))],
    };
    let scored = score_group(&pair).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = scored.iter().map(|s| s.run_id.as_str()).collect();
    ensure(ids == ["B", "A"], || format!("ranking {ids:?}"))?;
    let (b, a) = (&scored[0], &scored[1]);
    for (have, want, what) in [
        (a.gap.skew, 1.0, "A skew"),
        (a.gap.power, 2.0, "A power"),
        (a.gap.wl, 1.25, "A wl"),
        (a.distance, 1.0625f64.sqrt(), "A distance"),
        (b.gap.skew, 1.5, "B skew"),
        (b.gap.power, 1.0, "B power"),
        (b.gap.wl, 1.0, "B wl"),
        (b.distance, 0.5, "B distance"),
        (pareto_distance(GapVector { skew: 2.0, power: 1.0, wl: 1.0 }), 1.0, "[2,1,1]"),
        (pareto_distance(GapVector { skew: 1.3, power: 1.4, wl: 1.0 }), 0.5, "[1.3,1.4,1]"),
    ] {
        close(have, want, GAP_FIXTURE_TOL, what)?;
    }
    close(a.distance, 1.0308, 1e-4, "A distance rounded")?;

    ensure(pareto_distance(GapVector::IDEAL) <= ANCHOR_TOL, || "D(ideal) > 0".into())?;
    let mut rng = SplitMix64::new(0xA1C0);
    for _ in 0..10_000 {
        let mut g = [1.0; 3];
        let k = rng.below(3) as usize;
        g[k] += 10f64.powf(rng.uniform(-11.0, 1.0));
        let d = pareto_distance(GapVector { skew: g[0], power: g[1], wl: g[2] });
        ensure(d > ANCHOR_TOL, || format!("D({g:?}) = {d}"))?;
    }

    for gi in 0..SCALE_GROUPS {
        let runs = 2 + rng.below(10) as usize;
        let group = DesignGroup {
            design_name: format!("g{gi}"),
            runs: (0..runs)
                .map(|r| (format!("r{r:02}"), qor(rng.uniform(0.01, 10.0), rng.uniform(1e-4, 1.0), rng.uniform(10.0, 1e5))))
                .collect(),
        };
        let k = [rng.uniform(1e-3, 1e3), rng.uniform(1e-3, 1e3), rng.uniform(1e-3, 1e3)];
        let scaled = DesignGroup {
            design_name: group.design_name.clone(),
            runs: group.runs.iter().map(|(id, q)| (id.clone(), qor(q.skew_setup * k[0], q.total_power * k[1], q.wirelength * k[2]))).collect(),
        };
        let (x, y) = (score_group(&group).map_err(|e| e.to_string())?, score_group(&scaled).map_err(|e| e.to_string())?);
        let order = |v: &[ctsbench::core::gap::ScoredRun]| v.iter().map(|s| s.run_id.clone()).collect::<Vec<_>>();
        ensure(order(&x) == order(&y), || format!("group {gi}: ranking changed under scaling"))?;
        for (p, q) in x.iter().zip(&y) {
            close(p.distance, q.distance, GAP_FIXTURE_TOL, "scaled distance")?;
        }
    }
    Ok(format!("fixtures within {GAP_FIXTURE_TOL:e}, anchor within {ANCHOR_TOL:e}, {SCALE_GROUPS} groups scale-invariant"))
}

fn reference_options() -> PipelineOptions {
    let mut opts = PipelineOptions::new(CorpusSpec::REFERENCE);
    opts.bench = BenchOptions { repetitions: 1, mode: BenchMode::Latency, ..BenchOptions::default() };
    opts
}

fn compression(root: &Path) -> Check {
    let opts = reference_options();
    let report = ctsbench::bench::run_benchmark(root, &opts.cfg, &opts.bench).map_err(|e| e.to_string())?;
    let m = report.mean_node_compression();
    ensure((COMPRESSION_BAND.0..=COMPRESSION_BAND.1).contains(&m), || format!("mean {m} outside {COMPRESSION_BAND:?}"))?;
    ensure(m == GOLDEN_COMPRESSION, || format!("mean {m} differs from golden {GOLDEN_COMPRESSION}"))?;
    Ok(format!("mean node compression {m:.4} over {} placements (golden, band {COMPRESSION_BAND:?})", report.placements.len()))
}

fn determinism(a: &Path, b: &Path) -> Check {
    let (ta, tb) = (tree_digest(a, &NONDETERMINISTIC_FILES).map_err(|e| e.to_string())?, tree_digest(b, &NONDETERMINISTIC_FILES).map_err(|e| e.to_string())?);
    for (path, sha) in &ta {
        ensure(tb.get(path) == Some(sha), || format!("{path} differs"))?;
    }
    ensure(ta.len() == tb.len(), || format!("{} vs {} files", ta.len(), tb.len()))?;
    for needed in ["manifest.csv", "bench/efficiency.csv", "design_00/p000/raw.ctsg", "design_04/p003/clustered.ctsg"] {
        ensure(ta.contains_key(needed), || format!("{needed} missing from tree"))?;
    }
    Ok(format!("{} files byte-identical across two runs", ta.len()))
}

fn random_name(rng: &mut SplitMix64) -> String {
    const POOL: &[char] = &['a', 'Z', '0', '_', '/', '\\', '(', ')', '"', ' ', '\t', '[', ']', '.', ',', 'é', '字'];
    let len = 1 + rng.below(12) as usize;
    (0..len).map(|_| POOL[rng.below(POOL.len() as u64) as usize]).collect()
}

fn round_trips() -> Check {
    let mut rng = SplitMix64::new(0x7A1B);
    for i in 0..ROUND_TRIPS {
        let s = sample(10_000 + i);
        let bytes = write_netlist(&s.netlist);
        let back = parse_netlist(&bytes).map_err(|e| format!("netlist {i}: {e}"))?;
        ensure(back == s.netlist, || format!("netlist {i} changed"))?;

        let mut a = ActivityMap::new();
        for _ in 0..rng.below(40) {
            let toggles = if rng.below(4) == 0 { rng.next_u64() } else { rng.below(100_000) };
            let name = random_name(&mut rng);
            if a.get(&name).is_none() {
                a.insert(name, toggles).map_err(|e| e.to_string())?;
            }
        }
        let saif = parse_saif(&write_saif(&a, rng.next_u64())).map_err(|e| format!("saif {i}: {e}"))?;
        ensure(saif == a, || format!("saif {i} changed"))?;
        let csv = parse_activity_csv(&write_activity_csv(&a)).map_err(|e| format!("csv {i}: {e}"))?;
        ensure(csv == a, || format!("csv {i} changed"))?;

        let cfg = CoarsenConfig::with_seed(s.seed);
        let raw = build_raw_graph(&s.netlist, &s.activity).map_err(|e| e.to_string())?;
        let clustered = build_clustered_graph(&s.netlist, &s.activity, &cfg).map_err(|e| e.to_string())?;
        for g in [GraphArchive::from_raw(&raw, s.seed, 1), GraphArchive::from_clustered(&clustered, &cfg)] {
            let bytes = g.encode();
            let back = GraphArchive::decode(&bytes).map_err(|e| format!("archive {i}: {e}"))?;
            ensure(back == g && back.encode() == bytes, || format!("archive {i} changed"))?;
        }
    }
    Ok(format!("{ROUND_TRIPS} instances each of netlist, SAIF, CSV, raw and clustered archives"))
}

fn manifest_integrity(root: &Path) -> Check {
    let rows = read_manifest(&root.join("manifest.csv")).map_err(|e| e.to_string())?;
    let n = rows.len();
    assemble_manifest(root, rows.clone()).map_err(|e| format!("clean corpus rejected: {e}"))?;

    let mut redirected = rows.clone();
    redirected[7].clustered_graph_path = "design_00/p999/clustered.ctsg".into();
    let err = assemble_manifest(root, redirected).err().ok_or("redirected path accepted")?;
    ensure(err.name() == "MissingArtifactError", || format!("redirected path gave {}", err.name()))?;

    let victim = root.join(&rows[0].raw_graph_path);
    let bytes = std::fs::read(&victim).map_err(|e| e.to_string())?;
    std::fs::write(&victim, &bytes[..bytes.len() / 2]).map_err(|e| e.to_string())?;
    let err = assemble_manifest(root, rows.clone()).err().ok_or("truncated archive accepted")?;
    std::fs::write(&victim, &bytes).map_err(|e| e.to_string())?;
    ensure(err.name() == "FormatError", || format!("truncated archive gave {}", err.name()))?;

    let mut stale = rows;
    stale[0].wirelength *= 3.0;
    let err = assemble_manifest(root, stale).err().ok_or("stale gap accepted")?;
    ensure(err.name() == "InconsistentGapError", || format!("stale gap gave {}", err.name()))?;
    Ok(format!("{n} rows audited; redirected path, truncated archive and stale gap all detected"))
}

fn run(name: &str, f: impl FnOnce() -> Check) -> bool {
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    match result {
        Ok(detail) => {
            println!("PASS {name}: {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL {name}: {detail}");
            false
        }
    }
}

fn main() -> ExitCode {
    let corpus: Vec<Sample> = (0..CORPUS_SIZE).map(sample).collect();
    let a = tempfile::tempdir().expect("tempdir");
    let b = tempfile::tempdir().expect("tempdir");
    let built = run_pipeline(a.path(), &reference_options()).and_then(|_| run_pipeline(b.path(), &reference_options()));

    let mut ok = true;
    ok &= run("partition", || partition(&corpus));
    ok &= run("spread_bypass", || spread_bypass(&corpus));
    ok &= run("merge_constraints", || merge_audit(&corpus));
    ok &= run("edge_soundness", || edges(&corpus));
    ok &= run("gap_identities", gap);
    match &built {
        Ok(_) => {
            ok &= run("compression_regime", || compression(a.path()));
            ok &= run("determinism", || determinism(a.path(), b.path()));
        }
        Err(e) => {
            for name in ["compression_regime", "determinism"] {
                println!("FAIL {name}: reference pipeline failed: {e}");
            }
            ok = false;
        }
    }
    ok &= run("round_trips", round_trips);
    match &built {
        Ok(_) => ok &= run("manifest_integrity", || manifest_integrity(a.path())),
        Err(e) => {
            println!("FAIL manifest_integrity: reference pipeline failed: {e}");
            ok = false;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
