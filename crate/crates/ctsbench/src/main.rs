// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctsbench::archive::{write_archive, GraphArchive};
use ctsbench::bench::{self, BenchMode, BenchOptions};
use ctsbench::core::coarsen::{compression_ratio, CoarsenConfig};
use ctsbench::core::synth::CorpusSpec;
use ctsbench::pipeline::{self, PipelineOptions, Stage};
use ctsbench::{activity_io, corpus, manifest, Error, Result};
use serde::Deserialize;

const DEFAULT_SEED: u64 = 2026;
const SEED_ENV: &str = "CTSBENCH_SEED";

#[derive(Parser)]
#[command(name = "ctsbench", version, about = "Raw and clustered netlist graphs, gap scoring and benchmark manifests")]
struct Cli {
    /// TOML file with defaults for any flag (flags win).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true)]
    log_level: Option<String>,
    /// Worker threads for per-placement stages (default: logical CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus: netlists, activity and a skeleton manifest.
    Gen {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        coarsen: CoarsenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one raw or clustered archive from a netlist.
    Build {
        #[arg(long)]
        netlist: Option<PathBuf>,
        /// `.saif` or `.csv`; without it every cell has zero toggles.
        #[arg(long)]
        activity: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[command(flatten)]
        coarsen: CoarsenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fill the gap columns of a manifest.
    Gap {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Defaults to overwriting the input.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Measure compression, footprint and runtime over a corpus.
    Bench {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Defaults to `<corpus>/bench`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: BenchArgs,
        #[command(flatten)]
        coarsen: CoarsenArgs,
    },
    /// gen, build, gap and bench in one run.
    Pipeline {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        coarsen: CoarsenArgs,
        #[command(flatten)]
        run: BenchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip stages whose recorded outputs are still current.
        #[arg(long)]
        resume: bool,
        /// Stop after this stage: gen, build, gap or bench.
        #[arg(long)]
        stop_after: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Raw,
    Clustered,
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long)]
    designs: Option<usize>,
    #[arg(long)]
    placements: Option<usize>,
    #[arg(long)]
    cts: Option<usize>,
    #[arg(long)]
    cells_min: Option<usize>,
    #[arg(long)]
    cells_max: Option<usize>,
    #[arg(long)]
    ff_min: Option<f64>,
    #[arg(long)]
    ff_max: Option<f64>,
}

#[derive(Args)]
struct CoarsenArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    spread_threshold: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    merge_distance: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    cos_threshold: Option<f64>,
    /// Fanout levels of logic kept in raw graphs.
    #[arg(long)]
    hops: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    repetitions: Option<usize>,
    /// Measure placements concurrently (throughput mode).
    #[arg(long)]
    parallel: bool,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    designs: Option<usize>,
    placements: Option<usize>,
    cts: Option<usize>,
    cells_min: Option<usize>,
    cells_max: Option<usize>,
    ff_min: Option<f64>,
    ff_max: Option<f64>,
    seed: Option<u64>,
    spread_threshold: Option<f64>,
    merge_distance: Option<f64>,
    cos_threshold: Option<f64>,
    hops: Option<usize>,
    repetitions: Option<usize>,
    parallel: Option<bool>,
    log_level: Option<String>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {}", path.display(), e.message())))
    }
}

/// Resolves each setting from flag, then config file, then default, echoing
/// the outcome to stderr.
struct Resolver {
    file: FileConfig,
}

impl Resolver {
    fn pick<T: std::fmt::Display>(&self, name: &str, flag: Option<T>, file: Option<T>, default: T) -> T {
        let (v, source) = match (flag, file) {
            (Some(v), _) => (v, "flag"),
            (None, Some(v)) => (v, "config"),
            (None, None) => (default, "default"),
        };
        eprintln!("ctsbench: {name} = {v} ({source})");
        v
    }

    fn seed(&self, flag: Option<u64>) -> Result<u64> {
        let (seed, source) = if let Some(s) = flag {
            (s, "flag")
        } else if let Some(s) = self.file.seed {
            (s, "config")
        } else if let Ok(text) = std::env::var(SEED_ENV) {
            let s = text
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("{SEED_ENV} must be an unsigned integer, got '{text}'")))?;
            (s, SEED_ENV)
        } else {
            (DEFAULT_SEED, "default")
        };
        eprintln!("ctsbench: seed = {seed} ({source})");
        Ok(seed)
    }

    fn coarsen(&self, a: &CoarsenArgs) -> Result<(CoarsenConfig, usize)> {
        let f = &self.file;
        let cfg = CoarsenConfig {
            seed: self.seed(a.seed)?,
            spread_threshold: self.pick(
                "spread_threshold",
                a.spread_threshold,
                f.spread_threshold,
                CoarsenConfig::DEFAULT_SPREAD_THRESHOLD,
            ),
            merge_distance: self.pick(
                "merge_distance",
                a.merge_distance,
                f.merge_distance,
                CoarsenConfig::DEFAULT_MERGE_DISTANCE,
            ),
            cos_threshold: self.pick("cos_threshold", a.cos_threshold, f.cos_threshold, CoarsenConfig::DEFAULT_COS_THRESHOLD),
        };
        cfg.validate()?;
        let hops = self.pick("hops", a.hops, f.hops, 1);
        if hops == 0 {
            return Err(Error::Usage("--hops must be at least 1".into()));
        }
        Ok((cfg, hops))
    }

    fn spec(&self, a: &SpecArgs, seed: u64) -> Result<CorpusSpec> {
        let f = &self.file;
        let r = CorpusSpec::REFERENCE;
        let spec = CorpusSpec {
            n_designs: self.pick("designs", a.designs, f.designs, r.n_designs),
            placements_per_design: self.pick("placements", a.placements, f.placements, r.placements_per_design),
            cts_per_placement: self.pick("cts", a.cts, f.cts, r.cts_per_placement),
            cells: (
                self.pick("cells_min", a.cells_min, f.cells_min, r.cells.0),
                self.pick("cells_max", a.cells_max, f.cells_max, r.cells.1),
            ),
            ff_fraction: (
                self.pick("ff_min", a.ff_min, f.ff_min, r.ff_fraction.0),
                self.pick("ff_max", a.ff_max, f.ff_max, r.ff_fraction.1),
            ),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn bench(&self, a: &BenchArgs, hops: usize) -> Result<BenchOptions> {
        let repetitions = self.pick("repetitions", a.repetitions, self.file.repetitions, bench::DEFAULT_REPETITIONS);
        if repetitions == 0 {
            return Err(Error::Usage("--repetitions must be at least 1".into()));
        }
        let parallel = a.parallel || self.file.parallel.unwrap_or(false);
        let mode = if parallel { BenchMode::Throughput } else { BenchMode::Latency };
        eprintln!("ctsbench: mode = {}", mode.as_str());
        Ok(BenchOptions { repetitions, mode, hops, ..BenchOptions::default() })
    }

    fn out(&self, flag: Option<PathBuf>, what: &str) -> Result<PathBuf> {
        let out = flag
            .or_else(|| self.file.out.clone())
            .ok_or_else(|| Error::Usage(format!("{what} needs --out")))?;
        eprintln!("ctsbench: out = {}", out.display());
        Ok(out)
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Usage(format!("missing required flag --{flag}")))
}

fn setup(cli: &Cli, file: &FileConfig) -> Result<()> {
    let level = cli.log_level.clone().or_else(|| file.log_level.clone()).unwrap_or_else(|| "warn".into());
    let filter = log::LevelFilter::from_str(&level).map_err(|_| Error::Usage(format!("unknown log level '{level}'")))?;
    env_logger::Builder::new().filter_level(filter).format_timestamp(None).init();
    if let Some(jobs) = cli.jobs.or(file.jobs) {
        if jobs == 0 {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Usage(e.to_string()))?;
        eprintln!("ctsbench: jobs = {jobs}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    setup(&cli, &file)?;
    let r = Resolver { file };

    match cli.command {
        Command::Gen { spec, coarsen, out } => {
            let out = r.out(out, "gen")?;
            let (cfg, hops) = r.coarsen(&coarsen)?;
            let spec = r.spec(&spec, cfg.seed)?;
            let s = corpus::generate_corpus(&spec, &out, &cfg, hops)?;
            println!("{} manifest rows ({} designs, {} placements)", s.rows, s.designs, s.placements);
        }
        Command::Build { netlist, activity, kind, coarsen, out } => {
            let netlist = required(netlist, "netlist")?;
            let kind = required(kind, "kind")?;
            let out = r.out(out, "build")?;
            let (cfg, hops) = r.coarsen(&coarsen)?;
            let n = corpus::load_netlist(&netlist)?;
            let a = match activity {
                Some(p) => activity_io::read_activity(&p)?,
                None => Default::default(),
            };
            let (raw, clustered) = corpus::build_graphs(&n, &a, &cfg, hops)?;
            match kind {
                KindArg::Raw => {
                    write_archive(&GraphArchive::from_raw(&raw, cfg.seed, hops as u32), &out)?;
                    println!("raw: {} nodes, {} edges", raw.nodes.len(), raw.edges.len());
                }
                KindArg::Clustered => {
                    write_archive(&GraphArchive::from_clustered(&clustered, &cfg), &out)?;
                    println!(
                        "clustered: {} nodes, {} edges, compression {:.4}",
                        clustered.nodes.len(),
                        clustered.edges.len(),
                        compression_ratio(&raw, &clustered)
                    );
                }
            }
        }
        Command::Gap { input, output } => {
            let input = required(input, "input")?;
            let output = output.unwrap_or_else(|| input.clone());
            let mut rows = manifest::read_manifest(&input)?;
            manifest::fill_gaps(&mut rows)?;
            manifest::write_manifest(&output, &mut rows)?;
            let designs: std::collections::BTreeSet<_> = rows.iter().map(|r| &r.design_name).collect();
            println!("{} rows scored across {} designs", rows.len(), designs.len());
        }
        Command::Bench { corpus: dir, out, run, coarsen } => {
            let dir = required(dir, "corpus")?;
            let out = out.unwrap_or_else(|| dir.join(pipeline::BENCH_DIR));
            let (cfg, hops) = r.coarsen(&coarsen)?;
            let opts = r.bench(&run, hops)?;
            let report = bench::run_benchmark(&dir, &cfg, &opts)?;
            bench::write_report(&report, &out)?;
            print!("{}", report.render_table());
        }
        Command::Pipeline { spec, coarsen, run, out, resume, stop_after } => {
            let out = r.out(out, "pipeline")?;
            let (cfg, hops) = r.coarsen(&coarsen)?;
            let spec = r.spec(&spec, cfg.seed)?;
            let stop_after = stop_after.map(|s| s.parse::<Stage>()).transpose().map_err(Error::Usage)?;
            let opts = PipelineOptions { spec, cfg, hops, bench: r.bench(&run, hops)?, resume, stop_after };
            let outcome = pipeline::run_pipeline(&out, &opts)?;
            let names = |v: &[Stage]| v.iter().map(|s| s.name()).collect::<Vec<_>>().join(",");
            println!("stages run: [{}], skipped: [{}]", names(&outcome.ran), names(&outcome.skipped));
            if let Some(report) = outcome.report {
                print!("{}", report.render_table());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
