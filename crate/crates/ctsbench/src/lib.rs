// SPDX-License-Identifier: Apache-2.0

//! IO companion to `ctsbench-core`.
//!
//! * [`netlist_io`]: the `.pnl.json` placed-netlist interchange format.
//! * [`activity_io`]: SAIF-subset and CSV toggle-count readers and writers.
//! * [`archive`]: the `.ctsg` binary graph archive.
//! * [`manifest`]: `manifest.csv` rows, gap filling and integrity audit.
//! * [`corpus`]: on-disk synthetic corpus generation.
//! * [`bench`]: efficiency measurement, reports and figures.
//! * [`pipeline`]: the end-to-end run with checksum-keyed resume.

pub mod activity_io;
pub mod archive;
pub mod bench;
pub mod corpus;
pub mod digest;
pub mod manifest;
pub mod netlist_io;
pub mod pipeline;

pub use ctsbench_core as core;

use std::path::PathBuf;

/// Any failure surfaced by the pipeline, tagged with a stable error name.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Netlist(#[from] netlist_io::NetlistParseError),
    #[error(transparent)]
    Activity(#[from] activity_io::ActivityError),
    #[error(transparent)]
    Archive(#[from] archive::FormatError),
    #[error(transparent)]
    Manifest(#[from] manifest::ManifestError),
    #[error(transparent)]
    Gap(#[from] ctsbench_core::gap::GapError),
    #[error(transparent)]
    Graph(#[from] ctsbench_core::graph::GraphError),
    #[error(transparent)]
    Config(#[from] ctsbench_core::coarsen::ConfigError),
    #[error(transparent)]
    Spec(#[from] ctsbench_core::synth::CorpusSpecError),
    #[error("{0}")]
    Usage(String),
    #[error("stage {stage}: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
    #[error("{context}: {message}")]
    Report { context: &'static str, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Stable name of the error kind, as printed by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Netlist(e) => e.name(),
            Error::Activity(e) => e.name(),
            Error::Archive(e) => e.name(),
            Error::Manifest(e) => e.name(),
            Error::Gap(ctsbench_core::gap::GapError::NonPositiveMin { .. }) => "NonPositiveMinError",
            Error::Gap(_) => "EmptyGroupError",
            Error::Graph(_) => "EmptyGraphError",
            Error::Config(_) | Error::Spec(_) => "ConfigError",
            Error::Usage(_) => "UsageError",
            Error::Stage { source, .. } => source.name(),
            Error::Report { .. } => "ReportError",
            Error::Io { .. } => "IoError",
        }
    }

    /// Usage-class errors map to exit code 2, everything else to 1.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_usage(),
            other => matches!(other, Error::Config(_) | Error::Spec(_) | Error::Usage(_)),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
