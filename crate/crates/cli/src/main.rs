//! `authvar`: authorship variation analysis between publications and their
//! supplementary datasets and software.

mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use authvar_core::ExportFormat;
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{RetrofitMode, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "authvar", version, about)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Newline-delimited JSON product records.
    #[arg(long, global = true, value_name = "PATH")]
    pub products: Option<PathBuf>,
    /// Newline-delimited JSON relation records.
    #[arg(long, global = true, value_name = "PATH")]
    pub relations: Option<PathBuf>,
    /// Field mapping for the dump schema (JSON or TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub mapping: Option<PathBuf>,
    /// Generic titles, one per line.
    #[arg(long, global = true, value_name = "PATH")]
    pub blocklist: Option<PathBuf>,
    /// Pairs written by `pairs` (input to `annotate`).
    #[arg(long, global = true, value_name = "PATH")]
    pub pairs: Option<PathBuf>,
    /// Annotations written by `annotate` (input to `report`).
    #[arg(long, global = true, value_name = "PATH")]
    pub annotations: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub window_days: Option<i64>,
    #[arg(long, global = true, value_name = "N")]
    pub min_shared_authors: Option<usize>,
    #[arg(long, global = true, value_name = "X")]
    pub interval_multiplier: Option<f64>,
    #[arg(long, global = true, value_name = "X")]
    pub fuzzy_threshold: Option<f64>,
    /// Disable the fuzzy name-matching pass.
    #[arg(long, global = true)]
    pub no_fuzzy: bool,
    #[arg(long, global = true, value_name = "N")]
    pub fanin_threshold: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub min_title_length: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub retrofit: Option<RetrofitMode>,
    /// Worker threads for annotation (default: available parallelism).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Abort on the first malformed record.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Compute everything but write no files.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stream the input files and report record counts and errors.
    IngestCheck,
    /// Select publication/supplement pairs and drop merged-record noise.
    Pairs,
    /// Infer supplement relations from citations.
    Retrofit,
    /// Align bylines and flag authorship variation events per pair.
    Annotate,
    /// Aggregate annotations into summary tables.
    Report,
    /// Run every stage end to end.
    Run,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
    Both,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ExportFormat::Json,
            FormatArg::Csv => ExportFormat::Csv,
            FormatArg::Both => ExportFormat::Both,
        }
    }
}

/// A failed run and the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Input or output failure: exit 1.
    Input(anyhow::Error),
    /// Invalid configuration or missing input file: exit 2.
    Config(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Config(_) => 2,
        }
    }
}

pub trait FailureExt<T> {
    fn input(self) -> Result<T, Failure>;
    fn config(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> FailureExt<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }
}

fn run(args: Args) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(&args).config()?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .config()?;
    }
    let ctx = stages::Context::new(cfg, args.dry_run);
    match args.command {
        Command::IngestCheck => stages::ingest_check(&ctx),
        Command::Pairs => stages::pairs(&ctx),
        Command::Retrofit => stages::retrofit(&ctx),
        Command::Annotate => stages::annotate(&ctx),
        Command::Report => stages::report(&ctx),
        Command::Run => stages::run_all(&ctx),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let code = failure.exit_code();
            let (Failure::Input(err) | Failure::Config(err)) = failure;
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
