//! Command-line front end: config loading, the `rcs`, `shadowmap`, `sweep`,
//! `image`, `dataset` and `validate` commands, and exit-code mapping.

pub mod commands;
pub mod config;
pub mod dataset;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{load_config, parse_config, ConfigError, LoadedConfig, ProjectConfig, PROJECT_SCHEMA};
pub use dataset::{dataset, read_manifest, tree_digest, DatasetOptions, DatasetReport, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0:#}")]
    Runtime(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sarforge", version, about = "Bistatic SAR clip simulation for faceted PEC targets")]
pub struct Cli {
    /// Project config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output root; overrides the config's output.dir.
    #[arg(long, global = true, env = "SARFORGE_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bistatic RCS against receiver azimuth, with peak summary.
    Rcs,
    /// Per-facet surface currents and shadowing.
    Shadowmap,
    /// One run of swept scattered-field data.
    Sweep,
    /// Image clips from a run (swept first unless --run is given).
    Image {
        #[arg(long)]
        run: Option<PathBuf>,
        /// Form a single clip at this azimuth index.
        #[arg(long)]
        start: Option<usize>,
    },
    /// Batch runs and clips for every planned transmitter position.
    Dataset {
        /// Write the planned manifest without running anything.
        #[arg(long)]
        dry_run: bool,
    },
    /// Acceptance checks with measured against expected values.
    Validate {
        /// Relative cross-range scale error injected into resampling.
        #[arg(long, default_value_t = 0.0)]
        perturbation: f64,
        /// Skip the dataset determinism check.
        #[arg(long)]
        quick: bool,
    },
    /// Print the project config JSON schema.
    Schema,
}

fn need_config(cli: &Cli) -> Result<LoadedConfig, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| ConfigError::new("--config", "this command needs --config PATH"))?;
    Ok(load_config(path)?)
}

fn out_dir(cli: &Cli, cfg: &LoadedConfig) -> PathBuf {
    match &cli.out {
        Some(p) => p.clone(),
        None if cfg.config.output.dir.is_absolute() => cfg.config.output.dir.clone(),
        None => cfg.base_dir.join(&cfg.config.output.dir),
    }
}

/// Runs a parsed command, writing its report to stdout.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Schema => {
            print!("{PROJECT_SCHEMA}");
            Ok(())
        }
        Command::Validate { perturbation, quick } => {
            let report = crate::validate::run_all(&crate::validate::ValidateOptions {
                perturbation: *perturbation,
                skip_dataset: *quick,
            });
            print!("{}", report.table());
            if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::Runtime(anyhow::anyhow!("{} check(s) failed", report.failures())))
            }
        }
        cmd => {
            let cfg = need_config(cli)?;
            let out = out_dir(cli, &cfg);
            run_with_config(cmd, &cfg, &out, cli.jobs)
        }
    }
}

fn run_with_config(cmd: &Command, cfg: &LoadedConfig, out: &Path, jobs: usize) -> Result<(), CliError> {
    match cmd {
        Command::Rcs => print!("{}", commands::rcs(cfg, out)?.summary),
        Command::Shadowmap => print!("{}", commands::shadowmap(cfg, out)?.summary),
        Command::Sweep => print!("{}", commands::sweep(cfg, out, jobs)?.1),
        Command::Image { run, start } => print!("{}", commands::image(cfg, out, run.as_deref(), *start, jobs)?),
        Command::Dataset { dry_run } => {
            let r = dataset(cfg, out, DatasetOptions { jobs, dry_run: *dry_run })?;
            if r.dry_run {
                println!("planned {} runs; manifest at {}", r.planned, r.root.join(dataset::MANIFEST_FILE).display());
            } else {
                println!(
                    "{} runs planned, {} executed, {} reused, {} clips ({} skipped); manifest at {}",
                    r.planned,
                    r.executed,
                    r.reused,
                    r.clips,
                    r.skipped_clips,
                    r.root.join(dataset::MANIFEST_FILE).display()
                );
            }
        }
        Command::Schema | Command::Validate { .. } => unreachable!("handled without a config"),
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
