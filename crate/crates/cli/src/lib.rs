#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Command-line front end: figure pipelines, validation suites, coupling
//! tables and single-configuration runs.

pub mod error;
pub mod figures;
pub mod output;
pub mod presets;
pub mod svg;
pub mod validate;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use antibunch::couplings::{mirror_sweep, write_coupling_csv};
use antibunch::map::Payload;
use antibunch::model::{parse_config, parse_entries};

pub use error::CliError;
use figures::{Figure, Panel, Request, State};
use output::{Format, Kind, Output};
use presets::Settings;
use validate::Suite;

pub const THREADS_ENV: &str = "ANTIBUNCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "antibunch", version, about = "Directional photon correlations of emitter dimers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Configuration document; for `figure` its entries override the built-in preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Grid points per angular axis.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// |Ψ|² threshold for minima masks.
    #[arg(long, global = true, default_value_t = 1e-2)]
    pub threshold: f64,
    /// Interpret the threshold relative to the map maximum.
    #[arg(long, global = true)]
    pub relative: bool,
    /// Highest multipole order for sphere geometries.
    #[arg(long, global = true, default_value_t = antibunch::greens::DEFAULT_L_MAX)]
    pub lmax: usize,
    /// Worker threads.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::All)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce a figure panel from its built-in parameters.
    Figure {
        #[arg(value_enum)]
        name: Figure,
        /// Drive configuration for fig2 (both when omitted).
        #[arg(long, value_enum)]
        state: Option<State>,
        /// Distance panel for sm2 (all when omitted).
        #[arg(long, value_enum)]
        panel: Option<Panel>,
    },
    /// Run oracle and property checks.
    Validate {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Mirror coupling table as a function of the upper emitter height.
    Couplings {
        #[arg(long, default_value_t = 0.6)]
        z1: f64,
        #[arg(long, default_value_t = 1.0)]
        z2_min: f64,
        #[arg(long, default_value_t = 2.5)]
        z2_max: f64,
        #[arg(long, default_value_t = 151)]
        points: usize,
    },
    /// Angular map for the configuration given with --config.
    Run {
        #[arg(long, value_enum, default_value_t = PayloadArg::G2)]
        payload: PayloadArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PayloadArg {
    Psi,
    Psi2,
    G2,
    Intensity,
}

impl From<PayloadArg> for Payload {
    fn from(p: PayloadArg) -> Self {
        match p {
            PayloadArg::Psi => Payload::Psi,
            PayloadArg::Psi2 => Payload::Psi2,
            PayloadArg::G2 => Payload::G2,
            PayloadArg::Intensity => Payload::Intensity,
        }
    }
}

/// What a successful command produced.
#[derive(Debug)]
pub enum Outcome {
    Written { manifest: PathBuf, files: usize },
    Validated(validate::Report),
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self {
            Outcome::Validated(r) if !r.passed => 1,
            _ => 0,
        }
    }
}

fn settings(common: &Common) -> Result<Settings, CliError> {
    if let Some(n) = common.grid {
        if n < 2 {
            return Err(CliError::Config(format!("--grid must be at least 2, got {n}")));
        }
    }
    if !(common.threshold > 0.0) {
        return Err(CliError::Config(format!("--threshold must be positive, got {}", common.threshold)));
    }
    if common.lmax == 0 {
        return Err(CliError::Config("--lmax must be at least 1".into()));
    }
    let overrides = match &common.config {
        Some(path) => parse_entries(&read(path)?)?,
        None => Default::default(),
    };
    Ok(Settings {
        grid: common.grid,
        threshold: common.threshold,
        relative: common.relative,
        lmax: common.lmax,
        overrides,
    })
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Runs a parsed command inside a thread pool of the requested size.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Figure { name, state, panel } => {
            if state.is_some() && *name != Figure::Fig2 {
                return Err(CliError::Config("--state applies to fig2 only".into()));
            }
            if panel.is_some() && *name != Figure::Sm2 {
                return Err(CliError::Config("--panel applies to sm2 only".into()));
            }
            let s = settings(common)?;
            let mut out = Output::new(format!("figure {}", name.name()), common.format);
            figures::run(&Request { figure: *name, state: *state, panel: *panel }, &s, &mut out)?;
            finish(out, common)
        }
        Command::Validate { suite } => {
            let s = settings(common)?;
            Ok(Outcome::Validated(validate::run(*suite, &s)?))
        }
        Command::Couplings { z1, z2_min, z2_max, points } => {
            if *points < 2 || !(z2_max > z2_min) {
                return Err(CliError::Config("need --points >= 2 and --z2-max > --z2-min".into()));
            }
            let z2: Vec<f64> =
                (0..*points).map(|k| z2_min + (z2_max - z2_min) * k as f64 / (*points - 1) as f64).collect();
            let rows = mirror_sweep(*z1, &z2)?;
            let mut csv = Vec::new();
            write_coupling_csv(&rows, &mut csv)?;
            let mut out = Output::new("couplings mirror", common.format);
            out.add("couplings_mirror.csv", Kind::Csv, csv);
            finish(out, common)
        }
        Command::Run { payload } => {
            let path = common.config.as_ref().ok_or_else(|| CliError::Config("run needs --config PATH".into()))?;
            let mut config = parse_config(&read(path)?)?;
            if let Some(n) = common.grid {
                config.grid.n = n;
                config.validate()?;
            }
            let s = Settings { overrides: Default::default(), ..settings(&Common { config: None, ..common.clone() })? };
            let mut out = Output::new(format!("run {}", Payload::from(*payload).name()), common.format);
            figures::run_config(&config, &s, (*payload).into(), &mut out)?;
            finish(out, common)
        }
    }
}

fn finish(out: Output, common: &Common) -> Result<Outcome, CliError> {
    let files = out.names().len();
    let (manifest, _) = out.finish(&common.out)?;
    Ok(Outcome::Written { manifest, files })
}
