//! `resilmap` command-line pipelines: `simulate`, `resilience` and `map`, plus
//! granular commands for single steps. Every command writes its outputs and a
//! `manifest.json` into the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, InterpMethod};
use crate::error::{CliError, CliResult};

/// Writes a line to stdout, ignoring a closed pipe.
pub(crate) fn say(line: impl std::fmt::Display) {
    #[cfg(test)]
    println!("{line}");
    #[cfg(not(test))]
    {
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), "{line}");
    }
}

pub const DEFAULT_OUTPUT_DIR: &str = "resilmap-out";

#[derive(Debug, Parser)]
#[command(name = "resilmap", version, about = "Sectoral climate-resilience estimation and productivity mapping")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// JSON configuration file; every key is optional.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: config output_dir, else ./resilmap-out].
    #[arg(long, short, global = true, env = "RESILMAP_OUTPUT_DIR")]
    pub output: Option<PathBuf>,
    /// Worker threads for grid rendering, k-means restarts and LOOCV folds
    /// [default: available parallelism].
    #[arg(long, global = true, env = "RESILMAP_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic panel and/or sample field with known truth.
    Simulate,
    /// Ingest panels, estimate per sector, build country features and cluster them.
    Resilience {
        /// Panel CSV files (country,year,sector,variables...).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Cluster the raw features instead of z-scores.
        #[arg(long)]
        no_standardize: bool,
    },
    /// Fit a variogram, interpolate samples onto a grid and cross-validate.
    Map(MapArgs),
    /// Estimate the configured static model (pooled OLS or within FE) per sector.
    Panel(PanelArgs),
    /// Estimate the dynamic model with one-step System GMM per sector.
    Gmm(PanelArgs),
    /// Cluster the rows of a features CSV.
    Cluster {
        /// CSV with a `country` column followed by numeric features.
        features: PathBuf,
        #[arg(long)]
        no_standardize: bool,
    },
    /// Empirical variogram and fitted model for a samples CSV.
    Variogram {
        samples: PathBuf,
    },
    /// Ordinary kriging prediction at one location.
    Krige {
        samples: PathBuf,
        /// Target location `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: (f64, f64),
        /// Variogram JSON (a model object, or variogram.json from `variogram`/`map`).
        #[arg(long)]
        variogram: Option<PathBuf>,
    },
    /// Leave-one-out cross-validation of kriging, IDW and spline.
    Crossval {
        samples: PathBuf,
        /// Reuse the full-data variogram in every fold.
        #[arg(long)]
        fixed_variogram: bool,
    },
    /// Interpolate samples onto a grid without cross-validation.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct PanelArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Estimate only this sector.
    #[arg(long)]
    pub sector: Option<resilmap::SectorId>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Samples CSV (x,y,value, optional covariate columns).
    pub samples: PathBuf,
    /// Covariate grid `NAME=PATH` (x,y,value at cell centers); enables regression kriging.
    #[arg(long = "covariate", value_parser = parse_covariate)]
    pub covariates: Vec<(String, PathBuf)>,
    /// Interpolation method [default: config geo.method].
    #[arg(long, value_enum)]
    pub method: Option<InterpMethod>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub render: RenderArgs,
    /// Reuse the full-data variogram in every cross-validation fold.
    #[arg(long)]
    pub fixed_variogram: bool,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(x)?, num(y)?))
}

fn parse_covariate(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected NAME=PATH")?;
    if name.is_empty() || path.is_empty() {
        return Err("expected NAME=PATH".into());
    }
    Ok((name.to_string(), PathBuf::from(path)))
}

/// Parses the configuration, sizes the worker pool and runs the command.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut config = Config::load(cli.global.config.as_deref())?;
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        // Fails only if a pool already exists, e.g. when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let out_dir = cli
        .global
        .output
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    config.output_dir = Some(out_dir.clone());
    let ctx = commands::Ctx { config, out_dir };
    match cli.command {
        Command::Simulate => commands::simulate::run(&ctx),
        Command::Resilience { inputs, no_standardize } => commands::resilience::run(&ctx, &inputs, !no_standardize),
        Command::Map(args) => commands::map::run(&ctx, &args.render, args.fixed_variogram, true),
        Command::Render(args) => commands::map::run(&ctx, &args, false, false),
        Command::Panel(args) => commands::granular::panel(&ctx, &args, false),
        Command::Gmm(args) => commands::granular::panel(&ctx, &args, true),
        Command::Cluster { features, no_standardize } => commands::granular::cluster(&ctx, &features, !no_standardize),
        Command::Variogram { samples } => commands::granular::variogram(&ctx, &samples),
        Command::Krige { samples, at, variogram } => commands::granular::krige(&ctx, &samples, at, variogram.as_deref()),
        Command::Crossval { samples, fixed_variogram } => commands::granular::crossval(&ctx, &samples, fixed_variogram),
    }
}
