pub mod granular;
pub mod map;
pub mod resilience;
pub mod simulate;

use std::path::{Path, PathBuf};

use resilmap::geo::parse_samples_csv;
use resilmap::ingest::{harmonize, impute, parse_panel_csv, ImputationReport};
use resilmap::raster::{make_grid, RasterSpec};
use resilmap::{Error, GeoSampleSet, Panel};

use crate::config::Config;
use crate::error::{CliResult, Context};
use crate::manifest::RunOutputs;

/// Resolved configuration and output directory for one invocation.
#[derive(Debug)]
pub struct Ctx {
    pub config: Config,
    pub out_dir: PathBuf,
}

impl Ctx {
    pub fn outputs(&self) -> CliResult<RunOutputs> {
        RunOutputs::new(&self.out_dir)
    }

    pub fn finish(&self, out: RunOutputs) -> CliResult<()> {
        out.finish(&self.config.canonical_json())?;
        Ok(())
    }
}

/// Parses, merges and imputes the input panels.
pub fn ingest_panels(ctx: &Ctx, out: &mut RunOutputs, inputs: &[PathBuf]) -> CliResult<(Panel, ImputationReport)> {
    let rules = &ctx.config.ingest.rules;
    let mut panels = Vec::with_capacity(inputs.len());
    for path in inputs {
        let text = out.read_input(path)?;
        panels.push(parse_panel_csv(&text, rules).context(path.display())?);
    }
    let merged = harmonize(&panels, rules).context("harmonizing inputs")?;
    impute(&merged, ctx.config.ingest.imputation).context("imputing missing cells")
}

pub fn read_samples(out: &mut RunOutputs, path: &Path) -> CliResult<GeoSampleSet> {
    let text = out.read_input(path)?;
    parse_samples_csv(&text).context(path.display())
}

/// Output grid from the configured bbox and cellsize, falling back to the
/// sample bounding box and 1/50 of its longer side.
pub fn grid_for(config: &Config, default_bbox: (f64, f64, f64, f64)) -> CliResult<RasterSpec> {
    let bbox = config
        .raster
        .bbox
        .map(|b| (b[0], b[1], b[2], b[3]))
        .unwrap_or(default_bbox);
    let extent = (bbox.2 - bbox.0).max(bbox.3 - bbox.1);
    if extent.is_nan() || extent <= 0.0 {
        return Err(Error::EmptyBbox).context("output grid");
    }
    let cellsize = config.raster.cellsize.unwrap_or(extent / 50.0);
    let mut spec = make_grid(bbox, cellsize).context("output grid")?;
    spec.nodata = config.raster.nodata;
    Ok(spec)
}
