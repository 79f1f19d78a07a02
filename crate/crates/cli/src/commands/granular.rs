use std::path::Path;

use resilmap::cluster::FeatureMatrix;
use resilmap::geo::OrdinaryKriging;
use resilmap::VariogramModel;
use serde_json::{json, Value};

use super::map::{crossval as run_crossval, variogram_of, VariogramFile};
use super::resilience::{cluster_stage, estimate_sectors};
use super::{ingest_panels, read_samples, Ctx};
use crate::error::{CliError, CliResult, Context};
use crate::PanelArgs;

/// Per-sector estimation only; `dynamic` forces the System GMM estimator.
pub fn panel(ctx: &Ctx, args: &PanelArgs, dynamic: bool) -> CliResult<()> {
    let mut spec = ctx.config.model()?.clone();
    spec.lag_dependent = dynamic;
    let mut out = ctx.outputs()?;
    let (panel, imputation) = ingest_panels(ctx, &mut out, &args.inputs)?;
    estimate_sectors(&mut out, &panel, &imputation, &spec, args.sector)?;
    ctx.finish(out)
}

pub fn cluster(ctx: &Ctx, features: &Path, standardize: bool) -> CliResult<()> {
    let mut out = ctx.outputs()?;
    let text = out.read_input(features)?;
    let matrix = FeatureMatrix::from_csv(&text).context(features.display())?;
    cluster_stage(ctx, &mut out, &matrix, &[], standardize)?;
    ctx.finish(out)
}

pub fn variogram(ctx: &Ctx, samples: &Path) -> CliResult<()> {
    let mut out = ctx.outputs()?;
    let set = read_samples(&mut out, samples)?;
    let (emp, fit) = variogram_of(&ctx.config, &set).context("variogram")?;
    let m = fit.model;
    crate::say(format_args!(
        "{} nugget {} sill {} range {} (objective {})",
        m.family, m.nugget, m.sill, m.range, fit.objective
    ));
    out.write_json(
        "variogram.json",
        &VariogramFile {
            empirical: &emp,
            fit: &fit,
            on_residuals: false,
            trend: None,
        },
    )?;
    ctx.finish(out)
}

/// Accepts a bare model object or a document with a `fit.model` entry.
fn load_model(out: &mut crate::manifest::RunOutputs, path: &Path) -> CliResult<VariogramModel> {
    let text = out.read_input(path)?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let node = doc.pointer("/fit/model").cloned().unwrap_or(doc);
    let m: VariogramModel =
        serde_json::from_value(node).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    VariogramModel::new(m.family, m.nugget, m.sill, m.range).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn krige(ctx: &Ctx, samples: &Path, at: (f64, f64), model_path: Option<&Path>) -> CliResult<()> {
    let mut out = ctx.outputs()?;
    let set = read_samples(&mut out, samples)?;
    let model = match model_path {
        Some(p) => load_model(&mut out, p)?,
        None => variogram_of(&ctx.config, &set).context("variogram")?.1.model,
    };
    let ok = OrdinaryKriging::new(&set, model).context("kriging")?;
    let p = ok.predict(at.0, at.1);
    crate::say(format_args!("{} {}", p.value, p.variance));
    out.write_json(
        "prediction.json",
        &json!({ "x": at.0, "y": at.1, "model": model, "prediction": p }),
    )?;
    ctx.finish(out)
}

pub fn crossval(ctx: &Ctx, samples: &Path, fixed_flag: bool) -> CliResult<()> {
    let mut out = ctx.outputs()?;
    let set = read_samples(&mut out, samples)?;
    let fixed = if fixed_flag || ctx.config.geo.fixed_variogram || ctx.config.geo.variogram.is_some() {
        Some(variogram_of(&ctx.config, &set).context("variogram")?.1.model)
    } else {
        None
    };
    let report = run_crossval(&ctx.config, &set, fixed, ctx.config.geo.method.label())?;
    out.write_json("crossval.json", &report)?;
    ctx.finish(out)
}
