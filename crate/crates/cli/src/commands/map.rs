use std::collections::BTreeMap;
use std::path::PathBuf;

use resilmap::geo::{
    empirical_variogram, fit_objective, fit_variogram, loocv, parse_samples_csv, CvMethod, EmpiricalVariogram,
    Interpolator, OrdinaryKriging, RegressionKriging, ThinPlateSpline, TrendModel, VariogramFit,
};
use resilmap::raster::{
    make_grid, raster_from_points_csv, render_surface, write_ascii_grid, write_csv, write_heatmap, Raster, RasterSpec,
};
use resilmap::{Error, GeoSample, GeoSampleSet, VariogramModel};
use serde::Serialize;
use serde_json::{json, Value};

use super::{grid_for, read_samples, Ctx};
use crate::config::{Config, InterpMethod};
use crate::error::{CliError, CliResult, Context};
use crate::manifest::RunOutputs;
use crate::RenderArgs;

#[derive(Debug, Serialize)]
pub struct VariogramFile<'a> {
    pub empirical: &'a EmpiricalVariogram,
    pub fit: &'a VariogramFit,
    /// True when the variogram describes trend residuals.
    pub on_residuals: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trend: Option<&'a TrendModel>,
}

/// Empirical variogram and model; the configured `geo.variogram` replaces the fit.
pub fn variogram_of(config: &Config, samples: &GeoSampleSet) -> resilmap::Result<(EmpiricalVariogram, VariogramFit)> {
    let g = &config.geo;
    let emp = empirical_variogram(samples, g.n_bins, g.max_dist)?;
    let fit = match g.variogram {
        Some(model) => VariogramFit {
            model,
            objective: fit_objective(&emp, &model),
            start_objectives: Vec::new(),
            warnings: vec!["model taken from configuration".into()],
        },
        None => fit_variogram(&emp, g.family)?,
    };
    for w in &fit.warnings {
        log::warn!("variogram: {w}");
    }
    Ok((emp, fit))
}

/// Keeps only the named covariates, in the given order.
fn select_covariates(samples: &GeoSampleSet, names: &[String]) -> CliResult<GeoSampleSet> {
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            samples
                .covariate_names()
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| Error::UnknownVariable(n.clone()))
                .context("samples lack a covariate column for a supplied grid")
        })
        .collect::<CliResult<_>>()?;
    let reduced = samples
        .samples()
        .iter()
        .map(|s| GeoSample {
            covariates: idx.iter().map(|&i| s.covariates[i]).collect(),
            ..s.clone()
        })
        .collect();
    GeoSampleSet::with_covariates(reduced, names.to_vec()).context("samples")
}

/// Grid whose cell centers are the points of a covariate CSV.
fn grid_from_points(points: &GeoSampleSet, cellsize: Option<f64>, nodata: f64) -> CliResult<RasterSpec> {
    let mut xs: Vec<f64> = points.samples().iter().map(|s| s.x).collect();
    let mut ys: Vec<f64> = points.samples().iter().map(|s| s.y).collect();
    let spacing = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 1e-9).fold(f64::INFINITY, f64::min)
    };
    let cs = match cellsize {
        Some(c) => c,
        None => spacing(&mut xs).min(spacing(&mut ys)),
    };
    if !cs.is_finite() {
        return Err(Error::MalformedRaster("covariate grid needs at least two distinct columns or rows".into()))
            .context("covariate grid");
    }
    let (x0, y0, x1, y1) = points.bbox();
    let h = cs / 2.0;
    let mut spec = make_grid((x0 - h, y0 - h, x1 + h, y1 + h), cs).context("covariate grid")?;
    spec.nodata = nodata;
    Ok(spec)
}

#[derive(Debug, Serialize)]
struct CrossvalFile {
    selected: String,
    fixed_variogram: bool,
    results: BTreeMap<String, Value>,
}

/// LOOCV of kriging, IDW and spline (and regression kriging when the samples
/// carry covariates). A method that fails entirely is recorded, not fatal.
pub fn crossval(
    config: &Config,
    samples: &GeoSampleSet,
    fixed: Option<VariogramModel>,
    selected: &str,
) -> CliResult<Value> {
    let g = &config.geo;
    let mut methods = vec![
        CvMethod::Kriging {
            family: g.family,
            n_bins: g.n_bins,
            max_dist: g.max_dist,
            fixed,
        },
        CvMethod::Idw { power: g.idw_power },
        CvMethod::Spline {
            smoothing: g.spline_smoothing,
        },
    ];
    if !samples.covariate_names().is_empty() {
        methods.push(CvMethod::RegressionKriging {
            family: g.family,
            n_bins: g.n_bins,
            max_dist: g.max_dist,
        });
    }
    let mut results = BTreeMap::new();
    for m in &methods {
        let entry = match loocv(samples, m) {
            Ok(report) => {
                crate::say(format_args!("{:<20} rmse {:.6}  mae {:.6}  failed folds {}", m.label(), report.rmse, report.mae, report.n_failed));
                serde_json::to_value(&report).expect("report serializes")
            }
            Err(e) => {
                log::warn!("{} cross-validation failed: {e}", m.label());
                json!({ "error": e.to_string() })
            }
        };
        results.insert(m.label().to_string(), entry);
    }
    let file = CrossvalFile {
        selected: selected.to_string(),
        fixed_variogram: fixed.is_some(),
        results,
    };
    Ok(serde_json::to_value(&file).expect("crossval serializes"))
}

/// The `map` pipeline; `render` is the same without cross-validation.
pub fn run(ctx: &Ctx, args: &RenderArgs, fixed_flag: bool, with_cv: bool) -> CliResult<()> {
    let config = &ctx.config;
    let method = args.method.unwrap_or(config.geo.method);
    let mut out = ctx.outputs()?;
    let all = read_samples(&mut out, &args.samples)?;

    let regression = !args.covariates.is_empty();
    if regression && method != InterpMethod::Kriging {
        return Err(CliError::Config("covariate grids are only used by kriging".into()));
    }
    let names: Vec<String> = args.covariates.iter().map(|(n, _)| n.clone()).collect();
    let samples = select_covariates(&all, &names)?;

    let mut grid_texts = Vec::new();
    for (_, path) in &args.covariates {
        grid_texts.push((path.clone(), out.read_input(path)?));
    }
    let spec = match (grid_texts.first(), config.raster.bbox) {
        (Some((path, text)), None) => {
            let points = parse_samples_csv(text).context(path.display())?;
            grid_from_points(&points, config.raster.cellsize, config.raster.nodata)?
        }
        _ => grid_for(config, samples.bbox())?,
    };
    let grids: Vec<Raster> = grid_texts
        .iter()
        .map(|(path, text): &(PathBuf, String)| raster_from_points_csv(text, &spec).context(path.display()))
        .collect::<CliResult<_>>()?;

    let trend = if regression {
        Some(TrendModel::fit(&samples).context("fitting covariate trend")?)
    } else {
        None
    };
    let vario_samples = match &trend {
        Some(t) => samples.with_values(&t.residuals(&samples)),
        None => samples.clone(),
    };
    let vario = variogram_of(config, &vario_samples);
    let model = match (&vario, method) {
        (Ok((emp, fit)), _) => {
            out.write_json(
                "variogram.json",
                &VariogramFile {
                    empirical: emp,
                    fit,
                    on_residuals: trend.is_some(),
                    trend: trend.as_ref(),
                },
            )?;
            Some(fit.model)
        }
        (Err(e), InterpMethod::Idw | InterpMethod::Spline) => {
            log::warn!("variogram unavailable: {e}");
            out.write_json("variogram.json", &json!({ "error": e.to_string() }))?;
            None
        }
        (Err(_), InterpMethod::Kriging) => {
            return Err(vario.unwrap_err()).context("variogram");
        }
    };

    let interp = match method {
        InterpMethod::Kriging => {
            let model = model.expect("kriging requires a variogram");
            if regression {
                Interpolator::Regression(RegressionKriging::new(&samples, model).context("regression kriging")?)
            } else {
                Interpolator::Kriging(OrdinaryKriging::new(&samples, model).context("kriging")?)
            }
        }
        InterpMethod::Idw => Interpolator::idw(&samples, config.geo.idw_power).context("idw")?,
        InterpMethod::Spline => {
            Interpolator::Spline(ThinPlateSpline::fit(&samples, config.geo.spline_smoothing).context("spline")?)
        }
    };
    let rendered = render_surface(&interp, &samples, &spec, config.geo.mask_beyond, &grids).context("rendering")?;
    write_surface(&mut out, config, &rendered.values)?;
    if let Some(var) = &rendered.variance {
        out.write("uncertainty.asc", write_ascii_grid(var))?;
    }

    if with_cv {
        let fixed = if config.geo.variogram.is_some() || fixed_flag || config.geo.fixed_variogram {
            model.filter(|_| !regression)
        } else {
            None
        };
        let selected = if regression { "regression_kriging" } else { method.label() };
        let report = crossval(config, &samples, fixed, selected)?;
        out.write_json("crossval.json", &report)?;
    }
    ctx.finish(out)
}

fn write_surface(out: &mut RunOutputs, config: &Config, values: &Raster) -> CliResult<()> {
    out.write("productivity.asc", write_ascii_grid(values))?;
    out.write(
        "productivity.ppm",
        write_heatmap(values, config.raster.vmin, config.raster.vmax).context("heatmap")?,
    )?;
    out.write("productivity.csv", write_csv(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_inferred_from_cell_centers() {
        let pts: Vec<GeoSample> = (0..3)
            .flat_map(|r| (0..4).map(move |c| GeoSample::new(0.5 + c as f64, 10.5 + r as f64, 1.0)))
            .collect();
        let set = GeoSampleSet::new(pts).unwrap();
        let spec = grid_from_points(&set, None, -9999.0).unwrap();
        assert_eq!((spec.ncols, spec.nrows), (4, 3));
        assert_eq!((spec.xllcorner, spec.yllcorner, spec.cellsize), (0.0, 10.0, 1.0));
    }

    #[test]
    fn covariate_selection_reorders_and_rejects_unknown() {
        let mut s = GeoSample::new(0.0, 0.0, 1.0);
        s.covariates = vec![1.0, 2.0];
        let set = GeoSampleSet::with_covariates(vec![s], vec!["a".into(), "b".into()]).unwrap();
        let sel = select_covariates(&set, &["b".into()]).unwrap();
        assert_eq!(sel.samples()[0].covariates, vec![2.0]);
        assert_eq!(select_covariates(&set, &["c".into()]).unwrap_err().exit_code(), 2);
    }
}
