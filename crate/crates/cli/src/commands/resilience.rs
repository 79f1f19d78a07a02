use std::collections::BTreeMap;
use std::path::PathBuf;

use resilmap::cluster::{
    build_features, elbow, elbow_csv, hierarchical, kmeans, panel_means, scatter_csv, standardize, ClusterResult,
    FeatureMatrix, FilledFeature,
};
use resilmap::econ::{estimate, format_report, pooled_ols, CovType, EstimationResult, ModelSpec};
use resilmap::ingest::ImputationReport;
use resilmap::{CountryId, Panel, SectorId};
use serde::Serialize;

use super::{ingest_panels, Ctx};
use crate::config::{ClusterAlgorithm, FeatureSet};
use crate::error::{CliError, CliResult, Context};
use crate::manifest::RunOutputs;

#[derive(Debug, Serialize)]
struct Estimates<'a> {
    imputation: &'a ImputationReport,
    sectors: &'a BTreeMap<SectorId, EstimationResult>,
}

#[derive(Debug, Serialize)]
struct ClustersFile<'a> {
    #[serde(flatten)]
    result: &'a ClusterResult,
    standardized: bool,
    dropped_features: &'a [String],
    filled_features: &'a [FilledFeature],
}

/// Estimates `spec` separately for every sector (or just `only`) and writes
/// `report_<sector>.txt` plus `estimates.json`.
pub fn estimate_sectors(
    out: &mut RunOutputs,
    panel: &Panel,
    imputation: &ImputationReport,
    spec: &ModelSpec,
    only: Option<SectorId>,
) -> CliResult<BTreeMap<SectorId, EstimationResult>> {
    let sectors: Vec<SectorId> = match only {
        Some(s) => vec![s],
        None => panel.sectors(),
    };
    let mut results = BTreeMap::new();
    for sector in sectors {
        let sub = panel.filter_sector(sector);
        if sub.is_empty() {
            return Err(resilmap::Error::EmptyInput(format!("no {sector} observations"))).context("estimation");
        }
        let result = estimate(&sub, spec).context(format_args!("estimating {sector}"))?;
        for w in &result.warnings {
            log::warn!("{sector}: {w}");
        }
        let report = format_report(&result);
        crate::say(format_args!("{sector}\n{report}"));
        out.write(&format!("report_{sector}.txt"), report)?;
        results.insert(sector, result);
    }
    out.write_json(
        "estimates.json",
        &Estimates {
            imputation,
            sectors: &results,
        },
    )?;
    Ok(results)
}

/// Static pooled OLS of the model for every (country, sector) series with
/// enough complete rows. Series that cannot be estimated are skipped.
fn per_country_estimates(panel: &Panel, spec: &ModelSpec) -> BTreeMap<(CountryId, SectorId), EstimationResult> {
    let mut spec = spec.clone();
    spec.entity_effects = false;
    spec.lag_dependent = false;
    spec.cov_type = CovType::Unadjusted;
    let mut results = BTreeMap::new();
    for ((country, sector), rows) in panel.series() {
        let obs = rows.iter().map(|&r| panel.observations()[r].clone()).collect();
        let fitted = Panel::new(panel.registry().to_vec(), obs).and_then(|p| pooled_ols(&p, &spec));
        match fitted {
            Ok(r) => {
                results.insert((country, sector), r);
            }
            Err(e) => log::warn!("skipping {country}/{sector} features: {e}"),
        }
    }
    results
}

/// Clusters `matrix` per the config and writes clusters.json, scatter.csv and elbow.csv.
pub fn cluster_stage(
    ctx: &Ctx,
    out: &mut RunOutputs,
    matrix: &FeatureMatrix,
    filled: &[FilledFeature],
    standardize_features: bool,
) -> CliResult<ClusterResult> {
    let c = &ctx.config.cluster;
    let (work, dropped) = if standardize_features {
        let s = standardize(matrix);
        (s.matrix, s.dropped)
    } else {
        (matrix.clone(), Vec::new())
    };
    if work.columns().is_empty() {
        return Err(resilmap::Error::EmptyInput("every feature is constant".into())).context("clustering");
    }
    let result = match c.method {
        ClusterAlgorithm::Kmeans => kmeans(&work, c.k, c.seed, c.max_iter, c.n_init),
        ClusterAlgorithm::Hierarchical => hierarchical(&work, c.linkage, c.k),
    }
    .context("clustering")?;
    out.write_json(
        "clusters.json",
        &ClustersFile {
            result: &result,
            standardized: standardize_features,
            dropped_features: &dropped,
            filled_features: filled,
        },
    )?;
    let [f1, f2] = match &c.scatter {
        Some(pair) => pair.clone(),
        None => {
            let cols = work.columns();
            [cols[0].clone(), cols.get(1).unwrap_or(&cols[0]).clone()]
        }
    };
    out.write("scatter.csv", scatter_csv(matrix, &result, &f1, &f2).context("scatter.csv")?)?;
    let max_k = c.max_k.min(work.n_rows());
    let curve = elbow(&work, max_k, c.seed, c.max_iter, c.n_init).context("elbow curve")?;
    out.write("elbow.csv", elbow_csv(&curve))?;
    for k in 0..result.n_clusters {
        let members: Vec<String> = result.members(k).iter().map(|m| m.to_string()).collect();
        crate::say(format_args!("cluster {k}: {}", members.join(" ")));
    }
    Ok(result)
}

pub fn run(ctx: &Ctx, inputs: &[PathBuf], standardize_features: bool) -> CliResult<()> {
    let spec = ctx.config.model()?;
    let mut out = ctx.outputs()?;
    let (panel, imputation) = ingest_panels(ctx, &mut out, inputs)?;
    if imputation.cells_imputed > 0 {
        log::info!("imputed {} cells", imputation.cells_imputed);
    }
    estimate_sectors(&mut out, &panel, &imputation, spec, None)?;

    let c = &ctx.config.cluster;
    let (matrix, filled) = match c.features {
        FeatureSet::Estimates => {
            let exposure = c.exposure_vars.clone().unwrap_or_else(|| spec.climate_vars.clone());
            let per_country = per_country_estimates(&panel, spec);
            let build = build_features(&per_country, &panel, &exposure).context("building features")?;
            (build.matrix, build.filled)
        }
        FeatureSet::PanelMeans => {
            if c.feature_vars.is_empty() {
                return Err(CliError::Config(
                    "cluster.feature_vars must name at least one variable for panel_means".into(),
                ));
            }
            let m = panel_means(&panel, c.sector, &c.feature_vars).context("building features")?;
            (m, Vec::new())
        }
    };
    for f in &filled {
        log::warn!("feature {} for {} filled with the column mean", f.column, f.country);
    }
    out.write("features.csv", matrix.to_csv())?;
    cluster_stage(ctx, &mut out, &matrix, &filled, standardize_features)?;
    ctx.finish(out)
}
