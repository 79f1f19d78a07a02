use std::path::{Path, PathBuf};

use resilmap::cluster::Linkage;
use resilmap::econ::ModelSpec;
use resilmap::ingest::{HarmonizationRules, ImputationMethod};
use resilmap::synth::{FieldDgp, PanelDgp};
use resilmap::{SectorId, VariogramFamily, VariogramModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Run configuration. Every section is optional and unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub ingest: IngestConfig,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub geo: GeoConfig,
    #[serde(default)]
    pub raster: RasterConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    #[serde(default)]
    pub rules: HarmonizationRules,
    #[serde(default)]
    pub imputation: ImputationMethod,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClusterAlgorithm {
    #[default]
    Kmeans,
    Hierarchical,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// Per-country sector coefficients, mean responses and exposure means.
    #[default]
    Estimates,
    /// Per-country means of `feature_vars` (e.g. GDP per capita and yield).
    PanelMeans,
}

fn two() -> usize {
    2
}
fn ten() -> usize {
    10
}
fn eight() -> usize {
    8
}
fn max_iter() -> usize {
    300
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    #[serde(default = "two")]
    pub k: usize,
    #[serde(default)]
    pub method: ClusterAlgorithm,
    #[serde(default)]
    pub linkage: Linkage,
    #[serde(default = "ten")]
    pub n_init: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "max_iter")]
    pub max_iter: usize,
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default)]
    pub features: FeatureSet,
    /// Variables averaged per country when `features` is `panel_means`.
    #[serde(default)]
    pub feature_vars: Vec<String>,
    /// Sector restriction for `panel_means`.
    #[serde(default)]
    pub sector: Option<SectorId>,
    /// Exposure variables averaged per country; defaults to the model's climate variables.
    #[serde(default)]
    pub exposure_vars: Option<Vec<String>>,
    /// Feature pair written to scatter.csv; defaults to the first two features.
    #[serde(default)]
    pub scatter: Option<[String; 2]>,
    #[serde(default = "eight")]
    pub max_k: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InterpMethod {
    #[default]
    Kriging,
    Idw,
    Spline,
}

impl InterpMethod {
    pub fn label(&self) -> &'static str {
        match self {
            InterpMethod::Kriging => "kriging",
            InterpMethod::Idw => "idw",
            InterpMethod::Spline => "spline",
        }
    }
}

fn spherical() -> VariogramFamily {
    VariogramFamily::Spherical
}
fn idw_power() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoConfig {
    #[serde(default = "spherical")]
    pub family: VariogramFamily,
    #[serde(default = "ten")]
    pub n_bins: usize,
    #[serde(default)]
    pub max_dist: Option<f64>,
    #[serde(default)]
    pub method: InterpMethod,
    #[serde(default = "idw_power")]
    pub idw_power: f64,
    #[serde(default)]
    pub spline_smoothing: f64,
    /// Reuse the full-data variogram in every cross-validation fold.
    #[serde(default)]
    pub fixed_variogram: bool,
    /// Cells farther than this from every sample are left as nodata.
    #[serde(default)]
    pub mask_beyond: Option<f64>,
    /// Use this variogram instead of fitting one.
    #[serde(default)]
    pub variogram: Option<VariogramModel>,
}

impl Default for GeoConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

fn nodata() -> f64 {
    resilmap::raster::DEFAULT_NODATA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterConfig {
    /// (xmin, ymin, xmax, ymax); defaults to the sample bounding box.
    #[serde(default)]
    pub bbox: Option<[f64; 4]>,
    /// Defaults to 1/50 of the longer bbox side.
    #[serde(default)]
    pub cellsize: Option<f64>,
    #[serde(default)]
    pub vmin: Option<f64>,
    #[serde(default)]
    pub vmax: Option<f64>,
    #[serde(default = "nodata")]
    pub nodata: f64,
}

impl Default for RasterConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub panel: Option<PanelDgp>,
    #[serde(default)]
    pub field: Option<FieldDgp>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config: Config =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        // NaN fails this as well
        let positive = |v: f64| v > 0.0;
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        let c = &self.cluster;
        if c.k == 0 || c.n_init == 0 || c.max_iter == 0 || c.max_k == 0 {
            return bad("cluster.k, cluster.n_init, cluster.max_iter and cluster.max_k must be at least 1");
        }
        let g = &self.geo;
        if g.n_bins == 0 {
            return bad("geo.n_bins must be at least 1");
        }
        if !positive(g.idw_power) {
            return bad("geo.idw_power must be positive");
        }
        if !(g.spline_smoothing >= 0.0 && g.spline_smoothing.is_finite()) {
            return bad("geo.spline_smoothing must be non-negative");
        }
        if g.max_dist.is_some_and(|d| !positive(d)) || g.mask_beyond.is_some_and(|d| !positive(d)) {
            return bad("geo.max_dist and geo.mask_beyond must be positive");
        }
        if let Some(v) = &g.variogram {
            VariogramModel::new(v.family, v.nugget, v.sill, v.range)
                .map_err(|e| CliError::Config(format!("geo.variogram: {e}")))?;
        }
        let r = &self.raster;
        if r.cellsize.is_some_and(|c| !positive(c)) {
            return bad("raster.cellsize must be positive");
        }
        if let (Some(lo), Some(hi)) = (r.vmin, r.vmax) {
            if !positive(hi - lo) {
                return bad("raster.vmax must exceed raster.vmin");
            }
        }
        if let Some(b) = r.bbox {
            if !(b[2] > b[0] && b[3] > b[1]) {
                return bad("raster.bbox must be [xmin, ymin, xmax, ymax] with positive extent");
            }
        }
        self.ingest
            .rules
            .validate()
            .map_err(|e| CliError::Config(format!("ingest.rules: {e}")))?;
        if let Some(p) = &self.simulate.panel {
            p.validate().map_err(|e| CliError::Config(format!("simulate.panel: {e}")))?;
        }
        if let Some(f) = &self.simulate.field {
            f.validate().map_err(|e| CliError::Config(format!("simulate.field: {e}")))?;
        }
        Ok(())
    }

    pub fn model(&self) -> CliResult<&ModelSpec> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Config("a `model` section is required for this command".into()))
    }

    /// Canonical JSON used for the manifest's config hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c: Config = serde_json::from_str("{}").unwrap();
        assert_eq!(c.cluster.k, 2);
        assert_eq!(c.cluster.n_init, 10);
        assert_eq!(c.geo.n_bins, 10);
        assert_eq!(c.geo.idw_power, 2.0);
        assert_eq!(c.raster.nodata, -9999.0);
        assert!(c.cluster.standardize);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected_at_every_level() {
        for doc in [
            r#"{"bogus": 1}"#,
            r#"{"cluster": {"kk": 3}}"#,
            r#"{"model": {"response": "y", "extra": true}}"#,
            r#"{"ingest": {"rules": {"aliases": {}}}}"#,
        ] {
            let err = serde_json::from_str::<Config>(doc).unwrap_err().to_string();
            assert!(err.contains("unknown field"), "{doc}: {err}");
        }
    }

    #[test]
    fn example_config_parses() {
        let text = include_str!("../fixtures/config.example.json");
        let c: Config = serde_json::from_str(text).unwrap();
        c.validate().unwrap();
    }
}
