//! Sectoral climate-resilience estimation and localized productivity mapping
//! for sparse, unbalanced country data.
//!
//! Two pipelines are built from the modules here:
//!
//! * resilience: [`ingest`] → [`econ`] (pooled OLS, within FE, one-step System
//!   GMM) → [`cluster`] (k-means / agglomerative clustering of countries);
//! * mapping: [`geo`] (variograms, ordinary and regression kriging, IDW and
//!   thin-plate-spline baselines, leave-one-out validation) → [`raster`]
//!   (ESRI ASCII grid, PPM heatmap, CSV).
//!
//! [`synth`] generates panels and Gaussian random fields with known truth.

pub mod cluster;
pub mod econ;
pub mod error;
pub mod geo;
pub mod ingest;
pub mod linalg;
pub mod model;
pub mod raster;
pub mod stats;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use model::{
    CountryId, GeoSample, GeoSampleSet, ObservationKey, Panel, PanelObservation, Rng, SectorId,
    Variable, VariogramFamily, VariogramModel,
};
