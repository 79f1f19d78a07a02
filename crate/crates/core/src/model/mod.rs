//! Shared domain types: identifiers, panels, point samples, variogram models
//! and the deterministic random generator.

mod ids;
mod panel;
mod rng;
mod samples;
mod variogram;

pub use ids::{CountryId, SectorId};
pub use panel::{ObservationKey, Panel, PanelObservation, Variable, MAX_YEAR, MIN_YEAR};
pub use rng::Rng;
pub use samples::{GeoSample, GeoSampleSet, COINCIDENCE_TOL};
pub use variogram::{VariogramFamily, VariogramModel};
