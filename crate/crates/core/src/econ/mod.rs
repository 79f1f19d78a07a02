//! Panel estimators for the sectoral resilience model: pooled OLS, entity
//! fixed effects and one-step System GMM, plus table-style reports.

mod covariance;
mod design;
mod fit;
mod gmm;
mod ols;
mod report;
mod result;
mod spec;
mod within;

pub use covariance::cluster_robust_cov;
pub use design::{design_matrices, Design, Entity, INTERCEPT_NAME};
pub use gmm::system_gmm;
pub use ols::pooled_ols;
pub use report::{format_number, format_report};
pub use result::{EntityEffect, EstimationResult, InstrumentLayout, ParameterEstimate};
pub use spec::{CovType, ModelSpec};
pub use within::within_fe;

use crate::error::Result;
use crate::model::Panel;

/// Dispatches on the specification: System GMM when the lagged response is
/// requested, within FE when entity effects are requested, pooled OLS otherwise.
pub fn estimate(panel: &Panel, spec: &ModelSpec) -> Result<EstimationResult> {
    if spec.lag_dependent {
        system_gmm(panel, spec)
    } else if spec.entity_effects {
        within_fe(panel, spec)
    } else {
        pooled_ols(panel, spec)
    }
}
