use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{ensure_full_rank, least_squares};
use crate::model::Panel;

use super::covariance::cluster_robust_cov;
use super::design::design_matrices;
use super::fit::panel_r2;
use super::result::{gaussian_log_likelihood, matrix_rows, params_table, EstimationResult};
use super::spec::{CovType, ModelSpec};

/// Pooled OLS of the static model, ignoring the panel structure except for
/// cluster-robust standard errors.
pub fn pooled_ols(panel: &Panel, spec: &ModelSpec) -> Result<EstimationResult> {
    if spec.lag_dependent {
        return Err(Error::InvalidParameter(
            "a lagged dependent variable requires the System GMM estimator".into(),
        ));
    }
    let d = design_matrices(panel, spec)?;
    ensure_full_rank(&d.x, &d.names)?;
    let (beta, xtx_inv) = least_squares(&d.x, &d.y)?;
    let resid = &d.y - &d.x * &beta;
    let ssr = resid.norm_squared();
    let (n, k) = d.x.shape();
    let df = (n - k) as f64;
    let cov = match spec.cov_type {
        CovType::Unadjusted => xtx_inv * (ssr / df),
        CovType::RobustClusterEntity => cluster_robust_cov(&d.x, &resid, &d.entities)?,
    };

    let (intercept, slope_cols) = if spec.intercept {
        (beta[0], 1..k)
    } else {
        (0.0, 0..k)
    };
    let slopes = DVector::from_iterator(slope_cols.len(), slope_cols.clone().map(|j| beta[j]));
    let xs = d.x.columns(slope_cols.start, slope_cols.len()).into_owned();
    let fit = panel_r2(&d.y, &xs, &slopes, intercept, &d.entities);

    Ok(EstimationResult {
        dep_variable: spec.response.clone(),
        estimator: "PooledOLS".into(),
        cov_label: spec.cov_type.label().into(),
        n_obs: n,
        n_entities: d.n_entities(),
        df_resid: df,
        r2: fit.overall,
        r2_within: fit.within,
        r2_between: fit.between,
        r2_overall: fit.overall,
        log_likelihood: gaussian_log_likelihood(ssr, n),
        params: params_table(&d.names, &beta, &cov, df),
        covariance: matrix_rows(&cov),
        entity_effects: Vec::new(),
        instruments: None,
        warnings: Vec::new(),
    })
}
