use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{ensure_full_rank, least_squares};
use crate::model::Panel;

use super::covariance::cluster_robust_cov;
use super::design::{design_matrices, Entity};
use super::fit::panel_r2;
use super::result::{gaussian_log_likelihood, matrix_rows, params_table, EntityEffect, EstimationResult};
use super::spec::{CovType, ModelSpec};

/// Entity-demeaned ("within") OLS with one effect per (country, sector) series.
///
/// Degrees of freedom are `n − k − G`. The between and overall R² use the
/// common intercept `ȳ − x̄ᵀβ̂`.
pub fn within_fe(panel: &Panel, spec: &ModelSpec) -> Result<EstimationResult> {
    if spec.lag_dependent {
        return Err(Error::InvalidParameter(
            "a lagged dependent variable requires the System GMM estimator".into(),
        ));
    }
    let no_const = ModelSpec {
        intercept: false,
        ..spec.clone()
    };
    let d = design_matrices(panel, &no_const)?;
    let (n, k) = d.x.shape();
    if k == 0 {
        return Err(Error::InvalidParameter("within estimator needs at least one regressor".into()));
    }

    let mut groups: BTreeMap<Entity, Vec<usize>> = BTreeMap::new();
    for (i, e) in d.entities.iter().enumerate() {
        groups.entry(*e).or_default().push(i);
    }
    if let Some((e, _)) = groups.iter().find(|(_, rows)| rows.len() < 2) {
        return Err(Error::SingletonEntity(format!("{}/{}", e.0, e.1)));
    }
    let g = groups.len();
    if n <= k + g {
        return Err(Error::InsufficientRows {
            available: n,
            required: k + g + 1,
        });
    }

    let mut y_dm = d.y.clone();
    let mut x_dm = d.x.clone();
    let mut means: Vec<(Entity, f64, DVector<f64>)> = Vec::with_capacity(g);
    for (e, rows) in &groups {
        let m = rows.len() as f64;
        let ybar = rows.iter().map(|&i| d.y[i]).sum::<f64>() / m;
        let xbar = DVector::from_fn(k, |j, _| rows.iter().map(|&i| d.x[(i, j)]).sum::<f64>() / m);
        for &i in rows {
            y_dm[i] -= ybar;
            for j in 0..k {
                x_dm[(i, j)] -= xbar[j];
            }
        }
        means.push((*e, ybar, xbar));
    }

    ensure_full_rank(&x_dm, &d.names)?;
    let (beta, xtx_inv) = least_squares(&x_dm, &y_dm)?;
    let resid = &y_dm - &x_dm * &beta;
    let ssr = resid.norm_squared();
    let df = (n - k - g) as f64;
    let cov: DMatrix<f64> = match spec.cov_type {
        CovType::Unadjusted => xtx_inv * (ssr / df),
        CovType::RobustClusterEntity => cluster_robust_cov(&x_dm, &resid, &d.entities)?,
    };

    let x_mean = DVector::from_fn(k, |j, _| d.x.column(j).mean());
    let intercept = d.y.mean() - x_mean.dot(&beta);
    let fit = panel_r2(&d.y, &d.x, &beta, intercept, &d.entities);
    let entity_effects = means
        .iter()
        .map(|(e, ybar, xbar)| EntityEffect {
            country: e.0,
            sector: e.1,
            effect: ybar - xbar.dot(&beta),
        })
        .collect();

    Ok(EstimationResult {
        dep_variable: spec.response.clone(),
        estimator: "PanelOLS".into(),
        cov_label: spec.cov_type.label().into(),
        n_obs: n,
        n_entities: g,
        df_resid: df,
        r2: fit.within,
        r2_within: fit.within,
        r2_between: fit.between,
        r2_overall: fit.overall,
        log_likelihood: gaussian_log_likelihood(ssr, n),
        params: params_table(&d.names, &beta, &cov, df),
        covariance: matrix_rows(&cov),
        entity_effects,
        instruments: None,
        warnings: Vec::new(),
    })
}
