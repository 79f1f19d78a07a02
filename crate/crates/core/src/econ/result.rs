use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::model::{CountryId, SectorId};
use crate::stats::{student_t_quantile, student_t_two_sided_p};

/// One row of the coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub name: String,
    pub coef: f64,
    pub std_err: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl ParameterEstimate {
    /// Derives t, two-sided p and the 95% interval from `(coef, se)` with `df`
    /// residual degrees of freedom.
    pub fn from_coef_se(name: impl Into<String>, coef: f64, std_err: f64, df: f64) -> Self {
        let t_stat = coef / std_err;
        let t_crit = student_t_quantile(0.975, df);
        ParameterEstimate {
            name: name.into(),
            coef,
            std_err,
            t_stat,
            p_value: student_t_two_sided_p(t_stat, df),
            ci_lower: coef - t_crit * std_err,
            ci_upper: coef + t_crit * std_err,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityEffect {
    pub country: CountryId,
    pub sector: SectorId,
    pub effect: f64,
}

/// Instrument columns used by System GMM, by block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentLayout {
    pub difference_gmm: usize,
    pub level_gmm: usize,
    pub exogenous: usize,
}

impl InstrumentLayout {
    pub fn total(&self) -> usize {
        self.difference_gmm + self.level_gmm + self.exogenous
    }
}

/// Fitted model summary. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub dep_variable: String,
    pub estimator: String,
    pub cov_label: String,
    pub n_obs: usize,
    pub n_entities: usize,
    pub df_resid: f64,
    /// Headline R²: within R² for the fixed-effects estimator, overall R² otherwise.
    pub r2: f64,
    pub r2_within: f64,
    pub r2_between: f64,
    pub r2_overall: f64,
    pub log_likelihood: f64,
    pub params: Vec<ParameterEstimate>,
    pub covariance: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entity_effects: Vec<EntityEffect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instruments: Option<InstrumentLayout>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EstimationResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.param(name).map(|p| p.coef)
    }

    pub fn param(&self, name: &str) -> Option<&ParameterEstimate> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

pub(crate) fn params_table(
    names: &[String],
    beta: &DVector<f64>,
    cov: &DMatrix<f64>,
    df: f64,
) -> Vec<ParameterEstimate> {
    names
        .iter()
        .enumerate()
        .map(|(j, name)| ParameterEstimate::from_coef_se(name.clone(), beta[j], cov[(j, j)].max(0.0).sqrt(), df))
        .collect()
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Gaussian log-likelihood at the ML variance `SSR/n`.
pub(crate) fn gaussian_log_likelihood(ssr: f64, n: usize) -> f64 {
    let n = n as f64;
    -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (ssr / n).ln() + 1.0)
}
