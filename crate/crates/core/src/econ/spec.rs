use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Panel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovType {
    Unadjusted,
    #[default]
    RobustClusterEntity,
}

impl CovType {
    pub fn label(&self) -> &'static str {
        match self {
            CovType::Unadjusted => "Unadjusted",
            CovType::RobustClusterEntity => "Robust",
        }
    }
}

fn yes() -> bool {
    true
}

/// Specification of `R = β₀ + β₁·X + β₂·Z + ε` (plus `ρ·R₋₁` when dynamic).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub response: String,
    #[serde(default)]
    pub climate_vars: Vec<String>,
    #[serde(default)]
    pub structural_vars: Vec<String>,
    #[serde(default = "yes")]
    pub intercept: bool,
    #[serde(default)]
    pub entity_effects: bool,
    /// Adds the lagged response; only the System GMM estimator accepts it.
    #[serde(default)]
    pub lag_dependent: bool,
    #[serde(default)]
    pub cov_type: CovType,
    /// Collapse the difference-equation GMM instruments to one column per lag depth.
    #[serde(default = "yes")]
    pub collapse_instruments: bool,
}

impl ModelSpec {
    pub fn new(response: impl Into<String>) -> Self {
        ModelSpec {
            response: response.into(),
            climate_vars: Vec::new(),
            structural_vars: Vec::new(),
            intercept: true,
            entity_effects: false,
            lag_dependent: false,
            cov_type: CovType::default(),
            collapse_instruments: true,
        }
    }

    pub fn with_climate<S: Into<String>>(mut self, vars: impl IntoIterator<Item = S>) -> Self {
        self.climate_vars = vars.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_structural<S: Into<String>>(mut self, vars: impl IntoIterator<Item = S>) -> Self {
        self.structural_vars = vars.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_cov(mut self, cov: CovType) -> Self {
        self.cov_type = cov;
        self
    }

    /// Climate then structural regressors, in declaration order.
    pub fn regressors(&self) -> Vec<String> {
        self.climate_vars
            .iter()
            .chain(&self.structural_vars)
            .cloned()
            .collect()
    }

    pub fn validate(&self, panel: &Panel) -> Result<()> {
        panel.require_variable(&self.response)?;
        let regs = self.regressors();
        for (i, r) in regs.iter().enumerate() {
            if *r == self.response {
                return Err(Error::InvalidParameter(format!(
                    "response {r:?} cannot also be a regressor"
                )));
            }
            if regs[..i].contains(r) {
                return Err(Error::InvalidParameter(format!("regressor {r:?} listed twice")));
            }
            panel.require_variable(r)?;
        }
        Ok(())
    }
}
