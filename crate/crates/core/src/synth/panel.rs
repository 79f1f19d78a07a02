use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::econ::INTERCEPT_NAME;
use crate::error::{Error, Result};
use crate::model::{CountryId, Panel, PanelObservation, Rng, SectorId, Variable};

/// Periods simulated and discarded before the first recorded year when the
/// response is autoregressive.
pub const BURN_IN: usize = 50;

fn default_sectors() -> Vec<SectorId> {
    vec![SectorId::Agriculture]
}

fn default_response() -> String {
    "resilience".into()
}

/// Data-generating process for a panel. `beta` holds the true coefficients;
/// the `const` entry is the intercept and every other key is a regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelDgp {
    pub n_countries: usize,
    /// First and last year, inclusive.
    pub years: [i32; 2],
    #[serde(default = "default_sectors")]
    pub sectors: Vec<SectorId>,
    #[serde(default = "default_response")]
    pub response: String,
    pub beta: BTreeMap<String, f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub entity_effect_sd: f64,
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default)]
    pub missing_rate: f64,
    pub seed: u64,
}

/// Uniform range a regressor is drawn from.
pub fn regressor_range(name: &str) -> (f64, f64) {
    match name {
        "temperature" => (20.0, 30.0),
        "precipitation" => (500.0, 1500.0),
        "gdp_per_capita" => (300.0, 3000.0),
        "labor_share" => (20.0, 80.0),
        _ => (0.0, 10.0),
    }
}

impl PanelDgp {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_countries == 0 {
            return bad("n_countries must be at least 1".into());
        }
        if self.years[1] < self.years[0] {
            return bad(format!("empty year range {:?}", self.years));
        }
        if self.sectors.is_empty() {
            return bad("at least one sector is required".into());
        }
        if let Some(rho) = self.rho {
            if rho.is_nan() || rho.abs() >= 1.0 {
                return bad(format!("rho must satisfy |rho| < 1, got {rho}"));
            }
        }
        if !(self.entity_effect_sd >= 0.0 && self.noise_sd >= 0.0) {
            return bad("standard deviations must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return bad(format!("missing_rate must be in [0, 1), got {}", self.missing_rate));
        }
        if self.beta.values().any(|b| !b.is_finite()) {
            return bad("beta values must be finite".into());
        }
        if self.beta.contains_key(&self.response) {
            return bad(format!("response {:?} cannot also be a regressor", self.response));
        }
        Ok(())
    }

    pub fn regressors(&self) -> Vec<String> {
        self.beta.keys().filter(|k| *k != INTERCEPT_NAME).cloned().collect()
    }

    pub fn intercept(&self) -> f64 {
        self.beta.get(INTERCEPT_NAME).copied().unwrap_or(0.0)
    }
}

/// A generated panel with its latent entity effects.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDraw {
    pub panel: Panel,
    pub effects: BTreeMap<(CountryId, SectorId), f64>,
}

pub fn gen_panel(dgp: &PanelDgp) -> Result<Panel> {
    Ok(gen_panel_with_effects(dgp)?.panel)
}

/// Regressors are drawn per (country, year) and shared across sectors; the
/// entity effect is drawn per (country, sector).
pub fn gen_panel_with_effects(dgp: &PanelDgp) -> Result<PanelDraw> {
    dgp.validate()?;
    let regs = dgp.regressors();
    let betas: Vec<f64> = regs.iter().map(|r| dgp.beta[r]).collect();
    let ranges: Vec<(f64, f64)> = regs.iter().map(|r| regressor_range(r)).collect();
    let mut sectors = dgp.sectors.clone();
    sectors.sort();
    sectors.dedup();
    let n_years = (dgp.years[1] - dgp.years[0] + 1) as usize;
    let burn = if dgp.rho.is_some() { BURN_IN } else { 0 };
    let mut rng = Rng::new(dgp.seed);

    let mut registry = vec![Variable::new(dgp.response.clone(), None)];
    registry.extend(regs.iter().map(|r| Variable::new(r.clone(), None)));
    let mut observations = Vec::new();
    let mut effects = BTreeMap::new();
    for c in 0..dgp.n_countries {
        let country = CountryId::synthetic(c);
        let x: Vec<Vec<f64>> = (0..burn + n_years)
            .map(|_| ranges.iter().map(|&(lo, hi)| rng.uniform(lo, hi)).collect())
            .collect();
        for &sector in &sectors {
            let eta = dgp.entity_effect_sd * rng.normal();
            effects.insert((country, sector), eta);
            let fixed = |xt: &[f64]| dgp.intercept() + betas.iter().zip(xt).map(|(b, v)| b * v).sum::<f64>() + eta;
            let mut prev = dgp.rho.map(|rho| {
                let mean_x: f64 = betas
                    .iter()
                    .zip(&ranges)
                    .map(|(b, (lo, hi))| b * 0.5 * (lo + hi))
                    .sum();
                (dgp.intercept() + mean_x + eta) / (1.0 - rho)
            });
            for (t, xt) in x.iter().enumerate() {
                let r = fixed(xt) + dgp.rho.zip(prev).map_or(0.0, |(rho, p)| rho * p) + dgp.noise_sd * rng.normal();
                prev = Some(r);
                if t < burn {
                    continue;
                }
                let mut values: Vec<Option<f64>> = vec![Some(r)];
                values.extend(xt.iter().map(|v| Some(*v)));
                let first = t == burn;
                for v in values.iter_mut() {
                    let keep_first = first && dgp.rho.is_some();
                    if rng.next_f64() < dgp.missing_rate && !keep_first {
                        *v = None;
                    }
                }
                observations.push(PanelObservation::new(
                    country,
                    dgp.years[0] + (t - burn) as i32,
                    sector,
                    values,
                ));
            }
        }
    }
    Ok(PanelDraw {
        panel: Panel::new(registry, observations)?,
        effects,
    })
}
