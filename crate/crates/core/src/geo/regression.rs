use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kriging::{KrigingPrediction, OrdinaryKriging};
use crate::error::{Error, Result};
use crate::linalg::{first_dependent_column, least_squares};
use crate::model::{GeoSampleSet, VariogramModel};

/// Linear trend `alpha + Σ beta·covariate`. Covariates dropped as constant
/// carry no coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendModel {
    pub alpha: f64,
    pub beta: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub dropped: Vec<String>,
}

impl TrendModel {
    /// Ordinary least-squares trend on the samples' covariates.
    pub fn fit(samples: &GeoSampleSet) -> Result<Self> {
        let names = samples.covariate_names();
        let n = samples.len();
        if n < names.len() + 2 {
            return Err(Error::TooFewSamples {
                available: n,
                required: names.len() + 2,
            });
        }
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (j, name) in names.iter().enumerate() {
            let first = samples.samples()[0].covariates[j];
            let constant = samples
                .samples()
                .iter()
                .all(|s| (s.covariates[j] - first).abs() <= 1e-12 * (1.0 + first.abs()));
            if constant {
                log::warn!("covariate {name:?} is constant; absorbed by the intercept");
                dropped.push(name.clone());
            } else {
                kept.push(j);
            }
        }
        let x = DMatrix::from_fn(n, kept.len() + 1, |i, c| {
            if c == 0 {
                1.0
            } else {
                samples.samples()[i].covariates[kept[c - 1]]
            }
        });
        if let Some(col) = first_dependent_column(&x) {
            let name = if col == 0 { "intercept".to_string() } else { names[kept[col - 1]].clone() };
            return Err(Error::RankDeficientTrend(name));
        }
        let y = DVector::from_vec(samples.values());
        let (beta, _) = least_squares(&x, &y).map_err(|e| match e {
            Error::RankDeficient { column } => Error::RankDeficientTrend(column),
            other => other,
        })?;
        Ok(TrendModel {
            alpha: beta[0],
            beta: kept.iter().enumerate().map(|(c, &j)| (names[j].clone(), beta[c + 1])).collect(),
            dropped,
        })
    }

    /// Evaluates the trend with covariates aligned to `names`.
    pub fn eval_aligned(&self, names: &[String], covariates: &[f64]) -> f64 {
        self.alpha
            + self
                .beta
                .iter()
                .map(|(name, b)| {
                    let j = names.iter().position(|n| n == name).expect("trend name among covariates");
                    b * covariates[j]
                })
                .sum::<f64>()
    }

    pub fn residuals(&self, samples: &GeoSampleSet) -> Vec<f64> {
        samples
            .samples()
            .iter()
            .map(|s| s.value - self.eval_aligned(samples.covariate_names(), &s.covariates))
            .collect()
    }
}

/// Trend plus ordinary kriging of the trend residuals. The reported variance
/// is the residual kriging variance; trend uncertainty is not included.
#[derive(Debug, Clone)]
pub struct RegressionKriging {
    pub trend: TrendModel,
    names: Vec<String>,
    residual: OrdinaryKriging,
    residual_set: GeoSampleSet,
}

impl RegressionKriging {
    pub fn new(samples: &GeoSampleSet, model: VariogramModel) -> Result<Self> {
        let trend = TrendModel::fit(samples)?;
        let residual_set = samples.with_values(&trend.residuals(samples));
        Ok(RegressionKriging {
            residual: OrdinaryKriging::new(&residual_set, model)?,
            names: samples.covariate_names().to_vec(),
            trend,
            residual_set,
        })
    }

    pub fn residual_samples(&self) -> &GeoSampleSet {
        &self.residual_set
    }

    /// Prediction with covariates aligned to the sample set's covariate names.
    pub fn predict(&self, x: f64, y: f64, covariates: &[f64]) -> KrigingPrediction {
        let mut p = self.residual.predict(x, y);
        p.value += self.trend.eval_aligned(&self.names, covariates);
        p
    }
}

pub fn regression_krige(
    samples: &GeoSampleSet,
    model: &VariogramModel,
    target: (f64, f64),
    target_covariates: &BTreeMap<String, f64>,
) -> Result<KrigingPrediction> {
    let covs = samples
        .covariate_names()
        .iter()
        .enumerate()
        .map(|(index, name)| {
            target_covariates.get(name).copied().ok_or_else(|| Error::MissingCovariate {
                index,
                name: name.clone(),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(RegressionKriging::new(samples, *model)?.predict(target.0, target.1, &covs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::krige;
    use crate::model::{GeoSample, VariogramFamily};

    fn samples(f: impl Fn(f64, f64, f64, f64) -> f64) -> GeoSampleSet {
        let mut v = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                let (x, y) = (i as f64 * 2.0 + 0.3 * j as f64, j as f64 * 1.5);
                let (c, z) = ((x * 0.4).cos() * 3.0, x * y * 0.05 + j as f64);
                v.push(GeoSample {
                    x,
                    y,
                    value: f(x, y, c, z),
                    covariates: vec![c, z],
                });
            }
        }
        GeoSampleSet::with_covariates(v, vec!["c".into(), "z".into()]).unwrap()
    }

    fn model() -> VariogramModel {
        VariogramModel::new(VariogramFamily::Exponential, 0.1, 1.0, 4.0).unwrap()
    }

    #[test]
    fn exact_linear_data() {
        let s = samples(|_, _, c, z| 2.0 + 0.5 * c - 1.5 * z);
        let covs = BTreeMap::from([("c".to_string(), 0.7), ("z".to_string(), -2.0)]);
        let p = regression_krige(&s, &model(), (1.1, 2.2), &covs).unwrap();
        assert!((p.value - (2.0 + 0.35 + 3.0)).abs() < 1e-9);
    }

    #[test]
    fn no_covariates_matches_ordinary_kriging() {
        let s = samples(|x, y, _, _| (x * 0.3).sin() + y);
        let plain = GeoSampleSet::new(
            s.samples()
                .iter()
                .map(|g| GeoSample::new(g.x, g.y, g.value))
                .collect(),
        )
        .unwrap();
        for target in [(0.5, 0.5), (3.3, 1.2), (9.0, 9.0)] {
            let a = regression_krige(&plain, &model(), target, &BTreeMap::new()).unwrap();
            let b = krige(&plain, &model(), target).unwrap();
            assert!((a.value - b.value).abs() < 1e-9);
            assert!((a.variance - b.variance).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_covariate_dropped_duplicate_rejected() {
        let base = samples(|x, _, c, _| x + c);
        let with = |extra: &dyn Fn(&GeoSample) -> f64| {
            let v = base
                .samples()
                .iter()
                .map(|g| {
                    let mut g = g.clone();
                    let e = extra(&g);
                    g.covariates.push(e);
                    g
                })
                .collect();
            GeoSampleSet::with_covariates(v, vec!["c".into(), "z".into(), "k".into()]).unwrap()
        };
        let t = TrendModel::fit(&with(&|_| 5.0)).unwrap();
        assert_eq!(t.dropped, vec!["k".to_string()]);
        assert!(matches!(
            TrendModel::fit(&with(&|g| 2.0 * g.covariates[0])),
            Err(Error::RankDeficientTrend(name)) if name == "k"
        ));
    }

    #[test]
    fn missing_target_covariate() {
        let s = samples(|x, _, _, _| x);
        let covs = BTreeMap::from([("c".to_string(), 0.7)]);
        assert!(matches!(
            regression_krige(&s, &model(), (0.0, 0.0), &covs),
            Err(Error::MissingCovariate { index: 1, .. })
        ));
    }
}
