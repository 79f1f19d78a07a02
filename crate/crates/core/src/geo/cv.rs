use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kriging::OrdinaryKriging;
use super::regression::{RegressionKriging, TrendModel};
use super::spline::ThinPlateSpline;
use super::variogram::{empirical_variogram, fit_variogram};
use super::idw::idw;
use crate::error::{Error, Result};
use crate::model::{GeoSampleSet, VariogramFamily, VariogramModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum CvMethod {
    /// Ordinary kriging; the variogram is refit on every fold unless `fixed`
    /// is given.
    Kriging {
        family: VariogramFamily,
        n_bins: usize,
        max_dist: Option<f64>,
        fixed: Option<VariogramModel>,
    },
    /// Covariate trend plus ordinary kriging of its residuals; trend and
    /// residual variogram are refit on every fold.
    #[serde(rename = "regression_kriging")]
    RegressionKriging {
        family: VariogramFamily,
        n_bins: usize,
        max_dist: Option<f64>,
    },
    Idw {
        power: f64,
    },
    Spline {
        smoothing: f64,
    },
}

impl CvMethod {
    pub fn label(&self) -> &'static str {
        match self {
            CvMethod::Kriging { .. } => "kriging",
            CvMethod::RegressionKriging { .. } => "regression_kriging",
            CvMethod::Idw { .. } => "idw",
            CvMethod::Spline { .. } => "spline",
        }
    }

    fn min_samples(&self) -> usize {
        match self {
            CvMethod::Spline { .. } => 4,
            _ => 3,
        }
    }

    fn predict_held_out(&self, train: &GeoSampleSet, target: (f64, f64), covariates: &[f64]) -> Result<f64> {
        match self {
            CvMethod::Kriging {
                family,
                n_bins,
                max_dist,
                fixed,
            } => {
                let model = match fixed {
                    Some(m) => *m,
                    None => {
                        let emp = empirical_variogram(train, *n_bins, *max_dist)?;
                        fit_variogram(&emp, *family)?.model
                    }
                };
                Ok(OrdinaryKriging::new(train, model)?.predict(target.0, target.1).value)
            }
            CvMethod::RegressionKriging {
                family,
                n_bins,
                max_dist,
            } => {
                let trend = TrendModel::fit(train)?;
                let residuals = train.with_values(&trend.residuals(train));
                let emp = empirical_variogram(&residuals, *n_bins, *max_dist)?;
                let model = fit_variogram(&emp, *family)?.model;
                Ok(RegressionKriging::new(train, model)?
                    .predict(target.0, target.1, covariates)
                    .value)
            }
            CvMethod::Idw { power } => idw(train, *power, target),
            CvMethod::Spline { smoothing } => Ok(ThinPlateSpline::fit(train, *smoothing)?.predict(target.0, target.1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub x: f64,
    pub y: f64,
    pub observed: f64,
    pub predicted: Option<f64>,
    /// Prediction minus observation.
    pub error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub method: String,
    pub rmse: f64,
    pub mae: f64,
    pub n_folds: usize,
    pub n_failed: usize,
    pub folds: Vec<FoldOutcome>,
}

/// Leave-one-out cross-validation. Failed folds are recorded and excluded
/// from the error summaries; the call fails only if every fold fails.
pub fn loocv(samples: &GeoSampleSet, method: &CvMethod) -> Result<CvReport> {
    let required = method.min_samples();
    if samples.len() < required {
        return Err(Error::TooFewSamples {
            available: samples.len(),
            required,
        });
    }
    let folds: Vec<FoldOutcome> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let held = &samples.samples()[i];
            let outcome = samples
                .without(i)
                .and_then(|train| method.predict_held_out(&train, (held.x, held.y), &held.covariates));
            match outcome {
                Ok(p) => FoldOutcome {
                    x: held.x,
                    y: held.y,
                    observed: held.value,
                    predicted: Some(p),
                    error: Some(p - held.value),
                    failure: None,
                },
                Err(e) => FoldOutcome {
                    x: held.x,
                    y: held.y,
                    observed: held.value,
                    predicted: None,
                    error: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    let errors: Vec<f64> = folds.iter().filter_map(|f| f.error).collect();
    if errors.is_empty() {
        let first = folds.iter().find_map(|f| f.failure.clone()).unwrap_or_default();
        return Err(Error::AllFoldsFailed(format!("{}: {first}", method.label())));
    }
    let m = errors.len() as f64;
    Ok(CvReport {
        method: method.label().to_string(),
        rmse: (errors.iter().map(|e| e * e).sum::<f64>() / m).sqrt(),
        mae: errors.iter().map(|e| e.abs()).sum::<f64>() / m,
        n_folds: folds.len(),
        n_failed: folds.len() - errors.len(),
        folds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeoSample;

    fn kriging() -> CvMethod {
        CvMethod::Kriging {
            family: VariogramFamily::Exponential,
            n_bins: 4,
            max_dist: None,
            fixed: None,
        }
    }

    #[test]
    fn constant_field_zero_error() {
        let pts: Vec<GeoSample> = (0..12)
            .map(|i| GeoSample::new((i % 4) as f64 * 1.7, (i / 4) as f64 + 0.2 * (i % 3) as f64, 2.5))
            .collect();
        let set = GeoSampleSet::new(pts).unwrap();
        for m in [kriging(), CvMethod::Idw { power: 2.0 }, CvMethod::Spline { smoothing: 0.0 }] {
            let r = loocv(&set, &m).unwrap();
            assert_eq!(r.n_failed, 0, "{m:?}");
            assert_eq!((r.rmse, r.mae), (0.0, 0.0), "{m:?}");
        }
    }

    #[test]
    fn regression_kriging_exact_on_linear_trend() {
        let pts: Vec<GeoSample> = (0..16)
            .map(|i| {
                let (x, y) = ((i % 4) as f64 * 2.0 + 0.1 * (i / 4) as f64, (i / 4) as f64 * 1.5);
                let c = x * 0.3 + (y * 0.9).sin();
                GeoSample {
                    x,
                    y,
                    value: 4.0 - 2.0 * c,
                    covariates: vec![c],
                }
            })
            .collect();
        let set = GeoSampleSet::with_covariates(pts, vec!["c".into()]).unwrap();
        let m = CvMethod::RegressionKriging {
            family: VariogramFamily::Spherical,
            n_bins: 4,
            max_dist: None,
        };
        let r = loocv(&set, &m).unwrap();
        assert_eq!(r.n_failed, 0, "{:?}", r.folds.iter().filter_map(|f| f.failure.clone()).collect::<Vec<_>>());
        assert!(r.rmse < 1e-9, "{}", r.rmse);
    }

    #[test]
    fn idw_triangle_by_hand() {
        let set = GeoSampleSet::new(vec![
            GeoSample::new(0.0, 0.0, 1.0),
            GeoSample::new(3.0, 0.0, 4.0),
            GeoSample::new(0.0, 4.0, 9.0),
        ])
        .unwrap();
        let r = loocv(&set, &CvMethod::Idw { power: 1.0 }).unwrap();
        // distances: |01| = 3, |02| = 4, |12| = 5
        let p0 = (4.0 / 3.0 + 9.0 / 4.0) / (1.0 / 3.0 + 1.0 / 4.0);
        let p2 = (1.0 / 4.0 + 4.0 / 5.0) / (1.0 / 4.0 + 1.0 / 5.0);
        let p1 = (1.0 / 3.0 + 9.0 / 5.0) / (1.0 / 3.0 + 1.0 / 5.0);
        let expected = [p0 - 1.0, p2 - 9.0, p1 - 4.0];
        for (f, e) in r.folds.iter().zip(expected) {
            assert!((f.error.unwrap() - e).abs() < 1e-12);
        }
        let rmse = (expected.iter().map(|e| e * e).sum::<f64>() / 3.0).sqrt();
        assert!((r.rmse - rmse).abs() < 1e-12);
    }

    #[test]
    fn failing_folds_are_recorded() {
        let set = GeoSampleSet::new(vec![
            GeoSample::new(0.0, 0.0, 1.0),
            GeoSample::new(1.0, 0.0, 4.0),
            GeoSample::new(2.0, 0.0, 9.0),
            GeoSample::new(3.0, 0.0, 2.0),
        ])
        .unwrap();
        let err = loocv(&set, &CvMethod::Spline { smoothing: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::AllFoldsFailed(_)));
    }
}
