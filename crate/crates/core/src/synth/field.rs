use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GeoSample, GeoSampleSet, Rng, VariogramModel};

/// Linear trend on synthetic covariate surfaces. Covariates are taken in key
/// order; see [`covariate_value`] for their definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTrend {
    pub alpha: f64,
    pub beta: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDgp {
    pub variogram: VariogramModel,
    pub n_samples: usize,
    /// (xmin, ymin, xmax, ymax)
    pub bbox: [f64; 4],
    #[serde(default)]
    pub trend: Option<FieldTrend>,
    pub seed: u64,
}

/// Covariate `index` at `(x, y)`: with u, v the coordinates rescaled to
/// [0, 1] over the bbox, covariates are u, v, u², v², u³, ...
pub fn covariate_value(bbox: [f64; 4], index: usize, x: f64, y: f64) -> f64 {
    let u = (x - bbox[0]) / (bbox[2] - bbox[0]);
    let v = (y - bbox[1]) / (bbox[3] - bbox[1]);
    let base = if index.is_multiple_of(2) { u } else { v };
    base.powi((index / 2 + 1) as i32)
}

impl FieldDgp {
    pub fn validate(&self) -> Result<()> {
        let v = &self.variogram;
        VariogramModel::new(v.family, v.nugget, v.sill, v.range)?;
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        let [xmin, ymin, xmax, ymax] = self.bbox;
        if !(xmax > xmin && ymax > ymin) {
            return Err(Error::EmptyBbox);
        }
        Ok(())
    }
}

/// Gaussian random field samples at uniform random locations, drawn through
/// a Cholesky factor of the covariance matrix.
pub fn gen_field(dgp: &FieldDgp) -> Result<GeoSampleSet> {
    dgp.validate()?;
    let n = dgp.n_samples;
    let [xmin, ymin, xmax, ymax] = dgp.bbox;
    let mut rng = Rng::new(dgp.seed);
    let locs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = rng.uniform(xmin, xmax);
            (x, rng.uniform(ymin, ymax))
        })
        .collect();
    let z = DVector::from_fn(n, |_, _| rng.normal());
    let model = &dgp.variogram;
    let field = if model.sill > 0.0 {
        let mut c = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                model.sill
            } else {
                model.covariance((locs[i].0 - locs[j].0).hypot(locs[i].1 - locs[j].1))
            }
        });
        let chol = match c.clone().cholesky() {
            Some(ch) => ch,
            None => {
                for i in 0..n {
                    c[(i, i)] += 1e-10 * model.sill;
                }
                c.cholesky().ok_or_else(|| {
                    Error::FactorizationFailed(format!("covariance of {n} samples is not positive definite"))
                })?
            }
        };
        chol.l() * z
    } else {
        DVector::zeros(n)
    };
    let names: Vec<String> = dgp.trend.as_ref().map(|t| t.beta.keys().cloned().collect()).unwrap_or_default();
    let samples = locs
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let covariates: Vec<f64> = (0..names.len()).map(|j| covariate_value(dgp.bbox, j, x, y)).collect();
            let trend = dgp.trend.as_ref().map_or(0.0, |t| {
                t.alpha + t.beta.values().zip(&covariates).map(|(b, c)| b * c).sum::<f64>()
            });
            GeoSample {
                x,
                y,
                value: field[i] + trend,
                covariates,
            }
        })
        .collect();
    GeoSampleSet::with_covariates(samples, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::empirical_variogram;
    use crate::model::VariogramFamily;

    fn dgp(model: VariogramModel, n: usize, seed: u64) -> FieldDgp {
        FieldDgp {
            variogram: model,
            n_samples: n,
            bbox: [0.0, 0.0, 100.0, 100.0],
            trend: None,
            seed,
        }
    }

    #[test]
    fn pure_nugget_is_uncorrelated() {
        let m = VariogramModel::new(VariogramFamily::Exponential, 1.0, 1.0, 10.0).unwrap();
        let v = gen_field(&dgp(m, 500, 5)).unwrap().values();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var: f64 = v.iter().map(|a| (a - mean).powi(2)).sum();
        let cov: f64 = v.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        assert!((cov / var).abs() <= 0.1, "{}", cov / var);
    }

    #[test]
    fn empirical_variogram_tracks_model() {
        let m = VariogramModel::new(VariogramFamily::Exponential, 0.0, 1.0, 30.0).unwrap();
        let set = gen_field(&dgp(m, 800, 3)).unwrap();
        let emp = empirical_variogram(&set, 10, Some(50.0)).unwrap();
        for b in &emp.bins[3..7] {
            let g = m.semivariance(b.h);
            assert!((b.gamma - g).abs() <= 0.2 * g, "h={} emp={} model={}", b.h, b.gamma, g);
        }
    }

    #[test]
    fn deterministic_with_trend() {
        let m = VariogramModel::new(VariogramFamily::Spherical, 0.1, 1.0, 25.0).unwrap();
        let mut d = dgp(m, 60, 9);
        d.trend = Some(FieldTrend {
            alpha: 2.0,
            beta: BTreeMap::from([("c".to_string(), 1.5), ("z".to_string(), -0.5)]),
        });
        let a = gen_field(&d).unwrap();
        assert_eq!(a, gen_field(&d).unwrap());
        assert_eq!(a.covariate_names(), ["c", "z"]);
        let s = &a.samples()[0];
        assert_eq!(s.covariates[0], s.x / 100.0);
        assert_eq!(s.covariates[1], s.y / 100.0);
    }
}
