use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GeoSampleSet, VariogramModel, COINCIDENCE_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrigingPrediction {
    pub value: f64,
    pub variance: f64,
    /// Weights aligned with the sample order of the set used for prediction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

/// Pivot ratio below which the kriging matrix is treated as singular.
const PIVOT_RATIO_TOL: f64 = 1e-14;

fn well_conditioned(lu: &LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> bool {
    let u = lu.u();
    let diag: Vec<f64> = u.diagonal().iter().map(|v| v.abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min.is_finite() && min / max > PIVOT_RATIO_TOL
}

/// Ordinary kriging in semivariance form with the system factorized once.
/// Semivariances are divided by the sill before factorization so the pivot
/// check does not depend on the data scale; weights are unaffected.
#[derive(Debug, Clone)]
pub struct OrdinaryKriging {
    coords: Vec<(f64, f64)>,
    values: Vec<f64>,
    model: VariogramModel,
    lu: Option<LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    jittered: bool,
}

impl OrdinaryKriging {
    pub fn new(samples: &GeoSampleSet, model: VariogramModel) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooFewSamples {
                available: 0,
                required: 1,
            });
        }
        let coords: Vec<(f64, f64)> = samples.samples().iter().map(|s| (s.x, s.y)).collect();
        let values = samples.values();
        if model.is_flat() {
            return Ok(OrdinaryKriging {
                coords,
                values,
                model,
                lu: None,
                jittered: false,
            });
        }
        let n = coords.len();
        let mut a = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in (i + 1)..n {
                let h = (coords[i].0 - coords[j].0).hypot(coords[i].1 - coords[j].1);
                let g = model.semivariance(h) / model.sill;
                a[(i, j)] = g;
                a[(j, i)] = g;
            }
            a[(i, n)] = 1.0;
            a[(n, i)] = 1.0;
        }
        let lu = a.clone().lu();
        let (lu, jittered) = if well_conditioned(&lu) {
            (lu, false)
        } else {
            // Equivalent to adding the jitter to the covariance diagonal.
            let eps = 1e-10;
            for i in 0..n {
                a[(i, i)] -= eps;
            }
            let lu = a.lu();
            if !well_conditioned(&lu) {
                return Err(Error::SingularSystem(format!(
                    "ordinary kriging system with {n} samples is singular"
                )));
            }
            log::warn!("kriging system needed diagonal jitter");
            (lu, true)
        };
        Ok(OrdinaryKriging {
            coords,
            values,
            model,
            lu: Some(lu),
            jittered,
        })
    }

    pub fn model(&self) -> &VariogramModel {
        &self.model
    }

    pub fn jittered(&self) -> bool {
        self.jittered
    }

    pub fn predict(&self, x: f64, y: f64) -> KrigingPrediction {
        let n = self.coords.len();
        let dists: Vec<f64> = self.coords.iter().map(|c| (c.0 - x).hypot(c.1 - y)).collect();
        let Some(lu) = &self.lu else {
            let w = 1.0 / n as f64;
            return KrigingPrediction {
                value: self.values.iter().sum::<f64>() * w,
                variance: 0.0,
                weights: Some(vec![w; n]),
            };
        };
        if self.model.nugget == 0.0 {
            if let Some(i) = dists.iter().position(|&d| d < COINCIDENCE_TOL) {
                let mut weights = vec![0.0; n];
                weights[i] = 1.0;
                return KrigingPrediction {
                    value: self.values[i],
                    variance: 0.0,
                    weights: Some(weights),
                };
            }
        }
        let mut b = DVector::zeros(n + 1);
        for (i, &d) in dists.iter().enumerate() {
            b[i] = self.model.semivariance(d) / self.model.sill;
        }
        b[n] = 1.0;
        let sol = lu.solve(&b).expect("factorization checked at construction");
        let weights: Vec<f64> = sol.iter().take(n).copied().collect();
        let value = weights.iter().zip(&self.values).map(|(w, v)| w * v).sum();
        let variance = self.model.sill * (weights.iter().zip(b.iter()).map(|(w, g)| w * g).sum::<f64>() + sol[n]);
        KrigingPrediction {
            value,
            variance: variance.max(0.0),
            weights: Some(weights),
        }
    }
}

/// One-off ordinary kriging prediction.
pub fn krige(samples: &GeoSampleSet, model: &VariogramModel, target: (f64, f64)) -> Result<KrigingPrediction> {
    Ok(OrdinaryKriging::new(samples, *model)?.predict(target.0, target.1))
}
