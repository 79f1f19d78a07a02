//! Spatial interpolation: variograms, kriging, IDW, thin-plate splines and
//! leave-one-out validation.

mod cv;
mod idw;
mod io;
mod kriging;
mod regression;
mod spline;
mod variogram;

pub use cv::{loocv, CvMethod, CvReport, FoldOutcome};
pub use idw::idw;
pub use io::{parse_samples_csv, write_samples_csv};
pub use kriging::{krige, KrigingPrediction, OrdinaryKriging};
pub use regression::{regression_krige, RegressionKriging, TrendModel};
pub use spline::{spline_tps, ThinPlateSpline};
pub use variogram::{
    empirical_variogram, fit_objective, fit_variogram, max_pairwise_distance, EmpiricalVariogram, VariogramBin,
    VariogramFit,
};

use crate::error::Result;
use crate::model::GeoSampleSet;

/// A fitted interpolator ready for repeated point predictions.
#[derive(Debug, Clone)]
pub enum Interpolator {
    Kriging(OrdinaryKriging),
    Regression(RegressionKriging),
    Idw { samples: GeoSampleSet, power: f64 },
    Spline(ThinPlateSpline),
}

impl Interpolator {
    pub fn idw(samples: &GeoSampleSet, power: f64) -> Result<Self> {
        idw(samples, power, (0.0, 0.0))?;
        Ok(Interpolator::Idw {
            samples: samples.clone(),
            power,
        })
    }

    pub fn needs_covariates(&self) -> bool {
        matches!(self, Interpolator::Regression(_))
    }

    /// Value and, for kriging variants, the kriging variance. `covariates` is
    /// only read by regression kriging.
    pub fn predict(&self, x: f64, y: f64, covariates: &[f64]) -> (f64, Option<f64>) {
        match self {
            Interpolator::Kriging(k) => {
                let p = k.predict(x, y);
                (p.value, Some(p.variance))
            }
            Interpolator::Regression(r) => {
                let p = r.predict(x, y, covariates);
                (p.value, Some(p.variance))
            }
            Interpolator::Idw { samples, power } => (idw(samples, *power, (x, y)).expect("validated at construction"), None),
            Interpolator::Spline(s) => (s.predict(x, y), None),
        }
    }
}
