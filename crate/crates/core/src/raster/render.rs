use rayon::prelude::*;

use super::grid::{Raster, RasterSpec};
use crate::error::{Error, Result};
use crate::geo::Interpolator;
use crate::model::GeoSampleSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub values: Raster,
    /// Kriging variance per cell, for kriging interpolators.
    pub variance: Option<Raster>,
}

/// Predicts every cell center. Cells farther than `mask_beyond` from all
/// samples, or lacking a covariate value, become nodata. `covariates` holds
/// one raster per covariate on the same grid.
pub fn render_surface(
    interp: &Interpolator,
    samples: &GeoSampleSet,
    spec: &RasterSpec,
    mask_beyond: Option<f64>,
    covariates: &[Raster],
) -> Result<Rendered> {
    if interp.needs_covariates() {
        let want = samples.covariate_names().len();
        if covariates.len() != want {
            return Err(Error::InvalidParameter(format!(
                "regression kriging needs {want} covariate grids, got {}",
                covariates.len()
            )));
        }
        if let Some(bad) = covariates.iter().position(|c| c.spec != *spec) {
            return Err(Error::InvalidParameter(format!("covariate grid {bad} does not match the output grid")));
        }
    }
    let cells: Vec<(Option<f64>, Option<f64>)> = (0..spec.n_cells())
        .into_par_iter()
        .map(|i| {
            let (row, col) = (i / spec.ncols, i % spec.ncols);
            let (x, y) = spec.cell_center(row, col);
            if let Some(limit) = mask_beyond {
                if samples.samples().iter().all(|s| s.distance_to(x, y) > limit) {
                    return (None, None);
                }
            }
            let covs: Option<Vec<f64>> = if interp.needs_covariates() {
                covariates.iter().map(|c| c.get(row, col)).collect()
            } else {
                Some(Vec::new())
            };
            match covs {
                None => (None, None),
                Some(covs) => {
                    let (v, var) = interp.predict(x, y, &covs);
                    (Some(v), var)
                }
            }
        })
        .collect();
    let has_variance = matches!(interp, Interpolator::Kriging(_) | Interpolator::Regression(_));
    let (vals, vars): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    Ok(Rendered {
        values: Raster::from_cells(*spec, vals)?,
        variance: if has_variance { Some(Raster::from_cells(*spec, vars)?) } else { None },
    })
}
