use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{CountryId, Panel, SectorId};

use super::spec::ModelSpec;

pub const INTERCEPT_NAME: &str = "const";

/// Estimation unit: one (country, sector) series.
pub type Entity = (CountryId, SectorId);

/// Regression arrays after listwise deletion.
#[derive(Debug, Clone)]
pub struct Design {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
    /// Entity label of every retained row (the clustering variable).
    pub entities: Vec<Entity>,
    /// Panel row index of every retained row.
    pub rows: Vec<usize>,
}

impl Design {
    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_entities(&self) -> usize {
        let mut e = self.entities.clone();
        e.dedup();
        e.len()
    }
}

/// Builds `y` and `X` in panel order. The intercept column (when requested)
/// comes first, followed by climate then structural regressors. Rows with any
/// missing cell among the used variables are dropped.
pub fn design_matrices(panel: &Panel, spec: &ModelSpec) -> Result<Design> {
    spec.validate(panel)?;
    let resp = panel.require_variable(&spec.response)?;
    let regs = spec.regressors();
    let reg_idx: Vec<usize> = regs
        .iter()
        .map(|r| panel.require_variable(r))
        .collect::<Result<_>>()?;

    let mut names = Vec::with_capacity(regs.len() + 1);
    if spec.intercept {
        names.push(INTERCEPT_NAME.to_string());
    }
    names.extend(regs.iter().cloned());
    let k = names.len();

    let mut y = Vec::new();
    let mut data = Vec::new();
    let mut entities = Vec::new();
    let mut rows = Vec::new();
    for (row, obs) in panel.observations().iter().enumerate() {
        let Some(r) = obs.values[resp] else { continue };
        let vals: Option<Vec<f64>> = reg_idx.iter().map(|&j| obs.values[j]).collect();
        let Some(vals) = vals else { continue };
        y.push(r);
        if spec.intercept {
            data.push(1.0);
        }
        data.extend(vals);
        entities.push((obs.country, obs.sector));
        rows.push(row);
    }
    let n = y.len();
    if n < k + 1 {
        return Err(Error::InsufficientRows {
            available: n,
            required: k + 1,
        });
    }
    Ok(Design {
        y: DVector::from_vec(y),
        x: DMatrix::from_row_slice(n, k, &data),
        names,
        entities,
        rows,
    })
}
