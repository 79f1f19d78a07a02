use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_NODATA: f64 = -9999.0;

/// Grid geometry. Row 0 is the northernmost row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterSpec {
    pub ncols: usize,
    pub nrows: usize,
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub cellsize: f64,
    pub nodata: f64,
}

impl RasterSpec {
    pub fn n_cells(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.xllcorner + (col as f64 + 0.5) * self.cellsize,
            self.yllcorner + ((self.nrows - row) as f64 - 0.5) * self.cellsize,
        )
    }

    /// Row and column of the cell containing `(x, y)`, if inside the grid.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let c = ((x - self.xllcorner) / self.cellsize).floor();
        let r_from_south = ((y - self.yllcorner) / self.cellsize).floor();
        if c < 0.0 || r_from_south < 0.0 || c >= self.ncols as f64 || r_from_south >= self.nrows as f64 {
            return None;
        }
        Some((self.nrows - 1 - r_from_south as usize, c as usize))
    }
}

fn cells(extent: f64, cellsize: f64) -> usize {
    let v = extent / cellsize;
    ((v - 1e-9 * v.max(1.0)).ceil() as usize).max(1)
}

/// Grid covering `(xmin, ymin, xmax, ymax)` anchored at the lower-left corner.
pub fn make_grid(bbox: (f64, f64, f64, f64), cellsize: f64) -> Result<RasterSpec> {
    let (xmin, ymin, xmax, ymax) = bbox;
    if !(cellsize > 0.0 && cellsize.is_finite()) {
        return Err(Error::InvalidParameter(format!("cellsize must be positive, got {cellsize}")));
    }
    if !(xmax > xmin && ymax > ymin) || ![xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite()) {
        return Err(Error::EmptyBbox);
    }
    Ok(RasterSpec {
        ncols: cells(xmax - xmin, cellsize),
        nrows: cells(ymax - ymin, cellsize),
        xllcorner: xmin,
        yllcorner: ymin,
        cellsize,
        nodata: DEFAULT_NODATA,
    })
}

/// Cell values in row-major order, north row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub spec: RasterSpec,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl Raster {
    /// Builds a raster; `None` cells become nodata.
    pub fn from_cells(spec: RasterSpec, cells: Vec<Option<f64>>) -> Result<Self> {
        if cells.len() != spec.n_cells() {
            return Err(Error::InvalidParameter(format!(
                "{} cells given for a {}x{} grid",
                cells.len(),
                spec.nrows,
                spec.ncols
            )));
        }
        let mask: Vec<bool> = cells.iter().map(Option::is_none).collect();
        let values = cells.into_iter().map(|c| c.unwrap_or(spec.nodata)).collect();
        Ok(Raster { spec, values, mask })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.spec.ncols + col;
        (!self.mask[i]).then_some(self.values[i])
    }

    pub fn unmasked_count(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    /// Minimum and maximum of unmasked cells.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| !**m)
            .fold(None, |acc, (v, _)| match acc {
                None => Some((*v, *v)),
                Some((lo, hi)) => Some((lo.min(*v), hi.max(*v))),
            })
    }
}
