use std::fmt::Write;

use super::grid::{Raster, RasterSpec};
use crate::error::{Error, Result};

/// `x,y,value` for every unmasked cell center, north to south then west to east.
pub fn write_csv(r: &Raster) -> String {
    let mut out = String::from("x,y,value\n");
    let s = &r.spec;
    for row in 0..s.nrows {
        for col in 0..s.ncols {
            if let Some(v) = r.get(row, col) {
                let (x, y) = s.cell_center(row, col);
                let _ = writeln!(out, "{x},{y},{v}");
            }
        }
    }
    out
}

/// Places `x,y,value` points onto `spec`; cells without a point are nodata.
/// Used for covariate grids.
pub fn raster_from_points_csv(text: &str, spec: &RasterSpec) -> Result<Raster> {
    let set = crate::geo::parse_samples_csv(text)?;
    let mut cells = vec![None; spec.n_cells()];
    for p in set.samples() {
        if let Some((row, col)) = spec.locate(p.x, p.y) {
            let slot = &mut cells[row * spec.ncols + col];
            if slot.is_some() {
                return Err(Error::MalformedRaster(format!("two points fall in cell ({row}, {col})")));
            }
            *slot = Some(p.value);
        }
    }
    Raster::from_cells(*spec, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{make_grid, DEFAULT_NODATA};

    #[test]
    fn single_cell() {
        let spec = RasterSpec {
            ncols: 1,
            nrows: 1,
            xllcorner: 0.0,
            yllcorner: 0.0,
            cellsize: 1.0,
            nodata: DEFAULT_NODATA,
        };
        let r = Raster::from_cells(spec, vec![Some(7.0)]).unwrap();
        assert_eq!(write_csv(&r), "x,y,value\n0.5,0.5,7\n");
    }

    #[test]
    fn masked_cells_skipped_and_reloaded() {
        let spec = make_grid((0.0, 0.0, 3.0, 2.0), 1.0).unwrap();
        let cells = vec![Some(1.0), None, Some(3.0), None, Some(5.0), Some(6.0)];
        let r = Raster::from_cells(spec, cells).unwrap();
        let text = write_csv(&r);
        assert_eq!(text.lines().count() - 1, r.unmasked_count());
        assert!(text.starts_with("x,y,value\n0.5,1.5,1\n2.5,1.5,3\n"));
        assert_eq!(raster_from_points_csv(&text, &spec).unwrap(), r);
    }
}
