use std::fmt::Write;

use super::grid::{Raster, RasterSpec};
use crate::error::{Error, Result};

/// ESRI ASCII grid text with LF line endings and shortest round-trip numbers.
pub fn write_ascii_grid(r: &Raster) -> String {
    let s = &r.spec;
    let mut out = format!(
        "ncols {}\nnrows {}\nxllcorner {}\nyllcorner {}\ncellsize {}\nNODATA_value {}\n",
        s.ncols, s.nrows, s.xllcorner, s.yllcorner, s.cellsize, s.nodata
    );
    for row in 0..s.nrows {
        for col in 0..s.ncols {
            if col > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", r.values()[row * s.ncols + col]);
        }
        out.push('\n');
    }
    out
}

pub fn parse_ascii_grid(text: &str) -> Result<Raster> {
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| Error::MalformedRaster(format!("missing {key} header")))?;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(v), None) if k.eq_ignore_ascii_case(key) => Ok(v.to_string()),
            _ => Err(Error::MalformedRaster(format!("expected `{key} <value>`, got {line:?}"))),
        }
    };
    let count = |v: String, key: &str| {
        v.parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::MalformedRaster(format!("bad {key}: {v:?}")))
    };
    let real = |v: String, key: &str| {
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::MalformedRaster(format!("bad {key}: {v:?}")))
    };
    let ncols = count(header("ncols")?, "ncols")?;
    let nrows = count(header("nrows")?, "nrows")?;
    let xllcorner = real(header("xllcorner")?, "xllcorner")?;
    let yllcorner = real(header("yllcorner")?, "yllcorner")?;
    let cellsize = real(header("cellsize")?, "cellsize")?;
    let nodata = real(header("NODATA_value")?, "NODATA_value")?;
    let spec = RasterSpec {
        ncols,
        nrows,
        xllcorner,
        yllcorner,
        cellsize,
        nodata,
    };
    let mut cells = Vec::with_capacity(spec.n_cells());
    for line in lines.filter(|l| !l.trim().is_empty()) {
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::MalformedRaster(format!("bad cell value {tok:?}")))?;
            cells.push((v != nodata).then_some(v));
        }
    }
    if cells.len() != spec.n_cells() {
        return Err(Error::MalformedRaster(format!(
            "expected {} cells, found {}",
            spec.n_cells(),
            cells.len()
        )));
    }
    Raster::from_cells(spec, cells)
}
