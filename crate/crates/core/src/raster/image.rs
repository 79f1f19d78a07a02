use std::sync::OnceLock;

use super::grid::Raster;
use crate::error::{Error, Result};

static VIRIDIS_TABLE: &str = include_str!("../../data/viridis.txt");

/// The 256-entry viridis ramp, dark purple to yellow.
pub fn viridis() -> &'static [[u8; 3]; 256] {
    static TABLE: OnceLock<[[u8; 3]; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [[0u8; 3]; 256];
        let mut n = 0;
        for (i, line) in VIRIDIS_TABLE.lines().enumerate() {
            let rgb: Vec<u8> = line.split_whitespace().map(|t| t.parse().expect("colormap entry")).collect();
            out[i] = [rgb[0], rgb[1], rgb[2]];
            n += 1;
        }
        assert_eq!(n, 256, "colormap must have 256 entries");
        out
    })
}

pub const NODATA_RGB: [u8; 3] = [255, 255, 255];

/// Binary PPM (P6) heatmap, one pixel per cell. Limits default to the data
/// range; values outside are clamped.
pub fn write_heatmap(r: &Raster, vmin: Option<f64>, vmax: Option<f64>) -> Result<Vec<u8>> {
    let (lo, hi) = r.value_range().ok_or(Error::AllNodata)?;
    let vmin = vmin.unwrap_or(lo);
    let vmax = vmax.unwrap_or(hi);
    if !(vmin.is_finite() && vmax.is_finite()) || vmax < vmin {
        return Err(Error::InvalidParameter(format!("color limits must satisfy vmin <= vmax, got {vmin}, {vmax}")));
    }
    let table = viridis();
    let s = &r.spec;
    let mut out = format!("P6\n{} {}\n255\n", s.ncols, s.nrows).into_bytes();
    out.reserve(3 * s.n_cells());
    for (v, masked) in r.values().iter().zip(r.mask()) {
        let rgb = if *masked {
            NODATA_RGB
        } else if vmax > vmin {
            let t = ((v - vmin) / (vmax - vmin)).clamp(0.0, 1.0);
            table[(t * 255.0).round() as usize]
        } else {
            table[0]
        };
        out.extend_from_slice(&rgb);
    }
    Ok(out)
}
