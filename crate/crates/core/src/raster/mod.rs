//! Prediction grids and their file formats.

mod ascii;
mod csv_out;
mod grid;
mod image;
mod render;

pub use ascii::{parse_ascii_grid, write_ascii_grid};
pub use csv_out::{raster_from_points_csv, write_csv};
pub use grid::{make_grid, Raster, RasterSpec, DEFAULT_NODATA};
pub use image::{viridis, write_heatmap, NODATA_RGB};
pub use render::{render_surface, Rendered};
