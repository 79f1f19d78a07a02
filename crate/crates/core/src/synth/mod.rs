//! Synthetic panels and spatial fields with known generating parameters.

mod field;
mod panel;

pub use field::{covariate_value, gen_field, FieldDgp, FieldTrend};
pub use panel::{gen_panel, gen_panel_with_effects, regressor_range, PanelDgp, PanelDraw, BURN_IN};
