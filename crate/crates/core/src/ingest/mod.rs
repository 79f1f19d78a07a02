//! CSV ingestion, cross-source harmonization and missing-value imputation.

mod csv_panel;
mod harmonize;
mod impute;
mod rules;

pub use csv_panel::{is_missing_token, parse_panel_csv, write_panel_csv, MISSING_TOKENS};
pub use harmonize::harmonize;
pub use impute::{impute, ImputationMethod, ImputationReport};
pub use rules::{HarmonizationRules, UnitConversion};
