use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CountryId;

/// Affine unit conversion `v' = factor·v + offset`.
///
/// With `from_unit` set, the rule only applies to sources that declare that
/// unit for the variable; `to_unit` becomes the declared unit afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitConversion {
    pub factor: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub from_unit: Option<String>,
    #[serde(default)]
    pub to_unit: Option<String>,
}

impl UnitConversion {
    pub fn new(factor: f64, offset: f64) -> Self {
        UnitConversion {
            factor,
            offset,
            from_unit: None,
            to_unit: None,
        }
    }

    pub fn applies_to(&self, unit: Option<&str>) -> bool {
        match &self.from_unit {
            None => true,
            Some(from) => unit == Some(from.as_str()),
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        self.factor * v + self.offset
    }
}

/// Harmonization rules for heterogeneous country sources.
///
/// Only affine unit rules, country aliases, a year window and column renames
/// are supported; no deflation or PPP adjustment is attempted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonizationRules {
    #[serde(default)]
    pub unit_conversions: BTreeMap<String, UnitConversion>,
    #[serde(default)]
    pub country_aliases: BTreeMap<String, CountryId>,
    #[serde(default)]
    pub year_range: Option<[i32; 2]>,
    #[serde(default)]
    pub rename: BTreeMap<String, String>,
}

impl HarmonizationRules {
    pub fn validate(&self) -> Result<()> {
        for (var, rule) in &self.unit_conversions {
            if !(rule.factor.is_finite() && rule.factor != 0.0 && rule.offset.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "unit conversion for {var:?} needs a finite nonzero factor and finite offset"
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for (alias, code) in &self.country_aliases {
            if !seen.insert(*code) {
                return Err(Error::InvalidParameter(format!(
                    "country alias {alias:?} maps to {code}, which another alias already uses"
                )));
            }
        }
        if let Some([lo, hi]) = self.year_range {
            if lo > hi {
                return Err(Error::InvalidParameter(format!("year range [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }

    pub fn resolve_country(&self, raw: &str) -> Result<CountryId> {
        let trimmed = raw.trim();
        match self.country_aliases.get(trimmed) {
            Some(code) => Ok(*code),
            None => CountryId::new(trimmed),
        }
    }

    pub fn keeps_year(&self, year: i32) -> bool {
        match self.year_range {
            None => true,
            Some([lo, hi]) => (lo..=hi).contains(&year),
        }
    }

    pub fn renamed<'a>(&'a self, column: &'a str) -> &'a str {
        self.rename.get(column).map(String::as_str).unwrap_or(column)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_json_and_rejects_unknown_keys() {
        let rules: HarmonizationRules = serde_json::from_str(
            r#"{"unit_conversions": {"temperature": {"factor": 0.1}},
                "country_aliases": {"Uganda": "UGA"},
                "year_range": [2000, 2010]}"#,
        )
        .unwrap();
        assert!(rules.validate().is_ok());
        assert_eq!(rules.resolve_country("Uganda").unwrap().as_str(), "UGA");
        assert!(!rules.keeps_year(1999));
        assert!(serde_json::from_str::<HarmonizationRules>(r#"{"units": {}}"#).is_err());
    }

    #[test]
    fn zero_factor_and_non_injective_aliases_rejected() {
        let mut rules = HarmonizationRules::default();
        rules
            .unit_conversions
            .insert("t".into(), UnitConversion::new(0.0, 0.0));
        assert!(rules.validate().is_err());

        let mut rules = HarmonizationRules::default();
        let uga = CountryId::new("UGA").unwrap();
        rules.country_aliases.insert("Uganda".into(), uga);
        rules.country_aliases.insert("Republic of Uganda".into(), uga);
        assert!(rules.validate().is_err());
    }
}
