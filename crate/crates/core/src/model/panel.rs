use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ids::{CountryId, SectorId};
use crate::error::{Error, Result};

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2100;

/// A registered panel variable and its declared unit, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub unit: Option<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, unit: Option<String>) -> Self {
        Variable {
            name: name.into(),
            unit,
        }
    }
}

/// Sort key of a panel row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObservationKey {
    pub country: CountryId,
    pub year: i32,
    pub sector: SectorId,
}

impl std::fmt::Display for ObservationKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.country, self.year, self.sector)
    }
}

/// One country-year-sector row. `values` is aligned with the panel registry;
/// `None` marks a missing cell.
///
/// Which variable plays the role of response, climate regressor or structural
/// control is decided by the model specification, not by the row.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelObservation {
    pub country: CountryId,
    pub year: i32,
    pub sector: SectorId,
    pub values: Vec<Option<f64>>,
    pub imputed: Vec<bool>,
}

impl PanelObservation {
    pub fn new(country: CountryId, year: i32, sector: SectorId, values: Vec<Option<f64>>) -> Self {
        let imputed = vec![false; values.len()];
        PanelObservation {
            country,
            year,
            sector,
            values,
            imputed,
        }
    }

    pub fn key(&self) -> ObservationKey {
        ObservationKey {
            country: self.country,
            year: self.year,
            sector: self.sector,
        }
    }
}

/// Country × year × sector panel, sorted by (country, year, sector).
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    registry: Vec<Variable>,
    observations: Vec<PanelObservation>,
    entity_index: BTreeMap<CountryId, Vec<usize>>,
    time_index: BTreeMap<i32, Vec<usize>>,
}

impl Panel {
    pub fn new(registry: Vec<Variable>, mut observations: Vec<PanelObservation>) -> Result<Self> {
        for (i, v) in registry.iter().enumerate() {
            if v.name.is_empty() {
                return Err(Error::InvalidParameter("empty variable name".into()));
            }
            if registry[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::InvalidParameter(format!(
                    "variable {:?} registered twice",
                    v.name
                )));
            }
        }
        for obs in &observations {
            if obs.values.len() != registry.len() || obs.imputed.len() != registry.len() {
                return Err(Error::InvalidParameter(format!(
                    "row {} has {} values for {} registered variables",
                    obs.key(),
                    obs.values.len(),
                    registry.len()
                )));
            }
            if !(MIN_YEAR..=MAX_YEAR).contains(&obs.year) {
                return Err(Error::InvalidParameter(format!(
                    "year {} outside [{MIN_YEAR}, {MAX_YEAR}]",
                    obs.year
                )));
            }
            if obs.values.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite value in row {}",
                    obs.key()
                )));
            }
        }
        observations.sort_by_key(PanelObservation::key);
        for pair in observations.windows(2) {
            if pair[0].key() == pair[1].key() {
                return Err(Error::DuplicatePanelKey(pair[0].key().to_string()));
            }
        }
        let mut entity_index: BTreeMap<CountryId, Vec<usize>> = BTreeMap::new();
        let mut time_index: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (row, obs) in observations.iter().enumerate() {
            entity_index.entry(obs.country).or_default().push(row);
            time_index.entry(obs.year).or_default().push(row);
        }
        Ok(Panel {
            registry,
            observations,
            entity_index,
            time_index,
        })
    }

    pub fn registry(&self) -> &[Variable] {
        &self.registry
    }

    pub fn observations(&self) -> &[PanelObservation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn entity_index(&self) -> &BTreeMap<CountryId, Vec<usize>> {
        &self.entity_index
    }

    pub fn time_index(&self) -> &BTreeMap<i32, Vec<usize>> {
        &self.time_index
    }

    pub fn countries(&self) -> impl Iterator<Item = CountryId> + '_ {
        self.entity_index.keys().copied()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.registry.iter().position(|v| v.name == name)
    }

    pub fn require_variable(&self, name: &str) -> Result<usize> {
        self.variable_index(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Row indices grouped by (country, sector); rows within a group are in year order.
    pub fn series(&self) -> BTreeMap<(CountryId, SectorId), Vec<usize>> {
        let mut out: BTreeMap<(CountryId, SectorId), Vec<usize>> = BTreeMap::new();
        for (row, obs) in self.observations.iter().enumerate() {
            out.entry((obs.country, obs.sector)).or_default().push(row);
        }
        out
    }

    /// Number of missing cells.
    pub fn missing_count(&self) -> usize {
        self.observations
            .iter()
            .map(|o| o.values.iter().filter(|v| v.is_none()).count())
            .sum()
    }

    pub fn imputed_count(&self) -> usize {
        self.observations
            .iter()
            .map(|o| o.imputed.iter().filter(|&&f| f).count())
            .sum()
    }

    /// Rows restricted to one sector, as a new panel.
    pub fn filter_sector(&self, sector: SectorId) -> Panel {
        let observations = self
            .observations
            .iter()
            .filter(|o| o.sector == sector)
            .cloned()
            .collect();
        Panel::new(self.registry.clone(), observations).expect("subset of a valid panel")
    }

    pub fn sectors(&self) -> Vec<SectorId> {
        let mut s: Vec<SectorId> = self.observations.iter().map(|o| o.sector).collect();
        s.sort();
        s.dedup();
        s
    }

    pub(crate) fn into_parts(self) -> (Vec<Variable>, Vec<PanelObservation>) {
        (self.registry, self.observations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(c: &str, y: i32, s: SectorId, v: f64) -> PanelObservation {
        PanelObservation::new(CountryId::new(c).unwrap(), y, s, vec![Some(v)])
    }

    #[test]
    fn rows_are_sorted_and_indexed() {
        let p = Panel::new(
            vec![Variable::new("r", None)],
            vec![
                obs("UGA", 2001, SectorId::Agriculture, 1.0),
                obs("KEN", 2000, SectorId::Services, 2.0),
                obs("KEN", 2000, SectorId::Agriculture, 3.0),
            ],
        )
        .unwrap();
        let keys: Vec<String> = p.observations().iter().map(|o| o.key().to_string()).collect();
        assert_eq!(
            keys,
            [
                "(KEN, 2000, agriculture)",
                "(KEN, 2000, services)",
                "(UGA, 2001, agriculture)"
            ]
        );
        assert_eq!(p.entity_index()[&CountryId::new("KEN").unwrap()], vec![0, 1]);
        assert_eq!(p.time_index()[&2001], vec![2]);
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = Panel::new(
            vec![Variable::new("r", None)],
            vec![
                obs("UGA", 2001, SectorId::Agriculture, 1.0),
                obs("UGA", 2001, SectorId::Agriculture, 2.0),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicatePanelKey(_)));
    }

    #[test]
    fn out_of_range_year_and_nan_rejected() {
        let reg = vec![Variable::new("r", None)];
        assert!(Panel::new(reg.clone(), vec![obs("UGA", 1800, SectorId::Industry, 1.0)]).is_err());
        assert!(Panel::new(reg, vec![obs("UGA", 2000, SectorId::Industry, f64::NAN)]).is_err());
    }
}
