use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::econ::{EstimationResult, INTERCEPT_NAME};
use crate::error::{Error, Result};
use crate::model::{CountryId, Panel, SectorId};

/// Country-labelled feature table; rows are kept sorted by country code.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<CountryId>,
    columns: Vec<String>,
    values: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<CountryId>, columns: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if values.shape() != (rows.len(), columns.len()) {
            return Err(Error::InvalidParameter(format!(
                "feature values are {:?}, expected {}x{}",
                values.shape(),
                rows.len(),
                columns.len()
            )));
        }
        let unique: BTreeSet<&String> = columns.iter().collect();
        if unique.len() != columns.len() {
            return Err(Error::InvalidParameter("feature column names must be unique".into()));
        }
        let unique_rows: BTreeSet<&CountryId> = rows.iter().collect();
        if unique_rows.len() != rows.len() {
            return Err(Error::InvalidParameter("feature rows must be unique countries".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("feature values must be finite".into()));
        }
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by_key(|&i| rows[i]);
        let sorted_rows = order.iter().map(|&i| rows[i]).collect();
        let sorted = DMatrix::from_fn(rows.len(), columns.len(), |i, j| values[(order[i], j)]);
        Ok(FeatureMatrix {
            rows: sorted_rows,
            columns,
            values: sorted,
        })
    }

    pub fn rows(&self) -> &[CountryId] {
        &self.rows
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("country");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (i, country) in self.rows.iter().enumerate() {
            out.push_str(country.as_str());
            for j in 0..self.columns.len() {
                let _ = write!(out, ",{}", self.values[(i, j)]);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::MalformedCsv {
                line: 1,
                column: "header".into(),
                message: e.to_string(),
            })?
            .clone();
        if headers.get(0).map(str::trim) != Some("country") || headers.len() < 2 {
            return Err(Error::MalformedCsv {
                line: 1,
                column: "header".into(),
                message: "expected `country` followed by feature columns".into(),
            });
        }
        let columns: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        let mut data = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::MalformedCsv {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                column: "row".into(),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            rows.push(CountryId::new(record[0].trim()).map_err(|_| Error::MalformedCsv {
                line,
                column: "country".into(),
                message: format!("bad country code {:?}", &record[0]),
            })?);
            for (j, cell) in record.iter().skip(1).enumerate() {
                data.push(cell.trim().parse::<f64>().map_err(|_| Error::MalformedCsv {
                    line,
                    column: columns[j].clone(),
                    message: format!("not a number: {cell:?}"),
                })?);
            }
        }
        let n = rows.len();
        FeatureMatrix::new(rows, columns.clone(), DMatrix::from_row_slice(n, columns.len(), &data))
    }
}

/// A cell filled with its column mean because the country had no value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilledFeature {
    pub country: CountryId,
    pub column: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBuild {
    pub matrix: FeatureMatrix,
    pub filled: Vec<FilledFeature>,
}

/// Features per country from per-(country, sector) estimates: every sector's
/// slope coefficients and mean response, then the country's mean of each
/// exposure variable. Absent entries take the column mean and are reported.
pub fn build_features(
    results: &BTreeMap<(CountryId, SectorId), EstimationResult>,
    panel: &Panel,
    exposure_vars: &[String],
) -> Result<FeatureBuild> {
    if results.is_empty() {
        return Err(Error::EmptyInput("no estimation results".into()));
    }
    let countries: Vec<CountryId> = results
        .keys()
        .map(|(c, _)| *c)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let sectors: BTreeSet<SectorId> = results.keys().map(|(_, s)| *s).collect();
    let exposure_idx: Vec<usize> = exposure_vars
        .iter()
        .map(|v| panel.require_variable(v))
        .collect::<Result<_>>()?;

    let mut columns: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(CountryId, usize), f64> = BTreeMap::new();
    for &sector in &sectors {
        let mut coef_names: Vec<String> = Vec::new();
        for ((_, s), r) in results.iter().filter(|((_, s), _)| *s == sector) {
            debug_assert_eq!(*s, sector);
            for p in &r.params {
                if p.name != INTERCEPT_NAME && !coef_names.contains(&p.name) {
                    coef_names.push(p.name.clone());
                }
            }
        }
        for name in &coef_names {
            let col = columns.len();
            columns.push(format!("{sector}:{name}"));
            for ((c, _), r) in results.iter().filter(|((_, s), _)| *s == sector) {
                if let Some(v) = r.coefficient(name).filter(|v| v.is_finite()) {
                    cells.insert((*c, col), v);
                }
            }
        }
        let response = results
            .iter()
            .find(|((_, s), _)| *s == sector)
            .map(|(_, r)| r.dep_variable.clone())
            .expect("sector has a result");
        let resp_idx = panel.require_variable(&response)?;
        let col = columns.len();
        columns.push(format!("{sector}:mean_{response}"));
        for (c, _) in results.keys().filter(|(_, s)| *s == sector) {
            if let Some(m) = mean_of(panel, *c, Some(sector), resp_idx) {
                cells.insert((*c, col), m);
            }
        }
    }
    for (var, &idx) in exposure_vars.iter().zip(&exposure_idx) {
        let col = columns.len();
        columns.push(format!("mean_{var}"));
        for &c in &countries {
            if let Some(m) = mean_of(panel, c, None, idx) {
                cells.insert((c, col), m);
            }
        }
    }

    let mut values = DMatrix::zeros(countries.len(), columns.len());
    let mut filled = Vec::new();
    for (j, name) in columns.iter().enumerate() {
        let present: Vec<f64> = countries
            .iter()
            .filter_map(|c| cells.get(&(*c, j)).copied())
            .collect();
        if present.is_empty() {
            return Err(Error::EmptyInput(format!("feature {name:?} has no values")));
        }
        let mean = present.iter().sum::<f64>() / present.len() as f64;
        for (i, c) in countries.iter().enumerate() {
            values[(i, j)] = match cells.get(&(*c, j)) {
                Some(v) => *v,
                None => {
                    filled.push(FilledFeature {
                        country: *c,
                        column: name.clone(),
                    });
                    mean
                }
            };
        }
    }
    Ok(FeatureBuild {
        matrix: FeatureMatrix::new(countries, columns, values)?,
        filled,
    })
}

fn mean_of(panel: &Panel, country: CountryId, sector: Option<SectorId>, var: usize) -> Option<f64> {
    let rows = panel.entity_index().get(&country)?;
    let vals: Vec<f64> = rows
        .iter()
        .map(|&r| &panel.observations()[r])
        .filter(|o| sector.is_none_or(|s| o.sector == s))
        .filter_map(|o| o.values[var])
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Per-country means of selected panel variables, optionally restricted to one
/// sector. With `gdp_per_capita` and a yield variable this gives the
/// income-versus-yield feature pair.
pub fn panel_means(panel: &Panel, sector: Option<SectorId>, vars: &[String]) -> Result<FeatureMatrix> {
    let idx: Vec<usize> = vars
        .iter()
        .map(|v| panel.require_variable(v))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for country in panel.countries() {
        let means: Vec<Option<f64>> = idx.iter().map(|&j| mean_of(panel, country, sector, j)).collect();
        if means.iter().all(Option::is_none) {
            continue;
        }
        for (m, v) in means.iter().zip(vars) {
            match m {
                Some(m) => data.push(*m),
                None => {
                    return Err(Error::EmptyInput(format!("{country} has no observed {v}")));
                }
            }
        }
        rows.push(country);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("no country has the selected variables".into()));
    }
    let n = rows.len();
    FeatureMatrix::new(rows, vars.to_vec(), DMatrix::from_row_slice(n, vars.len(), &data))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub matrix: FeatureMatrix,
    pub dropped: Vec<String>,
}

/// Centers each column and scales it to unit sample standard deviation.
/// Columns with zero variance are dropped with a warning.
pub fn standardize(m: &FeatureMatrix) -> Standardized {
    let n = m.n_rows();
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    let mut stats = Vec::new();
    for (j, name) in m.columns.iter().enumerate() {
        let col = m.values.column(j);
        let mean = col.mean();
        let var = if n > 1 {
            col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let sd = var.sqrt();
        if sd <= 1e-12 * (1.0 + mean.abs()) {
            log::warn!("dropping zero-variance feature {name:?}");
            dropped.push(name.clone());
        } else {
            keep.push(j);
            stats.push((mean, sd));
        }
    }
    let values = DMatrix::from_fn(n, keep.len(), |i, c| {
        let (mean, sd) = stats[c];
        (m.values[(i, keep[c])] - mean) / sd
    });
    let columns = keep.iter().map(|&j| m.columns[j].clone()).collect();
    Standardized {
        matrix: FeatureMatrix {
            rows: m.rows.clone(),
            columns,
            values,
        },
        dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::{pooled_ols, CovType, ModelSpec};
    use crate::model::{PanelObservation, Variable};

    fn panel() -> Panel {
        let registry = vec![
            Variable::new("y", None),
            Variable::new("temp", None),
            Variable::new("gdp", None),
        ];
        let mut obs = Vec::new();
        for (c, code) in ["AAA", "BBB"].iter().enumerate() {
            let id = CountryId::new(code).unwrap();
            for t in 0..6 {
                let temp = 20.0 + t as f64 + c as f64;
                let gdp = 100.0 + ((t * 7 + c * 3) % 5) as f64;
                let y = 1.0 + 0.5 * temp - 0.01 * gdp + c as f64;
                obs.push(PanelObservation::new(
                    id,
                    2000 + t as i32,
                    SectorId::Agriculture,
                    vec![Some(y), Some(temp), Some(gdp)],
                ));
                if c == 0 {
                    obs.push(PanelObservation::new(
                        id,
                        2000 + t as i32,
                        SectorId::Industry,
                        vec![Some(y + 2.0 + 0.1 * gdp), Some(temp), Some(gdp)],
                    ));
                }
            }
        }
        Panel::new(registry, obs).unwrap()
    }

    fn results(p: &Panel) -> BTreeMap<(CountryId, SectorId), EstimationResult> {
        let spec = ModelSpec::new("y").with_climate(["temp"]).with_structural(["gdp"])
            .with_cov(CovType::Unadjusted);
        let mut out = BTreeMap::new();
        for (country, sector) in p.series().keys() {
            let sub = Panel::new(
                p.registry().to_vec(),
                p.observations()
                    .iter()
                    .filter(|o| o.country == *country && o.sector == *sector)
                    .cloned()
                    .collect(),
            )
            .unwrap();
            out.insert((*country, *sector), pooled_ols(&sub, &spec).unwrap());
        }
        out
    }

    #[test]
    fn shape_of_single_sector() {
        let p = panel().filter_sector(SectorId::Agriculture);
        let built = build_features(&results(&p), &p, &["temp".to_string()]).unwrap();
        assert_eq!(built.matrix.values().shape(), (2, 4));
        assert_eq!(
            built.matrix.columns(),
            ["agriculture:temp", "agriculture:gdp", "agriculture:mean_y", "mean_temp"]
        );
        assert!(built.filled.is_empty());
        assert!((built.matrix.values()[(0, 0)] - 0.5).abs() < 1e-9);
        assert!((built.matrix.values()[(0, 3)] - 22.5).abs() < 1e-12);
        assert!((built.matrix.values()[(1, 3)] - 23.5).abs() < 1e-12);
    }

    #[test]
    fn missing_sector_takes_column_mean() {
        let p = panel();
        let built = build_features(&results(&p), &p, &["temp".to_string()]).unwrap();
        let m = &built.matrix;
        let bbb = 1;
        for (j, name) in m.columns().iter().enumerate() {
            if name.starts_with("industry:") {
                assert_eq!(m.values()[(bbb, j)], m.values()[(0, j)]);
                assert!(built.filled.contains(&FilledFeature {
                    country: CountryId::new("BBB").unwrap(),
                    column: name.clone(),
                }));
            }
        }
        assert_eq!(built.filled.len(), 3);
    }

    #[test]
    fn standardize_small_column() {
        let m = FeatureMatrix::new(
            (0..3).map(CountryId::synthetic).collect(),
            vec!["a".into(), "flat".into()],
            DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]),
        )
        .unwrap();
        let s = standardize(&m);
        assert_eq!(s.dropped, vec!["flat".to_string()]);
        assert_eq!(s.matrix.values().column(0).iter().copied().collect::<Vec<_>>(), vec![-1.0, 0.0, 1.0]);
        let again = standardize(&s.matrix);
        assert!(again.dropped.is_empty());
        assert!((again.matrix.values() - s.matrix.values()).amax() < 1e-12);
    }

    #[test]
    fn rows_sorted_and_csv_round_trip() {
        let m = FeatureMatrix::new(
            vec![CountryId::new("ZZZ").unwrap(), CountryId::new("AAA").unwrap()],
            vec!["f".into()],
            DMatrix::from_column_slice(2, 1, &[2.0, 0.1]),
        )
        .unwrap();
        assert_eq!(m.rows()[0].as_str(), "AAA");
        assert_eq!(m.to_csv(), "country,f\nAAA,0.1\nZZZ,2\n");
        assert_eq!(FeatureMatrix::from_csv(&m.to_csv()).unwrap(), m);
    }
}
