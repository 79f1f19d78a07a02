use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Panel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputationMethod {
    /// Interior gaps interpolated linearly in year; edges carry the nearest observation.
    #[default]
    LinearTime,
    /// Gaps take the mean of the observed cells of the same series.
    EntityMean,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub cells_imputed: usize,
    pub per_variable: BTreeMap<String, usize>,
    pub method_used: ImputationMethod,
}

/// Fills missing cells per (country, sector, variable) series. Observed cells
/// are never modified; filled cells are flagged as imputed.
pub fn impute(panel: &Panel, method: ImputationMethod) -> Result<(Panel, ImputationReport)> {
    let mut per_variable: BTreeMap<String, usize> = panel
        .registry()
        .iter()
        .map(|v| (v.name.clone(), 0))
        .collect();
    if method == ImputationMethod::None {
        return Ok((
            panel.clone(),
            ImputationReport {
                cells_imputed: 0,
                per_variable,
                method_used: method,
            },
        ));
    }

    let series = panel.series();
    let (registry, mut observations) = panel.clone().into_parts();
    let mut total = 0;
    for ((country, sector), rows) in &series {
        for (j, var) in registry.iter().enumerate() {
            let observed: Vec<(i32, f64)> = rows
                .iter()
                .filter_map(|&r| observations[r].values[j].map(|v| (observations[r].year, v)))
                .collect();
            if observed.len() == rows.len() {
                continue;
            }
            if observed.is_empty() {
                return Err(Error::AllMissingSeries(format!("{country}/{sector}/{}", var.name)));
            }
            let mean = observed.iter().map(|(_, v)| v).sum::<f64>() / observed.len() as f64;
            for &r in rows {
                if observations[r].values[j].is_some() {
                    continue;
                }
                let year = observations[r].year;
                let fill = match method {
                    ImputationMethod::EntityMean => mean,
                    _ => linear_fill(&observed, year),
                };
                observations[r].values[j] = Some(fill);
                observations[r].imputed[j] = true;
                *per_variable.get_mut(&var.name).expect("registered") += 1;
                total += 1;
            }
        }
    }
    let out = Panel::new(registry, observations)?;
    Ok((
        out,
        ImputationReport {
            cells_imputed: total,
            per_variable,
            method_used: method,
        },
    ))
}

/// `observed` is sorted by year.
fn linear_fill(observed: &[(i32, f64)], year: i32) -> f64 {
    let after = observed.partition_point(|&(y, _)| y < year);
    if after == 0 {
        return observed[0].1;
    }
    if after == observed.len() {
        return observed[observed.len() - 1].1;
    }
    let (y0, v0) = observed[after - 1];
    let (y1, v1) = observed[after];
    v0 + (v1 - v0) * f64::from(year - y0) / f64::from(y1 - y0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_panel_csv, HarmonizationRules};

    fn parse(csv: &str) -> Panel {
        parse_panel_csv(csv, &HarmonizationRules::default()).unwrap()
    }

    #[test]
    fn interior_gap_interpolated() {
        let p = parse("country,year,sector,v\nUGA,2000,agriculture,2\nUGA,2001,agriculture,NA\nUGA,2002,agriculture,4\n");
        let (q, report) = impute(&p, ImputationMethod::LinearTime).unwrap();
        assert_eq!(q.observations()[1].values[0], Some(3.0));
        assert!(q.observations()[1].imputed[0]);
        assert!(!q.observations()[0].imputed[0]);
        assert_eq!(report.cells_imputed, 1);
        assert_eq!(report.per_variable["v"], 1);
    }

    #[test]
    fn leading_gap_takes_nearest() {
        let p = parse("country,year,sector,v\nUGA,2000,agriculture,NA\nUGA,2001,agriculture,5\n");
        let (q, _) = impute(&p, ImputationMethod::LinearTime).unwrap();
        assert_eq!(q.observations()[0].values[0], Some(5.0));
    }

    #[test]
    fn unequal_year_spacing() {
        let p = parse(
            "country,year,sector,v\nUGA,2000,agriculture,0\nUGA,2001,agriculture,NA\n\
             UGA,2004,agriculture,8\nUGA,2006,agriculture,NA\n",
        );
        let (q, _) = impute(&p, ImputationMethod::LinearTime).unwrap();
        assert_eq!(q.observations()[1].values[0], Some(2.0));
        assert_eq!(q.observations()[3].values[0], Some(8.0));
    }

    #[test]
    fn entity_mean_fill() {
        let p = parse("country,year,sector,v\nUGA,2000,agriculture,1\nUGA,2001,agriculture,NA\nUGA,2002,agriculture,5\n");
        let (q, _) = impute(&p, ImputationMethod::EntityMean).unwrap();
        assert_eq!(q.observations()[1].values[0], Some(3.0));
    }

    #[test]
    fn no_missing_is_identity() {
        let p = parse("country,year,sector,v\nUGA,2000,agriculture,1\n");
        let (q, report) = impute(&p, ImputationMethod::LinearTime).unwrap();
        assert_eq!(q, p);
        assert_eq!(report.cells_imputed, 0);
    }

    #[test]
    fn all_missing_series_named() {
        let p = parse("country,year,sector,v,w\nUGA,2000,industry,NA,1\nUGA,2001,industry,NA,2\n");
        match impute(&p, ImputationMethod::LinearTime) {
            Err(Error::AllMissingSeries(name)) => assert_eq!(name, "UGA/industry/v"),
            other => panic!("unexpected {other:?}"),
        }
        let (q, r) = impute(&p, ImputationMethod::None).unwrap();
        assert_eq!(q, p);
        assert_eq!(r.cells_imputed, 0);
    }
}
