use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{ObservationKey, Panel, PanelObservation, SectorId, Variable, MAX_YEAR, MIN_YEAR};

use super::rules::HarmonizationRules;

/// Cell tokens treated as missing (compared case-insensitively after trimming).
pub const MISSING_TOKENS: [&str; 3] = ["", "na", "nan"];

pub fn is_missing_token(cell: &str) -> bool {
    let t = cell.trim();
    MISSING_TOKENS.iter().any(|m| t.eq_ignore_ascii_case(m))
}

/// Splits a header cell `name[unit]` into name and unit.
fn split_unit(header: &str) -> (String, Option<String>) {
    let h = header.trim();
    if let Some(open) = h.find('[') {
        if h.ends_with(']') {
            let unit = h[open + 1..h.len() - 1].trim();
            let name = h[..open].trim().to_string();
            let unit = (!unit.is_empty()).then(|| unit.to_string());
            return (name, unit);
        }
    }
    (h.to_string(), None)
}

fn malformed(line: usize, column: &str, message: impl Into<String>) -> Error {
    Error::MalformedCsv {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Parses a panel CSV with `country`, `year`, `sector` key columns and one or
/// more variable columns (optionally written `name[unit]`).
///
/// Renames, country aliases and the year window from `rules` are applied here;
/// unit conversions are left to [`super::harmonize`].
pub fn parse_panel_csv(text: &str, rules: &HarmonizationRules) -> Result<Panel> {
    rules.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| malformed(1, "header", e.to_string()))?
        .clone();

    let mut key_cols = [None; 3];
    let mut var_cols = Vec::new();
    let mut registry = Vec::new();
    for (idx, raw) in headers.iter().enumerate() {
        let (name, unit) = split_unit(raw.trim_start_matches('\u{feff}'));
        let name = rules.renamed(&name).to_string();
        match name.to_ascii_lowercase().as_str() {
            "country" => key_cols[0] = Some(idx),
            "year" => key_cols[1] = Some(idx),
            "sector" => key_cols[2] = Some(idx),
            _ => {
                if name.is_empty() {
                    return Err(malformed(1, raw, "empty column name"));
                }
                if registry.iter().any(|v: &Variable| v.name == name) {
                    return Err(malformed(1, raw, format!("duplicate column {name:?}")));
                }
                var_cols.push(idx);
                registry.push(Variable::new(name, unit));
            }
        }
    }
    let [Some(country_col), Some(year_col), Some(sector_col)] = key_cols else {
        return Err(malformed(1, "header", "missing one of the country, year, sector columns"));
    };
    if var_cols.is_empty() {
        return Err(malformed(1, "header", "no variable columns"));
    }

    let mut seen: HashMap<ObservationKey, usize> = HashMap::new();
    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            malformed(line, "row", e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let country = rules
            .resolve_country(&record[country_col])
            .map_err(|_| malformed(line, "country", format!("unrecognized country {:?}", &record[country_col])))?;
        let year: i32 = record[year_col]
            .trim()
            .parse()
            .map_err(|_| malformed(line, "year", format!("unparseable year {:?}", &record[year_col])))?;
        if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
            return Err(malformed(line, "year", format!("year {year} outside [{MIN_YEAR}, {MAX_YEAR}]")));
        }
        if !rules.keeps_year(year) {
            continue;
        }
        let sector: SectorId = record[sector_col].parse().map_err(|_| Error::UnknownSector {
            line,
            value: record[sector_col].to_string(),
        })?;

        let mut values = Vec::with_capacity(var_cols.len());
        for (&col, var) in var_cols.iter().zip(&registry) {
            let cell = &record[col];
            if is_missing_token(cell) {
                values.push(None);
                continue;
            }
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| malformed(line, &var.name, format!("not a number: {cell:?}")))?;
            if !v.is_finite() {
                return Err(malformed(line, &var.name, format!("non-finite value {cell:?}")));
            }
            values.push(Some(v));
        }

        let obs = PanelObservation::new(country, year, sector, values);
        if let Some(&first_line) = seen.get(&obs.key()) {
            return Err(Error::DuplicateKey {
                key: obs.key().to_string(),
                first_line,
                second_line: line,
            });
        }
        seen.insert(obs.key(), line);
        observations.push(obs);
    }
    Panel::new(registry, observations)
}

/// Writes a panel in the format read by [`parse_panel_csv`]; missing cells are empty.
pub fn write_panel_csv(panel: &Panel) -> String {
    let mut out = String::from("country,year,sector");
    for v in panel.registry() {
        out.push(',');
        out.push_str(&v.name);
        if let Some(u) = &v.unit {
            out.push('[');
            out.push_str(u);
            out.push(']');
        }
    }
    out.push('\n');
    for o in panel.observations() {
        out.push_str(&format!("{},{},{}", o.country, o.year, o.sector));
        for v in &o.values {
            out.push(',');
            if let Some(v) = v {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CountryId;

    #[test]
    fn writer_round_trips() {
        let text = "country,year,sector,gdp[USD],yield\nKEN,2001,industry,,2.5\nUGA,2000,agriculture,0.1,3\n";
        let p = parse_panel_csv(text, &HarmonizationRules::default()).unwrap();
        assert_eq!(write_panel_csv(&p), text);
    }

    #[test]
    fn two_complete_rows() {
        let csv = "country,year,sector,temperature,precipitation\n\
                   UGA,2010,agriculture,25.1,1200\n\
                   KEN,2010,agriculture,24.0,800\n";
        let p = parse_panel_csv(csv, &HarmonizationRules::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.missing_count(), 0);
        assert_eq!(p.observations()[0].country, CountryId::new("KEN").unwrap());
    }

    #[test]
    fn missing_tokens_recorded() {
        let csv = "country,year,sector,temperature,precipitation\r\n\
                   UGA,2010,agriculture,25.1,NA\r\n\
                   UGA,2011,agriculture,,nan\r\n";
        let p = parse_panel_csv(csv, &HarmonizationRules::default()).unwrap();
        let prec = p.variable_index("precipitation").unwrap();
        assert_eq!(p.observations()[0].values[prec], None);
        assert!(!p.observations()[0].imputed[prec]);
        assert_eq!(p.missing_count(), 3);
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let csv = "country,year,sector,r\nUGA,2010,agriculture,1\nUGA,2010,agriculture,2\n";
        match parse_panel_csv(csv, &HarmonizationRules::default()) {
            Err(Error::DuplicateKey {
                first_line,
                second_line,
                ..
            }) => assert_eq!((first_line, second_line), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_rows_cite_line_and_column() {
        let csv = "country,year,sector,r\nUGA,2010,agriculture,1\nUGA,20x0,agriculture,2\n";
        match parse_panel_csv(csv, &HarmonizationRules::default()) {
            Err(Error::MalformedCsv { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, "year");
            }
            other => panic!("unexpected {other:?}"),
        }
        let csv = "country,year,sector,r\nUGA,2010,mining,1\n";
        assert!(matches!(
            parse_panel_csv(csv, &HarmonizationRules::default()),
            Err(Error::UnknownSector { line: 2, .. })
        ));
        let csv = "country,year,sector,r\nUGA,2010,industry,abc\n";
        assert!(matches!(
            parse_panel_csv(csv, &HarmonizationRules::default()),
            Err(Error::MalformedCsv { line: 2, .. })
        ));
    }

    #[test]
    fn units_aliases_renames_and_quotes() {
        let csv = "country,year,sector,\"temp [degC]\",rain\n\
                   \"Uganda\",2010,agriculture,25,1000\n\
                   Uganda,1990,agriculture,24,900\n";
        let mut rules = HarmonizationRules::default();
        rules
            .country_aliases
            .insert("Uganda".into(), CountryId::new("UGA").unwrap());
        rules.rename.insert("rain".into(), "precipitation".into());
        rules.year_range = Some([2000, 2020]);
        let p = parse_panel_csv(csv, &rules).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.registry()[0], Variable::new("temp", Some("degC".into())));
        assert_eq!(p.registry()[1].name, "precipitation");
    }

    #[test]
    fn missing_key_column_rejected() {
        assert!(parse_panel_csv("country,year,r\nUGA,2010,1\n", &HarmonizationRules::default()).is_err());
        assert!(parse_panel_csv("country,year,sector\nUGA,2010,industry\n", &HarmonizationRules::default()).is_err());
    }
}
