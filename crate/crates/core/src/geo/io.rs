use std::fmt::Write;

use crate::error::{Error, Result};
use crate::model::{GeoSample, GeoSampleSet};

/// Reads `x,y,value[,covariate...]` CSV text.
pub fn parse_samples_csv(text: &str) -> Result<GeoSampleSet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedCsv {
            line: 1,
            column: "header".into(),
            message: e.to_string(),
        })?
        .clone();
    let names: Vec<String> = headers.iter().map(str::to_string).collect();
    if names.len() < 3 || names[0] != "x" || names[1] != "y" || names[2] != "value" {
        return Err(Error::MalformedCsv {
            line: 1,
            column: "header".into(),
            message: "expected columns x,y,value followed by optional covariates".into(),
        });
    }
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedCsv {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            column: "row".into(),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut nums = Vec::with_capacity(names.len());
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::MalformedCsv {
                line,
                column: names[j].clone(),
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedCsv {
                    line,
                    column: names[j].clone(),
                    message: "value must be finite".into(),
                });
            }
            nums.push(v);
        }
        samples.push(GeoSample {
            x: nums[0],
            y: nums[1],
            value: nums[2],
            covariates: nums[3..].to_vec(),
        });
    }
    GeoSampleSet::with_covariates(samples, names[3..].to_vec())
}

pub fn write_samples_csv(set: &GeoSampleSet) -> String {
    let mut out = String::from("x,y,value");
    for name in set.covariate_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for s in set.samples() {
        let _ = write!(out, "{},{},{}", s.x, s.y, s.value);
        for c in &s.covariates {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_covariate() {
        let text = "x,y,value,elev\n1,2,3.5,10\n0,0,1,0.25\n";
        let set = parse_samples_csv(text).unwrap();
        assert_eq!(set.covariate_names(), ["elev"]);
        assert_eq!(set.samples()[0].value, 1.0);
        assert_eq!(write_samples_csv(&set), "x,y,value,elev\n0,0,1,0.25\n1,2,3.5,10\n");
    }

    #[test]
    fn bad_cell_names_column_and_line() {
        let err = parse_samples_csv("x,y,value\n0,0,1\n1,abc,2\n").unwrap_err();
        match err {
            Error::MalformedCsv { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, "y");
            }
            other => panic!("{other:?}"),
        }
    }
}
