use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinates closer than this (in both axes) are treated as the same location.
pub const COINCIDENCE_TOL: f64 = 1e-9;

/// A point observation. `covariates` is aligned with the owning set's
/// `covariate_names`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoSample {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub covariates: Vec<f64>,
}

impl GeoSample {
    pub fn new(x: f64, y: f64, value: f64) -> Self {
        GeoSample {
            x,
            y,
            value,
            covariates: Vec::new(),
        }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

/// Sparse point observations, sorted lexicographically by (x, y) with
/// coincident locations merged by averaging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoSampleSet {
    samples: Vec<GeoSample>,
    covariate_names: Vec<String>,
    pub crs_note: String,
}

impl GeoSampleSet {
    pub fn new(samples: Vec<GeoSample>) -> Result<Self> {
        Self::with_covariates(samples, Vec::new())
    }

    pub fn with_covariates(mut samples: Vec<GeoSample>, covariate_names: Vec<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooFewSamples {
                available: 0,
                required: 1,
            });
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.x.is_finite() && s.y.is_finite() && s.value.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample {i} is not finite")));
            }
            if s.covariates.len() != covariate_names.len() {
                return Err(Error::InvalidParameter(format!(
                    "sample {i} has {} covariates, expected {}",
                    s.covariates.len(),
                    covariate_names.len()
                )));
            }
            if s.covariates.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample {i} has a non-finite covariate")));
            }
        }
        samples.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let samples = merge_coincident(samples);
        Ok(GeoSampleSet {
            samples,
            covariate_names,
            crs_note: String::new(),
        })
    }

    pub fn samples(&self) -> &[GeoSample] {
        &self.samples
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    /// Copy of the set with sample `index` removed.
    pub fn without(&self, index: usize) -> Result<GeoSampleSet> {
        let mut samples = self.samples.clone();
        samples.remove(index);
        let mut out = GeoSampleSet::with_covariates(samples, self.covariate_names.clone())?;
        out.crs_note = self.crs_note.clone();
        Ok(out)
    }

    /// Same locations with replaced values (used for residual fields).
    pub fn with_values(&self, values: &[f64]) -> GeoSampleSet {
        assert_eq!(values.len(), self.samples.len());
        let samples = self
            .samples
            .iter()
            .zip(values)
            .map(|(s, &v)| GeoSample { value: v, ..s.clone() })
            .collect();
        GeoSampleSet {
            samples,
            covariate_names: self.covariate_names.clone(),
            crs_note: self.crs_note.clone(),
        }
    }

    /// Axis-aligned bounding box (xmin, ymin, xmax, ymax).
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        self.samples.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), s| (a.min(s.x), b.min(s.y), c.max(s.x), d.max(s.y)),
        )
    }
}

fn merge_coincident(sorted: Vec<GeoSample>) -> Vec<GeoSample> {
    let mut groups: Vec<(GeoSample, usize)> = Vec::with_capacity(sorted.len());
    for s in sorted {
        // Candidates share x within tolerance, so they sit at the tail of the sorted output.
        let hit = groups
            .iter_mut()
            .rev()
            .take_while(|(g, _)| s.x - g.x <= COINCIDENCE_TOL)
            .find(|(g, _)| (s.y - g.y).abs() <= COINCIDENCE_TOL);
        match hit {
            Some((g, n)) => {
                let w = *n as f64;
                g.value = (g.value * w + s.value) / (w + 1.0);
                for (gc, sc) in g.covariates.iter_mut().zip(&s.covariates) {
                    *gc = (*gc * w + sc) / (w + 1.0);
                }
                *n += 1;
            }
            None => groups.push((s, 1)),
        }
    }
    groups.into_iter().map(|(g, _)| g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_lexicographically() {
        let set = GeoSampleSet::new(vec![
            GeoSample::new(1.0, 0.0, 1.0),
            GeoSample::new(0.0, 2.0, 2.0),
            GeoSample::new(0.0, 1.0, 3.0),
        ])
        .unwrap();
        let xy: Vec<(f64, f64)> = set.samples().iter().map(|s| (s.x, s.y)).collect();
        assert_eq!(xy, [(0.0, 1.0), (0.0, 2.0), (1.0, 0.0)]);
    }

    #[test]
    fn coincident_samples_merge_by_mean() {
        let set = GeoSampleSet::new(vec![
            GeoSample::new(1.0, 1.0, 2.0),
            GeoSample::new(5.0, 5.0, 9.0),
            GeoSample::new(1.0 + 1e-12, 1.0, 4.0),
        ])
        .unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.samples()[0].value, 3.0);
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(GeoSampleSet::new(vec![]).is_err());
        assert!(GeoSampleSet::new(vec![GeoSample::new(f64::NAN, 0.0, 1.0)]).is_err());
    }
}
