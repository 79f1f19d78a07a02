use crate::error::{Error, Result};
use crate::model::{GeoSampleSet, COINCIDENCE_TOL};

/// Inverse-distance-weighted mean with weights `d^-power`.
pub fn idw(samples: &GeoSampleSet, power: f64, target: (f64, f64)) -> Result<f64> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidParameter(format!("IDW power must be positive, got {power}")));
    }
    if samples.is_empty() {
        return Err(Error::TooFewSamples {
            available: 0,
            required: 1,
        });
    }
    // Values are taken relative to the first sample so a constant field is reproduced exactly.
    let z0 = samples.samples()[0].value;
    let mut num = 0.0;
    let mut den = 0.0;
    for s in samples.samples() {
        let d = s.distance_to(target.0, target.1);
        if d < COINCIDENCE_TOL {
            return Ok(s.value);
        }
        let w = d.powf(-power);
        num += w * (s.value - z0);
        den += w;
    }
    Ok(z0 + num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeoSample;

    #[test]
    fn hand_values() {
        let set = GeoSampleSet::new(vec![GeoSample::new(-1.0, 0.0, 2.0), GeoSample::new(1.0, 0.0, 4.0)]).unwrap();
        assert_eq!(idw(&set, 2.0, (0.0, 3.0)).unwrap(), 3.0);
        let set = GeoSampleSet::new(vec![GeoSample::new(1.0, 0.0, 0.0), GeoSample::new(0.0, 2.0, 3.0)]).unwrap();
        assert!((idw(&set, 1.0, (0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(idw(&set, 1.0, (0.0, 2.0)).unwrap(), 3.0);
    }

    #[test]
    fn rejects_bad_power() {
        let set = GeoSampleSet::new(vec![GeoSample::new(0.0, 0.0, 1.0)]).unwrap();
        assert!(idw(&set, 0.0, (1.0, 1.0)).is_err());
    }
}
