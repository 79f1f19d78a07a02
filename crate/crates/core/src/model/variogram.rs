use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariogramFamily {
    Spherical,
    Exponential,
    Gaussian,
}

impl VariogramFamily {
    pub const ALL: [VariogramFamily; 3] = [
        VariogramFamily::Spherical,
        VariogramFamily::Exponential,
        VariogramFamily::Gaussian,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            VariogramFamily::Spherical => "spherical",
            VariogramFamily::Exponential => "exponential",
            VariogramFamily::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for VariogramFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariogramFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spherical" => Ok(VariogramFamily::Spherical),
            "exponential" => Ok(VariogramFamily::Exponential),
            "gaussian" => Ok(VariogramFamily::Gaussian),
            _ => Err(Error::InvalidParameter(format!("unknown variogram family {s:?}"))),
        }
    }
}

/// Isotropic variogram model.
///
/// Exponential and gaussian families use the practical-range scaling: `range`
/// is the distance where the structured part reaches about 95% of the partial
/// sill. `γ(0)` is defined as the nugget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramModel {
    pub family: VariogramFamily,
    pub nugget: f64,
    pub sill: f64,
    #[serde(rename = "range")]
    pub range: f64,
}

impl VariogramModel {
    pub fn new(family: VariogramFamily, nugget: f64, sill: f64, range: f64) -> Result<Self> {
        if !(nugget.is_finite() && sill.is_finite() && range.is_finite()) {
            return Err(Error::InvalidParameter("variogram parameters must be finite".into()));
        }
        if nugget < 0.0 || sill < nugget || range <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "invalid variogram: nugget={nugget}, sill={sill}, range={range} \
                 (need 0 <= nugget <= sill, range > 0)"
            )));
        }
        Ok(VariogramModel {
            family,
            nugget,
            sill,
            range,
        })
    }

    pub fn partial_sill(&self) -> f64 {
        self.sill - self.nugget
    }

    /// Semivariance γ(h) for a separation distance `h ≥ 0`.
    pub fn semivariance(&self, h: f64) -> f64 {
        debug_assert!(h >= 0.0, "negative lag {h}");
        if h <= 0.0 {
            return self.nugget;
        }
        let c = self.partial_sill();
        let r = h / self.range;
        let shape = match self.family {
            VariogramFamily::Spherical => {
                if r >= 1.0 {
                    1.0
                } else {
                    1.5 * r - 0.5 * r * r * r
                }
            }
            VariogramFamily::Exponential => 1.0 - (-3.0 * r).exp(),
            VariogramFamily::Gaussian => 1.0 - (-3.0 * r * r).exp(),
        };
        self.nugget + c * shape
    }

    /// Covariance `C(h) = sill − γ(h)` for `h > 0` and `C(0) = sill`, i.e. the
    /// nugget acts as uncorrelated noise.
    pub fn covariance(&self, h: f64) -> f64 {
        if h <= 0.0 {
            self.sill
        } else {
            self.sill - self.semivariance(h)
        }
    }

    /// A flat model has zero sill and carries no spatial information.
    pub fn is_flat(&self) -> bool {
        self.sill <= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spherical_reaches_sill_at_range() {
        let m = VariogramModel::new(VariogramFamily::Spherical, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(m.semivariance(1.0), 1.0);
        assert_eq!(m.semivariance(7.0), 1.0);
    }

    #[test]
    fn zero_lag_is_nugget() {
        for family in VariogramFamily::ALL {
            let m = VariogramModel::new(family, 0.3, 1.2, 4.0).unwrap();
            assert_eq!(m.semivariance(0.0), 0.3);
        }
    }

    #[test]
    fn spherical_midrange_closed_form() {
        let m = VariogramModel::new(VariogramFamily::Spherical, 0.0, 2.0, 10.0).unwrap();
        assert!((m.semivariance(5.0) - 1.375).abs() < 1e-15);
    }

    #[test]
    fn practical_range_reaches_95_percent() {
        for family in [VariogramFamily::Exponential, VariogramFamily::Gaussian] {
            let m = VariogramModel::new(family, 0.0, 1.0, 10.0).unwrap();
            let g = m.semivariance(10.0);
            assert!((g - (1.0 - (-3.0f64).exp())).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(VariogramModel::new(VariogramFamily::Spherical, -0.1, 1.0, 1.0).is_err());
        assert!(VariogramModel::new(VariogramFamily::Spherical, 2.0, 1.0, 1.0).is_err());
        assert!(VariogramModel::new(VariogramFamily::Spherical, 0.0, 1.0, 0.0).is_err());
    }

    fn family() -> impl Strategy<Value = VariogramFamily> {
        prop_oneof![
            Just(VariogramFamily::Spherical),
            Just(VariogramFamily::Exponential),
            Just(VariogramFamily::Gaussian)
        ]
    }

    proptest! {
        #[test]
        fn nondecreasing_and_bounded(
            family in family(),
            nugget in 0.0..5.0f64,
            psill in 0.0..10.0f64,
            range in 0.01..100.0f64,
        ) {
            let m = VariogramModel::new(family, nugget, nugget + psill, range).unwrap();
            let hmax = 3.0 * range;
            let mut prev = m.semivariance(0.0);
            for i in 1..=1000 {
                let g = m.semivariance(hmax * i as f64 / 1000.0);
                prop_assert!(g >= prev - 1e-12);
                prop_assert!(g <= m.sill + 1e-12);
                prev = g;
            }
        }
    }
}
