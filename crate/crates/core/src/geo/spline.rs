use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};
use crate::model::GeoSampleSet;

fn phi(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

/// Thin-plate spline with an affine part; `smoothing` is added to the kernel
/// diagonal.
#[derive(Debug, Clone)]
pub struct ThinPlateSpline {
    centers: Vec<(f64, f64)>,
    origin: (f64, f64),
    weights: Vec<f64>,
    affine: [f64; 3],
}

fn check_geometry(coords: &[(f64, f64)]) -> Result<()> {
    let n = coords.len() as f64;
    let mx = coords.iter().map(|c| c.0).sum::<f64>() / n;
    let my = coords.iter().map(|c| c.1).sum::<f64>() / n;
    let centered = DMatrix::from_fn(coords.len(), 2, |i, j| if j == 0 { coords[i].0 - mx } else { coords[i].1 - my });
    let sv = centered.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if hi <= 0.0 || lo <= 1e-10 * hi {
        return Err(Error::CollinearSamples);
    }
    Ok(())
}

impl ThinPlateSpline {
    pub fn fit(samples: &GeoSampleSet, smoothing: f64) -> Result<Self> {
        if !(smoothing >= 0.0 && smoothing.is_finite()) {
            return Err(Error::InvalidParameter(format!("smoothing must be >= 0, got {smoothing}")));
        }
        if samples.len() < 3 {
            return Err(Error::TooFewSamples {
                available: samples.len(),
                required: 3,
            });
        }
        let raw: Vec<(f64, f64)> = samples.samples().iter().map(|s| (s.x, s.y)).collect();
        check_geometry(&raw)?;
        let origin = raw[0];
        let centers: Vec<(f64, f64)> = raw.iter().map(|c| (c.0 - origin.0, c.1 - origin.1)).collect();
        let n = centers.len();
        let z0 = samples.samples()[0].value;
        let mut a = DMatrix::zeros(n + 3, n + 3);
        let mut b = DVector::zeros(n + 3);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = phi((centers[i].0 - centers[j].0).hypot(centers[i].1 - centers[j].1));
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
            a[(i, i)] = smoothing;
            let p = [1.0, centers[i].0, centers[i].1];
            for (k, pk) in p.iter().enumerate() {
                a[(i, n + k)] = *pk;
                a[(n + k, i)] = *pk;
            }
            b[i] = samples.samples()[i].value - z0;
        }
        let lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn> = a.clone().lu();
        let mut sol = lu
            .solve(&b)
            .ok_or_else(|| Error::SingularSystem("thin-plate spline system is singular".into()))?;
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem("thin-plate spline system is singular".into()));
        }
        let residual = &b - &a * &sol;
        if let Some(corr) = lu.solve(&residual) {
            sol += corr;
        }
        Ok(ThinPlateSpline {
            centers,
            origin,
            weights: sol.iter().take(n).copied().collect(),
            affine: [z0 + sol[n], sol[n + 1], sol[n + 2]],
        })
    }

    pub fn predict(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x - self.origin.0, y - self.origin.1);
        let bend: f64 = self
            .centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * phi((c.0 - x).hypot(c.1 - y)))
            .sum();
        self.affine[0] + self.affine[1] * x + self.affine[2] * y + bend
    }
}

pub fn spline_tps(samples: &GeoSampleSet, smoothing: f64, target: (f64, f64)) -> Result<f64> {
    Ok(ThinPlateSpline::fit(samples, smoothing)?.predict(target.0, target.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeoSample;

    fn set(f: impl Fn(f64, f64) -> f64) -> GeoSampleSet {
        let pts = [(0.0, 0.0), (3.0, 1.0), (1.0, 4.0), (5.0, 5.0), (2.5, 2.0), (4.0, 0.5)];
        GeoSampleSet::new(pts.iter().map(|&(x, y)| GeoSample::new(x, y, f(x, y))).collect()).unwrap()
    }

    #[test]
    fn interpolates_at_samples() {
        let s = set(|x, y| (x * 0.7).sin() + y * y * 0.1);
        let tps = ThinPlateSpline::fit(&s, 0.0).unwrap();
        for p in s.samples() {
            assert!((tps.predict(p.x, p.y) - p.value).abs() < 1e-8);
        }
    }

    #[test]
    fn reproduces_plane() {
        let s = set(|x, y| 2.0 * x + y + 1.0);
        for (x, y) in [(-3.0, 7.0), (2.2, 2.2), (10.0, -4.0)] {
            assert!((spline_tps(&s, 0.0, (x, y)).unwrap() - (2.0 * x + y + 1.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn collinear_rejected() {
        let s = GeoSampleSet::new(vec![
            GeoSample::new(0.0, 0.0, 1.0),
            GeoSample::new(1.0, 1.0, 2.0),
            GeoSample::new(2.0, 2.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(ThinPlateSpline::fit(&s, 0.0), Err(Error::CollinearSamples)));
    }
}
