use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GeoSampleSet, VariogramFamily, VariogramModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramBin {
    pub h: f64,
    pub gamma: f64,
    pub count: usize,
}

/// Binned semivariance estimates. Bins are right-closed `(lo, hi]` and empty
/// bins are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalVariogram {
    pub max_dist: f64,
    pub n_bins: usize,
    pub bins: Vec<VariogramBin>,
}

pub fn max_pairwise_distance(samples: &GeoSampleSet) -> f64 {
    let s = samples.samples();
    let mut max: f64 = 0.0;
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            max = max.max(s[i].distance_to(s[j].x, s[j].y));
        }
    }
    max
}

pub fn empirical_variogram(samples: &GeoSampleSet, n_bins: usize, max_dist: Option<f64>) -> Result<EmpiricalVariogram> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            available: samples.len(),
            required: 2,
        });
    }
    if n_bins == 0 {
        return Err(Error::InvalidParameter("n_bins must be at least 1".into()));
    }
    let max_dist = match max_dist {
        Some(d) if d > 0.0 && d.is_finite() => d,
        Some(d) => return Err(Error::InvalidParameter(format!("max_dist must be positive, got {d}"))),
        None => 0.5 * max_pairwise_distance(samples),
    };
    let width = max_dist / n_bins as f64;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    let s = samples.samples();
    for i in 0..s.len() {
        for j in (i + 1)..s.len() {
            let d = s[i].distance_to(s[j].x, s[j].y);
            if d > max_dist * (1.0 + 1e-12) {
                continue;
            }
            let bin = ((d / width - 1e-12).ceil() as usize).clamp(1, n_bins) - 1;
            sums[bin] += (s[i].value - s[j].value).powi(2);
            counts[bin] += 1;
        }
    }
    let bins = (0..n_bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| VariogramBin {
            h: (b as f64 + 0.5) * width,
            gamma: sums[b] / (2.0 * counts[b] as f64),
            count: counts[b],
        })
        .collect();
    Ok(EmpiricalVariogram {
        max_dist,
        n_bins,
        bins,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariogramFit {
    pub model: VariogramModel,
    /// Weighted least-squares objective at the returned model.
    pub objective: f64,
    pub start_objectives: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Weighted least-squares loss with weights `N(h)/h²`.
pub fn fit_objective(emp: &EmpiricalVariogram, model: &VariogramModel) -> f64 {
    emp.bins
        .iter()
        .map(|b| b.count as f64 / (b.h * b.h) * (b.gamma - model.semivariance(b.h)).powi(2))
        .sum()
}

struct Bounds {
    range_min: f64,
    range_max: f64,
}

impl Bounds {
    fn project(&self, p: [f64; 3]) -> [f64; 3] {
        let nugget = p[0].max(0.0);
        let sill = p[1].max(nugget);
        let range = p[2].clamp(self.range_min, self.range_max);
        [nugget, sill, range]
    }
}

fn model_of(family: VariogramFamily, p: [f64; 3]) -> VariogramModel {
    VariogramModel {
        family,
        nugget: p[0],
        sill: p[1],
        range: p[2],
    }
}

/// Nelder–Mead on projected points; returns (point, value).
fn nelder_mead(f: &dyn Fn([f64; 3]) -> f64, bounds: &Bounds, start: [f64; 3], scale: [f64; 3]) -> ([f64; 3], f64) {
    const MAX_ITER: usize = 4000;
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    let x0 = bounds.project(start);
    simplex.push((x0, f(x0)));
    for i in 0..3 {
        let mut p = x0;
        let step = 0.05 * p[i].abs().max(scale[i]);
        p[i] += step;
        let mut q = bounds.project(p);
        if q == x0 {
            p[i] = x0[i] - step;
            q = bounds.project(p);
        }
        simplex.push((q, f(q)));
    }
    for _ in 0..MAX_ITER {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[3].1);
        let diameter = (1..4)
            .map(|k| {
                (0..3)
                    .map(|i| (simplex[k].0[i] - simplex[0].0[i]).abs() / scale[i])
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() <= 1e-16 * (1.0 + best.abs()) && diameter < 1e-10 {
            break;
        }
        if diameter < 1e-13 {
            break;
        }
        let mut centroid = [0.0; 3];
        for (p, _) in &simplex[..3] {
            for i in 0..3 {
                centroid[i] += p[i] / 3.0;
            }
        }
        let along = |t: f64| {
            let mut p = [0.0; 3];
            for i in 0..3 {
                p[i] = centroid[i] + t * (simplex[3].0[i] - centroid[i]);
            }
            bounds.project(p)
        };
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(xe);
            simplex[3] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(-0.5);
                (xc, f(xc))
            } else {
                let xc = along(0.5);
                (xc, f(xc))
            };
            if fc < worst.min(fr) {
                simplex[3] = (xc, fc);
            } else {
                let x_best = simplex[0].0;
                for item in simplex.iter_mut().skip(1) {
                    let mut p = [0.0; 3];
                    for i in 0..3 {
                        p[i] = x_best[i] + 0.5 * (item.0[i] - x_best[i]);
                    }
                    let p = bounds.project(p);
                    *item = (p, f(p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

/// Fits a variogram family to the empirical bins with bounded Nelder–Mead
/// from eight fixed starting points. An all-zero variogram yields a flat model
/// (nugget 0, sill 0) and a warning.
pub fn fit_variogram(emp: &EmpiricalVariogram, family: VariogramFamily) -> Result<VariogramFit> {
    if emp.bins.len() < 3 {
        return Err(Error::TooFewBins {
            available: emp.bins.len(),
            required: 3,
        });
    }
    let h_max = emp.bins.iter().map(|b| b.h).fold(0.0, f64::max);
    let gamma_bar = emp.bins.iter().map(|b| b.gamma).sum::<f64>() / emp.bins.len() as f64;
    if emp.bins.iter().all(|b| b.gamma == 0.0) {
        let model = VariogramModel {
            family,
            nugget: 0.0,
            sill: 0.0,
            range: h_max,
        };
        let warning = "empirical variogram is identically zero; using a flat model".to_string();
        log::warn!("{warning}");
        return Ok(VariogramFit {
            model,
            objective: 0.0,
            start_objectives: vec![0.0],
            warnings: vec![warning],
        });
    }
    let bounds = Bounds {
        range_min: 1e-6 * h_max,
        range_max: 3.0 * h_max,
    };
    let scale = [gamma_bar, gamma_bar, h_max];
    let f = |p: [f64; 3]| fit_objective(emp, &model_of(family, p));
    let mut starts = Vec::with_capacity(8);
    for nugget in [0.0, 0.5 * gamma_bar] {
        for sill in [gamma_bar, 2.0 * gamma_bar] {
            for range in [h_max / 3.0, h_max] {
                starts.push([nugget, sill, range]);
            }
        }
    }
    let start_objectives: Vec<f64> = starts.iter().map(|&s| f(s)).collect();
    let mut best: Option<([f64; 3], f64)> = None;
    for &start in &starts {
        let mut current = nelder_mead(&f, &bounds, start, scale);
        for _ in 0..5 {
            let next = nelder_mead(&f, &bounds, current.0, scale);
            let improved = next.1 < current.1;
            if next.1 <= current.1 {
                current = next;
            }
            if !improved {
                break;
            }
        }
        if best.is_none_or(|b| current.1 < b.1) {
            best = Some(current);
        }
    }
    let (p, objective) = best.expect("eight starts");
    Ok(VariogramFit {
        model: model_of(family, p),
        objective,
        start_objectives,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GeoSample, Rng};

    #[test]
    fn three_collinear_points() {
        let set = GeoSampleSet::new(vec![
            GeoSample::new(0.0, 0.0, 0.0),
            GeoSample::new(1.0, 0.0, 1.0),
            GeoSample::new(2.0, 0.0, 2.0),
        ])
        .unwrap();
        let emp = empirical_variogram(&set, 2, Some(2.0)).unwrap();
        assert_eq!(
            emp.bins,
            vec![
                VariogramBin { h: 0.5, gamma: 0.5, count: 2 },
                VariogramBin { h: 1.5, gamma: 2.0, count: 1 },
            ]
        );
    }

    fn grid_set(f: impl Fn(f64, f64) -> f64) -> GeoSampleSet {
        let mut v = Vec::new();
        for i in 0..6 {
            for j in 0..5 {
                let (x, y) = (i as f64 * 1.3, j as f64 * 0.7 + 0.1 * i as f64);
                v.push(GeoSample::new(x, y, f(x, y)));
            }
        }
        GeoSampleSet::new(v).unwrap()
    }

    #[test]
    fn constant_field_and_pair_count() {
        let set = grid_set(|_, _| 4.0);
        let emp = empirical_variogram(&set, 7, Some(max_pairwise_distance(&set))).unwrap();
        assert!(emp.bins.iter().all(|b| b.gamma == 0.0));
        let n = set.len();
        assert_eq!(emp.bins.iter().map(|b| b.count).sum::<usize>(), n * (n - 1) / 2);
        let fit = fit_variogram(&emp, VariogramFamily::Spherical).unwrap();
        assert!(fit.model.is_flat());
        assert_eq!(fit.warnings.len(), 1);
    }

    fn synthetic_bins(model: &VariogramModel) -> EmpiricalVariogram {
        let bins = (0..15)
            .map(|b| {
                let h = b as f64 + 0.5;
                VariogramBin {
                    h,
                    gamma: model.semivariance(h),
                    count: 20 + b,
                }
            })
            .collect();
        EmpiricalVariogram {
            max_dist: 15.0,
            n_bins: 15,
            bins,
        }
    }

    #[test]
    fn recovers_exact_spherical() {
        let truth = VariogramModel::new(VariogramFamily::Spherical, 0.0, 1.0, 10.0).unwrap();
        let fit = fit_variogram(&synthetic_bins(&truth), VariogramFamily::Spherical).unwrap();
        assert!(fit.model.nugget.abs() < 1e-3, "{:?}", fit.model);
        assert!((fit.model.sill - 1.0).abs() < 1e-3, "{:?}", fit.model);
        assert!((fit.model.range - 10.0).abs() < 1e-3, "{:?}", fit.model);
    }

    #[test]
    fn noisy_fit_beats_every_start() {
        let truth = VariogramModel::new(VariogramFamily::Spherical, 0.0, 1.0, 10.0).unwrap();
        let mut emp = synthetic_bins(&truth);
        let mut rng = Rng::new(7);
        for b in &mut emp.bins {
            b.gamma *= 1.0 + rng.uniform(-0.05, 0.05);
        }
        let fit = fit_variogram(&emp, VariogramFamily::Spherical).unwrap();
        assert_eq!(fit.start_objectives.len(), 8);
        for s in &fit.start_objectives {
            assert!(fit.objective <= *s);
        }
        assert_eq!(fit.objective, fit_objective(&emp, &fit.model));
    }

    #[test]
    fn too_few_bins() {
        let truth = VariogramModel::new(VariogramFamily::Spherical, 0.0, 1.0, 10.0).unwrap();
        let mut emp = synthetic_bins(&truth);
        emp.bins.truncate(2);
        assert!(matches!(
            fit_variogram(&emp, VariogramFamily::Spherical),
            Err(Error::TooFewBins { available: 2, required: 3 })
        ));
    }
}
