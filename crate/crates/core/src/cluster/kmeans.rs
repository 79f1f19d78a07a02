use nalgebra::DMatrix;
use rayon::prelude::*;

use super::features::FeatureMatrix;
use super::result::{ClusterMethod, ClusterResult};
use crate::error::{Error, Result};
use crate::model::Rng;

/// Lloyd iterations from one k-means++ start.
#[derive(Debug, Clone)]
pub(crate) struct Run {
    pub labels: Vec<usize>,
    pub inertia: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    pub trace: Vec<f64>,
}

pub(crate) fn check_k(k: usize, rows: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > rows {
        return Err(Error::KTooLarge { k, rows });
    }
    Ok(())
}

fn sq_dist(x: &DMatrix<f64>, i: usize, c: &[f64]) -> f64 {
    c.iter().enumerate().map(|(j, v)| (x[(i, j)] - v).powi(2)).sum()
}

fn nearest(x: &DMatrix<f64>, i: usize, centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(x, i, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_plus_plus(x: &DMatrix<f64>, k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = x.nrows();
    let row = |i: usize| x.row(i).iter().copied().collect::<Vec<f64>>();
    let mut centers = vec![row(rng.below(n as u64) as usize)];
    while centers.len() < k {
        let d2: Vec<f64> = (0..n).map(|i| nearest(x, i, &centers).1).collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if *d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| (0..n).rev().find(|&i| d2[i] > 0.0).expect("positive total"))
        } else {
            rng.below(n as u64) as usize
        };
        centers.push(row(pick));
    }
    centers
}

pub(crate) fn centroids_of(x: &DMatrix<f64>, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = x.ncols();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for j in 0..d {
            sums[l][j] += x[(i, j)];
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            for v in s.iter_mut() {
                *v /= c as f64;
            }
        }
    }
    sums
}

pub(crate) fn inertia_of(x: &DMatrix<f64>, labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(x, i, &centers[l]))
        .sum()
}

fn assert_non_increasing(trace: &[f64]) {
    if let [.., prev, last] = trace {
        assert!(
            *last <= prev + 1e-9 * (1.0 + prev.abs()),
            "k-means inertia increased from {prev} to {last}"
        );
    }
}

pub(crate) fn lloyd(x: &DMatrix<f64>, k: usize, max_iter: usize, rng: &mut Rng) -> Run {
    let n = x.nrows();
    let mut centers = seed_plus_plus(x, k, rng);
    let mut labels: Vec<usize> = (0..n).map(|i| nearest(x, i, &centers).0).collect();
    let mut trace = vec![inertia_of(x, &labels, &centers)];
    for _ in 0..max_iter.max(1) {
        // re-seed empty clusters with the point farthest from its centroid
        loop {
            let mut counts = vec![0usize; k];
            for &l in &labels {
                counts[l] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let mut far = (0, -1.0);
            for i in 0..n {
                if counts[labels[i]] < 2 {
                    continue;
                }
                let d = sq_dist(x, i, &centers[labels[i]]);
                if d > far.1 {
                    far = (i, d);
                }
            }
            labels[far.0] = empty;
            centers[empty] = x.row(far.0).iter().copied().collect();
            trace.push(inertia_of(x, &labels, &centers));
            assert_non_increasing(&trace);
        }
        centers = centroids_of(x, &labels, k);
        trace.push(inertia_of(x, &labels, &centers));
        assert_non_increasing(&trace);

        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let (c, d) = nearest(x, i, &centers);
            if c != *label && d < sq_dist(x, i, &centers[*label]) {
                *label = c;
                changed = true;
            }
        }
        trace.push(inertia_of(x, &labels, &centers));
        assert_non_increasing(&trace);
        if !changed {
            break;
        }
    }
    let centers = centroids_of(x, &labels, k);
    let inertia = inertia_of(x, &labels, &centers);
    Run {
        labels,
        inertia,
        trace,
    }
}

/// k-means with k-means++ seeding; the best of `n_init` restarts wins, ties
/// going to the earlier restart.
pub fn kmeans(m: &FeatureMatrix, k: usize, seed: u64, max_iter: usize, n_init: usize) -> Result<ClusterResult> {
    check_k(k, m.n_rows())?;
    let x = m.values();
    let base = Rng::new(seed);
    let runs: Vec<Run> = (0..n_init.max(1) as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = base.derive(r);
            lloyd(x, k, max_iter, &mut rng)
        })
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.inertia.total_cmp(&b.inertia).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    Ok(ClusterResult::from_labels(m, &best.labels, k, ClusterMethod::KMeans, None))
}

/// Best k-means inertia for each k in 1..=max_k (capped at the row count).
pub fn elbow(m: &FeatureMatrix, max_k: usize, seed: u64, max_iter: usize, n_init: usize) -> Result<Vec<(usize, f64)>> {
    (1..=max_k.min(m.n_rows()))
        .map(|k| kmeans(m, k, seed, max_iter, n_init).map(|r| (k, r.inertia)))
        .collect()
}
