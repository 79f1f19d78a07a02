use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, symmetrize};

/// Cluster-robust sandwich covariance
/// `(XᵀX)⁻¹ (Σ_g X_gᵀ u_g u_gᵀ X_g) (XᵀX)⁻¹ · G/(G−1) · (n−1)/(n−k)`.
pub fn cluster_robust_cov<L: Ord + Clone>(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    clusters: &[L],
) -> Result<DMatrix<f64>> {
    let (n, k) = x.shape();
    assert_eq!(residuals.len(), n, "residual length");
    assert_eq!(clusters.len(), n, "cluster label length");
    let mut scores: BTreeMap<L, DVector<f64>> = BTreeMap::new();
    for (i, label) in clusters.iter().enumerate() {
        let row = x.row(i).transpose() * residuals[i];
        scores
            .entry(label.clone())
            .and_modify(|s| *s += &row)
            .or_insert(row);
    }
    let g = scores.len();
    if g < 2 {
        return Err(Error::SingleCluster);
    }
    let mut meat = DMatrix::zeros(k, k);
    for s in scores.values() {
        meat += s * s.transpose();
    }
    let bread = spd_inverse(&(x.transpose() * x)).ok_or_else(|| Error::RankDeficient {
        column: "design".into(),
    })?;
    let g = g as f64;
    let factor = g / (g - 1.0) * (n as f64 - 1.0) / (n as f64 - k as f64);
    Ok(symmetrize(&bread * meat * &bread * factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use crate::model::Rng;

    fn random_design(n: usize, k: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = Rng::new(seed);
        let x = DMatrix::from_fn(n, k, |_, j| if j == 0 { 1.0 } else { rng.normal() });
        let u = DVector::from_fn(n, |_, _| rng.normal());
        (x, u)
    }

    #[test]
    fn singleton_clusters_match_hc1() {
        let (x, u) = random_design(30, 3, 5);
        let labels: Vec<usize> = (0..30).collect();
        let v = cluster_robust_cov(&x, &u, &labels).unwrap();
        // Direct HC1 formula: n/(n−k) · (XᵀX)⁻¹ Σ xᵢxᵢᵀuᵢ² (XᵀX)⁻¹
        let xtx_inv = (x.transpose() * &x).try_inverse().unwrap();
        let mut meat = DMatrix::zeros(3, 3);
        for i in 0..30 {
            let xi = x.row(i).transpose();
            meat += &xi * xi.transpose() * (u[i] * u[i]);
        }
        let hc1 = &xtx_inv * meat * &xtx_inv * (30.0 / 27.0);
        assert!((v - hc1).abs().max() < 1e-12);
    }

    #[test]
    fn zero_residuals_give_zero_matrix() {
        let (x, _) = random_design(10, 2, 1);
        let v = cluster_robust_cov(&x, &DVector::zeros(10), &[0, 0, 1, 1, 2, 2, 3, 3, 4, 4]).unwrap();
        assert_eq!(v, DMatrix::zeros(2, 2));
    }

    #[test]
    fn single_cluster_rejected() {
        let (x, u) = random_design(5, 2, 1);
        assert!(matches!(
            cluster_robust_cov(&x, &u, &[0; 5]),
            Err(Error::SingleCluster)
        ));
    }

    #[test]
    fn symmetric_psd_including_duplicated_clusters() {
        for seed in 0..20 {
            let (x, u) = random_design(24, 4, seed);
            let labels: Vec<usize> = (0..24).map(|i| i / 3).collect();
            let v = cluster_robust_cov(&x, &u, &labels).unwrap();
            assert_eq!(v, v.transpose());
            assert!(min_eigenvalue(&v) >= -1e-10);

            // Duplicating every cluster's rows (as new clusters) keeps the sandwich PSD.
            let x2 = DMatrix::from_fn(48, 4, |i, j| x[(i % 24, j)]);
            let u2 = DVector::from_fn(48, |i, _| u[i % 24]);
            let labels2: Vec<usize> = (0..48).map(|i| i / 3).collect();
            let v2 = cluster_robust_cov(&x2, &u2, &labels2).unwrap();
            assert!(min_eigenvalue(&v2) >= -1e-10);
        }
    }
}
