use super::features::FeatureMatrix;
use super::kmeans::check_k;
use super::result::{ClusterMethod, ClusterResult, Linkage, Merge};
use crate::error::Result;

/// Agglomerative clustering with Lance–Williams updates. Ward works on
/// squared distances and reports their square root as the merge height.
pub fn linkage_tree(m: &FeatureMatrix, linkage: Linkage) -> Vec<Merge> {
    let x = m.values();
    let n = x.nrows();
    let total = 2 * n - 1;
    let mut d = vec![vec![f64::INFINITY; total]; total];
    for i in 0..n {
        for j in (i + 1)..n {
            let sq: f64 = (0..x.ncols()).map(|c| (x[(i, c)] - x[(j, c)]).powi(2)).sum();
            let v = if linkage == Linkage::Ward { sq } else { sq.sqrt() };
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let mut size = vec![1usize; total];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for (p, &a) in active.iter().enumerate() {
            for &b in &active[p + 1..] {
                let v = d[a][b];
                if v < best.0 || (v == best.0 && (a, b) < (best.1, best.2)) {
                    best = (v, a, b);
                }
            }
        }
        let (dab, a, b) = best;
        let c = n + merges.len();
        let (na, nb) = (size[a] as f64, size[b] as f64);
        size[c] = size[a] + size[b];
        active.retain(|&v| v != a && v != b);
        for &k in &active {
            let (dak, dbk) = (d[a][k], d[b][k]);
            let nk = size[k] as f64;
            let v = match linkage {
                Linkage::Single => dak.min(dbk),
                Linkage::Complete => dak.max(dbk),
                Linkage::Average => (na * dak + nb * dbk) / (na + nb),
                Linkage::Ward => ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk),
            };
            d[c][k] = v;
            d[k][c] = v;
        }
        active.push(c);
        merges.push(Merge {
            left: a,
            right: b,
            distance: if linkage == Linkage::Ward { dab.max(0.0).sqrt() } else { dab },
            size: size[c],
        });
    }
    merges
}

/// Labels per row after applying the first `n - k` merges of the tree.
pub fn cut_tree(n: usize, merges: &[Merge], k: usize) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..2 * n.max(1)).collect();
    fn root(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (s, m) in merges.iter().take(n - k).enumerate() {
        let c = n + s;
        parent[m.left] = c;
        parent[m.right] = c;
    }
    (0..n).map(|i| root(&mut parent, i)).collect()
}

pub fn hierarchical(m: &FeatureMatrix, linkage: Linkage, k: usize) -> Result<ClusterResult> {
    let n = m.n_rows();
    check_k(k, n)?;
    let tree = linkage_tree(m, linkage);
    let raw = cut_tree(n, &tree, k);
    Ok(ClusterResult::from_labels(
        m,
        &super::result::canonical(&raw),
        k,
        ClusterMethod::Hierarchical,
        Some((linkage, tree)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CountryId;
    use nalgebra::DMatrix;

    fn one_d(points: &[f64]) -> FeatureMatrix {
        let rows = (0..points.len()).map(CountryId::synthetic).collect();
        FeatureMatrix::new(rows, vec!["x".into()], DMatrix::from_column_slice(points.len(), 1, points)).unwrap()
    }

    #[test]
    fn average_linkage_four_points() {
        let r = hierarchical(&one_d(&[0.0, 1.0, 10.0, 11.0]), Linkage::Average, 2).unwrap();
        assert_eq!(r.labels, vec![0, 0, 1, 1]);
        let tree = r.linkage_tree.unwrap();
        assert_eq!((tree[0].left, tree[0].right, tree[0].distance), (0, 1, 1.0));
        assert_eq!((tree[1].left, tree[1].right, tree[1].distance), (2, 3, 1.0));
        assert_eq!(tree[2].distance, 10.0);
    }

    #[test]
    fn chain_isolates_outlier() {
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward] {
            let r = hierarchical(&one_d(&[0.0, 1.0, 2.0, 3.0, 10.0]), linkage, 2).unwrap();
            assert_eq!(r.labels, vec![0, 0, 0, 0, 1], "{linkage:?}");
        }
    }

    #[test]
    fn k_one_and_k_n() {
        let m = one_d(&[4.0, 1.0, 9.0]);
        let all = hierarchical(&m, Linkage::Ward, 1).unwrap();
        assert_eq!(all.labels, vec![0, 0, 0]);
        let singles = hierarchical(&m, Linkage::Single, 3).unwrap();
        assert_eq!(singles.labels, vec![0, 1, 2]);
        assert_eq!(singles.inertia, 0.0);
    }

    #[test]
    fn ward_height_matches_two_point_formula() {
        // Ward distance between singletons at 0 and 2 is sqrt(2/2 * 4) = 2
        let t = linkage_tree(&one_d(&[0.0, 2.0]), Linkage::Ward);
        assert_eq!(t[0].distance, 2.0);
    }
}
