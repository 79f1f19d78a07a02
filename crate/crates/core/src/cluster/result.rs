use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use super::kmeans::{centroids_of, inertia_of};
use crate::model::CountryId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    KMeans,
    Hierarchical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
    Ward,
}

impl std::str::FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "ward" => Ok(Linkage::Ward),
            _ => Err(format!("unknown linkage {s:?}")),
        }
    }
}

/// One agglomeration step. Leaves are numbered 0..n in row order and the
/// cluster formed at step s gets id n + s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub method: ClusterMethod,
    pub n_clusters: usize,
    pub features: Vec<String>,
    pub assignments: BTreeMap<CountryId, usize>,
    /// Cluster index per feature-matrix row.
    pub labels: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centroids: Option<Vec<Vec<f64>>>,
    pub inertia: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linkage: Option<Linkage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linkage_tree: Option<Vec<Merge>>,
}

/// Renumbers clusters by the row index of their first member.
pub(crate) fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

impl ClusterResult {
    pub(crate) fn from_labels(
        m: &FeatureMatrix,
        labels: &[usize],
        k: usize,
        method: ClusterMethod,
        tree: Option<(Linkage, Vec<Merge>)>,
    ) -> Self {
        let labels = canonical(labels);
        let centers = centroids_of(m.values(), &labels, k);
        let inertia = inertia_of(m.values(), &labels, &centers);
        let assignments = m.rows().iter().copied().zip(labels.iter().copied()).collect();
        let (linkage, linkage_tree) = match tree {
            Some((l, t)) => (Some(l), Some(t)),
            None => (None, None),
        };
        ClusterResult {
            method,
            n_clusters: k,
            features: m.columns().to_vec(),
            assignments,
            labels,
            centroids: (method == ClusterMethod::KMeans).then_some(centers),
            inertia,
            linkage,
            linkage_tree,
        }
    }

    pub fn members(&self, cluster: usize) -> Vec<CountryId> {
        self.assignments
            .iter()
            .filter(|(_, &c)| c == cluster)
            .map(|(id, _)| *id)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cluster result serializes")
    }
}

/// `country,<f1>,<f2>,cluster` rows for plotting two features against each other.
pub fn scatter_csv(m: &FeatureMatrix, result: &ClusterResult, f1: &str, f2: &str) -> crate::Result<String> {
    let i1 = m
        .column_index(f1)
        .ok_or_else(|| crate::Error::UnknownVariable(f1.to_string()))?;
    let i2 = m
        .column_index(f2)
        .ok_or_else(|| crate::Error::UnknownVariable(f2.to_string()))?;
    let mut out = format!("country,{f1},{f2},cluster\n");
    for (r, country) in m.rows().iter().enumerate() {
        let cluster = result.assignments.get(country).copied().unwrap_or(usize::MAX);
        let _ = writeln!(out, "{},{},{},{}", country, m.values()[(r, i1)], m.values()[(r, i2)], cluster);
    }
    Ok(out)
}

pub fn elbow_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("k,inertia\n");
    for (k, v) in points {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}
