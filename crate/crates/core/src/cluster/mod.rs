//! Country clustering on resilience features.

mod features;
mod hierarchical;
mod kmeans;
mod result;

pub use features::{build_features, panel_means, standardize, FeatureBuild, FeatureMatrix, FilledFeature, Standardized};
pub use hierarchical::{cut_tree, hierarchical, linkage_tree};
pub use kmeans::{elbow, kmeans};
pub use result::{elbow_csv, scatter_csv, ClusterMethod, ClusterResult, Linkage, Merge};
