//! Mesh-pair evaluation: normalization, surface sampling, Volume IoU,
//! Chamfer distance and Normal Consistency Score.

mod evaluate;
mod kdtree;
mod normalize;
mod occupancy;
mod sampling;

pub use evaluate::{
    chamfer_distance, chamfer_from_samples, evaluate_pair, ncs_from_samples, normal_consistency,
    MetricsConfig, MetricsReport,
};
pub use kdtree::{brute_force_nearest, KdTree, Neighbor};
pub use normalize::normalize_mesh;
pub use occupancy::{occupancy_grid, volume_iou};
pub use sampling::{sample_surface, SurfaceSample};
