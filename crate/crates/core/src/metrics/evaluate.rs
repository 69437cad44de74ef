//! Chamfer distance, Normal Consistency Score, and the combined report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::real::Real;

use super::kdtree::KdTree;
use super::normalize::normalize_mesh;
use super::occupancy::volume_iou;
use super::sampling::{sample_surface, SurfaceSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    /// Surface samples per mesh for Chamfer and NCS.
    pub samples: usize,
    /// Lattice resolution for Volume IoU.
    pub voxel_res: usize,
    pub seed: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            samples: 100_000,
            voxel_res: 128,
            seed: 1,
        }
    }
}

/// Metric values for one candidate-vs-truth pair. Chamfer uses the squared
/// Euclidean convention and is reported scaled by 1000; NCS is reported as
/// a percentage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub volume_iou: f64,
    pub chamfer_x1e3: f64,
    pub ncs_percent: f64,
    pub samples: usize,
    pub voxel_res: usize,
    pub seed: u64,
}

impl MetricsReport {
    pub fn csv_header() -> &'static str {
        "volume_iou,chamfer_x1e3,ncs_percent,samples,voxel_res,seed"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.volume_iou, self.chamfer_x1e3, self.ncs_percent, self.samples, self.voxel_res, self.seed
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.volume_iou.is_finite()
            && self.chamfer_x1e3.is_finite()
            && self.ncs_percent.is_finite();
        let bounded = (0.0..=1.0).contains(&self.volume_iou)
            && self.chamfer_x1e3 >= 0.0
            && (-100.0..=100.0).contains(&self.ncs_percent);
        if !finite || !bounded {
            return Err(Error::invalid("metrics report out of bounds"));
        }
        Ok(())
    }
}

/// Symmetric mean squared nearest-neighbor distance between `n`-point
/// samplings of the two surfaces. Both sides use the same seed, so
/// identical meshes give exactly zero.
pub fn chamfer_distance<T: Real>(a: &TriMesh<T>, b: &TriMesh<T>, n: usize, seed: u64) -> Result<T> {
    let sa = sample_surface(a, n, seed)?;
    let sb = sample_surface(b, n, seed)?;
    Ok(chamfer_from_samples(&sa, &sb))
}

pub fn chamfer_from_samples<T: Real>(sa: &[SurfaceSample<T>], sb: &[SurfaceSample<T>]) -> T {
    let (da, _) = directed_nn(sa, sb);
    let (db, _) = directed_nn(sb, sa);
    da + db
}

/// Symmetric mean cosine between each sample's normal and the normal of
/// its nearest neighbor on the other mesh.
pub fn normal_consistency<T: Real>(a: &TriMesh<T>, b: &TriMesh<T>, n: usize, seed: u64) -> Result<T> {
    let sa = sample_surface(a, n, seed)?;
    let sb = sample_surface(b, n, seed)?;
    Ok(ncs_from_samples(&sa, &sb))
}

pub fn ncs_from_samples<T: Real>(sa: &[SurfaceSample<T>], sb: &[SurfaceSample<T>]) -> T {
    let (_, ca) = directed_nn(sa, sb);
    let (_, cb) = directed_nn(sb, sa);
    (ca + cb) * T::of(0.5)
}

/// Mean squared NN distance and mean NN normal cosine from `from` to `to`.
fn directed_nn<T: Real>(from: &[SurfaceSample<T>], to: &[SurfaceSample<T>]) -> (T, T) {
    let points: Vec<[T; 3]> = to.iter().map(|s| s.point).collect();
    let tree = KdTree::build(&points);
    let mut dist_acc = T::zero();
    let mut cos_acc = T::zero();
    for s in from {
        let nb = tree.nearest(s.point).expect("non-empty sample set");
        dist_acc += nb.dist_sq;
        cos_acc += normal_cosine(s.normal, to[nb.index].normal);
    }
    // Divide rather than multiply by a reciprocal: n/n is exactly 1, which
    // keeps self-comparison reports exact.
    let count = T::of(from.len() as f64);
    (dist_acc / count, cos_acc / count)
}

/// Cosine of the angle between two normals, exact 1 for bitwise-identical
/// inputs so self-comparison reports NCS = 1 with no rounding residue.
fn normal_cosine<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    if a == b {
        return T::one();
    }
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    if na > T::zero() && nb > T::zero() {
        (dot / (na * nb)).max(-T::one()).min(T::one())
    } else {
        T::zero()
    }
}

/// Normalize both meshes into the unit box and compute all three metrics
/// with one seed. No pose alignment beyond normalization is performed.
pub fn evaluate_pair<T: Real>(
    candidate: &TriMesh<T>,
    truth: &TriMesh<T>,
    config: &MetricsConfig,
) -> Result<MetricsReport> {
    if config.samples < 1 {
        return Err(Error::invalid("metric sample count must be >= 1"));
    }
    let cand = normalize_mesh(candidate)?;
    let truth = normalize_mesh(truth)?;
    let iou = volume_iou(&cand, &truth, config.voxel_res)?;
    let sc = sample_surface(&cand, config.samples, config.seed)?;
    let st = sample_surface(&truth, config.samples, config.seed)?;
    let (d_ct, cos_ct) = directed_nn(&sc, &st);
    let (d_tc, cos_tc) = directed_nn(&st, &sc);
    let chamfer = (d_ct + d_tc).as_f64();
    let ncs = ((cos_ct + cos_tc) * T::of(0.5)).as_f64();
    let report = MetricsReport {
        volume_iou: iou,
        chamfer_x1e3: chamfer * 1e3,
        ncs_percent: ncs * 100.0,
        samples: config.samples,
        voxel_res: config.voxel_res,
        seed: config.seed,
    };
    report.validate()?;
    Ok(report)
}
