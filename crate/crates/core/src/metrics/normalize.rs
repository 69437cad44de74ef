//! Pose-free normalization: fit a mesh into the unit box around the origin.

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::real::Real;

const MAX_ROUNDS: usize = 32;

/// Translate the bounding-box center to the origin and uniformly scale so
/// the largest bounding-box side is exactly 1.
///
/// The transform is applied repeatedly until it stops changing any vertex
/// bit, so `normalize_mesh(normalize_mesh(m))` equals `normalize_mesh(m)`
/// bit-exactly despite rounding in the center and scale estimates.
pub fn normalize_mesh<T: Real>(mesh: &TriMesh<T>) -> Result<TriMesh<T>> {
    if mesh.vertices.is_empty() {
        return Err(Error::invalid("cannot normalize an empty mesh"));
    }
    let mut out = mesh.clone();
    for _ in 0..MAX_ROUNDS {
        let (lo, hi) = out.bounding_box().expect("non-empty mesh");
        let half = T::of(0.5);
        let center = [
            (lo[0] + hi[0]) * half,
            (lo[1] + hi[1]) * half,
            (lo[2] + hi[2]) * half,
        ];
        let side = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(hi[2] - lo[2]);
        if !(side > T::zero()) {
            return Err(Error::invalid("mesh has zero spatial extent"));
        }
        if center == [T::zero(); 3] && side == T::one() {
            break;
        }
        let mut changed = false;
        for v in &mut out.vertices {
            for a in 0..3 {
                let scaled = (v[a] - center[a]) / side;
                if scaled.to_f64().map(f64::to_bits) != v[a].to_f64().map(f64::to_bits) {
                    changed = true;
                }
                v[a] = scaled;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(center: [f64; 3], side: f64) -> TriMesh<f64> {
        let h = side / 2.0;
        let mut vertices = Vec::new();
        for k in [-h, h] {
            for j in [-h, h] {
                for i in [-h, h] {
                    vertices.push([center[0] + i, center[1] + j, center[2] + k]);
                }
            }
        }
        TriMesh {
            vertices,
            faces: vec![[0, 1, 2]],
            colors: None,
            normals: None,
        }
    }

    #[test]
    fn unit_cube_is_unchanged() {
        let m = cube([0.0, 0.0, 0.0], 1.0);
        let n = normalize_mesh(&m).unwrap();
        assert_eq!(n.vertices, m.vertices);
    }

    #[test]
    fn offset_scaled_cube_maps_to_unit_cube() {
        let m = cube([5.0, 5.0, 5.0], 2.0);
        let n = normalize_mesh(&m).unwrap();
        let expected = cube([0.0, 0.0, 0.0], 1.0);
        for (a, b) in n.vertices.iter().zip(&expected.vertices) {
            for axis in 0..3 {
                assert!((a[axis] - b[axis]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn anisotropic_scaling_is_uniform() {
        let m = TriMesh::<f64> {
            vertices: vec![[0.0, 0.0, 0.0], [4.0, 1.0, 2.0]],
            faces: vec![],
            colors: None,
            normals: None,
        };
        let n = normalize_mesh(&m).unwrap();
        let (lo, hi) = n.bounding_box().unwrap();
        assert!((hi[0] - lo[0] - 1.0).abs() < 1e-12);
        assert!((hi[1] - lo[1] - 0.25).abs() < 1e-12);
        assert!((hi[2] - lo[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn idempotent_bit_exactly() {
        let mut m = cube([0.3127, -1.77, 0.04], 0.73);
        // Break the symmetry so center and scale round.
        m.vertices[3][0] += 0.1234567;
        m.vertices[5][2] -= 0.7654321;
        let once = normalize_mesh(&m).unwrap();
        let twice = normalize_mesh(&once).unwrap();
        for (a, b) in once.vertices.iter().zip(&twice.vertices) {
            for axis in 0..3 {
                assert_eq!(a[axis].to_bits(), b[axis].to_bits());
            }
        }
    }

    #[test]
    fn degenerate_meshes_rejected() {
        let empty: TriMesh<f64> = TriMesh::default();
        assert!(normalize_mesh(&empty).is_err());
        let point = TriMesh::<f64> {
            vertices: vec![[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]],
            faces: vec![],
            colors: None,
            normals: None,
        };
        assert!(normalize_mesh(&point).is_err());
    }
}
