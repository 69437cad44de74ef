//! Area-weighted random sampling of points on a mesh surface.

use crate::error::{Error, Result};
use crate::mesh::{norm, TriMesh};
use crate::real::Real;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample<T> {
    pub point: [T; 3],
    /// Unit normal of the face the sample lies on.
    pub normal: [T; 3],
}

/// Draw `n` points on the surface, faces chosen proportionally to area and
/// positions uniform within the chosen face. Deterministic given the seed.
pub fn sample_surface<T: Real>(mesh: &TriMesh<T>, n: usize, seed: u64) -> Result<Vec<SurfaceSample<T>>> {
    if n < 1 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    if mesh.is_empty() {
        return Err(Error::invalid("cannot sample an empty mesh"));
    }
    // Cumulative area table for O(log F) face selection.
    let mut cumulative = Vec::with_capacity(mesh.faces.len());
    let mut total = T::zero();
    let mut face_normals = Vec::with_capacity(mesh.faces.len());
    for f in &mesh.faces {
        let raw = mesh.face_normal(*f);
        let len = norm(raw);
        total += len * T::of(0.5);
        cumulative.push(total);
        if len > T::of(1e-30) {
            face_normals.push([raw[0] / len, raw[1] / len, raw[2] / len]);
        } else {
            face_normals.push([T::zero(), T::zero(), T::one()]);
        }
    }
    if !(total > T::zero()) {
        return Err(Error::invalid("mesh has zero surface area"));
    }

    let mut rng = Rng::derive(seed, 0x73616d70);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let target = T::of(rng.next_f64()) * total;
        let face_idx = cumulative.partition_point(|&c| c <= target).min(mesh.faces.len() - 1);
        let f = mesh.faces[face_idx];
        let a = mesh.vertices[f[0] as usize];
        let b = mesh.vertices[f[1] as usize];
        let c = mesh.vertices[f[2] as usize];
        // Square-root trick: uniform over the triangle.
        let su = T::of(rng.next_f64()).sqrt();
        let r2 = T::of(rng.next_f64());
        let wa = T::one() - su;
        let wb = su * (T::one() - r2);
        let wc = su * r2;
        let point = [
            wa * a[0] + wb * b[0] + wc * c[0],
            wa * a[1] + wb * b[1] + wc * c[1],
            wa * a[2] + wb * b[2] + wc * c[2],
        ];
        out.push(SurfaceSample {
            point,
            normal: face_normals[face_idx],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> TriMesh<f64> {
        TriMesh {
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            faces: vec![[0, 1, 2]],
            colors: None,
            normals: None,
        }
    }

    #[test]
    fn samples_stay_inside_the_triangle() {
        let samples = sample_surface(&triangle(), 500, 3).unwrap();
        for s in samples {
            let [x, y, z] = s.point;
            assert!(z == 0.0);
            assert!(x >= 0.0 && y >= 0.0 && x + y <= 1.0 + 1e-12);
            assert_eq!(s.normal, [0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn area_weighting_matches_binomial_expectation() {
        // Two coplanar triangles with areas 0.5 and 1.5.
        let mesh = TriMesh::<f64> {
            vertices: vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [4.0, 0.0, 0.0],
                [4.0, 3.0, 0.0],
                [3.0, 0.0, 0.0],
            ],
            faces: vec![[0, 1, 2], [3, 4, 5]],
            colors: None,
            normals: None,
        };
        let n = 100_000;
        let samples = sample_surface(&mesh, n, 17).unwrap();
        let on_large = samples.iter().filter(|s| s.point[0] >= 2.0).count();
        let frac = on_large as f64 / n as f64;
        assert!((frac - 0.75).abs() < 0.01, "fraction {frac}");
    }

    #[test]
    fn deterministic_in_seed() {
        let a = sample_surface(&triangle(), 64, 9).unwrap();
        let b = sample_surface(&triangle(), 64, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_surface(&triangle(), 64, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_mean_approaches_centroid() {
        let samples = sample_surface(&triangle(), 200_000, 1).unwrap();
        let n = samples.len() as f64;
        let mx: f64 = samples.iter().map(|s| s.point[0]).sum::<f64>() / n;
        let my: f64 = samples.iter().map(|s| s.point[1]).sum::<f64>() / n;
        assert!((mx - 1.0 / 3.0).abs() < 3e-3);
        assert!((my - 1.0 / 3.0).abs() < 3e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(sample_surface(&triangle(), 0, 1).is_err());
        let empty: TriMesh<f64> = TriMesh::default();
        assert!(sample_surface(&empty, 10, 1).is_err());
        let degenerate = TriMesh::<f64> {
            vertices: vec![[0.0; 3], [0.0; 3], [0.0; 3]],
            faces: vec![[0, 1, 2]],
            colors: None,
            normals: None,
        };
        assert!(sample_surface(&degenerate, 10, 1).is_err());
    }
}
