//! Dual-path mesh extraction: geometry from the (optionally filtered)
//! triplane's decoded SDF via marching cubes, per-vertex color queried from
//! a separately chosen triplane. Filtering the geometry path while keeping
//! the color path unfiltered removes high-frequency surface artifacts
//! without washing out texture detail.

use crate::error::Result;
use crate::field::{eval_sdf_grid, FieldDecoder, ScalarGrid, Triplane};
use crate::filter::{modulate_triplane, KernelSpec};
use crate::mesh::{marching_cubes, TriMesh};
use crate::real::Real;
use crate::shape::Shape;

/// Which triplane the color head reads from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSource {
    /// The default dual path: texture from the unfiltered triplane.
    Unfiltered,
    /// Ablation: texture from the same filtered triplane as the geometry.
    Filtered,
}

/// Extract a colored, normal-carrying mesh from a triplane field.
///
/// With a kernel spec the SDF is decoded from the filtered triplane; the
/// color path follows `color_source`. Without a spec this is the plain
/// baseline extraction.
pub fn extract_mesh<T: Real>(
    tp: &Triplane<T>,
    dec: &FieldDecoder<T>,
    spec: Option<&KernelSpec<T>>,
    n: usize,
    iso: T,
    threads: usize,
    color_source: ColorSource,
) -> Result<TriMesh<T>> {
    let filtered;
    let geometry_tp = match spec {
        Some(spec) => {
            filtered = modulate_triplane(tp, spec)?;
            &filtered
        }
        None => tp,
    };
    let color_tp = match color_source {
        ColorSource::Unfiltered => tp,
        ColorSource::Filtered => geometry_tp,
    };
    let mut grid = eval_sdf_grid(geometry_tp, dec, n, threads)?;
    cap_grid_boundary(&mut grid, iso);
    let mut mesh = marching_cubes(&grid, iso)?;
    attach_colors(&mut mesh, color_tp, dec)?;
    mesh.compute_vertex_normals();
    Ok(mesh)
}

/// Force the outermost lattice shell to the outside so every level-set
/// sheet closes inside the grid. Corrupted fields can dip below the iso
/// value on the cube faces; an uncapped grid would then yield an open
/// (non-watertight) mesh that the occupancy metric rejects. Values at or
/// above iso already count as outside, so clean fields are untouched.
pub fn cap_grid_boundary<T: Real>(grid: &mut ScalarGrid<T>, iso: T) {
    let n = grid.n;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                if k == 0 || j == 0 || i == 0 || k == n - 1 || j == n - 1 || i == n - 1 {
                    let idx = (k * n + j) * n + i;
                    if grid.data[idx] < iso {
                        grid.data[idx] = iso;
                    }
                }
            }
        }
    }
}

/// Decode per-vertex colors from the given triplane.
pub fn attach_colors<T: Real>(
    mesh: &mut TriMesh<T>,
    tp: &Triplane<T>,
    dec: &FieldDecoder<T>,
) -> Result<()> {
    let channels = tp.channels();
    let mut feats = vec![T::zero(); channels];
    let mut scratch = vec![T::zero(); channels];
    let mut head = vec![T::zero(); dec.width()];
    let mut colors = Vec::with_capacity(mesh.vertices.len());
    for v in &mesh.vertices {
        tp.eval_features_into(*v, &mut feats, &mut scratch)?;
        dec.head_input_into(&feats, &mut head);
        colors.push(dec.color_from_head(&head));
    }
    mesh.colors = Some(colors);
    Ok(())
}

/// Analytic SDF sampled over the extraction lattice.
pub fn analytic_sdf_grid<T: Real>(shape: &Shape<T>, n: usize, extent: T) -> ScalarGrid<T> {
    let mut data = Vec::with_capacity(n * n * n);
    let coord = |i: usize| {
        let t = T::of(i as f64 / (n - 1) as f64);
        -extent + (extent + extent) * t
    };
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                data.push(shape.sdf([coord(i), coord(j), coord(k)]));
            }
        }
    }
    ScalarGrid { n, extent, data }
}

/// Ground-truth mesh: marching cubes on the analytic SDF at the same
/// lattice resolution as the candidates, colored by the shape's own color
/// field, with vertex normals.
pub fn analytic_mesh<T: Real>(shape: &Shape<T>, n: usize, extent: T) -> Result<TriMesh<T>> {
    let grid = analytic_sdf_grid(shape, n, extent);
    let mut mesh = marching_cubes(&grid, T::zero())?;
    let colors = mesh.vertices.iter().map(|v| shape.color(*v)).collect();
    mesh.colors = Some(colors);
    mesh.compute_vertex_normals();
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit_triplane, FitConfig};
    use crate::field::TriplaneConfig;

    fn small_fit() -> (Triplane<f64>, FieldDecoder<f64>) {
        let shape = Shape::Sphere {
            center: [0.0, 0.0, 0.0],
            radius: 0.3,
            color: [0.9, 0.2, 0.1],
        };
        let tp_cfg = TriplaneConfig {
            resolution: 32,
            channels: 4,
            hidden: 8,
            extent: 0.5,
        };
        let fit_cfg = FitConfig {
            iterations: 400,
            ..FitConfig::default()
        };
        let result = fit_triplane(&shape, &fit_cfg, &tp_cfg).unwrap();
        (result.triplane, result.decoder)
    }

    #[test]
    fn identity_kernel_matches_baseline_exactly() {
        let (tp, dec) = small_fit();
        let spec = KernelSpec::bilateral(1);
        let base = extract_mesh(&tp, &dec, None, 24, 0.0, 1, ColorSource::Unfiltered).unwrap();
        let filt = extract_mesh(&tp, &dec, Some(&spec), 24, 0.0, 1, ColorSource::Unfiltered).unwrap();
        assert_eq!(base, filt);
    }

    #[test]
    fn geometry_is_independent_of_the_color_head() {
        let (tp, dec) = small_fit();
        let mut muted = dec.clone();
        for w in &mut muted.w_color {
            *w = 0.0;
        }
        muted.b_color = [0.0; 3];
        let a = extract_mesh(&tp, &dec, None, 24, 0.0, 1, ColorSource::Unfiltered).unwrap();
        let b = extract_mesh(&tp, &muted, None, 24, 0.0, 1, ColorSource::Unfiltered).unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert_eq!(a.faces, b.faces);
        assert_ne!(a.colors, b.colors);
    }

    #[test]
    fn analytic_sphere_mesh_has_radial_vertices() {
        let shape = Shape::<f64>::Sphere {
            center: [0.0, 0.0, 0.0],
            radius: 0.3,
            color: [1.0, 0.0, 0.0],
        };
        let mesh = analytic_mesh(&shape, 48, 0.5).unwrap();
        assert!(!mesh.is_empty());
        for v in &mesh.vertices {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((r - 0.3).abs() < 0.02);
        }
        for c in mesh.colors.as_ref().unwrap() {
            assert_eq!(*c, [1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn boundary_cap_closes_fields_that_cross_the_cube_faces() {
        // A sphere larger than the cube: every face of the lattice is
        // inside the surface, so the uncapped mesh would be fully open.
        let shape = Shape::<f64>::Sphere {
            center: [0.0, 0.0, 0.0],
            radius: 0.8,
            color: [1.0, 0.0, 0.0],
        };
        let mut grid = analytic_sdf_grid(&shape, 24, 0.5);
        cap_grid_boundary(&mut grid, 0.0);
        let mesh = marching_cubes(&grid, 0.0).unwrap();
        assert!(!mesh.is_empty());
        mesh.check_watertight().unwrap();
    }

    #[test]
    fn boundary_cap_leaves_interior_fields_untouched() {
        let shape = Shape::<f64>::Sphere {
            center: [0.0, 0.0, 0.0],
            radius: 0.3,
            color: [1.0, 0.0, 0.0],
        };
        let grid = analytic_sdf_grid(&shape, 24, 0.5);
        let mut capped = grid.clone();
        cap_grid_boundary(&mut capped, 0.0);
        assert_eq!(grid, capped);
    }

    #[test]
    fn grid_refinement_does_not_worsen_max_radial_error() {
        let shape = Shape::<f64>::Sphere {
            center: [0.0, 0.0, 0.0],
            radius: 0.3,
            color: [1.0, 0.0, 0.0],
        };
        let max_err = |n: usize| {
            let mesh = analytic_mesh(&shape, n, 0.5).unwrap();
            mesh.vertices
                .iter()
                .map(|v| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 0.3).abs())
                .fold(0.0, f64::max)
        };
        assert!(max_err(64) <= max_err(32));
    }
}
