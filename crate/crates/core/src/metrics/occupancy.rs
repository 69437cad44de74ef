//! Lattice-point occupancy by ray parity and the Volume IoU metric.

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::real::Real;

/// Distance (relative to the joint cube side) under which a ray counts as
/// grazing a projected triangle edge, making its parity ambiguous.
const DEGENERATE_EPS: f64 = 1e-9;
const MAX_JITTER_ATTEMPTS: usize = 16;

/// Intersection-over-union of the two occupancies over a `res`^3 lattice of
/// cell centers spanning the joint bounding cube. Both inputs must be
/// watertight. Two empty occupancies count as identical (IoU 1).
pub fn volume_iou<T: Real>(a: &TriMesh<T>, b: &TriMesh<T>, res: usize) -> Result<f64> {
    if res < 2 {
        return Err(Error::invalid("occupancy resolution must be >= 2"));
    }
    a.check_watertight()?;
    b.check_watertight()?;

    let (mut lo, mut hi) = a.bounding_box().ok_or_else(|| Error::invalid("empty mesh"))?;
    let (blo, bhi) = b.bounding_box().ok_or_else(|| Error::invalid("empty mesh"))?;
    for axis in 0..3 {
        lo[axis] = lo[axis].min(blo[axis]);
        hi[axis] = hi[axis].max(bhi[axis]);
    }
    // Joint bounding cube: common center, side = largest joint extent, with
    // a little slack so no lattice plane coincides with a mesh face plane.
    let mut side = T::zero();
    for axis in 0..3 {
        side = side.max(hi[axis] - lo[axis]);
    }
    if !(side > T::zero()) {
        return Err(Error::invalid("meshes have zero joint extent"));
    }
    let side = side * T::of(1.0 + 1e-4);
    let center = [
        (lo[0] + hi[0]) * T::of(0.5),
        (lo[1] + hi[1]) * T::of(0.5),
        (lo[2] + hi[2]) * T::of(0.5),
    ];
    let origin = [
        center[0] - side * T::of(0.5),
        center[1] - side * T::of(0.5),
        center[2] - side * T::of(0.5),
    ];

    let occ_a = occupancy_grid(a, origin, side, res)?;
    let occ_b = occupancy_grid(b, origin, side, res)?;
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in occ_a.iter().zip(&occ_b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Inside/outside flags for the `res`^3 cell-center lattice of the cube at
/// `origin` with the given side length. Parity of +x ray crossings; rows
/// whose ray grazes an edge or vertex are re-cast with a deterministic
/// lateral offset.
pub fn occupancy_grid<T: Real>(
    mesh: &TriMesh<T>,
    origin: [T; 3],
    side: T,
    res: usize,
) -> Result<Vec<bool>> {
    let triangles: Vec<[[f64; 3]; 3]> = mesh
        .faces
        .iter()
        .map(|f| {
            [
                to_f64(mesh.vertices[f[0] as usize]),
                to_f64(mesh.vertices[f[1] as usize]),
                to_f64(mesh.vertices[f[2] as usize]),
            ]
        })
        .collect();
    // Projected (y, z) edge lengths, ordered opposite each vertex: bc, ca, ab.
    let edge_lens: Vec<[f64; 3]> = triangles
        .iter()
        .map(|[a, b, c]| {
            let len = |p: &[f64; 3], q: &[f64; 3]| {
                let (dy, dz) = (q[1] - p[1], q[2] - p[2]);
                (dy * dy + dz * dz).sqrt()
            };
            [len(b, c), len(c, a), len(a, b)]
        })
        .collect();
    let origin = to_f64(origin);
    let side = side.as_f64();
    let cell = side / res as f64;
    let lattice = |i: usize| origin[0] + (i as f64 + 0.5) * cell;
    let lattice_y = |j: usize| origin[1] + (j as f64 + 0.5) * cell;
    let lattice_z = |k: usize| origin[2] + (k as f64 + 0.5) * cell;

    // Bin triangles by the lattice rows their (y, z) bounding box covers.
    let row_of = |y: f64, o: f64| -> isize { ((y - o) / cell - 0.5).floor() as isize };
    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); res * res];
    for (t, tri) in triangles.iter().enumerate() {
        let ymin = tri.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
        let ymax = tri.iter().map(|v| v[1]).fold(f64::NEG_INFINITY, f64::max);
        let zmin = tri.iter().map(|v| v[2]).fold(f64::INFINITY, f64::min);
        let zmax = tri.iter().map(|v| v[2]).fold(f64::NEG_INFINITY, f64::max);
        let j0 = row_of(ymin, origin[1]).max(0) as usize;
        let j1 = (row_of(ymax, origin[1]) + 1).clamp(0, res as isize - 1) as usize;
        let k0 = row_of(zmin, origin[2]).max(0) as usize;
        let k1 = (row_of(zmax, origin[2]) + 1).clamp(0, res as isize - 1) as usize;
        if j0 > j1 || k0 > k1 {
            continue;
        }
        for k in k0..=k1 {
            for j in j0..=j1 {
                bins[k * res + j].push(t as u32);
            }
        }
    }

    let scale = side.max(1.0);
    let mut out = vec![false; res * res * res];
    let mut crossings: Vec<f64> = Vec::new();
    for k in 0..res {
        for j in 0..res {
            let candidates = &bins[k * res + j];
            let (y0, z0) = (lattice_y(j), lattice_z(k));
            let mut resolved = false;
            for attempt in 0..MAX_JITTER_ATTEMPTS {
                // Deterministic lateral nudge, growing geometrically from
                // far below vertex-hit scale up to a cell fraction, never
                // leaving the row's cell. Extracted meshes share exact
                // lattice coordinates, so grazing hits need real clearance.
                let off = if attempt == 0 {
                    0.0
                } else {
                    (1e-7 * 4f64.powi(attempt as i32 - 1)).min(0.45) * cell
                };
                let (y, z) = (y0 + off, z0 + 0.618 * off);
                crossings.clear();
                if ray_crossings(&triangles, &edge_lens, candidates, y, z, scale, &mut crossings) {
                    for i in 0..res {
                        let x = lattice(i);
                        let parity = crossings.iter().filter(|&&cx| cx > x).count();
                        out[(k * res + j) * res + i] = parity % 2 == 1;
                    }
                    resolved = true;
                    break;
                }
            }
            if !resolved {
                return Err(Error::invalid(format!(
                    "occupancy ray at row ({j}, {k}) stayed degenerate after jitter"
                )));
            }
        }
    }
    Ok(out)
}

/// Collect x-coordinates where the +x ray at (y, z) crosses the candidate
/// triangles. Returns false when the ray passes within the degeneracy
/// distance of a projected triangle edge, in which case parity would be
/// ambiguous. The unnormalized barycentric value against an edge equals
/// (distance to that edge) x (projected edge length), so the distance test
/// needs the precomputed edge lengths.
fn ray_crossings(
    triangles: &[[[f64; 3]; 3]],
    edge_lens: &[[f64; 3]],
    candidates: &[u32],
    y: f64,
    z: f64,
    scale: f64,
    out: &mut Vec<f64>,
) -> bool {
    let tol = DEGENERATE_EPS * scale;
    for &t in candidates {
        let [a, b, c] = triangles[t as usize];
        let [len_bc, len_ca, len_ab] = edge_lens[t as usize];
        // Twice the signed sub-triangle areas in the (y, z) plane.
        let d = (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1]);
        let aa = (b[1] - y) * (c[2] - z) - (b[2] - z) * (c[1] - y);
        let ab = (c[1] - y) * (a[2] - z) - (c[2] - z) * (a[1] - y);
        let ac = d - aa - ab;
        let grazing = aa.abs() <= tol * len_bc || ab.abs() <= tol * len_ca || ac.abs() <= tol * len_ab;
        if grazing {
            // Tiny sub-areas only matter when the point is actually near
            // the triangle; a far-away ray can graze the infinite edge
            // lines without ambiguity.
            let near = point_near_segment_2d(y, z, b, c, tol * tol)
                || point_near_segment_2d(y, z, c, a, tol * tol)
                || point_near_segment_2d(y, z, a, b, tol * tol);
            if near {
                return false;
            }
        }
        if d.abs() <= tol * (len_bc + len_ca + len_ab) {
            // Edge-on triangle: no transversal crossing to record.
            continue;
        }
        let inside = if d > 0.0 {
            aa > 0.0 && ab > 0.0 && ac > 0.0
        } else {
            aa < 0.0 && ab < 0.0 && ac < 0.0
        };
        if inside {
            let (wa, wb, wc) = (aa / d, ab / d, ac / d);
            out.push(wa * a[0] + wb * b[0] + wc * c[0]);
        }
    }
    true
}

fn point_near_segment_2d(y: f64, z: f64, a: [f64; 3], b: [f64; 3], eps: f64) -> bool {
    let (py, pz) = (y - a[1], z - a[2]);
    let (dy, dz) = (b[1] - a[1], b[2] - a[2]);
    let len2 = dy * dy + dz * dz;
    let t = if len2 > 0.0 { ((py * dy + pz * dz) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (ry, rz) = (py - t * dy, pz - t * dz);
    ry * ry + rz * rz <= eps
}

fn to_f64<T: Real>(v: [T; 3]) -> [f64; 3] {
    [v[0].as_f64(), v[1].as_f64(), v[2].as_f64()]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_mesh(center: [f64; 3], side: f64) -> TriMesh<f64> {
        let h = side / 2.0;
        let vertices: Vec<[f64; 3]> = (0..8)
            .map(|c| {
                [
                    center[0] + if c & 1 != 0 { h } else { -h },
                    center[1] + if c & 2 != 0 { h } else { -h },
                    center[2] + if c & 4 != 0 { h } else { -h },
                ]
            })
            .collect();
        // Outward-wound faces of an axis-aligned cube.
        let faces = vec![
            [0, 2, 1], [1, 2, 3],
            [4, 5, 6], [5, 7, 6],
            [0, 1, 4], [1, 5, 4],
            [2, 6, 3], [3, 6, 7],
            [0, 4, 2], [2, 4, 6],
            [1, 3, 5], [3, 7, 5],
        ];
        TriMesh {
            vertices,
            faces,
            colors: None,
            normals: None,
        }
    }

    #[test]
    fn cube_winding_fixture_is_sane() {
        let m = cube_mesh([0.0; 3], 1.0);
        m.check_watertight().unwrap();
        assert!((m.signed_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn self_iou_is_one() {
        let m = cube_mesh([0.0; 3], 1.0);
        assert_eq!(volume_iou(&m, &m, 32).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_cubes_iou_is_zero() {
        let a = cube_mesh([0.0; 3], 1.0);
        let b = cube_mesh([5.0, 0.0, 0.0], 1.0);
        assert_eq!(volume_iou(&a, &b, 32).unwrap(), 0.0);
    }

    #[test]
    fn offset_cubes_iou_is_one_third() {
        let a = cube_mesh([0.0; 3], 1.0);
        let b = cube_mesh([0.5, 0.0, 0.0], 1.0);
        let iou = volume_iou(&a, &b, 128).unwrap();
        assert!((iou - 1.0 / 3.0).abs() < 0.02, "iou {iou}");
    }

    #[test]
    fn non_watertight_input_is_rejected() {
        let mut a = cube_mesh([0.0; 3], 1.0);
        a.faces.pop();
        let b = cube_mesh([0.0; 3], 1.0);
        assert!(matches!(volume_iou(&a, &b, 16), Err(Error::NotWatertight { .. })));
    }

    #[test]
    fn occupancy_counts_cube_volume() {
        let m = cube_mesh([0.0; 3], 1.0);
        let res = 64;
        let occ = occupancy_grid(&m, [-1.0, -1.0, -1.0], 2.0, res).unwrap();
        let frac = occ.iter().filter(|&&x| x).count() as f64 / occ.len() as f64;
        // Unit cube inside a side-2 cube occupies 1/8 of the lattice.
        assert!((frac - 0.125).abs() < 0.01, "fraction {frac}");
    }
}
