//! Standard 256-case marching cubes over a dense scalar grid.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::ScalarGrid;
use crate::real::Real;

use super::tables::{EDGE_CORNERS, EDGE_TABLE, TRIANGLE_TABLE};
use super::trimesh::TriMesh;

/// Corner offsets matching the table conventions.
const CORNER_OFFSETS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Extract the iso-surface of `grid` at level `iso`.
///
/// A corner is inside when its value is strictly below the iso level, so a
/// grid that touches the level without crossing it produces no geometry.
/// Vertices on shared cell edges are emitted once; faces wind
/// counter-clockwise seen from outside (positive signed volume for a closed
/// surface around a `value < iso` interior).
pub fn marching_cubes<T: Real>(grid: &ScalarGrid<T>, iso: T) -> Result<TriMesh<T>> {
    if grid.n < 2 {
        return Err(Error::invalid("grid resolution must be >= 2"));
    }
    if grid.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("scalar grid".into()));
    }
    let n = grid.n;
    let mut mesh = TriMesh::default();
    // Canonical lattice edge id: (linear index of the lower endpoint, axis).
    let mut edge_vertices: HashMap<(usize, usize), u32> = HashMap::new();
    let point_index = |p: [usize; 3]| (p[2] * n + p[1]) * n + p[0];

    let mut corner_pos = [[T::zero(); 3]; 8];
    let mut corner_val = [T::zero(); 8];
    for k in 0..n - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let mut cube_index = 0usize;
                for (c, off) in CORNER_OFFSETS.iter().enumerate() {
                    let (ci, cj, ck) = (i + off[0], j + off[1], k + off[2]);
                    corner_pos[c] = grid.pos(ci, cj, ck);
                    corner_val[c] = grid.value(ci, cj, ck);
                    if corner_val[c] < iso {
                        cube_index |= 1 << c;
                    }
                }
                if EDGE_TABLE[cube_index] == 0 {
                    continue;
                }

                let mut cell_edge_vertex = [u32::MAX; 12];
                for e in 0..12 {
                    if EDGE_TABLE[cube_index] & (1 << e) == 0 {
                        continue;
                    }
                    let [a, b] = EDGE_CORNERS[e];
                    let pa = [i + CORNER_OFFSETS[a][0], j + CORNER_OFFSETS[a][1], k + CORNER_OFFSETS[a][2]];
                    let pb = [i + CORNER_OFFSETS[b][0], j + CORNER_OFFSETS[b][1], k + CORNER_OFFSETS[b][2]];
                    let (lo, hi, axis) = if point_index(pa) <= point_index(pb) {
                        (pa, pb, edge_axis(pa, pb))
                    } else {
                        (pb, pa, edge_axis(pb, pa))
                    };
                    debug_assert!(point_index(hi) > point_index(lo));
                    let key = (point_index(lo), axis);
                    let idx = *edge_vertices.entry(key).or_insert_with(|| {
                        let (va, vb) = (corner_val[a], corner_val[b]);
                        // A crossed edge has values on opposite sides of
                        // iso, so the denominator is nonzero.
                        let t = (iso - va) / (vb - va);
                        let t = t.max(T::zero()).min(T::one());
                        let p = [
                            corner_pos[a][0] + (corner_pos[b][0] - corner_pos[a][0]) * t,
                            corner_pos[a][1] + (corner_pos[b][1] - corner_pos[a][1]) * t,
                            corner_pos[a][2] + (corner_pos[b][2] - corner_pos[a][2]) * t,
                        ];
                        let idx = mesh.vertices.len() as u32;
                        mesh.vertices.push(p);
                        idx
                    });
                    cell_edge_vertex[e] = idx;
                }

                let tri = &TRIANGLE_TABLE[cube_index];
                let mut t = 0;
                while tri[t] >= 0 {
                    let v0 = cell_edge_vertex[tri[t] as usize];
                    let v1 = cell_edge_vertex[tri[t + 1] as usize];
                    let v2 = cell_edge_vertex[tri[t + 2] as usize];
                    // Grid-aligned degenerate triangles can appear when the
                    // surface passes exactly through lattice points.
                    if v0 != v1 && v1 != v2 && v0 != v2 {
                        mesh.faces.push([v0, v2, v1]);
                    }
                    t += 3;
                }
            }
        }
    }
    Ok(mesh)
}

fn edge_axis(lo: [usize; 3], hi: [usize; 3]) -> usize {
    for axis in 0..3 {
        if lo[axis] != hi[axis] {
            return axis;
        }
    }
    unreachable!("edge endpoints coincide")
}
