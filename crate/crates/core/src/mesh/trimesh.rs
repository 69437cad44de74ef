//! Indexed triangle mesh with optional per-vertex colors and normals.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh<T> {
    pub vertices: Vec<[T; 3]>,
    /// Counter-clockwise when viewed from outside.
    pub faces: Vec<[u32; 3]>,
    pub colors: Option<Vec<[T; 3]>>,
    pub normals: Option<Vec<[T; 3]>>,
}

impl<T: Real> Default for TriMesh<T> {
    fn default() -> Self {
        TriMesh {
            vertices: Vec::new(),
            faces: Vec::new(),
            colors: None,
            normals: None,
        }
    }
}

impl<T: Real> TriMesh<T> {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() || self.faces.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for (i, f) in self.faces.iter().enumerate() {
            if f[0] >= n || f[1] >= n || f[2] >= n {
                return Err(Error::invalid(format!("face {i} has out-of-range index")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::invalid(format!("face {i} is degenerate")));
            }
        }
        if let Some(colors) = &self.colors {
            if colors.len() != self.vertices.len() {
                return Err(Error::invalid("color count does not match vertex count"));
            }
        }
        if let Some(normals) = &self.normals {
            if normals.len() != self.vertices.len() {
                return Err(Error::invalid("normal count does not match vertex count"));
            }
            for (i, nrm) in normals.iter().enumerate() {
                let len2 = nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2];
                if (len2.sqrt() - T::one()).abs() > T::of(1e-6) {
                    return Err(Error::invalid(format!("normal {i} is not unit length")));
                }
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("vertex {i}")));
            }
        }
        Ok(())
    }

    pub fn face_normal(&self, face: [u32; 3]) -> [T; 3] {
        let a = self.vertices[face[0] as usize];
        let b = self.vertices[face[1] as usize];
        let c = self.vertices[face[2] as usize];
        cross(sub(b, a), sub(c, a))
    }

    pub fn face_area(&self, face: [u32; 3]) -> T {
        norm(self.face_normal(face)) * T::of(0.5)
    }

    pub fn total_area(&self) -> T {
        self.faces
            .iter()
            .fold(T::zero(), |acc, f| acc + self.face_area(*f))
    }

    /// Signed volume by the divergence theorem; positive for outward winding.
    pub fn signed_volume(&self) -> T {
        let sixth = T::of(1.0 / 6.0);
        self.faces.iter().fold(T::zero(), |acc, f| {
            let a = self.vertices[f[0] as usize];
            let b = self.vertices[f[1] as usize];
            let c = self.vertices[f[2] as usize];
            acc + dot(a, cross(b, c)) * sixth
        })
    }

    pub fn bounding_box(&self) -> Option<([T; 3], [T; 3])> {
        if self.vertices.is_empty() {
            return None;
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        Some((lo, hi))
    }

    /// Area-weighted vertex normals. Vertices whose incident faces cancel
    /// out (or that are isolated) get a fixed +z normal; returns how many
    /// were flagged that way.
    pub fn compute_vertex_normals(&mut self) -> usize {
        let mut acc = vec![[T::zero(); 3]; self.vertices.len()];
        for f in &self.faces {
            // Cross product length is twice the face area, so the raw sum
            // is already area-weighted.
            let n = self.face_normal(*f);
            for &vi in f {
                let slot = &mut acc[vi as usize];
                slot[0] += n[0];
                slot[1] += n[1];
                slot[2] += n[2];
            }
        }
        let mut flagged = 0;
        let normals = acc
            .into_iter()
            .map(|n| {
                let len = norm(n);
                if len > T::of(1e-30) {
                    [n[0] / len, n[1] / len, n[2] / len]
                } else {
                    flagged += 1;
                    [T::zero(), T::zero(), T::one()]
                }
            })
            .collect();
        self.normals = Some(normals);
        flagged
    }

    /// Every edge must be shared by exactly two faces, once per direction.
    pub fn check_watertight(&self) -> Result<()> {
        let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                let key = (a.min(b), a.max(b));
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        for ((a, b), count) in counts {
            if count != 2 {
                return Err(Error::NotWatertight { a, b, count });
            }
        }
        Ok(())
    }

    /// Reverse the winding of every face (and flip stored normals).
    pub fn flip_orientation(&mut self) {
        for f in &mut self.faces {
            f.swap(1, 2);
        }
        if let Some(normals) = &mut self.normals {
            for n in normals {
                for x in n.iter_mut() {
                    *x = -*x;
                }
            }
        }
    }
}

#[inline]
pub fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm<T: Real>(v: [T; 3]) -> T {
    dot(v, v).sqrt()
}
