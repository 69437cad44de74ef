//! Exact nearest-neighbor search over 3D point sets.
//!
//! A balanced kd-tree built by median splits. Queries return exactly the
//! same neighbor as a linear scan (ties broken toward the lower original
//! index), which the test suite asserts against the brute-force route.

use crate::real::Real;

#[derive(Debug, Clone)]
pub struct KdTree<T> {
    /// Points in tree order, each with its original index.
    nodes: Vec<([T; 3], u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub index: usize,
    pub dist_sq: T,
}

impl<T: Real> KdTree<T> {
    pub fn build(points: &[[T; 3]]) -> Self {
        let mut nodes: Vec<([T; 3], u32)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, i as u32))
            .collect();
        if !nodes.is_empty() {
            build_recursive(&mut nodes, 0);
        }
        KdTree { nodes }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nearest(&self, query: [T; 3]) -> Option<Neighbor<T>> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = Neighbor {
            index: usize::MAX,
            dist_sq: T::infinity(),
        };
        search(&self.nodes, 0, query, &mut best);
        Some(best)
    }
}

/// Subdivision layout: the median of the slice sits at its midpoint, the
/// halves recurse with the split axis cycling x, y, z by depth.
fn build_recursive<T: Real>(nodes: &mut [([T; 3], u32)], depth: usize) {
    if nodes.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = nodes.len() / 2;
    nodes.select_nth_unstable_by(mid, |a, b| {
        a.0[axis]
            .partial_cmp(&b.0[axis])
            .expect("non-finite point in kd-tree")
            .then(a.1.cmp(&b.1))
    });
    let (lo, rest) = nodes.split_at_mut(mid);
    build_recursive(lo, depth + 1);
    build_recursive(&mut rest[1..], depth + 1);
}

fn search<T: Real>(nodes: &[([T; 3], u32)], depth: usize, query: [T; 3], best: &mut Neighbor<T>) {
    let mid = nodes.len() / 2;
    let (point, original) = nodes[mid];
    let d = dist_sq(point, query);
    if d < best.dist_sq || (d == best.dist_sq && (original as usize) < best.index) {
        *best = Neighbor {
            index: original as usize,
            dist_sq: d,
        };
    }
    let axis = depth % 3;
    let delta = query[axis] - point[axis];
    let (near, far) = if delta < T::zero() {
        (&nodes[..mid], &nodes[mid + 1..])
    } else {
        (&nodes[mid + 1..], &nodes[..mid])
    };
    if !near.is_empty() {
        search(near, depth + 1, query, best);
    }
    // The far half can only win (or tie) when the splitting plane is within
    // the current best radius.
    if !far.is_empty() && delta * delta <= best.dist_sq {
        search(far, depth + 1, query, best);
    }
}

#[inline]
fn dist_sq<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Linear-scan oracle with the same tie-break rule as the tree.
pub fn brute_force_nearest<T: Real>(points: &[[T; 3]], query: [T; 3]) -> Option<Neighbor<T>> {
    let mut best: Option<Neighbor<T>> = None;
    for (i, p) in points.iter().enumerate() {
        let d = dist_sq(*p, query);
        if best.map_or(true, |b| d < b.dist_sq) {
            best = Some(Neighbor {
                index: i,
                dist_sq: d,
            });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random_points(n: usize, rng: &mut Rng) -> Vec<[f64; 3]> {
        (0..n)
            .map(|_| [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)])
            .collect()
    }

    #[test]
    fn empty_tree_has_no_neighbor() {
        let tree: KdTree<f64> = KdTree::build(&[]);
        assert!(tree.nearest([0.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn single_point() {
        let tree = KdTree::build(&[[1.0, 2.0, 3.0]]);
        let nb = tree.nearest([1.0, 2.0, 2.0]).unwrap();
        assert_eq!(nb.index, 0);
        assert_eq!(nb.dist_sq, 1.0);
    }

    #[test]
    fn matches_brute_force_on_random_queries() {
        let mut rng = Rng::new(11);
        for trial in 0..5 {
            let points = random_points(200 + trial * 97, &mut rng);
            let tree = KdTree::build(&points);
            for _ in 0..200 {
                let q = [rng.range(-1.2, 1.2), rng.range(-1.2, 1.2), rng.range(-1.2, 1.2)];
                let a = tree.nearest(q).unwrap();
                let b = brute_force_nearest(&points, q).unwrap();
                assert_eq!(a.index, b.index);
                assert_eq!(a.dist_sq, b.dist_sq);
            }
        }
    }

    #[test]
    fn matches_brute_force_on_clustered_duplicates() {
        // Heavy ties exercise the lower-index tie-break in both routes.
        let mut points = Vec::new();
        for i in 0..4 {
            for _ in 0..5 {
                points.push([i as f64, 0.0, 0.0]);
            }
        }
        let tree = KdTree::build(&points);
        for q in [[0.2, 0.0, 0.0], [1.5, 0.0, 0.0], [3.9, 0.0, 0.0]] {
            let a = tree.nearest(q).unwrap();
            let b = brute_force_nearest(&points, q).unwrap();
            assert_eq!(a.index, b.index);
            assert_eq!(a.dist_sq, b.dist_sq);
        }
    }

    #[test]
    fn query_on_a_tree_point_returns_zero_distance() {
        let mut rng = Rng::new(5);
        let points = random_points(64, &mut rng);
        let tree = KdTree::build(&points);
        for (i, p) in points.iter().enumerate() {
            let nb = tree.nearest(*p).unwrap();
            assert_eq!(nb.dist_sq, 0.0);
            assert_eq!(nb.index, i);
        }
    }
}
