//! Analytic ground-truth shapes: exact primitive SDFs, CSG composites and
//! piecewise-constant colors, plus the TOML shape corpus format.
//!
//! Every primitive must fit strictly inside [-0.5, 0.5]^3 with a margin of
//! at least 0.05 so fitted fields never touch the cube boundary.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::real::Real;

pub const CUBE_HALF: f64 = 0.5;
pub const SHAPE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone)]
pub enum Shape<T> {
    Sphere {
        center: [T; 3],
        radius: T,
        color: [T; 3],
    },
    Box {
        center: [T; 3],
        half: [T; 3],
        color: [T; 3],
    },
    /// Axis of revolution is z; `major` is the ring radius, `minor` the tube radius.
    Torus {
        center: [T; 3],
        major: T,
        minor: T,
        color: [T; 3],
    },
    RoundedBox {
        center: [T; 3],
        half: [T; 3],
        radius: T,
        color: [T; 3],
    },
    Union(std::boxed::Box<Shape<T>>, std::boxed::Box<Shape<T>>),
    Difference(std::boxed::Box<Shape<T>>, std::boxed::Box<Shape<T>>),
}

impl<T: Real> Shape<T> {
    /// Exact signed distance for primitives; min/max combination for
    /// composites (exact away from composite seams).
    pub fn sdf(&self, p: [T; 3]) -> T {
        match self {
            Shape::Sphere { center, radius, .. } => norm(sub(p, *center)) - *radius,
            Shape::Box { center, half, .. } => sdf_box(sub(p, *center), *half),
            Shape::Torus {
                center,
                major,
                minor,
                ..
            } => {
                let q = sub(p, *center);
                let ring = (q[0] * q[0] + q[1] * q[1]).sqrt() - *major;
                (ring * ring + q[2] * q[2]).sqrt() - *minor
            }
            Shape::RoundedBox {
                center,
                half,
                radius,
                ..
            } => sdf_box(sub(p, *center), *half) - *radius,
            Shape::Union(a, b) => a.sdf(p).min(b.sdf(p)),
            Shape::Difference(a, b) => a.sdf(p).max(-b.sdf(p)),
        }
    }

    /// Color of the primitive with the smallest SDF at `p`; ties go to the
    /// first-declared primitive.
    pub fn color(&self, p: [T; 3]) -> [T; 3] {
        let mut best: Option<(T, [T; 3])> = None;
        self.visit_primitives(&mut |shape| {
            let d = shape.sdf(p);
            let c = shape.primitive_color().expect("leaf has a color");
            match best {
                Some((bd, _)) if d >= bd => {}
                _ => best = Some((d, c)),
            }
        });
        best.expect("shape has at least one primitive").1
    }

    fn primitive_color(&self) -> Option<[T; 3]> {
        match self {
            Shape::Sphere { color, .. }
            | Shape::Box { color, .. }
            | Shape::Torus { color, .. }
            | Shape::RoundedBox { color, .. } => Some(*color),
            _ => None,
        }
    }

    /// Depth-first leaf visit in declaration order.
    fn visit_primitives(&self, f: &mut impl FnMut(&Shape<T>)) {
        match self {
            Shape::Union(a, b) | Shape::Difference(a, b) => {
                a.visit_primitives(f);
                b.visit_primitives(f);
            }
            leaf => f(leaf),
        }
    }

    /// Conservative axis-aligned bound of the primitive supports.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        self.visit_primitives(&mut |shape| {
            let (plo, phi) = shape.primitive_bounds();
            for a in 0..3 {
                lo[a] = lo[a].min(plo[a]);
                hi[a] = hi[a].max(phi[a]);
            }
        });
        (lo, hi)
    }

    fn primitive_bounds(&self) -> ([f64; 3], [f64; 3]) {
        let around = |c: &[T; 3], r: [f64; 3]| {
            let c = [c[0].as_f64(), c[1].as_f64(), c[2].as_f64()];
            ([c[0] - r[0], c[1] - r[1], c[2] - r[2]], [c[0] + r[0], c[1] + r[1], c[2] + r[2]])
        };
        match self {
            Shape::Sphere { center, radius, .. } => {
                let r = radius.as_f64();
                around(center, [r, r, r])
            }
            Shape::Box { center, half, .. } => {
                around(center, [half[0].as_f64(), half[1].as_f64(), half[2].as_f64()])
            }
            Shape::Torus {
                center,
                major,
                minor,
                ..
            } => {
                let ring = major.as_f64() + minor.as_f64();
                around(center, [ring, ring, minor.as_f64()])
            }
            Shape::RoundedBox {
                center,
                half,
                radius,
                ..
            } => {
                let r = radius.as_f64();
                around(
                    center,
                    [half[0].as_f64() + r, half[1].as_f64() + r, half[2].as_f64() + r],
                )
            }
            _ => unreachable!("composites have no primitive bounds"),
        }
    }

    /// Check the in-cube margin invariant.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        let limit = CUBE_HALF - SHAPE_MARGIN;
        for a in 0..3 {
            if lo[a] < -limit || hi[a] > limit {
                return Err(Error::ShapeConfig(format!(
                    "shape bounds [{:.3}, {:.3}] on axis {a} exceed +-{limit}",
                    lo[a], hi[a]
                )));
            }
        }
        let mut count = 0usize;
        self.visit_primitives(&mut |shape| {
            count += 1;
            let _ = shape;
        });
        if count == 0 {
            return Err(Error::ShapeConfig("shape has no primitives".into()));
        }
        Ok(())
    }
}

#[inline]
fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm<T: Real>(v: [T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
fn sdf_box<T: Real>(q: [T; 3], half: [T; 3]) -> T {
    let d = [
        q[0].abs() - half[0],
        q[1].abs() - half[1],
        q[2].abs() - half[2],
    ];
    let outside = norm([
        d[0].max(T::zero()),
        d[1].max(T::zero()),
        d[2].max(T::zero()),
    ]);
    let inside = d[0].max(d[1]).max(d[2]).min(T::zero());
    outside + inside
}

// ---------------------------------------------------------------------------
// TOML corpus format

/// Serde mirror of one shape description.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeSpec {
    Sphere {
        center: [f64; 3],
        radius: f64,
        color: [f64; 3],
    },
    Box {
        center: [f64; 3],
        half: [f64; 3],
        color: [f64; 3],
    },
    Torus {
        center: [f64; 3],
        major: f64,
        minor: f64,
        color: [f64; 3],
    },
    RoundedBox {
        center: [f64; 3],
        half: [f64; 3],
        radius: f64,
        color: [f64; 3],
    },
    Union {
        a: std::boxed::Box<ShapeSpec>,
        b: std::boxed::Box<ShapeSpec>,
    },
    Difference {
        a: std::boxed::Box<ShapeSpec>,
        b: std::boxed::Box<ShapeSpec>,
    },
}

impl ShapeSpec {
    pub fn build<T: Real>(&self) -> Shape<T> {
        let v3 = |v: &[f64; 3]| [T::of(v[0]), T::of(v[1]), T::of(v[2])];
        match self {
            ShapeSpec::Sphere {
                center,
                radius,
                color,
            } => Shape::Sphere {
                center: v3(center),
                radius: T::of(*radius),
                color: v3(color),
            },
            ShapeSpec::Box { center, half, color } => Shape::Box {
                center: v3(center),
                half: v3(half),
                color: v3(color),
            },
            ShapeSpec::Torus {
                center,
                major,
                minor,
                color,
            } => Shape::Torus {
                center: v3(center),
                major: T::of(*major),
                minor: T::of(*minor),
                color: v3(color),
            },
            ShapeSpec::RoundedBox {
                center,
                half,
                radius,
                color,
            } => Shape::RoundedBox {
                center: v3(center),
                half: v3(half),
                radius: T::of(*radius),
                color: v3(color),
            },
            ShapeSpec::Union { a, b } => Shape::Union(
                std::boxed::Box::new(a.build()),
                std::boxed::Box::new(b.build()),
            ),
            ShapeSpec::Difference { a, b } => Shape::Difference(
                std::boxed::Box::new(a.build()),
                std::boxed::Box::new(b.build()),
            ),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct CorpusFile {
    #[serde(rename = "shape")]
    shapes: Vec<NamedShapeSpec>,
}

#[derive(Debug, Clone, Deserialize)]
struct NamedShapeSpec {
    name: String,
    #[serde(flatten)]
    spec: ShapeSpec,
}

/// Ordered list of named shapes parsed from a TOML corpus file.
#[derive(Debug, Clone)]
pub struct Corpus<T> {
    shapes: Vec<(String, Shape<T>)>,
}

impl<T: Real> Corpus<T> {
    pub fn parse(text: &str) -> Result<Self> {
        let file: CorpusFile = toml::from_str(text)
            .map_err(|e| Error::ShapeConfig(format!("corpus parse failed: {e}")))?;
        let mut shapes = Vec::new();
        for named in file.shapes {
            let shape: Shape<T> = named.spec.build();
            shape
                .validate()
                .map_err(|e| Error::ShapeConfig(format!("shape '{}': {e}", named.name)))?;
            shapes.push((named.name, shape));
        }
        if shapes.is_empty() {
            return Err(Error::ShapeConfig("corpus defines no shapes".into()));
        }
        Ok(Corpus { shapes })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Corpus::parse(&std::fs::read_to_string(path)?)
    }

    /// The corpus shipped with the crate (five named shapes).
    pub fn builtin() -> Self {
        Corpus::parse(include_str!("../data/corpus.toml")).expect("builtin corpus is valid")
    }

    pub fn get(&self, name: &str) -> Option<&Shape<T>> {
        self.shapes.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn names(&self) -> Vec<&str> {
        self.shapes.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Shape<T>)> {
        self.shapes.iter().map(|(n, s)| (n.as_str(), s))
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(center: [f64; 3], radius: f64, color: [f64; 3]) -> Shape<f64> {
        Shape::Sphere {
            center,
            radius,
            color,
        }
    }

    #[test]
    fn sphere_center_and_surface() {
        let s = sphere([0.0; 3], 0.3, [1.0, 0.0, 0.0]);
        assert!((s.sdf([0.0; 3]) + 0.3).abs() < 1e-15);
        assert!(s.sdf([0.3, 0.0, 0.0]).abs() < 1e-15);
    }

    #[test]
    fn torus_tube_surface() {
        let t = Shape::<f64>::Torus {
            center: [0.0; 3],
            major: 0.3,
            minor: 0.1,
            color: [0.0, 1.0, 0.0],
        };
        // Point directly above the ring circle at tube-radius height.
        assert!(t.sdf([0.3, 0.0, 0.1]).abs() < 1e-15);
        assert!((t.sdf([0.3, 0.0, 0.0]) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn box_faces_and_interior() {
        let b = Shape::<f64>::Box {
            center: [0.0; 3],
            half: [0.2, 0.3, 0.1],
            color: [0.0, 0.0, 1.0],
        };
        assert!(b.sdf([0.2, 0.0, 0.0]).abs() < 1e-15);
        assert!((b.sdf([0.0, 0.0, 0.0]) + 0.1).abs() < 1e-15);
        assert!((b.sdf([0.4, 0.0, 0.0]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn union_and_difference_combine() {
        let a = sphere([-0.1, 0.0, 0.0], 0.15, [1.0, 0.0, 0.0]);
        let b = sphere([0.1, 0.0, 0.0], 0.15, [0.0, 0.0, 1.0]);
        let u = Shape::Union(a.clone().into(), b.clone().into());
        let p = [0.1, 0.0, 0.0];
        assert_eq!(u.sdf(p), a.sdf(p).min(b.sdf(p)));
        let d = Shape::Difference(a.clone().into(), b.clone().into());
        assert_eq!(d.sdf(p), a.sdf(p).max(-b.sdf(p)));
    }

    #[test]
    fn single_primitive_color() {
        let s = sphere([0.0; 3], 0.3, [1.0, 0.2, 0.2]);
        assert_eq!(s.color([0.4, 0.4, 0.4]), [1.0, 0.2, 0.2]);
    }

    #[test]
    fn nearest_primitive_owns_the_color() {
        let red = sphere([-0.2, 0.0, 0.0], 0.1, [1.0, 0.0, 0.0]);
        let blue = sphere([0.2, 0.0, 0.0], 0.1, [0.0, 0.0, 1.0]);
        let u = Shape::Union(red.into(), blue.into());
        assert_eq!(u.color([0.2, 0.0, 0.0]), [0.0, 0.0, 1.0]);
        assert_eq!(u.color([-0.2, 0.0, 0.0]), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn color_tie_breaks_by_declaration_order() {
        let red = sphere([-0.2, 0.0, 0.0], 0.1, [1.0, 0.0, 0.0]);
        let blue = sphere([0.2, 0.0, 0.0], 0.1, [0.0, 0.0, 1.0]);
        let u = Shape::Union(red.into(), blue.into());
        // Equidistant from both primitives.
        assert_eq!(u.color([0.0, 0.0, 0.0]), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn margin_violation_is_rejected() {
        let s = sphere([0.3, 0.0, 0.0], 0.2, [1.0, 0.0, 0.0]);
        assert!(s.validate().is_err());
        let ok = sphere([0.1, 0.0, 0.0], 0.2, [1.0, 0.0, 0.0]);
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn builtin_corpus_has_five_valid_shapes() {
        let corpus: Corpus<f64> = Corpus::builtin();
        assert!(corpus.len() >= 5);
        for (_, shape) in corpus.iter() {
            shape.validate().unwrap();
        }
        assert!(corpus.get("sphere").is_some());
        assert!(corpus.get("torus").is_some());
    }

    #[test]
    fn sdf_is_one_lipschitz_on_primitives() {
        let corpus: Corpus<f64> = Corpus::builtin();
        let mut rng = crate::rng::Rng::new(77);
        for (_, shape) in corpus.iter() {
            for _ in 0..2000 {
                let p = rng.point_in_cube(0.5);
                let q = rng.point_in_cube(0.5);
                let dp = shape.sdf(p);
                let dq = shape.sdf(q);
                let dist = norm(sub(p, q));
                assert!((dp - dq).abs() <= dist + 1e-12);
            }
        }
    }
}
