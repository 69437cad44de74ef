//! Triplane neural-field toolkit: fitting analytic SDF shapes, local
//! frequency modulation of the feature planes, dual-path mesh extraction,
//! and mesh-quality metrics.
//!
//! The crate is generic over the scalar type through [`Real`]; the
//! `*32`/`*64` aliases pin the two supported precisions.

pub mod container;
pub mod error;
pub mod extract;
pub mod field;
pub mod filter;
pub mod fit;
pub mod mesh;
pub mod metrics;
pub mod noise;
pub mod pipeline;
pub mod plane;
pub mod real;
pub mod rng;
pub mod shape;

pub use error::{Error, Result};
pub use real::Real;

pub type Plane32 = plane::Plane<f32>;
pub type Plane64 = plane::Plane<f64>;
pub type Triplane32 = field::Triplane<f32>;
pub type Triplane64 = field::Triplane<f64>;
pub type FieldDecoder32 = field::FieldDecoder<f32>;
pub type FieldDecoder64 = field::FieldDecoder<f64>;
pub type TriMesh32 = mesh::TriMesh<f32>;
pub type TriMesh64 = mesh::TriMesh<f64>;
pub type Shape32 = shape::Shape<f32>;
pub type Shape64 = shape::Shape<f64>;
pub type KernelSpec32 = filter::KernelSpec<f32>;
pub type KernelSpec64 = filter::KernelSpec<f64>;
