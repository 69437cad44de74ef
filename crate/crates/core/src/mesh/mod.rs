//! Triangle meshes: extraction from scalar grids, bookkeeping and file I/O.

pub mod io;
mod marching;
mod tables;
mod trimesh;

pub use marching::marching_cubes;
pub use trimesh::{cross, dot, norm, sub, TriMesh};
