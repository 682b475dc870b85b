//! Simplicial meshes, per-vertex scalar fields and the piecewise-linear
//! gradient operators every downstream stage is built on.

mod field;
pub mod io;
mod tet;
mod tri;

pub use field::VertexField;
pub use tet::{BoundaryFace, FaceRef, InteriorFace, TetMesh, VertexLabels};
pub use tri::TriMesh;

pub type Point = nalgebra::Vector3<f64>;

/// Volumes below this (mm^3) are treated as degenerate.
pub const DEGENERATE_VOLUME: f64 = 1e-12;
/// Areas below this (mm^2) are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

pub(crate) fn sorted3(mut v: [usize; 3]) -> [usize; 3] {
    v.sort_unstable();
    v
}

pub(crate) fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}
