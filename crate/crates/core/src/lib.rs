//! Stress-aligned curved-layer slicing and continuous fiber toolpath
//! generation on tetrahedral solids.
//!
//! The pipeline runs in stages, each living in its own module:
//!
//! 1. [`stress`]: per-element stress tensors (built-in linear tetrahedral FEA or
//!    an external CSV) and their principal decomposition.
//! 2. [`psl`]: principal stress lines traced element by element, filtered to the
//!    ones joining the fixture and load regions, and counted per element.
//! 3. [`layerfield`]: the guidance field whose iso-surfaces become curved layers.
//! 4. [`surfpath`]: per-layer topology analysis, the toolpath field and its
//!    iso-curves.
//! 5. [`metrics`]: alignment, thickness and continuity reports.
//!
//! [`pipeline`] wires the stages together from a TOML config and persists every
//! intermediate artifact.

// NaN must fail range checks, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod layerfield;
pub mod locate;
pub mod mesh;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod psl;
pub mod solver;
pub mod stress;
pub mod surfpath;

pub use error::{Error, Result};
pub use mesh::{Point, TetMesh, TriMesh, VertexField};

pub(crate) mod par;
