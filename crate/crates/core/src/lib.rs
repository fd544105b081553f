//! Heat semigroups on weighted graphs: Laplacians, intrinsic metrics,
//! refinements, Dirichlet exhaustions and the checks built on them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod graph;
pub mod heat;
pub mod io;
pub mod metric;
pub mod refinement;
pub mod zoo;

pub use error::{Error, ErrorClass, Result};
pub use graph::{Field, FiniteGraph, Graph, LazyGraph, Vertex};
