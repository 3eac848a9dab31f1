//! Unstructured meshes as stratified DAGs with a hierarchical tree overlay
//! for non-conformal ("hanging node") refinement, plus the finite element
//! machinery that lets code written for conformal meshes run unchanged:
//! automatic hanging-node constraint matrices, constraint-aware assembly,
//! and a small quadtree/octree forest front end.

pub mod assembly;
pub mod builder;
pub mod constraints;
pub mod element;
pub mod error;
pub mod forest;
pub mod mesh_io;
pub mod meshgen;
pub mod plex;
pub mod quadrature;
pub mod refine;
pub mod reftree;
pub mod samples;
pub mod section;
pub mod shape;
pub mod tree;

pub use error::{Error, Result};
pub use plex::{Orientation, Plex, PointId};
pub use shape::CellShape;
