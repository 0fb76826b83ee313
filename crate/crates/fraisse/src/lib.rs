//! Finite reflexive graphs under connected epimorphisms, the constructions that
//! make them a projective Fraïssé class, bounded generic towers approximating the
//! Menger prespace, and an integral chain-complex calculus for acyclicity.
//!
//! Graphs carry implicit loops on every vertex. A morphism is a vertex map that
//! sends edges to edges or loops; it belongs to the class when it is surjective on
//! vertices and edges and its point fibers are connected.

pub mod cli;
pub mod engine;
pub mod error;
pub mod graph;
pub mod io;
pub mod ops;
pub mod simplicial;
pub mod snf;

pub use error::{Error, Result};
pub use graph::{Graph, GraphMorphism, VertexSubset};
