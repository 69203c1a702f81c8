//! Torus-equivariant complex-oriented cohomology of GKM graphs, computed with
//! exact arithmetic over truncated power series.

pub mod classifying;
pub mod fgl;
pub mod gkm;
pub mod integrate;
pub mod lattice;
mod linalg;
pub mod scalar;
pub mod series;
