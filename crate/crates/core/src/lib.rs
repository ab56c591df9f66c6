//! Analysis of Laplacian flows `ẋ = −Lx` on complex-weighted digraphs.
//!
//! The crate covers graph construction, spectral decomposition, real-dominance
//! tests, eventual-positivity certificates, consensus prediction, modified-flow
//! design, and the diffusion dual.

pub mod certify;
pub mod design;
pub mod diffusion;
pub mod dominance;
pub mod error;
pub mod fixtures;
pub mod flows;
pub mod graph;
pub mod linalg;
pub mod serial;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(test)]
mod testutil;
