//! Numerical laboratory for Toeplitz-operator CR embeddings of the sphere and
//! the zero currents of random CR functions.

pub mod config;
pub mod cutoff_moments;
pub mod embedding_geometry;
pub mod error;
pub mod experiments;
pub mod kernel_engine;
pub mod model_geometry;
pub mod numerics;
pub mod random_ensemble;
pub mod runner;
pub mod spectral_basis;
pub mod zero_currents;

pub use error::{LabError, Result};
