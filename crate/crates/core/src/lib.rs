//! Monte Carlo and quadrature laboratory for moments of planar Brownian exit times.

pub mod cli_io;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod hardy;
pub mod oracles;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
