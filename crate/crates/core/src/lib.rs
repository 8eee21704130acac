pub mod bounds;
pub mod coupling;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod potentials;
pub mod quadrature;
pub mod rng;
pub mod sde;
pub mod stein;
pub mod transport;
pub mod stats;

pub use error::{Error, Result};
