//! Diamond circuit surface-code toolkit: layouts, memory-experiment circuits, SI1000 noise,
//! stabilizer simulation, detector error models, matching decoders and benchmark sweeps.

pub mod bench;
pub mod circuit;
pub mod decoder;
pub mod dem;
pub mod error;
pub mod gen;
pub mod lattice;
pub mod noise;
pub mod pauli;
pub mod sim;

pub use circuit::{Basis, Circuit};
pub use error::{Error, Result};
pub use lattice::{Family, Layout, Variant};
