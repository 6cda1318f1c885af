pub mod calibration;
pub mod chain;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod hamiltonian;
pub mod linalg;
pub mod metrics;
pub mod noise;
pub mod protocol;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
