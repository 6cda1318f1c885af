//! Synthetic-device calibration and Hamiltonian optimization.

pub mod calibrate;
pub mod device;
pub mod differential_evolution;
pub mod nelder_mead;
pub mod optimize;
pub mod secant;

pub use calibrate::{calibrate_all, CalibrationConfig, CalibrationReport, EnvironmentScheme};
pub use device::{Device, DeviceConfig, Environment};
pub use optimize::{optimize, CostSpec, Method, OptimizationProblem, OptimizeOptions, OptimizeOutcome};
