//! Time evolution: pulses, states, dissipation channels and integrators.

pub mod analytic;
pub mod channels;
pub mod export;
pub mod lindblad;
pub mod pulse;
pub mod state;
pub mod unitary;

pub use analytic::{analytic_three_site, refine_bright_spot, sweep_solution_space, BrightSpot, SolutionSpace};
pub use channels::NoiseChannelSet;
pub use lindblad::{evolve_lindblad, Integrator, LindbladOptions, Sample, Trajectory};
pub use pulse::{flattop_gaussian, Envelope, PulseShape, Schedule};
pub use state::QuantumState;
pub use unitary::{evolve_unitary, Propagator};
