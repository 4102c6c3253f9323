//! Coupled particle-field evolution with the field eliminated, the linearized
//! system about the minimum, and the nonlinear remainder.

mod config;
mod force;
mod integrator;
mod linear;
mod remainder;

pub use config::{
    CoulombPart, CoupledSystem, DensitySpec, FieldSpec, FreeField, PotentialSpec, ScenarioConfig, Tolerances,
};
pub use force::ForceParts;
pub use integrator::{simulate, RunInfo, SimulationRecord, SystemState};
pub use linear::{linear_simulate, LinearEnergy, LinearRates, LinearRecord, LinearSystem};
pub use remainder::Remainder;

#[cfg(test)]
mod tests;
