//! Physical ingredients: densities, potentials, stationary states and their energies.

mod density;
mod potential;

pub use density::{make_charge_density, ChargeDensity, QuadOrders};
pub use potential::{sample_direction, ConfiningPotential, PotentialKind};

use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Particle at rest at a critical point of the potential, dressed by its Coulomb field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryState<T> {
    pub center: Vec3<T>,
}

impl<T: Real> StationaryState<T> {
    pub fn new(center: Vec3<T>) -> Self {
        Self { center }
    }

    pub fn coulomb_field(&self, rho: &ChargeDensity<T>, x: Vec3<T>) -> T {
        rho.coulomb_field(self.center, x)
    }
}

pub fn coulomb_field<T: Real>(rho: &ChargeDensity<T>, center: Vec3<T>, x: Vec3<T>) -> T {
    rho.coulomb_field(center, x)
}

pub fn self_energy<T: Real>(rho: &ChargeDensity<T>) -> T {
    rho.self_energy()
}

pub fn nu1_squared<T: Real>(rho: &ChargeDensity<T>) -> T {
    rho.nu1_squared()
}

/// Energy of the stationary state at `q`: `V(q) + ½⟨ρ, Δ⁻¹ρ⟩`.
pub fn stationary_energy<T: Real>(rho: &ChargeDensity<T>, v: &ConfiningPotential<T>, q: Vec3<T>) -> T {
    v.value(q) + rho.self_energy() * real(0.5)
}
