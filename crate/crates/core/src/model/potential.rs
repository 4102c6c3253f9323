//! Confining potentials with an isotropic minimum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, Real};
use crate::vec3::{Mat3, Vec3};

/// Catalog of confining potentials, all centred at `minimum`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `ν₀²|d|²/2`
    Harmonic,
    /// `ν₀²|d|²/2 + λ|d|⁴/4`
    Quartic { lambda: f64 },
    /// `ν₀²|d|²/2 + κ d₁³/3 + λ|d|⁴/4`; even in `d₃` but not under `d ↦ −d`.
    Cubic { kappa: f64, lambda: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfiningPotential<T> {
    pub kind: PotentialKind,
    pub minimum: Vec3<T>,
    pub nu0_squared: T,
}

impl<T: Real> ConfiningPotential<T> {
    pub fn new(kind: PotentialKind, nu0_squared: T, minimum: Vec3<T>) -> Result<Self> {
        if !(nu0_squared > T::zero()) {
            return Err(Error::param("potential.nu0", "nu0^2 must be positive"));
        }
        match kind {
            PotentialKind::Harmonic => {}
            PotentialKind::Quartic { lambda } => {
                if !(lambda >= 0.0) {
                    return Err(Error::param("potential.lambda", "must be nonnegative for confinement"));
                }
            }
            PotentialKind::Cubic { lambda, kappa } => {
                if !(lambda > 0.0) || !kappa.is_finite() {
                    return Err(Error::param("potential.lambda", "cubic potential needs lambda > 0 for confinement"));
                }
                // no critical points besides the minimum
                if kappa * kappa >= 4.0 * lambda * crate::to_f64(nu0_squared) {
                    return Err(Error::param(
                        "potential.kappa",
                        "kappa^2 < 4 lambda nu0^2 required for a unique critical point",
                    ));
                }
            }
        }
        Ok(Self { kind, minimum, nu0_squared })
    }

    pub fn harmonic(nu0: T) -> Self {
        Self { kind: PotentialKind::Harmonic, minimum: Vec3::zero(), nu0_squared: nu0 * nu0 }
    }

    pub fn quartic(nu0: T, lambda: f64) -> Self {
        Self { kind: PotentialKind::Quartic { lambda }, minimum: Vec3::zero(), nu0_squared: nu0 * nu0 }
    }

    pub fn cubic(nu0: T, kappa: f64, lambda: f64) -> Self {
        Self { kind: PotentialKind::Cubic { kappa, lambda }, minimum: Vec3::zero(), nu0_squared: nu0 * nu0 }
    }

    fn coeffs(&self) -> (T, T) {
        match self.kind {
            PotentialKind::Harmonic => (T::zero(), T::zero()),
            PotentialKind::Quartic { lambda } => (T::zero(), real(lambda)),
            PotentialKind::Cubic { kappa, lambda } => (real(kappa), real(lambda)),
        }
    }

    pub fn value(&self, q: Vec3<T>) -> T {
        let d = q - self.minimum;
        let (k, l) = self.coeffs();
        let d2 = d.norm2();
        self.nu0_squared * d2 * real(0.5) + k * d[0] * d[0] * d[0] / real(3.0) + l * d2 * d2 * real(0.25)
    }

    pub fn gradient(&self, q: Vec3<T>) -> Vec3<T> {
        let d = q - self.minimum;
        let (k, l) = self.coeffs();
        let mut g = d * (self.nu0_squared + l * d.norm2());
        g[0] += k * d[0] * d[0];
        g
    }

    pub fn hessian(&self, q: Vec3<T>) -> Mat3<T> {
        let d = q - self.minimum;
        let (k, l) = self.coeffs();
        let mut h = Mat3::scaled_identity(self.nu0_squared + l * d.norm2()).add(&Mat3::outer(d, d).scale(l + l));
        h.m[0][0] += (k + k) * d[0];
        h
    }

    pub fn nu0(&self) -> T {
        self.nu0_squared.sqrt()
    }

    /// Checks growth of the minimum over spheres of the given radii.
    pub fn check_confinement(&self, radii: &[T]) -> bool {
        let mut last = self.value(self.minimum);
        for &r in radii {
            let mut lowest = T::infinity();
            for i in 0..64 {
                let w = sample_direction::<T>(i, 64);
                lowest = lowest.min(self.value(self.minimum + w * r));
            }
            if !(lowest > last) {
                return false;
            }
            last = lowest;
        }
        true
    }

    /// `∂₃V = 0` on the plane `q₃ = 0` at `n` deterministic sample points of radius ≤ `extent`.
    pub fn check_plane_symmetry(&self, n: usize, extent: T) -> bool {
        (0..n).all(|i| {
            let a = real::<T>(((i as f64 + 0.5) * 0.618_033_988_749_894_9).fract() * 2.0 - 1.0);
            let b = real::<T>(((i as f64 + 0.5) * 0.754_877_666_246_692_7).fract() * 2.0 - 1.0);
            let q = Vec3::new(a * extent, b * extent, T::zero());
            self.gradient(q)[2].abs() <= T::epsilon() * real(16.0) * (T::one() + self.gradient(q).norm())
        })
    }
}

/// Fibonacci-sphere direction `i` of `n`.
pub fn sample_direction<T: Real>(i: usize, n: usize) -> Vec3<T> {
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let s = (1.0 - z * z).max(0.0).sqrt();
    let phi = i as f64 * std::f64::consts::PI * (3.0 - 5f64.sqrt());
    Vec3::new(real(s * phi.cos()), real(s * phi.sin()), real(z))
}
