//! Field evaluation: retarded part from the trajectory, free (Kirchhoff) part
//! from the initial data, and the far-field amplitude.

mod farfield;
mod initial;
mod kirchhoff;
mod retarded;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use farfield::{theta_threshold, ConeAmplitude};
pub use initial::{Component, DecayClass, FieldInitialData, Shape};

use crate::error::{Error, Result};
use crate::history::Trajectory;
use crate::model::ChargeDensity;
use crate::quadrature::GaussRule;
use crate::scalar::{real, to_f64, Real};
use crate::vec3::Vec3;

/// Quadrature settings for field evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSettings {
    /// Gauss nodes per history interval in time integrals.
    pub panel_order: usize,
    /// Gauss nodes per polar panel in Kirchhoff spherical means.
    pub sphere_polar: usize,
    /// Azimuthal points in spherical means.
    pub sphere_azimuth: usize,
}

impl Default for FieldSettings {
    fn default() -> Self {
        Self { panel_order: 6, sphere_polar: 24, sphere_azimuth: 8 }
    }
}

impl FieldSettings {
    pub fn doubled(self) -> Self {
        Self {
            panel_order: 2 * self.panel_order,
            sphere_polar: 2 * self.sphere_polar,
            sphere_azimuth: 2 * self.sphere_azimuth,
        }
    }
}

/// `(φ, π, ∇φ)` at one space-time point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldValues<T> {
    pub phi: T,
    pub pi: T,
    pub grad_phi: Vec3<T>,
}

impl<T: Real> FieldValues<T> {
    pub fn zero() -> Self {
        Self { phi: T::zero(), pi: T::zero(), grad_phi: Vec3::zero() }
    }

    pub fn add(self, o: Self) -> Self {
        Self { phi: self.phi + o.phi, pi: self.pi + o.pi, grad_phi: self.grad_phi + o.grad_phi }
    }

    pub fn scale(self, s: T) -> Self {
        Self { phi: self.phi * s, pi: self.pi * s, grad_phi: self.grad_phi * s }
    }

    pub fn max_abs(&self) -> T {
        self.phi.abs().max(self.pi.abs()).max(self.grad_phi.max_abs())
    }
}

/// Total field with its retarded and free parts.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldSample<T> {
    pub phi: T,
    pub pi: T,
    pub grad_phi: Vec3<T>,
    pub retarded: FieldValues<T>,
    pub kirchhoff: FieldValues<T>,
}

impl<T: Real> FieldSample<T> {
    pub fn from_parts(retarded: FieldValues<T>, kirchhoff: FieldValues<T>) -> Self {
        let t = retarded.add(kirchhoff);
        Self { phi: t.phi, pi: t.pi, grad_phi: t.grad_phi, retarded, kirchhoff }
    }

    pub fn total(&self) -> FieldValues<T> {
        FieldValues { phi: self.phi, pi: self.pi, grad_phi: self.grad_phi }
    }
}

/// Density, initial data and quadrature rules bundled for repeated evaluation.
#[derive(Clone, Debug)]
pub struct FieldSolver<T: Real> {
    pub rho: Arc<ChargeDensity<T>>,
    pub data: FieldInitialData,
    pub settings: FieldSettings,
    pub(crate) panel: GaussRule<T>,
    pub(crate) polar: GaussRule<T>,
}

impl<T: Real> FieldSolver<T> {
    pub fn new(rho: Arc<ChargeDensity<T>>, data: FieldInitialData, settings: FieldSettings) -> Self {
        Self {
            panel: GaussRule::new(settings.panel_order),
            polar: GaussRule::new(settings.sphere_polar),
            rho,
            data,
            settings,
        }
    }

    pub fn with_data(&self, data: FieldInitialData) -> Self {
        Self::new(self.rho.clone(), data, self.settings)
    }

    /// Visits Gauss nodes `(s, w)` on `[lo, hi]` split at the trajectory knots.
    pub(crate) fn time_nodes<H: Trajectory<T>, F: FnMut(T, T)>(&self, hist: &H, lo: T, hi: T, mut f: F) {
        if !(hi > lo) {
            return;
        }
        let mut a = lo;
        for b in hist.knots_between(lo, hi).into_iter().chain(std::iter::once(hi)) {
            if b > a {
                for (s, w) in self.panel.mapped(a, b) {
                    f(s, w);
                }
                a = b;
            }
        }
    }

    /// Full field at `(x, t)`.
    pub fn field_eval<H: Trajectory<T>>(&self, hist: &H, x: Vec3<T>, t: T) -> Result<FieldSample<T>> {
        let r = self.lw_field(hist, x, t)?;
        let k = self.kirchhoff_field(x, t)?;
        Ok(FieldSample::from_parts(r, k))
    }
}

pub(crate) fn check_time<T: Real, H: Trajectory<T>>(hist: &H, t: T) -> Result<()> {
    let end = hist.end_time();
    if t < T::zero() || t > end + hist.step() * real(1e-9) || !t.is_finite() {
        return Err(Error::Coverage { t: to_f64(t), start: 0.0, end: to_f64(end) });
    }
    Ok(())
}

/// Retarded part `(φ_r, π_r, ∇φ_r)` with default settings.
pub fn lw_field<T: Real, H: Trajectory<T>>(
    rho: &Arc<ChargeDensity<T>>,
    hist: &H,
    x: Vec3<T>,
    t: T,
) -> Result<FieldValues<T>> {
    FieldSolver::new(rho.clone(), FieldInitialData::zero(), FieldSettings::default()).lw_field(hist, x, t)
}

/// Free part `(φ_K, π_K, ∇φ_K)` of the initial data with default settings.
pub fn kirchhoff_field<T: Real>(
    rho: &Arc<ChargeDensity<T>>,
    data: &FieldInitialData,
    x: Vec3<T>,
    t: T,
) -> Result<FieldValues<T>> {
    FieldSolver::new(rho.clone(), data.clone(), FieldSettings::default()).kirchhoff_field(x, t)
}

pub fn field_eval<T: Real, H: Trajectory<T>>(
    rho: &Arc<ChargeDensity<T>>,
    hist: &H,
    data: &FieldInitialData,
    x: Vec3<T>,
    t: T,
) -> Result<FieldSample<T>> {
    FieldSolver::new(rho.clone(), data.clone(), FieldSettings::default()).field_eval(hist, x, t)
}

pub fn farfield_amplitude<T: Real, H: Trajectory<T>>(
    rho: &Arc<ChargeDensity<T>>,
    hist: &H,
    omega: Vec3<T>,
    t: T,
) -> Result<T> {
    FieldSolver::new(rho.clone(), FieldInitialData::zero(), FieldSettings::default()).farfield_amplitude(hist, omega, t)
}

pub fn farfield_amplitude_cone<T: Real, H: Trajectory<T>>(
    rho: &Arc<ChargeDensity<T>>,
    hist: &H,
    omega: Vec3<T>,
    t: T,
    eps: T,
) -> Result<T> {
    FieldSolver::new(rho.clone(), FieldInitialData::zero(), FieldSettings::default())
        .farfield_amplitude_cone(hist, omega, t, eps)
        .map(|c| c.value)
}

#[cfg(test)]
mod tests;
