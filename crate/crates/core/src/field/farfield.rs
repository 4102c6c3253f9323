//! Far-field amplitude `π̄(ω, t)` and the cone threshold.

use super::FieldSolver;
use crate::error::{Error, Result};
use crate::history::Trajectory;
use crate::quadrature::GaussRule;
use crate::scalar::{four_pi, real, to_f64, Real};
use crate::vec3::Vec3;

/// `Θ = 0` for subluminal bounds, else `ε + sqrt(1 − q̄₁⁻²)`.
pub fn theta_threshold<T: Real>(speed_bound: T, eps: T) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::param("eps", "must lie in (0, 1)"));
    }
    if speed_bound < T::one() {
        return Ok(T::zero());
    }
    let root = (T::one() - T::one() / (speed_bound * speed_bound)).sqrt();
    if eps >= T::one() - root {
        return Err(Error::param(
            "eps",
            format!("must be below 1 − sqrt(1 − q̄₁⁻²) = {}", to_f64(T::one() - root)),
        ));
    }
    Ok(eps + root)
}

/// Cone amplitude with the smallest `1 − ω·q̇` met by the quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeAmplitude<T> {
    pub value: T,
    pub min_denominator: T,
    pub theta: T,
}

impl<T: Real> FieldSolver<T> {
    /// Range of `s` (relative to `t`) on which the source crosses the plane `ω·y = s`.
    fn farfield_window<H: Trajectory<T>>(&self, hist: &H, omega: Vec3<T>, t: T) -> Result<(T, T)> {
        let r0 = omega.dot(hist.position(T::zero()));
        let reach = hist.deviation_bound(hist.end_time()) + self.rho.support_radius();
        let (lo, hi) = (r0 - reach, r0 + reach);
        if t + lo < T::zero() || t + hi > hist.end_time() + hist.step() * real(1e-9) {
            return Err(Error::Coverage {
                t: to_f64(t),
                start: to_f64(-lo),
                end: to_f64(hist.end_time() - hi),
            });
        }
        Ok((lo, hi))
    }

    /// `π̄(ω,t) = (1/4π)∫∇ρ(y − q(τ̄))·q̇(τ̄) dy`, `τ̄ = t + ω·y`, the limit of
    /// `|x| π_r(x, |x| + t)`, reduced to one dimension by integrating over planes orthogonal to `ω`.
    pub fn farfield_amplitude<H: Trajectory<T>>(&self, hist: &H, omega: Vec3<T>, t: T) -> Result<T> {
        let (lo, hi) = self.farfield_window(hist, omega, t)?;
        let mut acc = T::zero();
        let sup = self.rho.support_radius();
        self.time_nodes(hist, t + lo, t + hi, |tau, w| {
            let k = hist.sample(tau);
            let u = tau - t - omega.dot(k.q);
            if u.abs() < sup {
                acc += w * u * self.rho.profile(u.abs()) * omega.dot(k.v);
            }
        });
        Ok(-acc * real(0.5))
    }

    /// Same amplitude by direct product quadrature in 3D (planes × disks).
    pub fn farfield_amplitude_ball<H: Trajectory<T>>(
        &self,
        hist: &H,
        omega: Vec3<T>,
        t: T,
        n_disk_radial: usize,
        n_disk_azimuth: usize,
    ) -> Result<T> {
        let (lo, hi) = self.farfield_window(hist, omega, t)?;
        let rho = &self.rho;
        let sup = rho.support_radius();
        let (e1, e2) = omega.orthonormal_frame();
        let g = GaussRule::<T>::new(n_disk_radial);
        let dphi = real::<T>(2.0) * T::PI() / real(n_disk_azimuth as f64);
        let mut acc = T::zero();
        self.time_nodes(hist, t + lo, t + hi, |tau, w| {
            let k = hist.sample(tau);
            let u = tau - t - omega.dot(k.q);
            if u.abs() >= sup {
                return;
            }
            let rd = (sup * sup - u * u).sqrt();
            for (p, wp) in g.mapped(T::zero(), rd) {
                for j in 0..n_disk_azimuth {
                    let ph = dphi * (real::<T>(j as f64) + real(0.5));
                    let y = omega * u + e1 * (p * ph.cos()) + e2 * (p * ph.sin());
                    acc += w * wp * p * dphi * rho.grad_rho(y).dot(k.v);
                }
            }
        });
        Ok(acc / four_pi::<T>())
    }

    /// `−(1/4π)∫ρ(y − q(τ̄)) ω·q̈(τ̄) / (1 − ω·q̇(τ̄))² dy` by 3D product quadrature,
    /// admissible for `|ω₃| ≥ Θ(q̄₁, ε)`.
    pub fn farfield_amplitude_cone<H: Trajectory<T>>(
        &self,
        hist: &H,
        omega: Vec3<T>,
        t: T,
        eps: T,
    ) -> Result<ConeAmplitude<T>> {
        let theta = theta_threshold(hist.speed_bound(), eps)?;
        if omega[2].abs() < theta {
            return Err(Error::OutsideCone { omega3: to_f64(omega[2]), theta: to_f64(theta) });
        }
        let (lo, hi) = self.farfield_window(hist, omega, t)?;
        let rho = &self.rho;
        let sup = rho.support_radius();
        let (e1, e2) = omega.orthonormal_frame();
        let n_rad = self.settings.panel_order.max(24);
        let n_az = 2 * self.settings.sphere_azimuth;
        let g = GaussRule::<T>::new(n_rad);
        let dphi = real::<T>(2.0) * T::PI() / real(n_az as f64);
        let mut acc = T::zero();
        let mut min_den = T::infinity();
        self.time_nodes(hist, t + lo, t + hi, |tau, w| {
            let k = hist.sample(tau);
            let den = T::one() - omega.dot(k.v);
            min_den = min_den.min(den);
            let u = tau - t - omega.dot(k.q);
            if u.abs() >= sup {
                return;
            }
            let rd = (sup * sup - u * u).sqrt();
            let mut disk = T::zero();
            for (p, wp) in g.mapped(T::zero(), rd) {
                for j in 0..n_az {
                    let ph = dphi * (real::<T>(j as f64) + real(0.5));
                    let y = omega * u + e1 * (p * ph.cos()) + e2 * (p * ph.sin());
                    disk += wp * p * dphi * rho.rho(y);
                }
            }
            acc += w * disk * omega.dot(k.a) / (den * den);
        });
        Ok(ConeAmplitude { value: -acc / four_pi::<T>(), min_denominator: min_den, theta })
    }
}
