//! Fourier-side analysis of a radial density: transform, axial marginal, Wiener scan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ChargeDensity;
use crate::quadrature::{adaptive, golden_min};
use crate::scalar::{real, to_f64, Real};

/// `ρ̂(k) = (4π/k)∫ r sin(kr) ρ_r(r) dr`, `ρ̂(0) = Q`.
pub fn fourier_radial<T: Real>(rho: &ChargeDensity<T>, k: T) -> T {
    let k = k.abs();
    if k == T::zero() {
        return rho.charge();
    }
    let big = rho.support_radius();
    let tol = real::<T>(1e-15) * (T::one() + rho.charge().abs());
    // split into pieces of about one oscillation and at profile breakpoints
    let n = (to_f64(k * big) / 3.0).ceil().max(1.0) as usize;
    let mut pts: Vec<T> = (0..=n).map(|i| big * real::<T>(i as f64) / real(n as f64)).collect();
    pts.extend(rho.breaks().iter().copied());
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut s = T::zero();
    for w in pts.windows(2) {
        if w[1] > w[0] {
            s += adaptive(|r: T| r * (k * r).sin() * rho.profile(r), w[0], w[1], tol / real(n as f64));
        }
    }
    crate::scalar::four_pi::<T>() * s / k
}

/// `ρ_a(s) = 2π∫_{|s|}^R r ρ_r(r) dr`.
pub fn axial_marginal<T: Real>(rho: &ChargeDensity<T>, s: T) -> T {
    let a = s.abs();
    if a >= rho.support_radius() {
        return T::zero();
    }
    let k = rho.kernel();
    real::<T>(2.0) * T::PI() * (k.a_inf() - k.a(a))
}

/// 1D transform of the axial marginal, `2∫₀^R ρ_a(s) cos(ks) ds`.
pub fn marginal_transform<T: Real>(rho: &ChargeDensity<T>, k: T) -> T {
    let big = rho.support_radius();
    let n = (to_f64(k.abs() * big) / 3.0).ceil().max(1.0) as usize;
    let mut pts: Vec<T> = (0..=n).map(|i| big * real::<T>(i as f64) / real(n as f64)).collect();
    pts.extend(rho.breaks().iter().copied());
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = real::<T>(1e-15) * (T::one() + rho.charge().abs());
    let mut s = T::zero();
    for w in pts.windows(2) {
        if w[1] > w[0] {
            s += adaptive(|x: T| axial_marginal(rho, x) * (k * x).cos(), w[0], w[1], tol / real(n as f64));
        }
    }
    s + s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Result of scanning `|ρ̂|` on `[0, k_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WienerReport {
    pub k_max: f64,
    pub samples: usize,
    pub min_abs: f64,
    pub argmin: f64,
    pub verdict: Verdict,
    pub threshold: f64,
    /// Largest `|ρ̂|` over the last tenth of the scanned range.
    pub tail_envelope: f64,
    /// Grid intervals on which `ρ̂` changes sign.
    pub sign_changes: usize,
}

impl WienerReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Default scan range `20·2π/R`.
pub fn default_k_max<T: Real>(rho: &ChargeDensity<T>) -> T {
    real::<T>(40.0) * T::PI() / rho.support_radius()
}

/// Default threshold `1e-4·|Q|`.
pub fn default_threshold<T: Real>(rho: &ChargeDensity<T>) -> T {
    real::<T>(1e-4) * rho.charge().abs()
}

pub fn wiener_scan<T: Real>(rho: &ChargeDensity<T>, k_max: T, samples: usize, threshold: T) -> Result<WienerReport> {
    if !(k_max > T::zero()) {
        return Err(Error::param("k_max", "must be positive"));
    }
    if samples < 2 {
        return Err(Error::param("samples", "must be at least 2"));
    }
    // transform of the marginal must reproduce the radial transform
    let scale = rho.charge().abs().max(rho.norm2().sqrt()).max(T::min_positive_value());
    for i in 0..16 {
        let k = k_max * real::<T>(i as f64) / real(15.0);
        let a = fourier_radial(rho, k);
        let b = marginal_transform(rho, k);
        if (a - b).abs() > real::<T>(1e-6) * scale {
            return Err(Error::Consistency(format!(
                "radial and marginal transforms disagree at k = {}: {} vs {}",
                to_f64(k),
                to_f64(a),
                to_f64(b)
            )));
        }
    }
    let dk = k_max / real((samples - 1) as f64);
    let ks: Vec<T> = (0..samples).map(|i| dk * real::<T>(i as f64)).collect();
    let vals: Vec<T> = ks.iter().map(|&k| fourier_radial(rho, k)).collect();
    let abs: Vec<T> = vals.iter().map(|v| v.abs()).collect();
    // minima equal up to quadrature noise count as ties; the smallest k wins
    let floor = real::<T>(1e-12) * scale;
    let mut best = (abs[0], ks[0]);
    for i in 0..samples {
        if abs[i] < best.0 - floor {
            best = (abs[i], ks[i]);
        }
        let interior = i > 0 && i + 1 < samples;
        if interior && abs[i] <= abs[i - 1] && abs[i] <= abs[i + 1] {
            let (k, v) = golden_min(|k| fourier_radial(rho, k).abs(), ks[i - 1], ks[i + 1], dk * real(1e-9));
            if v < best.0 - floor {
                best = (v, k);
            }
        }
    }
    let sign_changes = vals.windows(2).filter(|w| (w[0] > T::zero()) != (w[1] > T::zero()) && w[0] != w[1]).count();
    let tail_start = samples - samples.div_ceil(10);
    let tail_envelope = abs[tail_start..].iter().fold(T::zero(), |a, &b| a.max(b));
    let verdict = if best.0 > threshold { Verdict::Pass } else { Verdict::Fail };
    Ok(WienerReport {
        k_max: to_f64(k_max),
        samples,
        min_abs: to_f64(best.0),
        argmin: to_f64(best.1),
        verdict,
        threshold: to_f64(threshold),
        tail_envelope: to_f64(tail_envelope),
        sign_changes,
    })
}
