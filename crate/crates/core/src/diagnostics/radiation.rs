//! Radiated energy and the convolution form of the far-field amplitude.

use serde::{Deserialize, Serialize};

use super::series::DiagnosticSeries;
use super::par_map;
use crate::charge_analysis::axial_marginal;
use crate::dynamics::SimulationRecord;
use crate::error::{Error, Result};
use crate::field::theta_threshold;
use crate::history::Trajectory;
use crate::quadrature::{GaussRule, SphereRule};
use crate::scalar::{four_pi, real, to_f64, Real};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiationSettings {
    pub sphere_polar: usize,
    pub sphere_azimuth: usize,
    pub time_panel: f64,
    pub time_order: usize,
}

impl Default for RadiationSettings {
    fn default() -> Self {
        Self { sphere_polar: 8, sphere_azimuth: 16, time_panel: 0.5, time_order: 4 }
    }
}

/// Time range on which `π̄(ω, t)` is covered by the record for every `ω`.
pub fn farfield_coverage<T: Real>(run: &SimulationRecord<T>) -> (f64, f64) {
    let h = &run.history;
    let reach = to_f64(h.deviation_bound(h.end_time()) + run.system.rho.support_radius());
    let r0 = to_f64(h.position(T::zero()).norm());
    (r0 + reach, to_f64(h.end_time()) - r0 - reach)
}

/// Cumulative `∫_{t_a}^{t} dt ∫_{S²} |π̄(ω,t)|² d²ω` on panel ends up to `t_end`,
/// starting at the first time the record covers.
pub fn radiation_functional<T: Real>(
    run: &SimulationRecord<T>,
    t_end: Option<f64>,
    s: &RadiationSettings,
) -> Result<DiagnosticSeries> {
    let (a, b_max) = farfield_coverage(run);
    let b = t_end.unwrap_or(b_max);
    if !(b > a) || b > b_max + 1e-9 {
        return Err(Error::Coverage { t: b, start: a, end: b_max });
    }
    let sphere = SphereRule::<T>::new(s.sphere_polar, s.sphere_azimuth);
    let g = GaussRule::<T>::new(s.time_order);
    let panels = ((b - a) / s.time_panel).ceil().max(1.0) as usize;
    let ends: Vec<f64> = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
    let idx: Vec<usize> = (0..panels).collect();
    let solver = &run.system.solver;
    let per_panel = par_map(&idx, |i| {
        let mut acc = T::zero();
        for (t, w) in g.mapped(real(ends[i]), real(ends[i + 1])) {
            for (d, wd) in sphere.dirs.iter().zip(sphere.weights.iter()) {
                let p = solver.farfield_amplitude(&run.history, *d, t)?;
                acc += w * *wd * p * p;
            }
        }
        Ok(to_f64(acc))
    })?;
    let mut out = DiagnosticSeries::new("radiation", &["cumulative"])
        .with_meta("sphere_polar", s.sphere_polar)
        .with_meta("sphere_azimuth", s.sphere_azimuth)
        .with_meta("time_panel", s.time_panel)
        .with_meta("time_order", s.time_order)
        .with_meta("t_start", a)
        .with_meta("step", run.config.h);
    let mut total = 0.0;
    out.push(a, vec![0.0])?;
    for (i, v) in per_panel.into_iter().enumerate() {
        total += v;
        out.push(ends[i + 1], vec![total])?;
    }
    Ok(out)
}

/// Cumulative value at `t` by linear interpolation between panel ends.
pub fn cumulative_at(series: &DiagnosticSeries, t: f64) -> f64 {
    let ts = &series.times;
    let v = series.column(0);
    if t <= ts[0] {
        return v[0];
    }
    for i in 1..ts.len() {
        if t <= ts[i] {
            let f = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
            return v[i - 1] + f * (v[i] - v[i - 1]);
        }
    }
    *v.last().unwrap()
}

fn check_cone<T: Real>(run: &SimulationRecord<T>, omega: Vec3<T>) -> Result<T> {
    let theta = theta_threshold(run.history.speed_bound(), real(run.config.tolerances.cone_eps))?;
    if omega[2].abs() < theta {
        return Err(Error::OutsideCone { omega3: to_f64(omega[2]), theta: to_f64(theta) });
    }
    Ok(theta)
}

/// Emission time `τ` with `τ − ω·q(τ) = θ`, by Newton steps safeguarded by bisection
/// (the map is increasing on the cone).
pub fn retarded_time<T: Real, H: Trajectory<T>>(hist: &H, omega: Vec3<T>, theta: T) -> Result<T> {
    let f = |tau: T| -> Result<(T, T)> {
        let k = hist.interpolate(tau)?;
        Ok((tau - omega.dot(k.q) - theta, T::one() - omega.dot(k.v)))
    };
    let r0 = omega.dot(hist.position(T::zero()));
    let d = hist.deviation_bound(hist.end_time());
    let (mut lo, mut hi) = (theta + r0 - d, theta + r0 + d);
    if lo < T::zero() && hist.interpolate(lo).is_err() {
        lo = T::zero();
    }
    hi = hi.min(hist.end_time());
    let (flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if flo > T::zero() || fhi < T::zero() {
        return Err(Error::Coverage { t: to_f64(theta), start: to_f64(lo), end: to_f64(hi) });
    }
    let mut tau = (lo + hi) * real(0.5);
    let tol = real::<T>(1e-14) * (T::one() + theta.abs());
    for _ in 0..200 {
        let (v, dv) = f(tau)?;
        if v.abs() <= tol {
            return Ok(tau);
        }
        if v > T::zero() {
            hi = tau;
        } else {
            lo = tau;
        }
        let step = tau - v / dv;
        tau = if dv > T::zero() && step > lo && step < hi { step } else { (lo + hi) * real(0.5) };
        if hi - lo <= tol {
            return Ok(tau);
        }
    }
    Err(Error::Consistency(format!("retarded-time inversion did not converge at theta = {}", to_f64(theta))))
}

/// `g_ω(θ) = r̈/(1 − ṙ)³` at `τ(θ)`, `r = ω·q`.
pub fn g_omega<T: Real>(run: &SimulationRecord<T>, omega: Vec3<T>, theta: T) -> Result<T> {
    check_cone(run, omega)?;
    g_raw(&run.history, omega, theta)
}

fn g_raw<T: Real, H: Trajectory<T>>(hist: &H, omega: Vec3<T>, theta: T) -> Result<T> {
    let tau = retarded_time(hist, omega, theta)?;
    let k = hist.interpolate(tau)?;
    let den = T::one() - omega.dot(k.v);
    Ok(omega.dot(k.a) / (den * den * den))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionCheck {
    pub t: f64,
    /// `−(1/4π)(ρ_a ∗ g_ω)(t)`.
    pub lhs: f64,
    /// `π̄(ω, t)`.
    pub rhs: f64,
    pub diff: f64,
}

pub fn convolution_check<T: Real>(run: &SimulationRecord<T>, omega: Vec3<T>, t: T) -> Result<ConvolutionCheck> {
    check_cone(run, omega)?;
    let hist = &run.history;
    let rho = &run.system.rho;
    let big = rho.support_radius();
    let rhs = run.system.solver.farfield_amplitude(hist, omega, t)?;
    // the integrand has kinks where the emission time crosses a knot and at the density breaks
    let (a, b) = (t - big, t + big);
    let (ta, tb) = (retarded_time(hist, omega, a)?, retarded_time(hist, omega, b)?);
    let mut br = vec![a, b];
    for tau in hist.knots_between(ta, tb) {
        br.push(tau - omega.dot(hist.position(tau)));
    }
    for &x in rho.breaks() {
        br.push(t - x);
        br.push(t + x);
    }
    br.retain(|&x| x >= a && x <= b);
    br.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let g = &run.system.solver.panel;
    let mut acc = T::zero();
    for w in br.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        for (th, wt) in g.mapped(w[0], w[1]) {
            acc += wt * axial_marginal(rho, t - th) * g_raw(hist, omega, th)?;
        }
    }
    let lhs = to_f64(-acc / four_pi::<T>());
    let rhs = to_f64(rhs);
    Ok(ConvolutionCheck { t: to_f64(t), lhs, rhs, diff: (lhs - rhs).abs() })
}
