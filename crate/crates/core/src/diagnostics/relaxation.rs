//! Relaxation of the particle and the weighted distance to the stationary state.

use serde::{Deserialize, Serialize};

use super::energy::{max_excursion, AuditSettings};
use super::par_map;
use super::series::DiagnosticSeries;
use crate::dynamics::SimulationRecord;
use crate::error::{Error, Result};
use crate::field::DecayClass;
use crate::history::Trajectory;
use crate::quadrature::{adaptive, BallRule, SphereRule};
use crate::scalar::{four_pi, real, to_f64, Real};
use crate::vec3::Vec3;

/// Fraction of the run used for the early and late envelopes.
pub const ENVELOPE_WINDOW: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSummary {
    pub peak_speed: f64,
    /// Max `|q̇|` over the first window.
    pub early_envelope: f64,
    /// Max `|q̇|` over the last window.
    pub late_envelope: f64,
    pub ratio: f64,
    pub window: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relaxation {
    pub speed: DiagnosticSeries,
    pub accel: DiagnosticSeries,
    pub summary: RelaxationSummary,
}

/// Max of `values` over knots with `t ∈ [a, b]`.
pub fn window_max(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    times.iter().zip(values.iter()).filter(|(t, _)| **t >= a && **t <= b).map(|(_, v)| *v).fold(0.0, f64::max)
}

/// `|q̇(t)|` and `|q̈(t)|` on the knots.
pub fn relaxation_series<T: Real>(run: &SimulationRecord<T>) -> Result<Relaxation> {
    let h = &run.history;
    let times: Vec<f64> = (0..h.len()).map(|n| to_f64(h.time(n))).collect();
    let speed: Vec<f64> = h.velocities().iter().map(|v| to_f64(v.norm())).collect();
    let accel: Vec<f64> = h.accelerations().iter().map(|a| to_f64(a.norm())).collect();
    let end = *times.last().unwrap();
    let w = ENVELOPE_WINDOW * end;
    let early = window_max(&times, &speed, 0.0, w);
    let late = window_max(&times, &speed, end - w, end);
    let summary = RelaxationSummary {
        peak_speed: speed.iter().cloned().fold(0.0, f64::max),
        early_envelope: early,
        late_envelope: late,
        ratio: if early > 0.0 { late / early } else { 0.0 },
        window: ENVELOPE_WINDOW,
    };
    let mut s = DiagnosticSeries::new("speed", &["speed"]).with_meta("step", run.config.h).with_meta("summary", summary);
    let mut a = DiagnosticSeries::new("acceleration", &["acceleration"]).with_meta("step", run.config.h);
    for i in 0..times.len() {
        s.push(times[i], vec![speed[i]])?;
        a.push(times[i], vec![accel[i]])?;
    }
    Ok(Relaxation { speed: s, accel: a, summary })
}

/// `‖Y(t) − S_{q₊}‖_{−α}` truncated to a ball, split into its terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub t: f64,
    pub alpha: f64,
    pub r_trunc: f64,
    /// `‖(1+|x|)^{−α}∇(φ − s_{q₊})‖` on the ball.
    pub grad: f64,
    /// `‖(1+|x|)^{−α}π‖` on the ball.
    pub pi: f64,
    /// `|q − q₊| + |p|`.
    pub particle: f64,
    pub total: f64,
    /// Bound of the gradient term outside the ball; `None` when the data do not allow one.
    pub tail_bound: Option<f64>,
}

pub fn weighted_deviation_norm<T: Real>(
    run: &SimulationRecord<T>,
    alpha: f64,
    t: f64,
    r_trunc: f64,
    s: &AuditSettings,
) -> Result<WeightedNorm> {
    if !(alpha > 0.0) {
        return Err(Error::param("alpha", "must be positive"));
    }
    let sys = &run.system;
    let rho = &sys.rho;
    let need = 2.0 * (max_excursion(run) + to_f64(rho.support_radius()));
    if !(r_trunc >= need) {
        return Err(Error::param("R_trunc", format!("must be at least 2(max|q| + R_rho) = {need}")));
    }
    let tt: T = real(t);
    let k = run.history.interpolate(tt)?;
    let qp = sys.potential.minimum;
    let big: T = real(r_trunc);
    let width = rho.support_radius() * real(s.radial_panel);
    let panels = (big / width).ceil().to_usize().unwrap_or(1).max(1);
    let br: Vec<T> = (0..=panels).map(|i| big * real::<T>(i as f64) / real(panels as f64)).collect();
    let ball = BallRule::new(Vec3::zero(), &br, s.radial_order, &SphereRule::new(s.sphere_polar, s.sphere_azimuth));
    let a2: T = real(-2.0 * alpha);
    let vals = par_map(&ball.points, |x| {
        let f = sys.solver.field_eval(&run.history, x, tt)?.total();
        let w = (T::one() + x.norm()).powf(a2);
        Ok([w * (f.grad_phi - rho.coulomb_gradient(qp, x)).norm2(), w * f.pi * f.pi])
    })?;
    let mut sums = [T::zero(); 2];
    for (v, w) in vals.iter().zip(ball.weights.iter()) {
        sums[0] += *w * v[0];
        sums[1] += *w * v[1];
    }
    let grad = to_f64(sums[0].sqrt());
    let pi = to_f64(sums[1].sqrt());
    let particle = to_f64((k.q - qp).norm() + k.v.norm());
    Ok(WeightedNorm {
        t,
        alpha,
        r_trunc,
        grad,
        pi,
        particle,
        total: grad + pi + particle,
        tail_bound: tail_bound(run, alpha, t, r_trunc),
    })
}

/// Outside the light front every disturbance is gone and the deviation is the static
/// difference between the initial Coulomb part and `s_{q₊}`.
fn tail_bound<T: Real>(run: &SimulationRecord<T>, alpha: f64, t: f64, r_trunc: f64) -> Option<f64> {
    let sys = &run.system;
    let data = &sys.solver.data;
    let sup = to_f64(sys.rho.support_radius());
    let data_reach = match data.decay_class() {
        DecayClass::Compact { radius } => radius,
        DecayClass::Power { .. } => return None,
    };
    let reach = t + data_reach.max(max_excursion(run) + sup);
    if r_trunc < reach {
        return None;
    }
    let m0 = sys.potential.minimum;
    let qp: Vec3<f64> = Vec3::from_f64([to_f64(m0[0]), to_f64(m0[1]), to_f64(m0[2])]);
    let c = to_f64(sys.rho.charge()).abs() / four_pi::<f64>();
    let bound: Box<dyn Fn(f64) -> f64> = match data.coulomb {
        None => Box::new(move |r: f64| c / (r - qp.norm()).powi(2)),
        Some(center) => {
            let cc = Vec3::from_f64(center);
            let d = (cc - qp).norm();
            if d == 0.0 {
                return Some(0.0);
            }
            let m = cc.norm().max(qp.norm());
            Box::new(move |r: f64| 2.0 * c * d / (r - m).powi(3))
        }
    };
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let r = r_trunc / u;
        let b = bound(r);
        4.0 * std::f64::consts::PI * r * r * (1.0 + r).powf(-2.0 * alpha) * b * b * r_trunc / (u * u)
    };
    Some(adaptive(f, 0.0, 1.0, 1e-14).sqrt())
}

/// Weighted norm on a list of times, columns `total, grad, pi, particle, tail`
/// (`tail` is `−1` where no bound is available).
pub fn weighted_deviation_series<T: Real>(
    run: &SimulationRecord<T>,
    alpha: f64,
    times: &[f64],
    r_trunc: f64,
    s: &AuditSettings,
) -> Result<DiagnosticSeries> {
    let mut out = DiagnosticSeries::new("weighted_deviation", &["total", "grad", "pi", "particle", "tail"])
        .with_meta("alpha", alpha)
        .with_meta("r_trunc", r_trunc)
        .with_meta("settings", s)
        .with_meta("step", run.config.h);
    for &t in times {
        let w = weighted_deviation_norm(run, alpha, t, r_trunc, s)?;
        out.push(t, vec![w.total, w.grad, w.pi, w.particle, w.tail_bound.unwrap_or(-1.0)])?;
    }
    Ok(out)
}
