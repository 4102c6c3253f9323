//! Fixed-step RK4 for the particle with the field eliminated.

use std::time::Instant;

use serde::Serialize;

use super::config::{CoupledSystem, ScenarioConfig};
use super::force::ForceParts;
use crate::error::{Error, Result};
use crate::field::theta_threshold;
use crate::history::{HistoryView, Trajectory, TrajectoryHistory};
use crate::scalar::{real, to_f64, Real};
use crate::vec3::Vec3;

/// Particle state at a knot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemState<T> {
    pub t: T,
    pub q: Vec3<T>,
    pub p: Vec3<T>,
}

/// Metadata of a finished run.
#[derive(Clone, Debug, Serialize)]
pub struct RunInfo {
    pub steps: usize,
    pub wall_time_s: f64,
    pub speed_bound: f64,
    pub theta: f64,
    pub escape_radius: f64,
    pub max_plane_deviation: f64,
}

/// Trajectory of a run with the force decomposition at every knot.
#[derive(Clone, Debug)]
pub struct SimulationRecord<T: Real> {
    pub config: ScenarioConfig,
    pub system: CoupledSystem<T>,
    pub history: TrajectoryHistory<T>,
    pub forces: Vec<ForceParts<T>>,
    pub info: RunInfo,
}

impl<T: Real> SimulationRecord<T> {
    pub fn final_state(&self) -> SystemState<T> {
        let (t, k) = self.history.last();
        SystemState { t, q: k.q, p: k.v }
    }
}

impl<T: Real> CoupledSystem<T> {
    /// Initial history and forces for a particle at `(q0, p0)`.
    pub fn start(&self, h: T, q0: Vec3<T>, p0: Vec3<T>) -> Result<(TrajectoryHistory<T>, ForceParts<T>)> {
        let quiescent = self.solver.data.coulomb.is_some();
        let mut hist = TrajectoryHistory::new(h, q0, p0, Vec3::zero(), quiescent)?;
        let f = self.solver.force_parts(&self.potential, &hist, q0, T::zero())?;
        hist.set_last_acceleration(f.total());
        Ok((hist, f))
    }

    /// One RK4 step from the last knot; `f0` is the force there. Returns the force at the new knot.
    pub fn step(&self, hist: &mut TrajectoryHistory<T>, f0: &ForceParts<T>) -> Result<ForceParts<T>> {
        advance(hist, f0.total(), |view, t, q| {
            let f = self.solver.force_parts(&self.potential, view, q, t)?;
            Ok((f.total(), f))
        })
    }
}

/// RK4 step for `q̈ = a(history, t, q)`. Stages see the history extended by a
/// provisional Hermite segment through the stage state. `a1` is the acceleration
/// at the last knot; returns the extra output of `accel` at the new knot.
pub(crate) fn advance<T: Real, X, F>(hist: &mut TrajectoryHistory<T>, a1: Vec3<T>, mut accel: F) -> Result<X>
where
    F: FnMut(&HistoryView<'_, T>, T, Vec3<T>) -> Result<(Vec3<T>, X)>,
{
    let h = hist.step();
    let (t, k) = hist.last();
    let (q, p) = (k.q, k.v);
    let half: T = real(0.5);
    let mut stage = |hist: &TrajectoryHistory<T>, c: T, qs: Vec3<T>, ps: Vec3<T>| -> Result<Vec3<T>> {
        let ts = t + c * h;
        Ok(accel(&hist.with_tail(ts, qs, ps), ts, qs)?.0)
    };
    let (q2, p2) = (q + p * (half * h), p + a1 * (half * h));
    let a2 = stage(hist, half, q2, p2)?;
    let (q3, p3) = (q + p2 * (half * h), p + a2 * (half * h));
    let a3 = stage(hist, half, q3, p3)?;
    let (q4, p4) = (q + p3 * h, p + a3 * h);
    let a4 = stage(hist, T::one(), q4, p4)?;
    let sixth = h / real(6.0);
    let two: T = real(2.0);
    let qn = q + (p + p2 * two + p3 * two + p4) * sixth;
    let pn = p + (a1 + a2 * two + a3 * two + a4) * sixth;
    if !qn.is_finite() || !pn.is_finite() {
        return Err(Error::NonFinite { t: to_f64(t + h) });
    }
    hist.push(qn, pn, a4);
    let (an, x) = accel(&hist.view(), t + h, qn)?;
    if !an.is_finite() {
        return Err(Error::NonFinite { t: to_f64(t + h) });
    }
    hist.set_last_acceleration(an);
    Ok(x)
}

/// Runs the scenario to its horizon.
pub fn simulate<T: Real>(cfg: &ScenarioConfig) -> Result<SimulationRecord<T>> {
    let clock = Instant::now();
    let system = cfg.build::<T>()?;
    let h: T = real(cfg.h);
    let (mut hist, f0) = system.start(h, Vec3::from_f64(cfg.q0), Vec3::from_f64(cfg.p0))?;
    let mut forces = vec![f0];
    let escape = cfg.escape_radius();
    let plane_tol = cfg.tolerances.plane;
    let mut plane_dev: f64 = 0.0;
    let n = cfg.steps();
    for _ in 0..n {
        let f = system.step(&mut hist, forces.last().unwrap())?;
        forces.push(f);
        let (t, k) = hist.last();
        let r = to_f64(k.q.norm());
        if r > escape {
            return Err(Error::Escape { t: to_f64(t), radius: r, limit: escape });
        }
        if cfg.plane {
            let dev = to_f64(k.q[2].abs() + k.v[2].abs());
            plane_dev = plane_dev.max(dev);
            if !(dev < plane_tol) {
                return Err(Error::PlaneViolation { t: to_f64(t), deviation: dev });
            }
        }
    }
    let vbar = to_f64(hist.speed_bound());
    let theta = theta_threshold(vbar, cfg.tolerances.cone_eps)?;
    let info = RunInfo {
        steps: n,
        wall_time_s: clock.elapsed().as_secs_f64(),
        speed_bound: vbar,
        theta,
        escape_radius: escape,
        max_plane_deviation: plane_dev,
    };
    Ok(SimulationRecord { config: cfg.clone(), system, history: hist, forces, info })
}
