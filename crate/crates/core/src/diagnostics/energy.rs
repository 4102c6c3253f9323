//! Energy in a ball and the outgoing flux through its boundary.

use serde::{Deserialize, Serialize};

use super::par_map;
use crate::dynamics::SimulationRecord;
use crate::error::{Error, Result};
use crate::history::Trajectory;
use crate::quadrature::{BallRule, GaussRule, SphereRule};
use crate::scalar::{real, to_f64, Real};
use crate::vec3::Vec3;

/// Quadrature settings of the energy audit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    /// Radial panel width in units of the density radius.
    pub radial_panel: f64,
    pub radial_order: usize,
    pub sphere_polar: usize,
    pub sphere_azimuth: usize,
    /// Time panel width of the flux integral.
    pub time_panel: f64,
    pub time_order: usize,
}

impl Default for AuditSettings {
    fn default() -> Self {
        Self { radial_panel: 0.25, radial_order: 8, sphere_polar: 16, sphere_azimuth: 32, time_panel: 0.25, time_order: 6 }
    }
}

impl AuditSettings {
    pub fn doubled(self) -> Self {
        Self {
            radial_order: 2 * self.radial_order,
            sphere_polar: 2 * self.sphere_polar,
            sphere_azimuth: 2 * self.sphere_azimuth,
            time_order: 2 * self.time_order,
            ..self
        }
    }

    fn sphere<T: Real>(&self) -> SphereRule<T> {
        SphereRule::new(self.sphere_polar, self.sphere_azimuth)
    }
}

/// `H_R(t)` split into its terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalEnergy {
    pub t: f64,
    pub radius: f64,
    /// `½∫_{B_R}(π² + |∇φ|²)`.
    pub field: f64,
    pub kinetic: f64,
    pub potential: f64,
    /// `∫φ ρ(x − q)`.
    pub interaction: f64,
    pub total: f64,
}

/// Largest `|q|` over the run.
pub fn max_excursion<T: Real>(run: &SimulationRecord<T>) -> f64 {
    run.history.positions().iter().map(|q| to_f64(q.norm())).fold(0.0, f64::max)
}

fn check_radius<T: Real>(run: &SimulationRecord<T>, radius: f64) -> Result<()> {
    let need = max_excursion(run) + to_f64(run.system.rho.support_radius());
    if !(radius > need) {
        return Err(Error::param("R", format!("ball radius {radius} must exceed max|q| + R_rho = {need}")));
    }
    Ok(())
}

pub fn local_energy<T: Real>(run: &SimulationRecord<T>, radius: f64, t: f64, s: &AuditSettings) -> Result<LocalEnergy> {
    check_radius(run, radius)?;
    let sys = &run.system;
    let rho = &sys.rho;
    let tt: T = real(t);
    let k = run.history.interpolate(tt)?;
    let big: T = real(radius);
    let width = rho.support_radius() * real(s.radial_panel);
    let panels = (big / width).ceil().to_usize().unwrap_or(1).max(1);
    let br: Vec<T> = (0..=panels).map(|i| big * real::<T>(i as f64) / real(panels as f64)).collect();
    let sphere = s.sphere::<T>();
    let ball = BallRule::new(Vec3::zero(), &br, s.radial_order, &sphere);
    let dens = par_map(&ball.points, |x| {
        let f = sys.solver.field_eval(&run.history, x, tt)?.total();
        Ok(f.pi * f.pi + f.grad_phi.norm2())
    })?;
    let field: T = ball.weights.iter().zip(dens.iter()).map(|(w, d)| *w * *d).sum::<T>() * real(0.5);
    let sup = rho.support_radius();
    let n_in = (T::one() / real::<T>(s.radial_panel)).ceil().to_usize().unwrap_or(1).max(1);
    let mut rb: Vec<T> = (0..=n_in).map(|i| sup * real::<T>(i as f64) / real(n_in as f64)).collect();
    rb.extend(rho.breaks().iter().copied().filter(|&b| b > T::zero() && b < sup));
    rb.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rb.dedup();
    let around = BallRule::new(k.q, &rb, s.radial_order, &sphere);
    let phis = par_map(&around.points, |x| Ok(sys.solver.field_eval(&run.history, x, tt)?.total().phi))?;
    let interaction: T = around.points.iter().zip(around.weights.iter()).zip(phis.iter()).map(|((x, w), p)| *w * *p * rho.rho(*x - k.q)).sum();
    let kinetic = to_f64(k.v.norm2()) * 0.5;
    let potential = to_f64(sys.potential.value(k.q));
    let (field, interaction) = (to_f64(field), to_f64(interaction));
    Ok(LocalEnergy { t, radius, field, kinetic, potential, interaction, total: field + kinetic + potential + interaction })
}

/// Energy audit on `[R + T₀, R + T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxBalance {
    pub radius: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub h_start: f64,
    pub h_end: f64,
    /// `H_R(t_start) − H_R(t_end)`.
    pub delta_h: f64,
    /// Energy leaving through the sphere, `−∫dt∫_{S_R} π ∂_r φ`.
    pub flux: f64,
    pub mismatch: f64,
    pub settings: AuditSettings,
}

impl FluxBalance {
    /// `mismatch ≤ rel·(|ΔH_R| + |flux|) + abs`.
    pub fn closes(&self, rel: f64, abs: f64) -> bool {
        self.mismatch <= rel * (self.delta_h.abs() + self.flux.abs()) + abs
    }
}

/// `−∫_{t0}^{t1} dt ∫_{S_R} π ∂_r φ d²x`.
pub fn outgoing_flux<T: Real>(run: &SimulationRecord<T>, radius: f64, t0: f64, t1: f64, s: &AuditSettings) -> Result<f64> {
    let sys = &run.system;
    let big: T = real(radius);
    let sphere = s.sphere::<T>();
    let g = GaussRule::<T>::new(s.time_order);
    let panels = ((t1 - t0) / s.time_panel).ceil().max(1.0) as usize;
    let mut nodes = vec![];
    for i in 0..panels {
        let a = t0 + (t1 - t0) * i as f64 / panels as f64;
        let b = t0 + (t1 - t0) * (i + 1) as f64 / panels as f64;
        for (t, w) in g.mapped(real(a), real(b)) {
            for (d, wd) in sphere.dirs.iter().zip(sphere.weights.iter()) {
                nodes.push((t, w * *wd, *d));
            }
        }
    }
    let vals = par_map(&nodes, |(t, w, d)| {
        let f = sys.solver.field_eval(&run.history, d * big, t)?.total();
        Ok(w * f.pi * f.grad_phi.dot(d))
    })?;
    Ok(-to_f64(vals.into_iter().sum::<T>() * big * big))
}

pub fn flux_balance<T: Real>(run: &SimulationRecord<T>, radius: f64, t0: f64, t1: f64, s: &AuditSettings) -> Result<FluxBalance> {
    if !(t0 >= 0.0 && t1 > t0) {
        return Err(Error::param("window", format!("need 0 ≤ T0 < T, got [{t0}, {t1}]")));
    }
    let (a, b) = (radius + t0, radius + t1);
    let h_start = local_energy(run, radius, a, s)?.total;
    let h_end = local_energy(run, radius, b, s)?.total;
    let flux = outgoing_flux(run, radius, a, b, s)?;
    let delta_h = h_start - h_end;
    Ok(FluxBalance {
        radius,
        t_start: a,
        t_end: b,
        h_start,
        h_end,
        delta_h,
        flux,
        mismatch: (delta_h - flux).abs(),
        settings: *s,
    })
}
