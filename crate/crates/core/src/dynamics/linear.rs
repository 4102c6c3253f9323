//! Linearization about the stationary state at the potential minimum.
//!
//! The deviation field `Ψ` is sourced by `∇ρ(x − q₊)·Q(t)`, so its retarded part is
//! a dipole: `Ψ_r = x̂·U(r,t)` with `U = ∫ Q(s) Φ_r(t − s, r) ds` about `q₊`.

use std::time::Instant;

use serde::Serialize;

use super::config::{CoulombPart, ScenarioConfig};
use super::integrator::{advance, RunInfo};
use crate::error::{Error, Result};
use crate::field::{check_time, FieldSolver};
use crate::history::{Trajectory, TrajectoryHistory};
use crate::model::ChargeDensity;
use crate::quadrature::{GaussRule, SphereRule};
use crate::scalar::{four_pi, real, to_f64, Real};
use crate::vec3::Vec3;

/// Linear system `Ż = A Z` about `q₊`.
#[derive(Clone, Debug)]
pub struct LinearSystem<T: Real> {
    /// Free data and density; the Coulomb part of the data is not used.
    pub solver: FieldSolver<T>,
    pub minimum: Vec3<T>,
    pub nu0_squared: T,
    pub nu1_squared: T,
    /// `Q₀` when the deviation field starts as the linearized Coulomb field of the
    /// displaced particle (resting past), `None` when it starts from the free data alone.
    pub resting_past: Option<Vec3<T>>,
}

/// Particle components of `A Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearRates<T> {
    pub dq: Vec3<T>,
    pub dp: Vec3<T>,
}

/// Retarded dipole amplitudes at radius `r`: `U`, `∂_r U` and `W = ∫ Q Φ_τr`.
#[derive(Clone, Copy, Debug, Default)]
struct Dipole<T> {
    u: Vec3<T>,
    u_r: Vec3<T>,
    w: Vec3<T>,
}

/// `H₀` on a ball with the analytic exterior contribution.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearEnergy {
    pub t: f64,
    pub value: f64,
    pub particle: f64,
    pub field: f64,
    pub tail: f64,
    pub radius: f64,
}

impl<T: Real> LinearSystem<T> {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let sys = cfg.build::<T>()?;
        let pot = sys.potential;
        let q0 = Vec3::<T>::from_f64(cfg.q0) - pot.minimum;
        let resting_past = match cfg.field.coulomb {
            CoulombPart::Minimum => None,
            CoulombPart::Particle => Some(q0),
            CoulombPart::None => {
                return Err(Error::param(
                    "field.coulomb",
                    "linear runs need the Coulomb part at the minimum or at the particle",
                ))
            }
        };
        let nu1_squared = sys.rho.nu1_squared();
        let mut solver = sys.solver;
        solver.data.coulomb = None;
        Ok(Self { solver, minimum: pot.minimum, nu0_squared: pot.nu0_squared, nu1_squared, resting_past })
    }

    pub fn rho(&self) -> &ChargeDensity<T> {
        &self.solver.rho
    }

    /// `Ṗ` given the `Q` history up to `t`:
    /// `−(ν₀²+ν₁²)Q − ⅓∫ e_P''(τ) Q(t−τ) dτ + ⅓ e_P'(t) Q₀ [resting past] + F_K(q₊, t)`.
    pub fn force<H: Trajectory<T>>(&self, hist: &H, q: Vec3<T>, t: T) -> Result<Vec3<T>> {
        check_time(hist, t)?;
        let mut f = -q * (self.nu0_squared + self.nu1_squared);
        if self.rho().is_zero() {
            return Ok(f);
        }
        let auto = self.rho().autocorrelation();
        let third: T = real(1.0 / 3.0);
        let lo = (t - auto.support()).max(T::zero());
        let mut mem = Vec3::zero();
        self.solver.time_nodes(hist, lo, t, |s, w| {
            mem += hist.position(s) * (w * auto.dde(t - s));
        });
        f -= mem * third;
        if let Some(q0) = self.resting_past {
            f += q0 * (third * auto.de(t));
        }
        Ok(f + self.solver.kirchhoff_force(self.minimum, t))
    }

    /// Particle part of `A Z` at time `t` of a recorded linear history.
    pub fn apply_a<H: Trajectory<T>>(&self, hist: &H, t: T) -> Result<LinearRates<T>> {
        let k = hist.interpolate(t)?;
        Ok(LinearRates { dq: k.v, dp: self.force(hist, k.q, t)? })
    }

    fn dipole<H: Trajectory<T>>(&self, hist: &H, r: T, t: T) -> Dipole<T> {
        let k = self.rho().kernel();
        let s = self.rho().support_radius();
        let mut d = Dipole::default();
        let lo = (t - r - s).max(T::zero());
        let hi = (t - r + s).min(t);
        self.solver.time_nodes(hist, lo, hi, |si, w| {
            let kv = k.values(t - si, r);
            let q = hist.position(si);
            d.u += q * (w * kv.phi_r);
            d.u_r += q * (w * kv.phi_rr);
            d.w += q * (w * kv.phi_tr);
        });
        if let Some(q0) = self.resting_past {
            // ∫_{-∞}^0 Q₀ Φ_τr(t − s, r) ds = −Q₀ Φ_r(t, r)
            let (_, _, pr) = k.phi_first(t, r);
            d.w -= q0 * pr;
        }
        d
    }

    /// Field components of `A Z` at `x`: `(Π, ΔΨ + ∇ρ·Q)`.
    ///
    /// The retarded part of `ΔΨ + ∇ρ·Q` is `(Q₀·x̂)Φ_τr(t,r) + ∫ (P(s)·x̂) Φ_τr(t−s,r) ds`;
    /// the free part is the time derivative of `π_K`, taken by finite differences.
    pub fn field_rates<H: Trajectory<T>>(&self, hist: &H, x: Vec3<T>, t: T) -> Result<(T, T)> {
        check_time(hist, t)?;
        if self.resting_past.is_some() {
            return Err(Error::param("field.coulomb", "field rates need the Coulomb part at the minimum"));
        }
        let y = x - self.minimum;
        let r = y.norm();
        let mut pi = T::zero();
        let mut acc = T::zero();
        if r > T::zero() {
            let n = y * (T::one() / r);
            let d = self.dipole(hist, r, t);
            pi = n.dot(d.w);
            let k = self.rho().kernel();
            let s = self.rho().support_radius();
            let (lo, hi) = ((t - r - s).max(T::zero()), (t - r + s).min(t));
            let mut pv = Vec3::zero();
            self.solver.time_nodes(hist, lo, hi, |si, w| {
                pv += hist.sample(si).v * (w * k.values(t - si, r).phi_tr);
            });
            let q0 = hist.sample(T::zero()).q;
            acc = n.dot(q0) * k.values(t, r).phi_tr + n.dot(pv);
        }
        let kf = self.solver.kirchhoff_field(x, t)?;
        pi += kf.pi;
        if self.solver.data.has_free_part() {
            let dt: T = real(1e-4);
            let f = |s: T| self.solver.kirchhoff_field(x, s).map(|v| v.pi);
            let d = if t >= dt {
                (f(t + dt)? - f(t - dt)?) / (dt + dt)
            } else {
                (real::<T>(4.0) * f(t + dt)? - real::<T>(3.0) * f(t)? - f(t + dt + dt)?) / (dt + dt)
            };
            acc += d;
        }
        Ok((pi, acc))
    }

    /// `H₀ = ½(P² + ν₀²Q²) + ½∫(Π² + |∇Ψ + Hess(s₀)Q|²)` at time `t`, the field integral
    /// taken over the ball of radius `radius` about `q₊` and the exterior in closed form.
    /// `radius` must exceed the reach of the deviation field at `t`.
    pub fn energy<H: Trajectory<T>>(&self, hist: &H, t: T, radius: T, n_radial: usize) -> Result<LinearEnergy> {
        check_time(hist, t)?;
        if self.resting_past.is_some() {
            return Err(Error::param("field.coulomb", "the linear energy needs the Coulomb part at the minimum"));
        }
        let k = hist.interpolate(t)?;
        let (q, p) = (k.q, k.v);
        let rho = self.rho();
        let half: T = real(0.5);
        let particle = half * (p.norm2() + self.nu0_squared * q.norm2());
        let g = GaussRule::<T>::new(n_radial);
        let s = rho.support_radius();
        let free = self.solver.data.has_free_part();
        let band = if free { self.free_band() } else { None };
        // free part is axisymmetric about the band axis, the cross terms have azimuthal degree ≤ 3
        let (np, na) = (self.solver.settings.sphere_polar, 4);
        let panels = (radius / (s * real(0.25))).ceil().to_usize().unwrap_or(1).max(1);
        let mut field = T::zero();
        let fp = four_pi::<T>();
        let third: T = real(1.0 / 3.0);
        let two: T = real(2.0);
        // kinks: the density breaks and, for free data, the sphere through its centre
        let mut br: Vec<T> = (0..=panels).map(|i| radius * real::<T>(i as f64) / real(panels as f64)).collect();
        br.extend(rho.breaks().iter().copied());
        if let Some((_, l, _)) = band {
            br.push(l);
        }
        br.retain(|&b| b >= T::zero() && b <= radius);
        br.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in br.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            for (r, wr) in g.mapped(a, b) {
                let d = self.dipole(hist, r, t);
                let [_, s1, s2] = rho.s0_derivs(r);
                let av = (d.u + q * s1) * (T::one() / r);
                let bv = d.u_r + q * s2;
                let mut dens = fp * (third * d.w.norm2() + real::<T>(2.0 / 3.0) * av.norm2() + third * bv.norm2());
                if free {
                    // cross and free terms over the part of the sphere the free wave reaches
                    let rule = match band {
                        Some((axis, l, width)) => {
                            // polar nodes in the distance ρ from the data centre, dcosθ = ρ dρ/(r l)
                            let lo = (t - width).max(T::zero()).max((r - l).abs());
                            let hi = (t + width).min(r + l);
                            let mut nodes = Vec::new();
                            if l * r > T::zero() && hi > lo {
                                let pg = GaussRule::<T>::new(np);
                                let scale = T::one() / (r * l);
                                for i in 0..4 {
                                    let a = lo + (hi - lo) * real::<T>(i as f64 / 4.0);
                                    let b = lo + (hi - lo) * real::<T>((i + 1) as f64 / 4.0);
                                    for (rr, w) in pg.mapped(a, b) {
                                        nodes.push(((r * r + l * l - rr * rr) * scale * half, w * rr * scale));
                                    }
                                }
                                SphereRule::from_polar(axis, &nodes, na)
                            } else if l * r == T::zero() && r >= (t - width).max(T::zero()) && r <= t + width {
                                SphereRule::new(np, na)
                            } else {
                                SphereRule { dirs: vec![], weights: vec![] }
                            }
                        }
                        None => SphereRule::new(4 * np, 8 * np),
                    };
                    for (n, wn) in rule.dirs.iter().zip(rule.weights.iter()) {
                        let kf = self.solver.kirchhoff_field(self.minimum + *n * r, t)?;
                        let pi = n.dot(d.w);
                        let gr = av - *n * n.dot(av) + *n * n.dot(bv);
                        dens += *wn * (kf.pi * (kf.pi + two * pi) + kf.grad_phi.dot(kf.grad_phi + gr * two));
                    }
                }
                field += wr * r * r * dens;
            }
        }
        field *= half;
        // outside the ball only Hess(s₀)Q survives: |Hess s₀ Q|² = c²(Q² + 3(x̂·Q)²)/r⁶
        let c = rho.charge() / fp;
        let tail = half * real::<T>(8.0) * T::PI() * c * c * q.norm2() / (real::<T>(3.0) * radius * radius * radius);
        let value = particle + field + tail;
        Ok(LinearEnergy {
            t: to_f64(t),
            value: to_f64(value),
            particle: to_f64(particle),
            field: to_f64(field),
            tail: to_f64(tail),
            radius: to_f64(radius),
        })
    }

    /// Smallest ball about `q₊` outside which the deviation field vanishes at `t`.
    /// Axis from `q₊` to the common centre of compactly supported free data, its
    /// distance and the support radius.
    fn free_band(&self) -> Option<(Vec3<T>, T, T)> {
        let d = &self.solver.data;
        let mut comps = d.phi.iter().chain(d.pi.iter());
        let first = comps.next()?;
        let mut width = first.shape.support()?;
        for c in comps {
            if c.center != first.center {
                return None;
            }
            width = width.max(c.shape.support()?);
        }
        let to = first.center::<T>() - self.minimum;
        let l = to.norm();
        let axis = if l > T::zero() { to * (T::one() / l) } else { Vec3::unit(2) };
        Some((axis, l, real(width)))
    }

    pub fn reach(&self, t: T) -> T {
        let s = self.rho().support_radius();
        let data = match self.solver.data.decay_class() {
            crate::field::DecayClass::Compact { radius } => {
                real::<T>(radius) + self.minimum.norm()
            }
            crate::field::DecayClass::Power { .. } => T::infinity(),
        };
        let data = if self.solver.data.has_free_part() { t + data } else { T::zero() };
        (t + s).max(data)
    }
}

/// Linear run: history of `(Q, P)` with `Ṗ` stored as acceleration.
#[derive(Clone, Debug)]
pub struct LinearRecord<T: Real> {
    pub config: ScenarioConfig,
    pub system: LinearSystem<T>,
    pub history: TrajectoryHistory<T>,
    pub info: RunInfo,
}

impl<T: Real> LinearRecord<T> {
    /// `H₀(t)` on the ball of radius `reach(t) + 2 R_ρ`.
    pub fn energy_at(&self, t: T) -> Result<LinearEnergy> {
        let r = self.system.reach(t) + self.system.rho().support_radius() * real(2.0);
        if !r.is_finite() {
            return Err(Error::param("field", "the linear energy needs compactly supported free data"));
        }
        self.system.energy(&self.history, t, r, 16)
    }
}

/// Integrates `Ż = A Z` from `Z₀ = (φ₀ − s_{q₊}, π₀, q₀ − q₊, p₀)`.
pub fn linear_simulate<T: Real>(cfg: &ScenarioConfig) -> Result<LinearRecord<T>> {
    let clock = Instant::now();
    let system = LinearSystem::<T>::from_config(cfg)?;
    let h: T = real(cfg.h);
    let q0 = Vec3::<T>::from_f64(cfg.q0) - system.minimum;
    let p0 = Vec3::<T>::from_f64(cfg.p0);
    let mut hist = TrajectoryHistory::new(h, q0, p0, Vec3::zero(), system.resting_past.is_some())?;
    let a0 = system.force(&hist, q0, T::zero())?;
    hist.set_last_acceleration(a0);
    let escape = cfg.escape_radius();
    for _ in 0..cfg.steps() {
        let a = hist.last().1.a;
        advance(&mut hist, a, |view, t, q| Ok((system.force(view, q, t)?, ())))?;
        let (t, k) = hist.last();
        let r = to_f64((k.q + system.minimum).norm());
        if r > escape {
            return Err(Error::Escape { t: to_f64(t), radius: r, limit: escape });
        }
    }
    let vbar = to_f64(hist.speed_bound());
    let info = RunInfo {
        steps: cfg.steps(),
        wall_time_s: clock.elapsed().as_secs_f64(),
        speed_bound: vbar,
        theta: crate::field::theta_threshold(vbar, cfg.tolerances.cone_eps)?,
        escape_radius: escape,
        max_plane_deviation: 0.0,
    };
    Ok(LinearRecord { config: cfg.clone(), system, history: hist, info })
}
