//! Field force `∫ φ(x,t) ∇ρ(x − q) dx` on the particle.
//!
//! The retarded part pairs the trajectory with the autocorrelation `P = ρ ∗ ρ`,
//! the free part pairs the initial data with the spherical kernel of `ρ`.

use serde::Serialize;

use crate::error::Result;
use crate::field::{check_time, Component, FieldSolver};
use crate::history::Trajectory;
use crate::quadrature::{BallRule, SphereRule};
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Force on the particle split by origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ForceParts<T> {
    /// `−∇V(q)`.
    pub external: Vec3<T>,
    /// Retarded self-interaction plus the field of the resting past.
    pub self_force: Vec3<T>,
    /// Free evolution of the initial data.
    pub kirchhoff: Vec3<T>,
}

impl<T: Real> ForceParts<T> {
    pub fn total(&self) -> Vec3<T> {
        self.external + self.self_force + self.kirchhoff
    }
}

impl<T: Real> FieldSolver<T> {
    /// Retarded self-force and resting-past force at probe position `q`.
    pub fn retarded_force<H: Trajectory<T>>(&self, hist: &H, q: Vec3<T>, t: T) -> Result<(Vec3<T>, Vec3<T>)> {
        check_time(hist, t)?;
        let auto = self.rho.autocorrelation();
        let two_r = auto.support();
        let mut fr = Vec3::zero();
        if self.rho.is_zero() {
            return Ok((fr, Vec3::zero()));
        }
        let vbar = hist.speed_bound();
        let mut tau_max = two_r + (q - hist.position(T::zero())).norm() + hist.deviation_bound(t);
        if vbar < T::one() {
            // |q − q(s)| ≤ δ + v̄ (t − s) with δ the offset of the probe from the trajectory
            let delta = (q - hist.position(t)).norm();
            tau_max = tau_max.min((two_r + delta) / (T::one() - vbar));
        }
        let lo = (t - tau_max).max(T::zero());
        self.time_nodes(hist, lo, t, |s, w| {
            let d = q - hist.position(s);
            let r = d.norm();
            if r > T::zero() {
                let (_, _, pr) = auto.phi_first(t - s, r);
                fr += d * (w * pr / r);
            }
        });
        let mut fp = Vec3::zero();
        if let Some(c) = self.data.coulomb_center::<T>() {
            let d = q - c;
            let r = d.norm();
            if r > T::zero() {
                let (_, di) = auto.tail(t, r);
                fp = d * (di / r);
            }
        }
        Ok((fr, fp))
    }

    /// `∫_{S²} ∇g(x + r ω) dω` over the part of the sphere meeting the support of `c`.
    fn sphere_gradient(&self, c: &Component, x: Vec3<T>, r: T) -> Vec3<T> {
        let mut out = Vec3::zero();
        let Some((axis, pts)) = self.cap_panels(c, x, r) else {
            return out;
        };
        let (e1, e2) = axis.orthonormal_frame();
        let na = self.settings.sphere_azimuth;
        let dphi = real::<T>(2.0) * T::PI() / real(na as f64);
        for w in pts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            for (cz, wc) in self.polar.mapped(w[0], w[1]) {
                let sz = (T::one() - cz * cz).max(T::zero()).sqrt();
                for k in 0..na {
                    let ph = dphi * (real::<T>(k as f64) + real(0.5));
                    let z = axis * cz + e1 * (sz * ph.cos()) + e2 * (sz * ph.sin());
                    out += c.gradient(x + z * r) * (wc * dphi);
                }
            }
        }
        out
    }

    /// Force of the free part of the data on a particle at `q`:
    /// `−∫ r² [Φ(t,r) S_{∇π₀}(r) + Φ_τ(t,r) S_{∇φ₀}(r)] dr` with sphere integrals about `q`.
    pub fn kirchhoff_force(&self, q: Vec3<T>, t: T) -> Vec3<T> {
        let mut f = Vec3::zero();
        if self.rho.is_zero() || !self.data.has_free_part() {
            return f;
        }
        let k = self.rho.kernel();
        let s = self.rho.support_radius();
        let four = 4;
        for (comps, is_pi) in [(&self.data.phi, false), (&self.data.pi, true)] {
            for c in comps {
                let l = (c.center::<T>() - q).norm();
                let mut lo = (t - s).max(T::zero());
                let mut hi = t + s;
                if let Some(a) = c.shape.support() {
                    let a = real::<T>(a);
                    lo = lo.max(l - a);
                    hi = hi.min(l + a);
                }
                if !(hi > lo) {
                    continue;
                }
                let mut br = vec![lo, hi];
                for i in 1..four {
                    br.push(lo + (hi - lo) * real::<T>(i as f64) / real(four as f64));
                }
                let mut extra = vec![];
                for &b in self.rho.breaks() {
                    extra.push((t - b).abs());
                    extra.push(t + b);
                }
                if let crate::field::Shape::Plateau { inner, .. } = c.shape {
                    let inner = real::<T>(inner);
                    extra.push((l - inner).abs());
                    extra.push(l + inner);
                }
                br.extend(extra.into_iter().filter(|&b| b > lo && b < hi));
                br.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for p in br.windows(2) {
                    if p[1] <= p[0] {
                        continue;
                    }
                    for (r, w) in self.polar.mapped(p[0], p[1]) {
                        let (phi, phi_t, _) = k.phi_first(t, r);
                        let kv = if is_pi { phi } else { phi_t };
                        if kv == T::zero() {
                            continue;
                        }
                        f -= self.sphere_gradient(c, q, r) * (w * r * r * kv);
                    }
                }
            }
        }
        f
    }

    /// Full decomposition at `(q, t)` given the trajectory up to `t`.
    pub fn force_parts<H: Trajectory<T>>(
        &self,
        potential: &crate::model::ConfiningPotential<T>,
        hist: &H,
        q: Vec3<T>,
        t: T,
    ) -> Result<ForceParts<T>> {
        let (fr, fp) = self.retarded_force(hist, q, t)?;
        Ok(ForceParts { external: -potential.gradient(q), self_force: fr + fp, kirchhoff: self.kirchhoff_force(q, t) })
    }

    /// `∫ φ(x,t) ∇ρ(x − q) dx` by product quadrature over the ball `|x − q| ≤ R_ρ`
    /// with `φ` from the full field evaluation.
    pub fn self_force_quadrature<H: Trajectory<T>>(
        &self,
        hist: &H,
        q: Vec3<T>,
        t: T,
        n_radial: usize,
        n_polar: usize,
        n_azimuth: usize,
    ) -> Result<Vec3<T>> {
        let s = self.rho.support_radius();
        let mut br = vec![T::zero()];
        br.extend(self.rho.breaks().iter().copied().filter(|&b| b > T::zero() && b < s));
        br.push(s);
        let ball = BallRule::new(q, &br, n_radial, &SphereRule::new(n_polar, n_azimuth));
        let mut f = Vec3::zero();
        for (x, w) in ball.points.iter().zip(ball.weights.iter()) {
            let phi = self.field_eval(hist, *x, t)?.phi;
            f += self.rho.grad_rho(*x - q) * (*w * phi);
        }
        Ok(f)
    }
}
