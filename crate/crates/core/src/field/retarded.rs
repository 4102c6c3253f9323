//! Retarded (Liénard–Wiechert) part of the field.

use super::{check_time, FieldSolver, FieldValues};
use crate::error::Result;
use crate::history::Trajectory;
use crate::quadrature::{GaussRule, SphereRule};
use crate::scalar::{four_pi, real, Real};
use crate::vec3::Vec3;

impl<T: Real> FieldSolver<T> {
    /// Emission-time window `[s_lo, s_hi] ⊂ [0, t]` outside which the source
    /// cannot reach `x` at time `t`.
    pub(crate) fn emission_window<H: Trajectory<T>>(&self, hist: &H, x: Vec3<T>, t: T) -> Option<(T, T)> {
        let s = self.rho.support_radius();
        let r0 = (x - hist.position(T::zero())).norm();
        let d = hist.deviation_bound(t);
        let tau_lo = (r0 - d - s).max(T::zero());
        let tau_hi = (r0 + d + s).min(t);
        if tau_hi > tau_lo {
            Some((t - tau_hi, t - tau_lo))
        } else {
            None
        }
    }

    /// `φ_r(x,t) = −∫₀^t Φ(t−s, |x − q(s)|) ds` with `π_r`, `∇φ_r`.
    pub fn lw_field<H: Trajectory<T>>(&self, hist: &H, x: Vec3<T>, t: T) -> Result<FieldValues<T>> {
        check_time(hist, t)?;
        let mut out = FieldValues::zero();
        let Some((lo, hi)) = self.emission_window(hist, x, t) else {
            return Ok(out);
        };
        let k = self.rho.kernel();
        self.time_nodes(hist, lo, hi, |s, w| {
            let d = x - hist.position(s);
            let r = d.norm();
            let (p, pt, pr) = k.phi_first(t - s, r);
            out.phi -= w * p;
            out.pi -= w * pt;
            if r > T::zero() {
                out.grad_phi -= d * (w * pr / r);
            }
        });
        Ok(out)
    }

    /// Field at `(x, t)` of a charge resting at `c` for all `s < 0`.
    pub fn quiescent_past_field(&self, c: Vec3<T>, x: Vec3<T>, t: T) -> FieldValues<T> {
        let k = self.rho.kernel();
        let d = x - c;
        let r = d.norm();
        let (i, di) = k.tail(t, r);
        let grad = if r > T::zero() { d * (-di / r) } else { Vec3::zero() };
        FieldValues { phi: -i, pi: k.phi(t, r), grad_phi: grad }
    }

    /// Independent evaluation of the retarded part by product quadrature over
    /// the backward light cone of `(x, t)` (radius × sphere, centred at `x`).
    pub fn lw_field_ball<H: Trajectory<T>>(
        &self,
        hist: &H,
        x: Vec3<T>,
        t: T,
        n_radial: usize,
        n_polar: usize,
        n_azimuth: usize,
    ) -> Result<FieldValues<T>> {
        check_time(hist, t)?;
        let mut out = FieldValues::zero();
        let Some((lo, hi)) = self.emission_window(hist, x, t) else {
            return Ok(out);
        };
        let rho = &self.rho;
        let q0 = hist.position(T::zero());
        let reach = hist.deviation_bound(t) + rho.support_radius();
        let to_c = q0 - x;
        let l = to_c.norm();
        let axis = if l > T::zero() { to_c * (T::one() / l) } else { Vec3::unit(2) };
        let g = GaussRule::<T>::new(n_radial);
        let c4 = T::one() / four_pi::<T>();
        let mut a = lo;
        for b in hist.knots_between(lo, hi).into_iter().chain(std::iter::once(hi)) {
            if b <= a {
                continue;
            }
            for (s, ws) in g.mapped(a, b) {
                let sigma = t - s;
                let k = hist.sample(s);
                let cmin = if l > T::zero() && sigma > T::zero() {
                    (sigma * sigma + l * l - reach * reach) / (real::<T>(2.0) * sigma * l)
                } else {
                    -T::one()
                };
                if cmin >= T::one() {
                    continue;
                }
                let sph = SphereRule::cap(axis, cmin, n_polar, n_azimuth);
                for (om, wo) in sph.dirs.iter().zip(sph.weights.iter()) {
                    let y = x + *om * sigma - k.q;
                    let f = rho.rho(y);
                    let gr = rho.grad_rho(y);
                    let w = ws * *wo * c4;
                    out.phi -= w * sigma * f;
                    out.pi -= w * (f + sigma * gr.dot(*om));
                    out.grad_phi -= gr * (w * sigma);
                }
            }
            a = b;
        }
        Ok(out)
    }
}
