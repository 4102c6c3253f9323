//! Free evolution of the initial data by spherical means.

use super::{Component, FieldSolver, FieldValues, Shape};
use crate::error::{Error, Result};
use crate::scalar::{four_pi, real, to_f64, Real};
use crate::vec3::Vec3;

/// Unnormalised integrals over the unit sphere of `z ↦ g(x + t z)` and its derivatives.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct SphereMeans<T> {
    pub g: T,
    pub grad_dot_z: T,
    pub zhz: T,
    pub grad: Vec3<T>,
    pub hz: Vec3<T>,
}

impl<T: Real> FieldSolver<T> {
    /// Polar panels `[c_lo, c_hi]` in `cos θ` about the axis from `x` to the
    /// component centre, covering the part of the sphere that meets the support.
    pub(crate) fn cap_panels(&self, c: &Component, x: Vec3<T>, t: T) -> Option<(Vec3<T>, Vec<T>)> {
        let to = c.center::<T>() - x;
        let l = to.norm();
        let axis = if l > T::zero() { to * (T::one() / l) } else { Vec3::unit(2) };
        let tl2 = real::<T>(2.0) * t * l;
        let cos_at = |rad: T| (t * t + l * l - rad * rad) / tl2;
        let mut cmin = -T::one();
        if let Some(a) = c.shape.support() {
            let a = real::<T>(a);
            if (l - t).abs() >= a {
                return None;
            }
            if t + l > a && tl2 > T::zero() {
                cmin = cos_at(a).max(-T::one());
            }
        }
        let mut pts = vec![cmin];
        let n = 4;
        for i in 1..n {
            pts.push(cmin + (T::one() - cmin) * real::<T>(i as f64) / real(n as f64));
        }
        if let Shape::Plateau { inner, .. } = c.shape {
            if tl2 > T::zero() {
                let ci = cos_at(real(inner));
                if ci > cmin && ci < T::one() {
                    pts.push(ci);
                }
            }
        }
        pts.push(T::one());
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Some((axis, pts))
    }

    pub(crate) fn sphere_means(&self, c: &Component, x: Vec3<T>, t: T) -> SphereMeans<T> {
        let mut m = SphereMeans::default();
        let Some((axis, pts)) = self.cap_panels(c, x, t) else {
            return m;
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
                    let y = x + z * t;
                    let wt = wc * dphi;
                    let gv = c.value(y);
                    let gr = c.gradient(y);
                    let h = c.hessian(y);
                    let hz = h.mul_vec(z);
                    m.g += wt * gv;
                    m.grad_dot_z += wt * gr.dot(z);
                    m.zhz += wt * z.dot(hz);
                    m.grad += gr * wt;
                    m.hz += hz * wt;
                }
            }
        }
        m
    }

    /// Free part of the field (including the closed-form Coulomb part if present).
    pub fn kirchhoff_field(&self, x: Vec3<T>, t: T) -> Result<FieldValues<T>> {
        if t < T::zero() || !t.is_finite() {
            return Err(Error::Coverage { t: to_f64(t), start: 0.0, end: f64::INFINITY });
        }
        let d = &self.data;
        let mut out = FieldValues::zero();
        if t == T::zero() {
            out.phi = d.phi0_free(x);
            out.pi = d.pi0(x);
            out.grad_phi = d.grad_phi0_free(x);
        } else {
            let c4 = T::one() / four_pi::<T>();
            for c in &d.phi {
                let m = self.sphere_means(c, x, t);
                out.phi += c4 * (m.g + t * m.grad_dot_z);
                out.pi += c4 * (real::<T>(2.0) * m.grad_dot_z + t * m.zhz);
                out.grad_phi += (m.grad + m.hz * t) * c4;
            }
            for c in &d.pi {
                let m = self.sphere_means(c, x, t);
                out.phi += c4 * t * m.g;
                out.pi += c4 * (m.g + t * m.grad_dot_z);
                out.grad_phi += m.grad * (c4 * t);
            }
        }
        if let Some(c) = d.coulomb_center::<T>() {
            out = out.add(self.quiescent_past_field(c, x, t));
        }
        Ok(out)
    }
}
