//! Radial profiles and the spherical-mean kernels built from them.
//!
//! For a radial profile `f` supported in `[0, S]` write `e(u) = u f(|u|)`,
//! `A(u) = ∫₀^|u| e` and `Ã(u) = ∫₀^u A(|v|) dv`. The kernel
//! `Φ(τ, r) = [A(τ+r) − A(τ−r)] / (2r)` is `τ` times the mean of `f` over the
//! sphere of radius `τ` whose centre sits at distance `r` from the origin of `f`.

use std::sync::Arc;

use crate::quadrature::GaussRule;
use crate::scalar::{real, Real};

/// Radial profile: `r ↦ [f(r), f'(r), f''(r)]`, zero beyond the support.
pub type ProfileFn<T> = Arc<dyn Fn(T) -> [T; 3] + Send + Sync>;

/// Quintic Hermite table on a uniform grid of `[0, end]`.
#[derive(Clone, Debug)]
pub struct HermiteTable<T> {
    h: T,
    inv_h: T,
    end: T,
    nodes: Vec<[T; 3]>,
}

impl<T: Real> HermiteTable<T> {
    pub fn new(end: T, nodes: Vec<[T; 3]>) -> Self {
        let n = nodes.len() - 1;
        let h = end / real(n as f64);
        Self { h, inv_h: T::one() / h, end, nodes }
    }

    pub fn end(&self) -> T {
        self.end
    }

    /// Value at `u ∈ [0, end]` (clamped).
    pub fn eval(&self, u: T) -> T {
        let n = self.nodes.len() - 1;
        let u = u.max(T::zero()).min(self.end);
        let s = u * self.inv_h;
        let mut i = s.to_usize().unwrap_or(0);
        if i >= n {
            i = n - 1;
        }
        let t = s - real(i as f64);
        let [y0, d0, c0] = self.nodes[i];
        let [y1, d1, c1] = self.nodes[i + 1];
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let half: T = real(0.5);
        let h0 = T::one() - real::<T>(10.0) * t3 + real::<T>(15.0) * t4 - real::<T>(6.0) * t5;
        let h1 = t - real::<T>(6.0) * t3 + real::<T>(8.0) * t4 - real::<T>(3.0) * t5;
        let h2 = half * t2 - real::<T>(1.5) * t3 + real::<T>(1.5) * t4 - half * t5;
        let h3 = T::one() - h0;
        let h4 = -real::<T>(4.0) * t3 + real::<T>(7.0) * t4 - real::<T>(3.0) * t5;
        let h5 = half * t3 - t4 + half * t5;
        let h = self.h;
        y0 * h0 + h * (d0 * h1 + d1 * h4) + h * h * (c0 * h2 + c1 * h5) + y1 * h3
    }
}

impl<T: Real> HermiteTable<T> {
    /// Value, first and second derivative at `u ∈ [0, end]` (clamped).
    pub fn eval_all(&self, u: T) -> [T; 3] {
        let n = self.nodes.len() - 1;
        let u = u.max(T::zero()).min(self.end);
        let s = u * self.inv_h;
        let mut i = s.to_usize().unwrap_or(0);
        if i >= n {
            i = n - 1;
        }
        let t = s - real(i as f64);
        let [y0, d0, c0] = self.nodes[i];
        let [y1, d1, c1] = self.nodes[i + 1];
        let c = |x: f64| real::<T>(x);
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let t5 = t4 * t;
        let h = self.h;
        let dy = y1 - y0;
        let v = y0
            + dy * (c(10.0) * t3 - c(15.0) * t4 + c(6.0) * t5)
            + h * (d0 * (t - c(6.0) * t3 + c(8.0) * t4 - c(3.0) * t5)
                + d1 * (c(-4.0) * t3 + c(7.0) * t4 - c(3.0) * t5))
            + h * h
                * (c0 * (c(0.5) * t2 - c(1.5) * t3 + c(1.5) * t4 - c(0.5) * t5)
                    + c1 * (c(0.5) * t3 - t4 + c(0.5) * t5));
        let d = dy * (c(30.0) * t2 - c(60.0) * t3 + c(30.0) * t4) / h
            + d0 * (T::one() - c(18.0) * t2 + c(32.0) * t3 - c(15.0) * t4)
            + d1 * (c(-12.0) * t2 + c(28.0) * t3 - c(15.0) * t4)
            + h * (c0 * (t - c(4.5) * t2 + c(6.0) * t3 - c(2.5) * t4)
                + c1 * (c(1.5) * t2 - c(4.0) * t3 + c(2.5) * t4));
        let dd = dy * (c(60.0) * t - c(180.0) * t2 + c(120.0) * t3) / (h * h)
            + (d0 * (c(-36.0) * t + c(96.0) * t2 - c(60.0) * t3)
                + d1 * (c(-24.0) * t + c(84.0) * t2 - c(60.0) * t3))
                / h
            + c0 * (T::one() - c(9.0) * t + c(18.0) * t2 - c(10.0) * t3)
            + c1 * (c(3.0) * t - c(12.0) * t2 + c(10.0) * t3);
        [v, d, dd]
    }
}

/// Values of the kernel and the derivatives used by the field formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KernelValues<T> {
    pub phi: T,
    pub phi_t: T,
    pub phi_r: T,
    pub phi_tr: T,
    pub phi_rr: T,
}

/// Spherical-mean kernel family of a radial profile.
#[derive(Clone)]
pub struct RadialKernel<T> {
    profile: ProfileFn<T>,
    support: T,
    a_inf: T,
    a_tab: HermiteTable<T>,
    at_tab: HermiteTable<T>,
    small_r: T,
    gl: GaussRule<T>,
}

impl<T: Real> std::fmt::Debug for RadialKernel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialKernel")
            .field("support", &self.support)
            .field("a_inf", &self.a_inf)
            .finish()
    }
}

/// Integrates `g` over `[lo, hi]` splitting at interior `breaks`.
pub(crate) fn integrate_split<T: Real, F: FnMut(T) -> T>(
    g: &GaussRule<T>,
    lo: T,
    hi: T,
    breaks: &[T],
    mut f: F,
) -> T {
    let mut pts = vec![lo];
    for &b in breaks {
        if b > lo && b < hi {
            pts.push(b);
        }
    }
    pts.push(hi);
    g.integrate_panels(&pts, &mut f)
}

impl<T: Real> RadialKernel<T> {
    /// Builds tables with `n` intervals on `[0, support]`; `breaks` lists radii
    /// where the profile is not smooth.
    pub fn new(profile: ProfileFn<T>, support: T, breaks: &[T], n: usize) -> Self {
        let g = GaussRule::<T>::new(12);
        let h = support / real(n as f64);
        let ev = |u: T| {
            let [f, fp, fpp] = if u < support { profile(u) } else { [T::zero(); 3] };
            let e = u * f;
            let de = f + u * fp;
            let dde = real::<T>(2.0) * fp + u * fpp;
            (e, de, dde)
        };
        // derivative data at the outer node is taken from inside the support
        let left_limit = |u: T| if u >= support { support * (T::one() - T::epsilon()) } else { u };
        let mut a_nodes = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        let mut a_vals = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let u = h * real(i as f64);
            if i > 0 {
                let lo = h * real((i - 1) as f64);
                acc += integrate_split(&g, lo, u, breaks, |v| ev(v).0);
            }
            let (e, de, _) = ev(left_limit(u));
            a_nodes.push([acc, e, de]);
            a_vals.push(acc);
        }
        let a_inf = acc;
        let a_tab = HermiteTable::new(support, a_nodes);
        let mut at_nodes = Vec::with_capacity(n + 1);
        let mut acc2 = T::zero();
        for i in 0..=n {
            let u = h * real(i as f64);
            if i > 0 {
                let lo = h * real((i - 1) as f64);
                acc2 += integrate_split(&g, lo, u, breaks, |v| a_tab.eval(v));
            }
            let (e, _, _) = ev(left_limit(u));
            at_nodes.push([acc2, a_vals[i], e]);
        }
        let at_tab = HermiteTable::new(support, at_nodes);
        Self {
            profile,
            support,
            a_inf,
            a_tab,
            at_tab,
            small_r: support * real(0.02),
            gl: GaussRule::new(10),
        }
    }

    pub fn support(&self) -> T {
        self.support
    }

    /// `A(∞) = ∫₀^S u f(u) du`.
    pub fn a_inf(&self) -> T {
        self.a_inf
    }

    /// `[f, f', f'']` at radius `r ≥ 0`.
    #[inline]
    pub fn profile(&self, r: T) -> [T; 3] {
        if r >= self.support {
            [T::zero(); 3]
        } else {
            (self.profile)(r)
        }
    }

    #[inline]
    pub fn e(&self, u: T) -> T {
        u * self.profile(u.abs())[0]
    }

    #[inline]
    pub fn de(&self, u: T) -> T {
        let a = u.abs();
        let [f, fp, _] = self.profile(a);
        f + a * fp
    }

    #[inline]
    pub fn dde(&self, u: T) -> T {
        let a = u.abs();
        let [_, fp, fpp] = self.profile(a);
        let v = real::<T>(2.0) * fp + a * fpp;
        if u < T::zero() {
            -v
        } else {
            v
        }
    }

    /// `A(u)`, even.
    #[inline]
    pub fn a(&self, u: T) -> T {
        let a = u.abs();
        if a >= self.support {
            self.a_inf
        } else {
            self.a_tab.eval(a)
        }
    }

    /// `Ã(u)`, odd, linear beyond the support.
    #[inline]
    pub fn at(&self, u: T) -> T {
        let a = u.abs();
        let v = if a >= self.support {
            self.at_tab.eval(self.support) + self.a_inf * (a - self.support)
        } else {
            self.at_tab.eval(a)
        };
        if u < T::zero() {
            -v
        } else {
            v
        }
    }

    #[inline]
    fn vanishes(&self, tau: T, r: T) -> bool {
        (tau + r).abs() >= self.support && (tau - r).abs() >= self.support
    }

    /// `Φ(τ, r)`.
    pub fn phi(&self, tau: T, r: T) -> T {
        if self.vanishes(tau, r) {
            return T::zero();
        }
        if r < self.small_r {
            let mut s = T::zero();
            for (v, w) in self.gl.mapped(-T::one(), T::one()) {
                s += w * self.e(tau + r * v);
            }
            return s * real(0.5);
        }
        (self.a(tau + r) - self.a(tau - r)) / (r + r)
    }

    /// `(Φ, Φ_τ, Φ_r)`.
    pub fn phi_first(&self, tau: T, r: T) -> (T, T, T) {
        if self.vanishes(tau, r) {
            return (T::zero(), T::zero(), T::zero());
        }
        if r < self.small_r {
            let (mut p, mut pt, mut pr) = (T::zero(), T::zero(), T::zero());
            for (v, w) in self.gl.mapped(-T::one(), T::one()) {
                let u = tau + r * v;
                p += w * self.e(u);
                let d = self.de(u);
                pt += w * d;
                pr += w * v * d;
            }
            let half: T = real(0.5);
            return (p * half, pt * half, pr * half);
        }
        let two_r = r + r;
        let (up, um) = (tau + r, tau - r);
        let phi = (self.a(up) - self.a(um)) / two_r;
        let (ep, em) = (self.e(up), self.e(um));
        (phi, (ep - em) / two_r, (ep + em) / two_r - phi / r)
    }

    /// All kernel values including second derivatives.
    pub fn values(&self, tau: T, r: T) -> KernelValues<T> {
        if self.vanishes(tau, r) {
            return KernelValues::default();
        }
        let half: T = real(0.5);
        if r < self.small_r {
            let mut k = KernelValues::default();
            for (v, w) in self.gl.mapped(-T::one(), T::one()) {
                let u = tau + r * v;
                let d = self.de(u);
                let dd = self.dde(u);
                k.phi += w * self.e(u);
                k.phi_t += w * d;
                k.phi_r += w * v * d;
                k.phi_tr += w * v * dd;
                k.phi_rr += w * v * v * dd;
            }
            k.phi *= half;
            k.phi_t *= half;
            k.phi_r *= half;
            k.phi_tr *= half;
            k.phi_rr *= half;
            return k;
        }
        let two_r = r + r;
        let (up, um) = (tau + r, tau - r);
        let phi = (self.a(up) - self.a(um)) / two_r;
        let (ep, em) = (self.e(up), self.e(um));
        let (dp, dm) = (self.de(up), self.de(um));
        let phi_t = (ep - em) / two_r;
        let phi_r = (ep + em) / two_r - phi / r;
        let phi_tr = (dp + dm) / two_r - phi_t / r;
        let phi_rr = (dp - dm) / two_r - (ep + em) / (two_r * r) - phi_r / r + phi / (r * r);
        KernelValues { phi, phi_t, phi_r, phi_tr, phi_rr }
    }

    /// `I(t, r) = ∫_t^∞ Φ(σ, r) dσ` and `∂_r I`.
    pub fn tail(&self, t: T, r: T) -> (T, T) {
        if t - r >= self.support {
            return (T::zero(), T::zero());
        }
        if r < self.small_r {
            // ∫_t^∞ Φ = ½∫ (A∞ − A(t + r v)) dv, ∂_r = −½∫ v e(t + r v) dv
            let half: T = real(0.5);
            let (mut i, mut di) = (T::zero(), T::zero());
            for (v, w) in self.gl.mapped(-T::one(), T::one()) {
                let u = t + r * v;
                i += w * (self.a_inf - self.a(u));
                di -= w * v * self.e(u);
            }
            return (i * half, di * half);
        }
        let two_r = r + r;
        let d = self.at(t + r) - self.at(t - r);
        let i = self.a_inf - d / two_r;
        let di = -(self.a(t + r) + self.a(t - r)) / two_r + d / (two_r * r);
        (i, di)
    }
}
