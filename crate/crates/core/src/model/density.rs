//! Radial coupling densities.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussRule};
use crate::radial::{integrate_split, HermiteTable, ProfileFn, RadialKernel};
use crate::scalar::{four_pi, real, to_f64, Real};
use crate::vec3::{Mat3, Vec3};

const TABLE_INTERVALS: usize = 4096;

/// Quadrature orders for ball integrals (radial, polar, azimuthal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadOrders {
    pub radial: usize,
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for QuadOrders {
    fn default() -> Self {
        Self { radial: 16, polar: 16, azimuthal: 32 }
    }
}

impl QuadOrders {
    pub fn doubled(self) -> Self {
        Self { radial: 2 * self.radial, polar: 2 * self.polar, azimuthal: 2 * self.azimuthal }
    }
}

/// Radially symmetric, compactly supported density `ρ(x) = ρ_r(|x|)`.
#[derive(Clone)]
pub struct ChargeDensity<T> {
    name: String,
    smooth: bool,
    support: T,
    breaks: Vec<T>,
    orders: QuadOrders,
    kernel: RadialKernel<T>,
    m_tab: HermiteTable<T>,
    charge: T,
    norm2: T,
    auto: OnceLock<Arc<RadialKernel<T>>>,
}

impl<T: Real> std::fmt::Debug for ChargeDensity<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChargeDensity")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("charge", &self.charge)
            .field("norm2", &self.norm2)
            .finish()
    }
}

/// Builds a density from a profile and its derivative. The second derivative
/// needed by the kernels is taken by central differences of `gradient_profile`.
pub fn make_charge_density<T, F, G>(
    profile: F,
    gradient_profile: G,
    support_radius: T,
    orders: QuadOrders,
) -> Result<ChargeDensity<T>>
where
    T: Real,
    F: Fn(T) -> T + Send + Sync + 'static,
    G: Fn(T) -> T + Send + Sync + 'static,
{
    if !(support_radius > T::zero()) || !support_radius.is_finite() {
        return Err(Error::param("support_radius", "must be positive and finite"));
    }
    let edge = profile(support_radius);
    if edge.abs() > real(1e-12) {
        return Err(Error::param(
            "profile",
            format!("must vanish at the support edge, got {}", to_f64(edge)),
        ));
    }
    let s = support_radius;
    let delta = s * T::epsilon().sqrt();
    let f = Arc::new(profile);
    let g = Arc::new(gradient_profile);
    let prof: ProfileFn<T> = Arc::new(move |r: T| {
        if r >= s {
            return [T::zero(); 3];
        }
        let lo = (r - delta).max(T::zero());
        let hi = (r + delta).min(s);
        let fpp = if hi > lo { (g(hi) - g(lo)) / (hi - lo) } else { T::zero() };
        [f(r), g(r), fpp]
    });
    Ok(ChargeDensity::from_profile("custom", prof, s, &[], orders, true))
}

impl<T: Real> ChargeDensity<T> {
    /// Density from an analytic profile triple `[ρ_r, ρ_r', ρ_r'']`.
    pub fn from_profile(
        name: &str,
        profile: ProfileFn<T>,
        support: T,
        breaks: &[T],
        orders: QuadOrders,
        smooth: bool,
    ) -> Self {
        let kernel = RadialKernel::new(profile.clone(), support, breaks, TABLE_INTERVALS);
        let g = GaussRule::<T>::new(12);
        let n = TABLE_INTERVALS;
        let h = support / real(n as f64);
        let mut nodes = Vec::with_capacity(n + 1);
        let mut m = T::zero();
        let mut norm = T::zero();
        for i in 0..=n {
            let r = h * real(i as f64);
            if i > 0 {
                let lo = h * real((i - 1) as f64);
                m += integrate_split(&g, lo, r, breaks, |u| u * u * kernel.profile(u)[0]);
                norm += integrate_split(&g, lo, r, breaks, |u| {
                    let f = kernel.profile(u)[0];
                    u * u * f * f
                });
            }
            let rr = if i == n { support * (T::one() - T::epsilon()) } else { r };
            let [f, fp, _] = kernel.profile(rr);
            nodes.push([m, r * r * f, real::<T>(2.0) * r * f + r * r * fp]);
        }
        let m_tab = HermiteTable::new(support, nodes);
        Self {
            name: name.to_string(),
            smooth,
            support,
            breaks: breaks.to_vec(),
            orders,
            kernel,
            m_tab,
            charge: four_pi::<T>() * m,
            norm2: four_pi::<T>() * norm,
            auto: OnceLock::new(),
        }
    }

    /// Standard bump `A·exp(−1/(1 − (r/R)²))` normalised to total charge `q`.
    pub fn bump(radius: T, q: T) -> Self {
        let r64 = to_f64(radius);
        let base = adaptive(
            |r: f64| {
                let x = r / r64;
                if x >= 1.0 {
                    0.0
                } else {
                    r * r * (-1.0 / (1.0 - x * x)).exp()
                }
            },
            0.0,
            r64,
            1e-16,
        );
        let amp: T = if base > 0.0 { q / real(4.0 * std::f64::consts::PI * base) } else { T::zero() };
        let prof: ProfileFn<T> = Arc::new(move |r: T| {
            let x = r / radius;
            if x >= T::one() {
                return [T::zero(); 3];
            }
            let g = T::one() - x * x;
            let f = amp * (-T::one() / g).exp();
            if f == T::zero() {
                return [T::zero(); 3];
            }
            let r2 = radius * radius;
            let g2 = g * g;
            let fp = -real::<T>(2.0) * x * f / (radius * g2);
            let fpp = f
                * (real::<T>(4.0) * x * x / (r2 * g2 * g2)
                    - real::<T>(2.0) / (r2 * g2)
                    - real::<T>(8.0) * x * x / (r2 * g2 * g));
            [f, fp, fpp]
        });
        Self::from_profile("bump", prof, radius, &[], QuadOrders::default(), true)
    }

    /// Uniform ball of total charge `q`. Not smooth at the edge.
    pub fn uniform_ball(radius: T, q: T) -> Self {
        let c = q * real(3.0) / (four_pi::<T>() * radius * radius * radius);
        let prof: ProfileFn<T> =
            Arc::new(move |r: T| if r < radius { [c, T::zero(), T::zero()] } else { [T::zero(); 3] });
        Self::from_profile("uniform_ball", prof, radius, &[], QuadOrders::default(), false)
    }

    /// Uniform spherical shell of mean radius `radius` and thickness `width`. Not smooth.
    pub fn shell(radius: T, width: T, q: T) -> Self {
        let half = width * real(0.5);
        let (lo, hi) = (radius - half, radius + half);
        let vol = four_pi::<T>() * (hi * hi * hi - lo * lo * lo) / real(3.0);
        let c = q / vol;
        let prof: ProfileFn<T> = Arc::new(move |r: T| {
            if r >= lo && r < hi {
                [c, T::zero(), T::zero()]
            } else {
                [T::zero(); 3]
            }
        });
        Self::from_profile("shell", prof, hi, &[lo], QuadOrders::default(), false)
    }

    /// Identically zero density on a nominal support.
    pub fn zero(radius: T) -> Self {
        let prof: ProfileFn<T> = Arc::new(|_| [T::zero(); 3]);
        Self::from_profile("zero", prof, radius, &[], QuadOrders::default(), true)
    }

    pub fn with_orders(mut self, orders: QuadOrders) -> Self {
        self.orders = orders;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// False for catalog entries that break the smoothness assumption.
    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn support_radius(&self) -> T {
        self.support
    }

    /// Radii where the profile is not smooth (besides the support edge).
    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn orders(&self) -> QuadOrders {
        self.orders
    }

    pub fn charge(&self) -> T {
        self.charge
    }

    /// `‖ρ‖²_{L²}`.
    pub fn norm2(&self) -> T {
        self.norm2
    }

    pub fn is_zero(&self) -> bool {
        self.norm2 == T::zero()
    }

    pub fn kernel(&self) -> &RadialKernel<T> {
        &self.kernel
    }

    #[inline]
    pub fn profile(&self, r: T) -> T {
        self.kernel.profile(r)[0]
    }

    #[inline]
    pub fn gradient_profile(&self, r: T) -> T {
        self.kernel.profile(r)[1]
    }

    /// `ρ(x)`.
    #[inline]
    pub fn rho(&self, x: Vec3<T>) -> T {
        self.profile(x.norm())
    }

    /// `∇ρ(x)`.
    #[inline]
    pub fn grad_rho(&self, x: Vec3<T>) -> Vec3<T> {
        let r = x.norm();
        if r == T::zero() {
            return Vec3::zero();
        }
        x * (self.gradient_profile(r) / r)
    }

    /// `m(r) = ∫₀^r u² ρ_r(u) du`.
    pub fn enclosed(&self, r: T) -> T {
        if r >= self.support {
            self.charge / four_pi::<T>()
        } else {
            self.m_tab.eval(r.max(T::zero()))
        }
    }

    /// `m(r)/r³` without cancellation near the origin.
    fn enclosed_over_r3(&self, r: T) -> T {
        let small = self.support * real(1e-3);
        if r < small {
            let [f, fp, fpp] = self.kernel.profile(r);
            // Taylor expansion of the profile about r
            return f / real(3.0) - fp * r / real(12.0) + fpp * r * r / real(60.0);
        }
        self.enclosed(r) / (r * r * r)
    }

    /// Radial Coulomb potential `s₀(r)` with its first two derivatives.
    pub fn s0_derivs(&self, r: T) -> [T; 3] {
        let r = r.abs();
        if r >= self.support {
            let q = self.charge / four_pi::<T>();
            return [-q / r, q / (r * r), -real::<T>(2.0) * q / (r * r * r)];
        }
        let k = self.enclosed_over_r3(r);
        let s0 = -k * r * r - (self.kernel.a_inf() - self.kernel.a(r));
        [s0, k * r, -real::<T>(2.0) * k + self.profile(r)]
    }

    pub fn s0(&self, r: T) -> T {
        self.s0_derivs(r)[0]
    }

    /// `s_c(x)`.
    pub fn coulomb_field(&self, center: Vec3<T>, x: Vec3<T>) -> T {
        self.s0((x - center).norm())
    }

    /// `∇s_c(x)`.
    pub fn coulomb_gradient(&self, center: Vec3<T>, x: Vec3<T>) -> Vec3<T> {
        let d = x - center;
        let r = d.norm();
        if r == T::zero() {
            return Vec3::zero();
        }
        let [_, s1, _] = self.s0_derivs(r);
        d * (s1 / r)
    }

    /// Hessian of `s_c` at `x`.
    pub fn coulomb_hessian(&self, center: Vec3<T>, x: Vec3<T>) -> Mat3<T> {
        let d = x - center;
        let r = d.norm();
        let [_, s1, s2] = self.s0_derivs(r);
        if r < self.support * real(1e-3) {
            let iso = self.profile(r) / real(3.0);
            return Mat3::scaled_identity(iso);
        }
        let n = d * (T::one() / r);
        let t = s1 / r;
        Mat3::scaled_identity(t).add(&Mat3::outer(n, n).scale(s2 - t))
    }

    /// Radial integral `4π∫₀^S r² g(r) dr` split on the profile breakpoints.
    pub fn radial_integral<F: FnMut(T) -> T>(&self, mut g: F) -> T {
        let rule = GaussRule::<T>::new(20);
        let panels = 64;
        let h = self.support / real(panels as f64);
        let mut s = T::zero();
        for i in 0..panels {
            let lo = h * real(i as f64);
            s += integrate_split(&rule, lo, lo + h, &self.breaks, |r| r * r * g(r));
        }
        four_pi::<T>() * s
    }

    /// `⟨ρ, Δ⁻¹ρ⟩ = ∫ρ s₀`.
    pub fn self_energy(&self) -> T {
        self.radial_integral(|r| self.profile(r) * self.s0(r))
    }

    /// `ν₁² = ‖ρ‖²/3`.
    pub fn nu1_squared(&self) -> T {
        self.norm2 / real(3.0)
    }

    /// `‖∇ρ‖²_{L²}`.
    pub fn grad_norm2(&self) -> T {
        self.radial_integral(|r| {
            let g = self.gradient_profile(r);
            g * g
        })
    }

    /// Kernel family of the autocorrelation `P = ρ∗ρ` (support `2R`), built on first use.
    pub fn autocorrelation(&self) -> Arc<RadialKernel<T>> {
        self.auto.get_or_init(|| Arc::new(self.build_autocorrelation())).clone()
    }

    fn build_autocorrelation(&self) -> RadialKernel<T> {
        let n = 1024;
        let s_max = self.support + self.support;
        let h = s_max / real(n as f64);
        let rule = GaussRule::<T>::new(16);
        let r_sup = self.support;
        let sub = 8;
        let mut nodes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let s = h * real(i as f64);
            let mut brk: Vec<T> = self.breaks.clone();
            brk.push(s);
            brk.push(r_sup - s);
            brk.push(s - r_sup);
            for b in self.breaks.iter() {
                brk.push(*b - s);
                brk.push(s - *b);
                brk.push(s + *b);
            }
            for k in 1..sub {
                brk.push(r_sup * real::<T>(k as f64) / real(sub as f64));
            }
            brk.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (mut p, mut pp, mut ppp) = (T::zero(), T::zero(), T::zero());
            let lo = (s - r_sup).max(T::zero());
            let mut pts = vec![lo];
            pts.extend(brk.into_iter().filter(|b| *b > lo && *b < r_sup));
            pts.push(r_sup);
            for w in pts.windows(2) {
                if w[1] <= w[0] {
                    continue;
                }
                for (r, wt) in rule.mapped(w[0], w[1]) {
                    let a = wt * r * self.profile(r);
                    if a != T::zero() {
                        let k = self.kernel.values(r, s);
                        p += a * k.phi;
                        pp += a * k.phi_r;
                        ppp += a * k.phi_rr;
                    }
                }
            }
            let c = four_pi::<T>();
            nodes.push([c * p, c * pp, c * ppp]);
        }
        let tab = Arc::new(HermiteTable::new(s_max, nodes));
        let prof: ProfileFn<T> = Arc::new(move |s: T| {
            if s >= s_max {
                [T::zero(); 3]
            } else {
                tab.eval_all(s)
            }
        });
        RadialKernel::new(prof, s_max, &[], 2048)
    }
}
