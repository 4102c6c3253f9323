//! Gauss-Legendre rules, composite and adaptive 1D integration, sphere and ball rules.

use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Gauss-Legendre nodes and weights on [-1, 1], computed in `f64`.
pub fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre: n must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            if n == 1 {
                dp = 1.0;
            }
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        x[0] = 0.0;
        w[0] = 2.0;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to an interval.
#[derive(Clone, Debug)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussRule<T> {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre_f64(n);
        Self {
            nodes: x.into_iter().map(real).collect(),
            weights: w.into_iter().map(real).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights for [a, b].
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let h = (b - a) * real(0.5);
        let c = (b + a) * real(0.5);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let mut s = T::zero();
        for (x, w) in self.mapped(a, b) {
            s += w * f(x);
        }
        s
    }

    /// Composite rule over consecutive breakpoints.
    pub fn integrate_panels<F: FnMut(T) -> T>(&self, breaks: &[T], mut f: F) -> T {
        let mut s = T::zero();
        for p in breaks.windows(2) {
            if p[1] > p[0] {
                s += self.integrate(p[0], p[1], &mut f);
            }
        }
        s
    }

    /// Composite rule over `panels` equal subintervals of [a, b].
    pub fn integrate_uniform<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let h = (b - a) / real(panels as f64);
        let mut s = T::zero();
        for k in 0..panels {
            let lo = a + h * real(k as f64);
            s += self.integrate(lo, lo + h, &mut f);
        }
        s
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let c = (a + b) * real(0.5);
    let h = (b - a) * real(0.5);
    let fc = f(c);
    let mut rk = fc * real(WGK[7]);
    let mut rg = fc * real(WG[3]);
    for j in 0..7 {
        let dx = h * real(XGK[j]);
        let s = f(c - dx) + f(c + dx);
        rk += s * real(WGK[j]);
        if j % 2 == 1 {
            rg += s * real(WG[j / 2]);
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration to absolute tolerance `tol`.
pub fn adaptive<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> T {
    if a == b {
        return T::zero();
    }
    let mut stack = vec![(a, b, tol, 0u32)];
    let mut total = T::zero();
    while let Some((lo, hi, tl, depth)) = stack.pop() {
        let (v, e) = gk15(&mut f, lo, hi);
        if e <= tl || depth >= 40 || (hi - lo).abs() < T::epsilon() * (a.abs() + b.abs() + T::one()) {
            total += v;
        } else {
            let mid = (lo + hi) * real(0.5);
            let half = tl * real(0.5);
            stack.push((lo, mid, half, depth + 1));
            stack.push((mid, hi, half, depth + 1));
        }
    }
    total
}

/// Golden-section minimisation of a unimodal function on [a, b].
pub fn golden_min<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let g: T = real(0.618_033_988_749_894_8);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Product rule on the unit sphere: Gauss in cos(theta) times trapezoid in azimuth.
/// Weights sum to 4π.
#[derive(Clone, Debug)]
pub struct SphereRule<T> {
    pub dirs: Vec<Vec3<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> SphereRule<T> {
    pub fn new(n_polar: usize, n_azimuth: usize) -> Self {
        Self::about_axis(Vec3::unit(2), n_polar, n_azimuth)
    }

    /// Same rule with the polar axis along `axis` (unit).
    pub fn about_axis(axis: Vec3<T>, n_polar: usize, n_azimuth: usize) -> Self {
        Self::cap(axis, -T::one(), n_polar, n_azimuth)
    }

    /// Rule for the cap {ω : ω·axis ≥ cmin}.
    pub fn cap(axis: Vec3<T>, cmin: T, n_polar: usize, n_azimuth: usize) -> Self {
        Self::band(axis, cmin, T::one(), 1, n_polar, n_azimuth)
    }

    /// Rule for the band {ω : lo ≤ ω·axis ≤ hi}, split into `panels` equal polar panels.
    pub fn band(axis: Vec3<T>, lo: T, hi: T, panels: usize, n_polar: usize, n_azimuth: usize) -> Self {
        let g = GaussRule::<T>::new(n_polar);
        let clamp = |c: T| c.max(-T::one()).min(T::one());
        let (lo, hi) = (clamp(lo), clamp(hi));
        let panels = panels.max(1);
        let mut nodes = Vec::with_capacity(panels * n_polar);
        for i in 0..panels {
            let a = lo + (hi - lo) * real::<T>(i as f64) / real(panels as f64);
            let b = lo + (hi - lo) * real::<T>((i + 1) as f64) / real(panels as f64);
            if b > a {
                nodes.extend(g.mapped(a, b));
            }
        }
        Self::from_polar(axis, &nodes, n_azimuth)
    }

    /// Product rule from polar nodes `(cos θ, weight)` about `axis` and a uniform azimuth.
    pub fn from_polar(axis: Vec3<T>, nodes: &[(T, T)], n_azimuth: usize) -> Self {
        let (e1, e2) = axis.orthonormal_frame();
        let dphi = real::<T>(2.0) * T::PI() / real(n_azimuth as f64);
        let mut dirs = Vec::with_capacity(nodes.len() * n_azimuth);
        let mut weights = Vec::with_capacity(nodes.len() * n_azimuth);
        for &(c, w) in nodes {
            let s = (T::one() - c * c).max(T::zero()).sqrt();
            for k in 0..n_azimuth {
                let phi = dphi * (real::<T>(k as f64) + real(0.5));
                dirs.push(axis * c + e1 * (s * phi.cos()) + e2 * (s * phi.sin()));
                weights.push(w * dphi);
            }
        }
        Self { dirs, weights }
    }

    pub fn integrate<F: FnMut(Vec3<T>) -> T>(&self, mut f: F) -> T {
        let mut s = T::zero();
        for (d, w) in self.dirs.iter().zip(self.weights.iter()) {
            s += *w * f(*d);
        }
        s
    }
}

/// Ball rule: radial Gauss panels times a sphere rule. Weights include r².
#[derive(Clone, Debug)]
pub struct BallRule<T> {
    pub points: Vec<Vec3<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> BallRule<T> {
    /// Ball of radius `radius` about `center`, with radial panel breakpoints in [0, radius].
    pub fn new(center: Vec3<T>, radial_breaks: &[T], n_radial: usize, sphere: &SphereRule<T>) -> Self {
        let g = GaussRule::<T>::new(n_radial);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for p in radial_breaks.windows(2) {
            for (r, wr) in g.mapped(p[0], p[1]) {
                for (d, wd) in sphere.dirs.iter().zip(sphere.weights.iter()) {
                    points.push(center + *d * r);
                    weights.push(wr * r * r * *wd);
                }
            }
        }
        Self { points, weights }
    }

    pub fn simple(center: Vec3<T>, radius: T, n_radial: usize, n_polar: usize, n_azimuth: usize) -> Self {
        Self::new(center, &[T::zero(), radius], n_radial, &SphereRule::new(n_polar, n_azimuth))
    }

    pub fn integrate<F: FnMut(Vec3<T>) -> T>(&self, mut f: F) -> T {
        let mut s = T::zero();
        for (p, w) in self.points.iter().zip(self.weights.iter()) {
            s += *w * f(*p);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gauss_exact_for_polynomials() {
        for n in 1..12 {
            let g = GaussRule::<f64>::new(n);
            for k in 0..(2 * n) {
                let v = g.integrate(0.0, 1.0, |x| x.powi(k as i32));
                assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn sphere_and_ball_volumes() {
        let s = SphereRule::<f64>::new(8, 16);
        assert!((s.integrate(|_| 1.0) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let z2 = s.integrate(|w| w[2] * w[2]);
        assert!((z2 - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        let b = BallRule::<f64>::simple(Vec3::new(1.0, 2.0, 3.0), 2.0, 8, 8, 16);
        assert!((b.integrate(|_| 1.0) - 32.0 * std::f64::consts::PI / 3.0).abs() < 1e-11);
    }

    #[test]
    fn cap_area() {
        let axis = Vec3::<f64>::new(1.0, 1.0, 0.0).normalized();
        let s = SphereRule::cap(axis, 0.5, 6, 12);
        assert!((s.integrate(|_| 1.0) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, _) = golden_min(|x: f64| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn sphere_integrates_low_harmonics(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
            let s = SphereRule::<f64>::new(10, 20);
            let v = s.integrate(|w| a * w[0] + b * w[1] * w[2] + c * w[0] * w[0]);
            prop_assert!((v - c * 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-11);
        }
    }
}
