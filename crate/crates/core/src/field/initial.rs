//! Closed-form initial field data.

use serde::{Deserialize, Serialize};

use crate::model::ChargeDensity;
use crate::scalar::{real, Real};
use crate::vec3::{Mat3, Vec3};

/// Radial shape `g(r)` of one initial-data component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `exp(1 − 1/(1 − (r/a)²))` on `r < a` (value 1 at the centre).
    Bump { radius: f64 },
    /// 1 on `r ≤ inner`, smooth step down to 0 at `outer`.
    Plateau { inner: f64, outer: f64 },
    /// `(1 + (r/a)²)^(−σ/2)`.
    Algebraic { scale: f64, sigma: f64 },
}

fn psi(s: f64) -> [f64; 3] {
    if s <= 0.0 {
        return [0.0; 3];
    }
    let p = (-1.0 / s).exp();
    [p, p / (s * s), p * (1.0 / s.powi(4) - 2.0 / s.powi(3))]
}

impl Shape {
    /// `[g, g', g'']` at radius `r ≥ 0`.
    pub fn eval(&self, r: f64) -> [f64; 3] {
        match *self {
            Shape::Bump { radius } => {
                let x = r / radius;
                if x >= 1.0 {
                    return [0.0; 3];
                }
                let g = 1.0 - x * x;
                let f = (1.0 - 1.0 / g).exp();
                let r2 = radius * radius;
                let fp = -2.0 * x * f / (radius * g * g);
                let fpp = f * (4.0 * x * x / (r2 * g.powi(4)) - 2.0 / (r2 * g * g) - 8.0 * x * x / (r2 * g.powi(3)));
                [f, fp, fpp]
            }
            Shape::Plateau { inner, outer } => {
                if r <= inner {
                    return [1.0, 0.0, 0.0];
                }
                if r >= outer {
                    return [0.0; 3];
                }
                let w = outer - inner;
                let s = (outer - r) / w;
                let [n, n1, n2] = psi(s);
                let [m, m1, m2] = psi(1.0 - s);
                let d = n + m;
                let d1 = n1 - m1;
                let d2 = n2 + m2;
                let v = n / d;
                let v1 = (n1 * d - n * d1) / (d * d);
                let v2 = (n2 * d - n * d2) / (d * d) - 2.0 * d1 * (n1 * d - n * d1) / (d * d * d);
                // ds/dr = −1/w
                [v, -v1 / w, v2 / (w * w)]
            }
            Shape::Algebraic { scale, sigma } => {
                let u = 1.0 + (r / scale).powi(2);
                let g = u.powf(-sigma / 2.0);
                let a2 = scale * scale;
                let g1 = -sigma * r / a2 * u.powf(-sigma / 2.0 - 1.0);
                let g2 = -sigma / a2 * u.powf(-sigma / 2.0 - 1.0)
                    + sigma * (sigma + 2.0) * r * r / (a2 * a2) * u.powf(-sigma / 2.0 - 2.0);
                [g, g1, g2]
            }
        }
    }

    /// Support radius, `None` for non-compact shapes.
    pub fn support(&self) -> Option<f64> {
        match *self {
            Shape::Bump { radius } => Some(radius),
            Shape::Plateau { outer, .. } => Some(outer),
            Shape::Algebraic { .. } => None,
        }
    }
}

/// `amplitude · g(|x − center|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub center: [f64; 3],
    pub amplitude: f64,
    pub shape: Shape,
}

impl Component {
    pub fn center<T: Real>(&self) -> Vec3<T> {
        Vec3::from_f64(self.center)
    }

    fn radial<T: Real>(&self, x: Vec3<T>) -> (T, Vec3<T>, [T; 3]) {
        let d = x - self.center();
        let r = d.norm();
        let g = self.shape.eval(crate::to_f64(r)).map(|v| real::<T>(v * self.amplitude));
        (r, d, g)
    }

    pub fn value<T: Real>(&self, x: Vec3<T>) -> T {
        self.radial(x).2[0]
    }

    pub fn gradient<T: Real>(&self, x: Vec3<T>) -> Vec3<T> {
        let (r, d, g) = self.radial(x);
        if r == T::zero() {
            return Vec3::zero();
        }
        d * (g[1] / r)
    }

    pub fn hessian<T: Real>(&self, x: Vec3<T>) -> Mat3<T> {
        let (r, d, g) = self.radial(x);
        let scale = real::<T>(self.shape.support().unwrap_or(1.0));
        if r <= scale * real(1e-6) {
            return Mat3::scaled_identity(g[2]);
        }
        let n = d * (T::one() / r);
        let t = g[1] / r;
        Mat3::scaled_identity(t).add(&Mat3::outer(n, n).scale(g[2] - t))
    }

    fn is_plane_symmetric(&self) -> bool {
        self.center[2] == 0.0
    }
}

/// Initial field `(φ₀, π₀)`: free components plus an optional Coulomb part `s_c`.
///
/// The Coulomb part is represented as the field of a charge at rest at `c` for all
/// negative times, so it never enters the Kirchhoff integral.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldInitialData {
    pub phi: Vec<Component>,
    pub pi: Vec<Component>,
    pub coulomb: Option<[f64; 3]>,
}

/// Decay description of the free part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DecayClass {
    Compact { radius: f64 },
    Power { sigma: f64 },
}

impl FieldInitialData {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Coulomb field of a charge resting at `center`, `π₀ = 0`.
    pub fn matched(center: [f64; 3]) -> Self {
        Self { coulomb: Some(center), ..Self::default() }
    }

    pub fn bump(center: [f64; 3], radius: f64, amp_phi: f64, amp_pi: f64) -> Self {
        let shape = Shape::Bump { radius };
        Self::single(center, shape, amp_phi, amp_pi)
    }

    pub fn plateau(center: [f64; 3], inner: f64, outer: f64, amp_phi: f64, amp_pi: f64) -> Self {
        Self::single(center, Shape::Plateau { inner, outer }, amp_phi, amp_pi)
    }

    pub fn algebraic(center: [f64; 3], scale: f64, sigma: f64, amp_phi: f64, amp_pi: f64) -> Self {
        Self::single(center, Shape::Algebraic { scale, sigma }, amp_phi, amp_pi)
    }

    fn single(center: [f64; 3], shape: Shape, amp_phi: f64, amp_pi: f64) -> Self {
        let mut d = Self::zero();
        if amp_phi != 0.0 {
            d.phi.push(Component { center, amplitude: amp_phi, shape });
        }
        if amp_pi != 0.0 {
            d.pi.push(Component { center, amplitude: amp_pi, shape });
        }
        d
    }

    pub fn with_coulomb(mut self, center: [f64; 3]) -> Self {
        self.coulomb = Some(center);
        self
    }

    /// Free part multiplied by `s` (the Coulomb part is unchanged).
    pub fn scaled(&self, s: f64) -> Self {
        let mut d = self.clone();
        for c in d.phi.iter_mut().chain(d.pi.iter_mut()) {
            c.amplitude *= s;
        }
        d
    }

    pub fn has_free_part(&self) -> bool {
        !(self.phi.is_empty() && self.pi.is_empty())
    }

    pub fn coulomb_center<T: Real>(&self) -> Option<Vec3<T>> {
        self.coulomb.map(Vec3::from_f64)
    }

    pub fn decay_class(&self) -> DecayClass {
        let mut radius: f64 = 0.0;
        let mut sigma = f64::INFINITY;
        for c in self.phi.iter().chain(self.pi.iter()) {
            match c.shape {
                Shape::Algebraic { sigma: s, .. } => sigma = sigma.min(s),
                s => {
                    let cn = (c.center[0].powi(2) + c.center[1].powi(2) + c.center[2].powi(2)).sqrt();
                    radius = radius.max(cn + s.support().unwrap());
                }
            }
        }
        if sigma.is_finite() {
            DecayClass::Power { sigma }
        } else {
            DecayClass::Compact { radius }
        }
    }

    /// All free components are even in `x₃`.
    pub fn is_plane_symmetric(&self) -> bool {
        self.phi.iter().chain(self.pi.iter()).all(|c| c.is_plane_symmetric())
            && self.coulomb.is_none_or(|c| c[2] == 0.0)
    }

    pub fn phi0_free<T: Real>(&self, x: Vec3<T>) -> T {
        self.phi.iter().map(|c| c.value(x)).sum()
    }

    pub fn pi0<T: Real>(&self, x: Vec3<T>) -> T {
        self.pi.iter().map(|c| c.value(x)).sum()
    }

    pub fn grad_phi0_free<T: Real>(&self, x: Vec3<T>) -> Vec3<T> {
        self.phi.iter().fold(Vec3::zero(), |a, c| a + c.gradient(x))
    }

    pub fn grad_pi0<T: Real>(&self, x: Vec3<T>) -> Vec3<T> {
        self.pi.iter().fold(Vec3::zero(), |a, c| a + c.gradient(x))
    }

    pub fn hess_phi0_free<T: Real>(&self, x: Vec3<T>) -> Mat3<T> {
        self.phi.iter().fold(Mat3::zero(), |a, c| a.add(&c.hessian(x)))
    }

    /// Total `φ₀`, including the Coulomb part.
    pub fn phi0<T: Real>(&self, rho: &ChargeDensity<T>, x: Vec3<T>) -> T {
        let c = self.coulomb_center().map_or(T::zero(), |c| rho.coulomb_field(c, x));
        c + self.phi0_free(x)
    }

    pub fn grad_phi0<T: Real>(&self, rho: &ChargeDensity<T>, x: Vec3<T>) -> Vec3<T> {
        let c = self.coulomb_center().map_or(Vec3::zero(), |c| rho.coulomb_gradient(c, x));
        c + self.grad_phi0_free(x)
    }

    pub fn hess_phi0<T: Real>(&self, rho: &ChargeDensity<T>, x: Vec3<T>) -> Mat3<T> {
        let c = self.coulomb_center().map_or(Mat3::zero(), |c| rho.coulomb_hessian(c, x));
        c.add(&self.hess_phi0_free(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_derivs(s: Shape, r: f64) {
        let h = 1e-6;
        let [_, g1, g2] = s.eval(r);
        let fd1 = (s.eval(r + h)[0] - s.eval(r - h)[0]) / (2.0 * h);
        let fd2 = (s.eval(r + h)[1] - s.eval(r - h)[1]) / (2.0 * h);
        assert!((g1 - fd1).abs() < 1e-6 * (1.0 + g1.abs()), "{s:?} {r}");
        assert!((g2 - fd2).abs() < 1e-5 * (1.0 + g2.abs()), "{s:?} {r}");
    }

    #[test]
    fn shape_derivatives() {
        for s in [
            Shape::Bump { radius: 2.0 },
            Shape::Plateau { inner: 1.0, outer: 2.0 },
            Shape::Algebraic { scale: 1.5, sigma: 2.5 },
        ] {
            for &r in &[0.1, 0.5, 1.2, 1.7, 1.95, 3.0] {
                check_derivs(s, r);
            }
        }
    }

    #[test]
    fn component_hessian_matches_fd() {
        let c = Component { center: [0.2, -0.1, 0.0], amplitude: 1.3, shape: Shape::Bump { radius: 2.0 } };
        let x = Vec3::<f64>::new(0.7, 0.4, -0.3);
        let h = 1e-6;
        for i in 0..3 {
            let d = Vec3::unit(i) * h;
            let fd = (c.gradient(x + d) - c.gradient(x - d)) * (0.5 / h);
            for j in 0..3 {
                assert!((fd[j] - c.hessian(x).m[i][j]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn catalog_metadata() {
        let d = FieldInitialData::bump([0.0, 0.0, 0.0], 2.0, 1.0, 0.5);
        assert_eq!(d.decay_class(), DecayClass::Compact { radius: 2.0 });
        assert!(d.is_plane_symmetric());
        let a = FieldInitialData::algebraic([0.0; 3], 1.0, 2.5, 1.0, 0.0);
        assert_eq!(a.decay_class(), DecayClass::Power { sigma: 2.5 });
        assert!(!FieldInitialData::bump([0.0, 0.0, 1.0], 1.0, 1.0, 0.0).is_plane_symmetric());
        let s = d.scaled(2.0);
        let x = Vec3::new(0.3, 0.2, 0.1);
        assert_eq!(s.pi0(x), 2.0 * d.pi0(x));
    }

    proptest! {
        #[test]
        fn plane_symmetric_entries_are_even(x in -3.0f64..3.0, y in -3.0f64..3.0, z in 0.0f64..3.0) {
            let d = FieldInitialData::plateau([0.5, 0.0, 0.0], 1.0, 2.5, 0.7, -0.3);
            let p = Vec3::new(x, y, z);
            let m = Vec3::new(x, y, -z);
            prop_assert_eq!(d.phi0_free(p), d.phi0_free(m));
            prop_assert_eq!(d.pi0(p), d.pi0(m));
        }
    }
}
