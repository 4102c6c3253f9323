//! Nonlinear remainder `B(X) = Ẋ − A X` of the deviation from the stationary state at `q₊`.

use super::config::CoupledSystem;
use crate::error::Result;
use crate::history::Trajectory;
use crate::model::QuadOrders;
use crate::quadrature::{BallRule, SphereRule};
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Particle component and `L²` norm of the field component of `B(X)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Remainder<T> {
    pub particle: Vec3<T>,
    pub field_l2: T,
}

impl<T: Real> Remainder<T> {
    /// `|B_p| + ‖B_π‖_{L²}`.
    pub fn norm(&self) -> T {
        self.particle.norm() + self.field_l2
    }
}

impl<T: Real> CoupledSystem<T> {
    fn union_ball(&self, q: Vec3<T>, orders: QuadOrders) -> BallRule<T> {
        let qp = self.potential.minimum;
        let half: T = real(0.5);
        let c = (q + qp) * half;
        let rad = self.rho.support_radius() + (q - qp).norm() * half;
        let br: Vec<T> = (0..=4).map(|i| rad * real::<T>(i as f64 / 4.0)).collect();
        BallRule::new(c, &br, orders.radial, &SphereRule::new(orders.polar, orders.azimuthal))
    }

    /// Field component of `B`: `ρ(x − q₊) − ρ(x − q) − ∇ρ(x − q₊)·(q − q₊)`.
    pub fn remainder_field(&self, q: Vec3<T>, x: Vec3<T>) -> T {
        let qp = self.potential.minimum;
        self.rho.rho(x - qp) - self.rho.rho(x - q) - self.rho.grad_rho(x - qp).dot(q - qp)
    }

    pub fn remainder_field_norm(&self, q: Vec3<T>) -> T {
        let ball = self.union_ball(q, self.rho.orders());
        ball.integrate(|x| {
            let b = self.remainder_field(q, x);
            b * b
        })
        .sqrt()
    }

    /// `B(X)` for the state of a nonlinear run at time `t`, with the field integrals
    /// reduced to the force evaluations `F(q)`, `F(q₊)`:
    /// `B_p = −∇V(q) + (ν₀² + ν₁²)(q − q₊) + F(q) − F(q₊)`.
    pub fn nonlinear_remainder<H: Trajectory<T>>(&self, hist: &H, t: T) -> Result<Remainder<T>> {
        let q = hist.interpolate(t)?.q;
        let qp = self.potential.minimum;
        let d = q - qp;
        let field_force = |x: Vec3<T>| -> Result<Vec3<T>> {
            let (fr, fp) = self.solver.retarded_force(hist, x, t)?;
            Ok(fr + fp + self.solver.kirchhoff_force(x, t))
        };
        let particle = -self.potential.gradient(q)
            + d * (self.potential.nu0_squared + self.rho.nu1_squared())
            + field_force(q)?
            - field_force(qp)?;
        Ok(Remainder { particle, field_l2: self.remainder_field_norm(q) })
    }

    /// Particle component of `B(X)` with every integral done by ball quadrature:
    /// `−∇V(q) + ν₀²d + ∫ψ[∇ρ(x−q) − ∇ρ(x−q₊)] + ∫∇s_{q₊}[ρ(x−q₊) − ρ(x−q) − ∇ρ(x−q₊)·d]`,
    /// `ψ = φ − s_{q₊}`.
    pub fn nonlinear_remainder_quadrature<H: Trajectory<T>>(
        &self,
        hist: &H,
        t: T,
        orders: QuadOrders,
    ) -> Result<Vec3<T>> {
        let q = hist.interpolate(t)?.q;
        let qp = self.potential.minimum;
        let d = q - qp;
        let rho = &self.rho;
        let ball = self.union_ball(q, orders);
        let mut acc = -self.potential.gradient(q) + d * self.potential.nu0_squared;
        for (x, w) in ball.points.iter().zip(ball.weights.iter()) {
            let x = *x;
            let g1 = rho.grad_rho(x - q);
            let g0 = rho.grad_rho(x - qp);
            if g1.max_abs() > T::zero() || g0.max_abs() > T::zero() {
                let psi = self.solver.field_eval(hist, x, t)?.phi - rho.coulomb_field(qp, x);
                acc += (g1 - g0) * (*w * psi);
            }
            acc += rho.coulomb_gradient(qp, x) * (*w * self.remainder_field(q, x));
        }
        Ok(acc)
    }
}
