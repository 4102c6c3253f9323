//! Scenario description: density, potential, initial state, run settings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldInitialData, FieldSettings, FieldSolver};
use crate::model::{ChargeDensity, ConfiningPotential, PotentialKind, QuadOrders};
use crate::scalar::{real, Real};
use crate::vec3::Vec3;

/// Density catalog entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Bump { radius: f64, charge: f64 },
    UniformBall { radius: f64, charge: f64 },
    Shell { radius: f64, width: f64, charge: f64 },
    Zero { radius: f64 },
}

impl DensitySpec {
    pub fn support_radius(&self) -> f64 {
        match *self {
            DensitySpec::Bump { radius, .. }
            | DensitySpec::UniformBall { radius, .. }
            | DensitySpec::Zero { radius } => radius,
            DensitySpec::Shell { radius, width, .. } => radius + 0.5 * width,
        }
    }

    pub fn build<T: Real>(&self, orders: QuadOrders) -> Result<ChargeDensity<T>> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be positive"))
            }
        };
        let rho = match *self {
            DensitySpec::Bump { radius, charge } => {
                pos("rho.radius", radius)?;
                ChargeDensity::bump(real(radius), real(charge))
            }
            DensitySpec::UniformBall { radius, charge } => {
                pos("rho.radius", radius)?;
                ChargeDensity::uniform_ball(real(radius), real(charge))
            }
            DensitySpec::Shell { radius, width, charge } => {
                pos("rho.radius", radius)?;
                pos("rho.width", width)?;
                if width >= 2.0 * radius {
                    return Err(Error::param("rho.width", "must be below twice the radius"));
                }
                ChargeDensity::shell(real(radius), real(width), real(charge))
            }
            DensitySpec::Zero { radius } => {
                pos("rho.radius", radius)?;
                ChargeDensity::zero(real(radius))
            }
        };
        Ok(rho.with_orders(orders))
    }
}

/// Potential catalog entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    pub nu0: f64,
    pub minimum: [f64; 3],
}

impl PotentialSpec {
    pub fn harmonic(nu0: f64) -> Self {
        Self { kind: PotentialKind::Harmonic, nu0, minimum: [0.0; 3] }
    }

    pub fn build<T: Real>(&self) -> Result<ConfiningPotential<T>> {
        if !(self.nu0 > 0.0) {
            return Err(Error::param("potential.nu0", "must be positive"));
        }
        ConfiningPotential::new(self.kind, real(self.nu0 * self.nu0), Vec3::from_f64(self.minimum))
    }
}

/// Free part of the initial field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FreeField {
    None,
    Bump { center: [f64; 3], radius: f64, amp_phi: f64, amp_pi: f64 },
    Plateau { center: [f64; 3], inner: f64, outer: f64, amp_phi: f64, amp_pi: f64 },
    Algebraic { center: [f64; 3], scale: f64, sigma: f64, amp_phi: f64, amp_pi: f64 },
}

/// Where the initial Coulomb field sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoulombPart {
    None,
    /// Centred at the initial particle position.
    Particle,
    /// Centred at the potential minimum.
    Minimum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub free: FreeField,
    pub coulomb: CoulombPart,
}

impl FieldSpec {
    pub fn zero() -> Self {
        Self { free: FreeField::None, coulomb: CoulombPart::None }
    }

    pub fn matched() -> Self {
        Self { free: FreeField::None, coulomb: CoulombPart::Particle }
    }

    pub fn build(&self, q0: [f64; 3], minimum: [f64; 3]) -> Result<FieldInitialData> {
        let pos = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be positive"))
            }
        };
        let mut d = match self.free {
            FreeField::None => FieldInitialData::zero(),
            FreeField::Bump { center, radius, amp_phi, amp_pi } => {
                pos("field.radius", radius)?;
                FieldInitialData::bump(center, radius, amp_phi, amp_pi)
            }
            FreeField::Plateau { center, inner, outer, amp_phi, amp_pi } => {
                pos("field.inner", inner)?;
                if !(outer > inner) {
                    return Err(Error::param("field.outer", "must exceed field.inner"));
                }
                FieldInitialData::plateau(center, inner, outer, amp_phi, amp_pi)
            }
            FreeField::Algebraic { center, scale, sigma, amp_phi, amp_pi } => {
                pos("field.scale", scale)?;
                if !(sigma > 1.5) {
                    return Err(Error::param("field.sigma", "must exceed 3/2 for finite energy"));
                }
                FieldInitialData::algebraic(center, scale, sigma, amp_phi, amp_pi)
            }
        };
        d.coulomb = match self.coulomb {
            CoulombPart::None => None,
            CoulombPart::Particle => Some(q0),
            CoulombPart::Minimum => Some(minimum),
        };
        Ok(d)
    }
}

/// Run tolerances and sanity bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bound on `|q₃| + |p₃|` in plane mode.
    pub plane: f64,
    /// Escape radius; `None` means `10 |q₀| + 10`.
    pub escape_radius: Option<f64>,
    /// Margin of the far-field cone.
    pub cone_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { plane: 1e-9, escape_radius: None, cone_eps: 0.01 }
    }
}

/// Complete description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub rho: DensitySpec,
    pub potential: PotentialSpec,
    pub q0: [f64; 3],
    pub p0: [f64; 3],
    pub field: FieldSpec,
    pub h: f64,
    pub t_end: f64,
    pub orders: QuadOrders,
    pub field_settings: FieldSettings,
    pub plane: bool,
    pub tolerances: Tolerances,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let rho = DensitySpec::Bump { radius: 1.0, charge: 1.0 };
        Self {
            h: 0.02 * rho.support_radius(),
            rho,
            potential: PotentialSpec::harmonic(1.0),
            q0: [0.0; 3],
            p0: [0.0; 3],
            field: FieldSpec::zero(),
            t_end: 100.0,
            orders: QuadOrders::default(),
            field_settings: FieldSettings::default(),
            plane: false,
            tolerances: Tolerances::default(),
        }
    }
}

impl ScenarioConfig {
    /// Resting particle at the minimum with its own Coulomb field.
    pub fn stationary(t_end: f64) -> Self {
        Self { field: FieldSpec::matched(), t_end, ..Self::default() }
    }

    /// Particle displaced along `e₁` by `d`, zero fields.
    pub fn displaced(d: f64, t_end: f64) -> Self {
        Self { q0: [d, 0.0, 0.0], t_end, plane: true, ..Self::default() }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.h).round() as usize
    }

    pub fn escape_radius(&self) -> f64 {
        let q = self.q0;
        self.tolerances
            .escape_radius
            .unwrap_or(10.0 * (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt() + 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::param("run.h", "step must be positive"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("run.T", "horizon must be nonnegative"));
        }
        let n = self.t_end / self.h;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::param("run.T", "horizon must be a multiple of run.h"));
        }
        for (name, v) in [("init.q", self.q0), ("init.p", self.p0)] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::param(name, "components must be finite"));
            }
        }
        for (name, v) in [
            ("quad.radial", self.orders.radial),
            ("quad.polar", self.orders.polar),
            ("quad.azimuthal", self.orders.azimuthal),
            ("quad.panel", self.field_settings.panel_order),
            ("quad.sphere_polar", self.field_settings.sphere_polar),
            ("quad.sphere_azimuth", self.field_settings.sphere_azimuth),
        ] {
            if v == 0 {
                return Err(Error::param(name, "order must be positive"));
            }
        }
        if !(self.tolerances.plane > 0.0) {
            return Err(Error::param("run.plane_tol", "must be positive"));
        }
        if !(self.tolerances.cone_eps > 0.0 && self.tolerances.cone_eps < 1.0) {
            return Err(Error::param("run.cone_eps", "must lie in (0, 1)"));
        }
        if let Some(r) = self.tolerances.escape_radius {
            if !(r > 0.0) {
                return Err(Error::param("run.escape", "must be positive"));
            }
        }
        let pot = self.potential.build::<f64>()?;
        let data = self.field.build(self.q0, self.potential.minimum)?;
        if self.plane {
            if self.q0[2] != 0.0 {
                return Err(Error::param("init.q3", "plane mode requires q3(0) = 0 (particle in the plane)"));
            }
            if self.p0[2] != 0.0 {
                return Err(Error::param("init.p3", "plane mode requires p3(0) = 0 (particle in the plane)"));
            }
            if !data.is_plane_symmetric() {
                return Err(Error::param("field", "plane mode requires initial fields even in x3"));
            }
            if self.potential.minimum[2] != 0.0 || !pot.check_plane_symmetry(100, 10.0) {
                return Err(Error::param("potential", "plane mode requires dV/dq3 = 0 on the plane q3 = 0"));
            }
        }
        self.rho.build::<f64>(self.orders)?;
        Ok(())
    }

    /// Validated physical system.
    pub fn build<T: Real>(&self) -> Result<CoupledSystem<T>> {
        self.validate()?;
        let rho = Arc::new(self.rho.build::<T>(self.orders)?);
        let potential = self.potential.build::<T>()?;
        let data = self.field.build(self.q0, self.potential.minimum)?;
        let solver = FieldSolver::new(rho.clone(), data, self.field_settings);
        Ok(CoupledSystem { rho, potential, solver })
    }
}

/// Density, potential and field solver of one scenario.
#[derive(Clone, Debug)]
pub struct CoupledSystem<T: Real> {
    pub rho: Arc<ChargeDensity<T>>,
    pub potential: ConfiningPotential<T>,
    pub solver: FieldSolver<T>,
}
