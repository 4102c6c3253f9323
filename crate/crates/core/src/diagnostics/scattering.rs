//! Source term of the scattering representation and the bound of its remainder.

use serde::{Deserialize, Serialize};

use super::series::{decay_fit, majorant, DecayFit, DecayTarget, DiagnosticSeries, FIT_FLOOR};
use crate::dynamics::SimulationRecord;
use crate::error::{Error, Result};
use crate::model::{ChargeDensity, QuadOrders};
use crate::quadrature::{BallRule, SphereRule};
use crate::scalar::{real, to_f64, Real};
use crate::vec3::Vec3;

/// `‖ρ(· − d) − ρ‖_{L²} = sqrt(2P(0) − 2P(|d|))` with `P = ρ ∗ ρ`.
pub fn remainder_norm<T: Real>(rho: &ChargeDensity<T>, d: Vec3<T>) -> T {
    if rho.is_zero() {
        return T::zero();
    }
    let auto = rho.autocorrelation();
    let p0 = auto.profile(T::zero())[0];
    let pd = auto.profile(d.norm())[0];
    (real::<T>(2.0) * (p0 - pd)).max(T::zero()).sqrt()
}

/// Same norm by ball quadrature over the union of the two supports.
pub fn remainder_norm_quadrature<T: Real>(rho: &ChargeDensity<T>, d: Vec3<T>, orders: QuadOrders) -> T {
    let half: T = real(0.5);
    let c = d * half;
    let rad = rho.support_radius() + d.norm() * half;
    let br: Vec<T> = (0..=8).map(|i| rad * real::<T>(i as f64 / 8.0)).collect();
    let ball = BallRule::new(c, &br, orders.radial, &SphereRule::new(orders.polar, orders.azimuthal));
    ball.integrate(|x| {
        let v = rho.rho(x - d) - rho.rho(x);
        v * v
    })
    .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterOptions {
    /// Required bound on `|q − q₊|` over the last tenth of the run.
    pub converge_tol: f64,
    /// Target exponent of the source term; the bound is compared with `α − 1`.
    pub target: DecayTarget,
    /// Knot stride of the emitted bound series.
    pub stride: usize,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        Self { converge_tol: 0.1, target: DecayTarget::default(), stride: 10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringRemainder {
    /// `‖R(s)‖` on the knots.
    pub source: DiagnosticSeries,
    /// `∫_t^T ‖R‖ ds + tail` on every `stride`-th knot.
    pub bound: DiagnosticSeries,
    /// Fit of the majorant of `‖R‖` on the second half, used for the tail beyond `T`;
    /// `None` when the source vanishes there.
    pub source_fit: Option<DecayFit>,
    pub tail: f64,
    /// Fit of the bound series on `[0.1 T, 0.9 T]` against `α − 1`; `None` when the bound vanishes.
    pub bound_fit: Option<DecayFit>,
}

pub fn scattering_remainder<T: Real>(run: &SimulationRecord<T>, opts: &ScatterOptions) -> Result<ScatteringRemainder> {
    let h = &run.history;
    let rho = &run.system.rho;
    let qp = run.system.potential.minimum;
    let n = h.len();
    let times: Vec<f64> = (0..n).map(|i| to_f64(h.time(i))).collect();
    let end = times[n - 1];
    let dev: Vec<f64> = h.positions().iter().map(|q| to_f64((*q - qp).norm())).collect();
    let late = super::relaxation::window_max(&times, &dev, 0.9 * end, end);
    if !(late <= opts.converge_tol) {
        return Err(Error::NotConverged(format!(
            "max |q - q+| over the last tenth is {late}, above {}",
            opts.converge_tol
        )));
    }
    let norms: Vec<f64> = h.positions().iter().map(|q| to_f64(remainder_norm(rho, *q - qp))).collect();
    let mut source = DiagnosticSeries::new("source_norm", &["norm"]).with_meta("step", run.config.h);
    for (t, v) in times.iter().zip(norms.iter()) {
        source.push(*t, vec![*v])?;
    }
    let env = majorant(&norms);
    let tail_target = DecayTarget { alpha: 1.0, eps: 0.0 };
    let (source_fit, tail) = if env[n - 1] <= FIT_FLOOR {
        (None, 0.0)
    } else {
        let fit = decay_fit(&times, &env, 0.5 * end, end, tail_target)?;
        if !(fit.beta > 1.0) {
            return Err(Error::NotConverged(format!(
                "source norm decays like t^-{:.3}, too slowly for a finite tail",
                fit.beta
            )));
        }
        let tail = fit.eval(end) * end / (fit.beta - 1.0);
        (Some(fit), tail)
    };
    // cumulative trapezoid from the end
    let mut cum = vec![0.0; n];
    for i in (0..n - 1).rev() {
        cum[i] = cum[i + 1] + 0.5 * (times[i + 1] - times[i]) * (norms[i] + norms[i + 1]);
    }
    let stride = opts.stride.max(1);
    let mut bound = DiagnosticSeries::new("remainder_bound", &["bound"])
        .with_meta("tail", tail)
        .with_meta("stride", stride)
        .with_meta("step", run.config.h)
        .with_meta("source_fit", &source_fit);
    for i in (0..n).step_by(stride) {
        bound.push(times[i], vec![cum[i] + tail])?;
    }
    let target = DecayTarget { alpha: opts.target.alpha - 1.0, eps: opts.target.eps };
    let values = bound.column(0);
    let bound_fit = if values.iter().all(|&v| v <= FIT_FLOOR) {
        None
    } else {
        Some(decay_fit(&bound.times, &values, 0.1 * end, 0.9 * end, target)?)
    };
    bound.set_meta("bound_fit", &bound_fit);
    Ok(ScatteringRemainder { source, bound, source_fit, tail, bound_fit })
}
