//! Uniformly sampled particle trajectory with C¹ interpolation.

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};
use crate::vec3::Vec3;

/// Position, velocity and acceleration at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Kinematics<T> {
    pub q: Vec3<T>,
    pub v: Vec3<T>,
    pub a: Vec3<T>,
}

/// Read access to a trajectory on `[0, end_time]`.
pub trait Trajectory<T: Real> {
    fn step(&self) -> T;
    fn end_time(&self) -> T;
    /// Interpolated state for `t ∈ [0, end_time]` (clamped, no checks).
    fn sample(&self, t: T) -> Kinematics<T>;
    /// Position only.
    fn position(&self, t: T) -> Vec3<T> {
        self.sample(t).q
    }
    /// Upper bound of `|q(s) − q(0)|` for `s ≤ t`.
    fn deviation_bound(&self, t: T) -> T;
    /// Upper bound of `|q̇|` over the whole record.
    fn speed_bound(&self) -> T;
    /// Breakpoints of the piecewise interpolant inside `(lo, hi)`.
    fn knots_between(&self, lo: T, hi: T) -> Vec<T>;

    /// Checked interpolation; negative times are allowed only with a quiescent past.
    fn interpolate(&self, t: T) -> Result<Kinematics<T>>;
}

/// Append-only record of knots `(t_n = n h, q_n, v_n, a_n)`.
#[derive(Clone, Debug)]
pub struct TrajectoryHistory<T> {
    h: T,
    quiescent_past: bool,
    q: Vec<Vec3<T>>,
    v: Vec<Vec3<T>>,
    a: Vec<Vec3<T>>,
    speed_bound: T,
    accel_bound: T,
    dev_prefix: Vec<T>,
}

#[inline(always)]
fn hermite<T: Real>(p0: Vec3<T>, m0: Vec3<T>, p1: Vec3<T>, m1: Vec3<T>, h: T, u: T) -> Vec3<T> {
    let u2 = u * u;
    let u3 = u2 * u;
    let two: T = real(2.0);
    let three: T = real(3.0);
    let h00 = two * u3 - three * u2 + T::one();
    let h10 = u3 - two * u2 + u;
    let h01 = three * u2 - two * u3;
    let h11 = u3 - u2;
    p0 * h00 + m0 * (h10 * h) + p1 * h01 + m1 * (h11 * h)
}

#[inline(always)]
fn hermite_d<T: Real>(p0: Vec3<T>, m0: Vec3<T>, p1: Vec3<T>, m1: Vec3<T>, h: T, u: T) -> (Vec3<T>, Vec3<T>) {
    let u2 = u * u;
    let six: T = real(6.0);
    let d00 = six * u2 - six * u;
    let d10 = real::<T>(3.0) * u2 - real::<T>(4.0) * u + T::one();
    let d01 = -d00;
    let d11 = real::<T>(3.0) * u2 - real::<T>(2.0) * u;
    let dd00 = real::<T>(12.0) * u - six;
    let dd10 = six * u - real::<T>(4.0);
    let dd11 = six * u - real::<T>(2.0);
    let d = (p0 * d00 + p1 * d01) * (T::one() / h) + m0 * d10 + m1 * d11;
    let dd = (p0 * dd00 - p1 * dd00) * (T::one() / (h * h)) + (m0 * dd10 + m1 * dd11) * (T::one() / h);
    (d, dd)
}

impl<T: Real> TrajectoryHistory<T> {
    pub fn new(step: T, q0: Vec3<T>, v0: Vec3<T>, a0: Vec3<T>, quiescent_past: bool) -> Result<Self> {
        if !(step > T::zero()) {
            return Err(Error::param("run.h", "step must be positive"));
        }
        Ok(Self {
            h: step,
            quiescent_past,
            q: vec![q0],
            v: vec![v0],
            a: vec![a0],
            speed_bound: v0.norm(),
            accel_bound: a0.norm(),
            dev_prefix: vec![T::zero()],
        })
    }

    /// Knots sampled from an analytic trajectory on `[0, n h]`.
    pub fn from_fn<F: Fn(T) -> Kinematics<T>>(step: T, n: usize, f: F) -> Result<Self> {
        let k0 = f(T::zero());
        let mut h = Self::new(step, k0.q, k0.v, k0.a, false)?;
        for i in 1..=n {
            let k = f(step * real(i as f64));
            h.push(k.q, k.v, k.a);
        }
        Ok(h)
    }

    pub fn push(&mut self, q: Vec3<T>, v: Vec3<T>, a: Vec3<T>) {
        self.speed_bound = self.speed_bound.max(v.norm());
        self.accel_bound = self.accel_bound.max(a.norm());
        let d = (q - self.q[0]).norm();
        let last = *self.dev_prefix.last().unwrap();
        self.dev_prefix.push(last.max(d));
        self.q.push(q);
        self.v.push(v);
        self.a.push(a);
    }

    /// Replaces the acceleration stored at the last knot.
    pub fn set_last_acceleration(&mut self, a: Vec3<T>) {
        let n = self.a.len() - 1;
        self.a[n] = a;
        self.accel_bound = self.accel_bound.max(a.norm());
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn quiescent_past(&self) -> bool {
        self.quiescent_past
    }

    pub fn knot(&self, n: usize) -> (T, Kinematics<T>) {
        (self.h * real(n as f64), Kinematics { q: self.q[n], v: self.v[n], a: self.a[n] })
    }

    pub fn last(&self) -> (T, Kinematics<T>) {
        self.knot(self.q.len() - 1)
    }

    pub fn positions(&self) -> &[Vec3<T>] {
        &self.q
    }

    pub fn velocities(&self) -> &[Vec3<T>] {
        &self.v
    }

    pub fn accelerations(&self) -> &[Vec3<T>] {
        &self.a
    }

    pub fn accel_bound(&self) -> T {
        self.accel_bound
    }

    /// Running maximum of `|q_n − q_0|`.
    pub fn max_displacement(&self) -> T {
        *self.dev_prefix.last().unwrap()
    }

    pub fn time(&self, n: usize) -> T {
        self.h * real(n as f64)
    }

    /// View extended by a provisional segment to `t1` ending in state `(q1, v1)`.
    pub fn with_tail(&self, t1: T, q1: Vec3<T>, v1: Vec3<T>) -> HistoryView<'_, T> {
        let (t0, k) = self.last();
        HistoryView { base: self, tail: Some(TailSegment { t0, t1, q0: k.q, v0: k.v, q1, v1 }) }
    }

    pub fn view(&self) -> HistoryView<'_, T> {
        HistoryView { base: self, tail: None }
    }

    fn sample_knots(&self, t: T) -> Kinematics<T> {
        let n = self.q.len() - 1;
        if n == 0 || t <= T::zero() {
            return Kinematics { q: self.q[0], v: self.v[0], a: self.a[0] };
        }
        let s = t / self.h;
        let mut i = s.to_usize().unwrap_or(0);
        if i >= n {
            i = n - 1;
        }
        let u = (s - real(i as f64)).min(T::one());
        let h = self.h;
        let q = hermite(self.q[i], self.v[i], self.q[i + 1], self.v[i + 1], h, u);
        let v = hermite(self.v[i], self.a[i], self.v[i + 1], self.a[i + 1], h, u);
        let a = if i >= 1 && i + 2 <= n {
            let one = T::one();
            let (two, six): (T, T) = (real(2.0), real(6.0));
            let (um, u1, u2) = (u + one, u - one, u - two);
            self.a[i - 1] * (-u * u1 * u2 / six)
                + self.a[i] * (um * u1 * u2 / two)
                + self.a[i + 1] * (-um * u * u2 / two)
                + self.a[i + 2] * (um * u * u1 / six)
        } else {
            self.a[i] * (T::one() - u) + self.a[i + 1] * u
        };
        Kinematics { q, v, a }
    }

    fn position_knots(&self, t: T) -> Vec3<T> {
        let n = self.q.len() - 1;
        if n == 0 || t <= T::zero() {
            return self.q[0];
        }
        let s = t / self.h;
        let mut i = s.to_usize().unwrap_or(0);
        if i >= n {
            i = n - 1;
        }
        let u = (s - real(i as f64)).min(T::one());
        hermite(self.q[i], self.v[i], self.q[i + 1], self.v[i + 1], self.h, u)
    }

    fn dev_at(&self, t: T) -> T {
        let n = self.q.len() - 1;
        let i = (t / self.h).ceil().to_usize().unwrap_or(0).min(n);
        // the interpolant may overshoot the knots by O(h |v|)
        self.dev_prefix[i] + self.h * self.speed_bound
    }

    fn knots_in(&self, lo: T, hi: T) -> Vec<T> {
        let n = self.q.len() - 1;
        let a = (lo / self.h).floor().max(T::zero()).to_usize().unwrap_or(0) + 1;
        let b = (hi / self.h).ceil().to_usize().unwrap_or(0).min(n);
        let mut v = Vec::new();
        for i in a.min(b + 1)..=b {
            let t = self.h * real(i as f64);
            if t > lo && t < hi {
                v.push(t);
            }
        }
        v
    }

    fn checked(&self, t: T, end: T) -> Result<()> {
        if t < T::zero() && !self.quiescent_past {
            return Err(Error::Coverage { t: to_f64(t), start: 0.0, end: to_f64(end) });
        }
        let tol = self.h * real(1e-9);
        if t > end + tol || !t.is_finite() {
            return Err(Error::Coverage { t: to_f64(t), start: 0.0, end: to_f64(end) });
        }
        Ok(())
    }

    fn past_state(&self) -> Kinematics<T> {
        Kinematics { q: self.q[0], v: Vec3::zero(), a: Vec3::zero() }
    }
}

impl<T: Real> Trajectory<T> for TrajectoryHistory<T> {
    fn step(&self) -> T {
        self.h
    }

    fn end_time(&self) -> T {
        self.h * real((self.q.len() - 1) as f64)
    }

    fn sample(&self, t: T) -> Kinematics<T> {
        self.sample_knots(t)
    }

    fn position(&self, t: T) -> Vec3<T> {
        self.position_knots(t)
    }

    fn deviation_bound(&self, t: T) -> T {
        self.dev_at(t)
    }

    fn speed_bound(&self) -> T {
        self.speed_bound
    }

    fn knots_between(&self, lo: T, hi: T) -> Vec<T> {
        self.knots_in(lo, hi)
    }

    fn interpolate(&self, t: T) -> Result<Kinematics<T>> {
        self.checked(t, self.end_time())?;
        if t < T::zero() {
            return Ok(self.past_state());
        }
        Ok(self.sample_knots(t))
    }
}

/// Provisional cubic segment past the last knot.
#[derive(Clone, Copy, Debug)]
pub struct TailSegment<T> {
    pub t0: T,
    pub t1: T,
    pub q0: Vec3<T>,
    pub v0: Vec3<T>,
    pub q1: Vec3<T>,
    pub v1: Vec3<T>,
}

impl<T: Real> TailSegment<T> {
    fn sample(&self, t: T) -> Kinematics<T> {
        let h = self.t1 - self.t0;
        let u = ((t - self.t0) / h).max(T::zero()).min(T::one());
        let q = hermite(self.q0, self.v0, self.q1, self.v1, h, u);
        let (v, a) = hermite_d(self.q0, self.v0, self.q1, self.v1, h, u);
        Kinematics { q, v, a }
    }
}

/// History plus an optional provisional segment, as seen inside an integrator step.
#[derive(Clone, Copy, Debug)]
pub struct HistoryView<'a, T> {
    pub base: &'a TrajectoryHistory<T>,
    pub tail: Option<TailSegment<T>>,
}

impl<T: Real> Trajectory<T> for HistoryView<'_, T> {
    fn step(&self) -> T {
        self.base.h
    }

    fn end_time(&self) -> T {
        match &self.tail {
            Some(s) => s.t1,
            None => self.base.end_time(),
        }
    }

    fn sample(&self, t: T) -> Kinematics<T> {
        match &self.tail {
            Some(s) if t > s.t0 => s.sample(t),
            _ => self.base.sample_knots(t),
        }
    }

    fn position(&self, t: T) -> Vec3<T> {
        match &self.tail {
            Some(s) if t > s.t0 => s.sample(t).q,
            _ => self.base.position_knots(t),
        }
    }

    fn deviation_bound(&self, t: T) -> T {
        let d = self.base.dev_at(t);
        match &self.tail {
            Some(s) if t > s.t0 => {
                let vmax = s.v0.norm().max(s.v1.norm());
                d.max((s.q1 - self.base.q[0]).norm() + (s.t1 - s.t0) * vmax)
            }
            _ => d,
        }
    }

    fn speed_bound(&self) -> T {
        match &self.tail {
            Some(s) => self.base.speed_bound.max(s.v1.norm()),
            None => self.base.speed_bound,
        }
    }

    fn knots_between(&self, lo: T, hi: T) -> Vec<T> {
        let mut k = self.base.knots_in(lo, hi);
        if let Some(s) = &self.tail {
            if s.t0 > lo && s.t0 < hi && k.last().is_none_or(|&x| x < s.t0) {
                k.push(s.t0);
            }
        }
        k
    }

    fn interpolate(&self, t: T) -> Result<Kinematics<T>> {
        self.base.checked(t, self.end_time())?;
        if t < T::zero() {
            return Ok(self.base.past_state());
        }
        Ok(self.sample(t))
    }
}
