//! Small fixed-size linear algebra.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: [T; 3],
}

impl<T: Real> Vec3<T> {
    #[inline(always)]
    pub const fn new(a: T, b: T, c: T) -> Self {
        Self { x: [a, b, c] }
    }

    #[inline(always)]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit(i: usize) -> Self {
        let mut v = Self::zero();
        v.x[i] = T::one();
        v
    }

    pub fn from_f64(a: [f64; 3]) -> Self {
        Self::new(crate::real(a[0]), crate::real(a[1]), crate::real(a[2]))
    }

    pub fn to_f64(self) -> [f64; 3] {
        self.x.map(crate::to_f64)
    }

    #[inline(always)]
    pub fn dot(self, o: Self) -> T {
        self.x[0] * o.x[0] + self.x[1] * o.x[1] + self.x[2] * o.x[2]
    }

    #[inline(always)]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.x[1] * o.x[2] - self.x[2] * o.x[1],
            self.x[2] * o.x[0] - self.x[0] * o.x[2],
            self.x[0] * o.x[1] - self.x[1] * o.x[0],
        )
    }

    #[inline(always)]
    pub fn norm2(self) -> T {
        self.dot(self)
    }

    #[inline(always)]
    pub fn norm(self) -> T {
        self.norm2().sqrt()
    }

    /// Unit vector, or zero for the zero vector.
    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            self * (T::one() / n)
        } else {
            Self::zero()
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(self) -> T {
        self.x[0].abs().max(self.x[1].abs()).max(self.x[2].abs())
    }

    /// Orthonormal pair completing `self` (assumed unit) to a right-handed frame.
    pub fn orthonormal_frame(self) -> (Self, Self) {
        let a = if self.x[0].abs() < real_half::<T>() {
            Self::unit(0)
        } else {
            Self::unit(1)
        };
        let e1 = (a - self * self.dot(a)).normalized();
        let e2 = self.cross(e1);
        (e1, e2)
    }
}

#[inline(always)]
fn real_half<T: Real>() -> T {
    crate::real(0.5)
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline(always)]
    fn add(self, o: Self) -> Self {
        Self::new(self.x[0] + o.x[0], self.x[1] + o.x[1], self.x[2] + o.x[2])
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline(always)]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x[0] - o.x[0], self.x[1] - o.x[1], self.x[2] - o.x[2])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline(always)]
    fn neg(self) -> Self {
        Self::new(-self.x[0], -self.x[1], -self.x[2])
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline(always)]
    fn mul(self, s: T) -> Self {
        Self::new(self.x[0] * s, self.x[1] * s, self.x[2] * s)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline(always)]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline(always)]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    #[inline(always)]
    fn index(&self, i: usize) -> &T {
        &self.x[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    #[inline(always)]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.x[i]
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn zero() -> Self {
        Self { m: [[T::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        Self::scaled_identity(T::one())
    }

    pub fn scaled_identity(s: T) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.m[i][i] = s;
        }
        m
    }

    /// `a bᵀ`.
    pub fn outer(a: Vec3<T>, b: Vec3<T>) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.m[i][j] = a[i] * b[j];
            }
        }
        m
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(
            self.m[0][0] * v[0] + self.m[0][1] * v[1] + self.m[0][2] * v[2],
            self.m[1][0] * v[0] + self.m[1][1] * v[1] + self.m[1][2] * v[2],
            self.m[2][0] * v[0] + self.m[2][1] * v[1] + self.m[2][2] * v[2],
        )
    }

    /// `vᵀ M v`.
    pub fn quad(&self, v: Vec3<T>) -> T {
        v.dot(self.mul_vec(v))
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn scale(&self, s: T) -> Self {
        let mut r = *self;
        for row in r.m.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = *self;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] += o.m[i][j];
            }
        }
        r
    }

    pub fn max_abs(&self) -> T {
        let mut a = T::zero();
        for row in &self.m {
            for v in row {
                a = a.max(v.abs());
            }
        }
        a
    }
}
