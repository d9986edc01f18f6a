//! Small dense complex 2×2 algebra used by the propagators.

use num_complex::Complex64 as C64;
use std::ops::{Add, Mul, Neg, Sub};

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Row-major 2×2 complex matrix `[[m1, m2], [m3, m4]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m1: C64,
    pub m2: C64,
    pub m3: C64,
    pub m4: C64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { m1: ONE, m2: ZERO, m3: ZERO, m4: ONE };

    pub const fn new(m1: C64, m2: C64, m3: C64, m4: C64) -> Self {
        Mat2 { m1, m2, m3, m4 }
    }

    pub fn scalar(s: C64) -> Self {
        Mat2::new(s, ZERO, ZERO, s)
    }

    pub fn det(&self) -> C64 {
        self.m1 * self.m4 - self.m2 * self.m3
    }

    pub fn trace(&self) -> C64 {
        self.m1 + self.m4
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2::new(self.m1 * s, self.m2 * s, self.m3 * s, self.m4 * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Mat2::new(self.m1 * s, self.m2 * s, self.m3 * s, self.m4 * s)
    }

    /// Inverse through the adjugate. Exact for unimodular matrices up to rounding.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let inv = d.inv();
        Some(Mat2::new(self.m4 * inv, -self.m2 * inv, -self.m3 * inv, self.m1 * inv))
    }

    /// Adjugate; equals the inverse when det = 1.
    pub fn adjugate(&self) -> Self {
        Mat2::new(self.m4, -self.m2, -self.m3, self.m1)
    }

    pub fn conj_transpose(&self) -> Self {
        Mat2::new(self.m1.conj(), self.m3.conj(), self.m2.conj(), self.m4.conj())
    }

    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m1.norm().max(self.m2.norm()).max(self.m3.norm()).max(self.m4.norm())
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        (self.m1.norm_sqr() + self.m2.norm_sqr() + self.m3.norm_sqr() + self.m4.norm_sqr()).sqrt()
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.m1 * v[0] + self.m2 * v[1], self.m3 * v[0] + self.m4 * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        self.m1.is_finite() && self.m2.is_finite() && self.m3.is_finite() && self.m4.is_finite()
    }

    /// Exponential of a matrix whose trace is (numerically) zero.
    ///
    /// For traceless `A`, `A² = −det(A)·I`, so `exp(A) = cos θ·I + (sin θ/θ)·A`
    /// with `θ² = det A`. The trace part, if any, is split off and applied as a scalar.
    pub fn expm_traceless(&self) -> Self {
        let half_tr = self.trace() * 0.5;
        let a = Mat2::new(self.m1 - half_tr, self.m2, self.m3, self.m4 - half_tr);
        let theta2 = a.det();
        let (c, s) = cos_sinc_of_sq(theta2);
        let e = Mat2::new(c + s * a.m1, s * a.m2, s * a.m3, c + s * a.m4);
        if half_tr == ZERO {
            e
        } else {
            e.scale(half_tr.exp())
        }
    }
}

/// Returns `(cos θ, sin θ / θ)` given `θ²`, branch independent.
pub(crate) fn cos_sinc_of_sq(theta2: C64) -> (C64, C64) {
    if theta2.norm() < 1e-6 {
        // Taylor in θ² up to θ⁸; truncation below 1e-30 here.
        let t = theta2;
        let c = ONE - t * (0.5 - t * (1.0 / 24.0 - t * (1.0 / 720.0 - t / 40320.0)));
        let s = ONE - t * (1.0 / 6.0 - t * (1.0 / 120.0 - t * (1.0 / 5040.0 - t / 362880.0)));
        (c, s)
    } else {
        let theta = theta2.sqrt();
        (theta.cos(), theta.sin() / theta)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.m1 * b.m1 + self.m2 * b.m3,
            self.m1 * b.m2 + self.m2 * b.m4,
            self.m3 * b.m1 + self.m4 * b.m3,
            self.m3 * b.m2 + self.m4 * b.m4,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, b: Mat2) -> Mat2 {
        Mat2::new(self.m1 + b.m1, self.m2 + b.m2, self.m3 + b.m3, self.m4 + b.m4)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, b: Mat2) -> Mat2 {
        Mat2::new(self.m1 - b.m1, self.m2 - b.m2, self.m3 - b.m3, self.m4 - b.m4)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.m1, -self.m2, -self.m3, -self.m4)
    }
}

/// Eigen-decomposition of a real symmetric 2×2 matrix `[[a, b], [b, c]]`.
/// Returns eigenvalues in ascending order and the matching unit eigenvectors.
pub(crate) fn sym_eigen(a: f64, b: f64, c: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mean = 0.5 * (a + c);
    let diff = 0.5 * (a - c);
    let r = diff.hypot(b);
    let (l0, l1) = (mean - r, mean + r);
    let v1 = if r == 0.0 {
        [1.0, 0.0]
    } else if diff >= 0.0 {
        let (x, y) = (diff + r, b);
        let n = x.hypot(y);
        [x / n, y / n]
    } else {
        let (x, y) = (b, r - diff);
        let n = x.hypot(y);
        [x / n, y / n]
    };
    let v0 = [-v1[1], v1[0]];
    ([l0, l1], [v0, v1])
}
