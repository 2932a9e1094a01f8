//! 2x2 complex algebra for spectral problems.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub type C64 = Complex64;
pub type Vec2 = [C64; 2];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn from_columns(c0: Vec2, c1: Vec2) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    pub fn col(&self, j: usize) -> Vec2 {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let [[a, b], [c, e]] = self.0;
        Some(Mat2([[e / d, -b / d], [-c / d, a / d]]))
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        [self.0[0][0] * v[0] + self.0[0][1] * v[1], self.0[1][0] * v[0] + self.0[1][1] * v[1]]
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[a * s, b * s], [c * s, d * s]])
    }

    pub fn adjoint(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[a.conj(), c.conj()], [b.conj(), d.conj()]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = self.0;
        let b = o.0;
        let mut r = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self.0;
        for (row, other) in r.iter_mut().zip(o.0) {
            for (a, b) in row.iter_mut().zip(other) {
                *a += b;
            }
        }
        Mat2(r)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let mut r = self.0;
        for (row, other) in r.iter_mut().zip(o.0) {
            for (a, b) in row.iter_mut().zip(other) {
                *a -= b;
            }
        }
        Mat2(r)
    }
}

pub fn norm_sqr(v: Vec2) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

pub fn normalized(v: Vec2) -> Vec2 {
    let n = norm_sqr(v).sqrt();
    [v[0] / n, v[1] / n]
}

/// `det(v, w)` for column vectors.
pub fn wronskian(v: Vec2, w: Vec2) -> C64 {
    v[0] * w[1] - v[1] * w[0]
}

/// `(0, -1; 1, 0) * conj(v)`: the second Darboux column built from the first.
pub fn conj_partner(v: Vec2) -> Vec2 {
    [-v[1].conj(), v[0].conj()]
}

/// The ratio functional `b1 * conj(b2) / (|b1|^2 + |b2|^2)`; depends only on the ray of `b`.
pub fn ratio_functional(b: Vec2) -> C64 {
    b[0] * b[1].conj() / norm_sqr(b)
}
