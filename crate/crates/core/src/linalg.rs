//! Closed-form 2×2 linear algebra: exponential, Lyapunov solve, symmetric
//! eigendecomposition.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Row-major 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn diag(x: f64, y: f64) -> Self {
        Self::new(x, 0.0, 0.0, y)
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(k * self.a, k * self.b, k * self.c, k * self.d)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// `M S Mᵀ`
    pub fn congruence(&self, s: &Mat2) -> Mat2 {
        *self * *s * self.transpose()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Eigenvalues as `(re, im)` pairs; complex pairs are conjugates.
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        let s = 0.5 * self.trace();
        let disc = s * s - self.det();
        if disc >= 0.0 {
            let r = disc.sqrt();
            [(s + r, 0.0), (s - r, 0.0)]
        } else {
            let w = (-disc).sqrt();
            [(s, w), (s, -w)]
        }
    }

    /// `exp(self)` from the eigenvalues `s ± w` via Cayley–Hamilton:
    /// `e^A = e^s [cos w·I + (sin w / w)(A − sI)]` for a complex pair, with
    /// hyperbolic functions for a real pair.
    pub fn exp(&self) -> Mat2 {
        let s = 0.5 * self.trace();
        let disc = s * s - self.det();
        let (c, sinc) = if disc < 0.0 {
            let w = (-disc).sqrt();
            (w.cos(), sinc(w))
        } else {
            let w = disc.sqrt();
            (w.cosh(), sinhc(w))
        };
        let shifted = *self - Mat2::IDENTITY.scale(s);
        (Mat2::IDENTITY.scale(c) + shifted.scale(sinc)).scale(s.exp())
    }

    /// Symmetric eigendecomposition: eigenvalues (descending) and the rotation
    /// angle of the first eigenvector.
    pub fn symmetric_eigen(&self) -> ([f64; 2], f64) {
        let off = 0.5 * (self.b + self.c);
        let mean = 0.5 * (self.a + self.d);
        let half_diff = 0.5 * (self.a - self.d);
        let r = half_diff.hypot(off);
        let theta = 0.5 * off.atan2(half_diff);
        ([mean + r, mean - r], theta)
    }
}

fn sinc(w: f64) -> f64 {
    if w.abs() < 1e-4 {
        1.0 - w * w / 6.0 + w.powi(4) / 120.0
    } else {
        w.sin() / w
    }
}

fn sinhc(w: f64) -> f64 {
    if w.abs() < 1e-4 {
        1.0 + w * w / 6.0 + w.powi(4) / 120.0
    } else {
        w.sinh() / w
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Solves `Y S + S Yᵀ + Q = 0` for symmetric `S` (with `Q` symmetric).
///
/// The 3×3 system for `(s_qq, s_pq, s_pp)` has determinant
/// `tr(Y)·det(Y)`, so it is singular exactly when `tr Y = 0` or `det Y = 0`.
/// Returns `None` in that case.
pub fn solve_lyapunov(y: &Mat2, q: &Mat2) -> Option<Mat2> {
    let (a, b, c, d) = (y.a, y.b, y.c, y.d);
    let det = y.trace() * y.det();
    let scale = y.max_abs().powi(3).max(f64::MIN_POSITIVE);
    if det.abs() <= 1e-14 * scale {
        return None;
    }
    // rows: [a, b, 0], [c, a + d, b], [0, c, d]
    let rhs = [-0.5 * q.a, -0.5 * (q.b + q.c), -0.5 * q.d];
    let m = [[a, b, 0.0], [c, a + d, b], [0.0, c, d]];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let full = det3(&m);
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut mk = m;
        for (row, r) in mk.iter_mut().zip(rhs) {
            row[k] = r;
        }
        *xk = det3(&mk) / full;
    }
    Some(Mat2::new(x[0], x[1], x[1], x[2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Truncated Taylor series with scaling and squaring; test-only reference.
    fn exp_series(m: &Mat2) -> Mat2 {
        let mut k = 0;
        let mut a = *m;
        while a.max_abs() > 0.5 {
            a = a.scale(0.5);
            k += 1;
        }
        let mut term = Mat2::IDENTITY;
        let mut sum = Mat2::IDENTITY;
        for n in 1..30 {
            term = (term * a).scale(1.0 / n as f64);
            sum = sum + term;
        }
        for _ in 0..k {
            sum = sum * sum;
        }
        sum
    }

    #[test]
    fn exp_matches_series_in_all_regimes() {
        let cases = [
            Mat2::new(-0.1, 1.0, -1.0, -0.3),  // underdamped
            Mat2::new(-0.5, 1.0, -0.01, -2.0), // real distinct
            Mat2::new(-1.0, 1.0, 0.0, -1.0),   // defective
            Mat2::new(0.0, 1.0, -1.0, 0.0),    // rotation
            Mat2::new(0.3, -2.0, 0.7, 0.1),
        ];
        for m in cases {
            for t in [0.0, 0.1, 1.0, 3.7] {
                let mt = m.scale(t);
                let e = mt.exp();
                let r = exp_series(&mt);
                assert!((e - r).max_abs() < 1e-12 * r.max_abs().max(1.0), "{m:?} t={t}");
            }
        }
    }

    #[test]
    fn lyapunov_residual_vanishes() {
        let y = Mat2::new(-0.1, 1.0, -1.0, -0.3);
        let q = Mat2::new(0.3, 0.05, 0.05, 0.9);
        let s = solve_lyapunov(&y, &q).unwrap();
        let res = y * s + s * y.transpose() + q;
        assert!(res.max_abs() < 1e-14);
        assert_eq!(s.b, s.c);
    }

    #[test]
    fn lyapunov_singular_without_damping() {
        let y = Mat2::new(0.0, 1.0, -1.0, 0.0);
        assert!(solve_lyapunov(&y, &Mat2::diag(1.0, 1.0)).is_none());
    }

    #[test]
    fn symmetric_eigen_reconstructs() {
        let s = Mat2::new(2.0, 0.7, 0.7, 0.5);
        let ([l1, l2], th) = s.symmetric_eigen();
        let (c, sn) = (th.cos(), th.sin());
        let r = Mat2::new(c, -sn, sn, c);
        let back = r * Mat2::diag(l1, l2) * r.transpose();
        assert!((back - s).max_abs() < 1e-14);
        assert!(l1 >= l2);
    }
}
