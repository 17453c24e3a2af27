//! Two-component vectors and 2x2 matrices.
//!
//! The state space is `{-1, +1}`, so every distribution, generating-function
//! vector and propagator in this crate is two-dimensional. Components are
//! named `minus`/`plus` after the state they weight.

use serde::{Deserialize, Serialize};

/// A vector indexed by the two states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVec {
    pub minus: f64,
    pub plus: f64,
}

impl StateVec {
    pub const fn new(minus: f64, plus: f64) -> Self {
        Self { minus, plus }
    }

    pub fn sum(self) -> f64 {
        self.minus + self.plus
    }

    /// Euclidean norm.
    pub fn norm(self) -> f64 {
        self.minus.hypot(self.plus)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.minus * s, self.plus * s)
    }

    pub fn is_finite(self) -> bool {
        self.minus.is_finite() && self.plus.is_finite()
    }
}

impl std::ops::Add for StateVec {
    type Output = StateVec;

    fn add(self, other: StateVec) -> StateVec {
        StateVec::new(self.minus + other.minus, self.plus + other.plus)
    }
}

impl std::ops::Sub for StateVec {
    type Output = StateVec;

    fn sub(self, other: StateVec) -> StateVec {
        StateVec::new(self.minus - other.minus, self.plus - other.plus)
    }
}

/// Row-major 2x2 matrix `[[a, b], [c, d]]` acting on [`StateVec`] as
/// `(minus, plus)^T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn mul_vec(&self, v: StateVec) -> StateVec {
        StateVec::new(
            self.a * v.minus + self.b * v.plus,
            self.c * v.minus + self.d * v.plus,
        )
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Determinant by Kahan's fused-multiply-add scheme: accurate to a couple
    /// of ulp of the true value even when `ad` and `bc` nearly cancel.
    pub fn det(&self) -> f64 {
        let w = self.b * self.c;
        let err = (-self.b).mul_add(self.c, w);
        let f = self.a.mul_add(self.d, -w);
        f + err
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Entrywise maximum absolute difference.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }
}

/// Eigenvalues and eigenvectors of a 2x2 matrix with real spectrum.
#[derive(Clone, Copy, Debug)]
pub struct Eigen2 {
    /// The algebraically larger eigenvalue.
    pub lambda1: f64,
    pub lambda2: f64,
    pub vec1: StateVec,
    pub vec2: StateVec,
}

/// Eigen-decomposition for matrices with non-negative off-diagonal entries
/// (covers every monodromy matrix in this crate). The discriminant
/// `(a-d)^2 + 4bc` is a sum of non-negative terms, so the spectrum is real
/// and no cancellation occurs; the smaller eigenvalue is recovered from the
/// determinant to stay accurate when the two are far apart. Inputs violating
/// the sign assumption (an unresolved integration can produce them) get the
/// clamped-discriminant best effort rather than a panic.
pub fn eigen_nonneg_offdiag(m: &Mat2) -> Eigen2 {
    let tr = m.trace();
    let disc = (m.a - m.d) * (m.a - m.d) + 4.0 * m.b * m.c;
    let s = disc.max(0.0).sqrt();
    // tr + s and tr - s: take the root matching tr's sign first.
    let lambda1 = if tr >= 0.0 { 0.5 * (tr + s) } else { m.det() / (0.5 * (tr - s)) };
    let lambda2 = if s == 0.0 {
        lambda1
    } else if lambda1 != 0.0 {
        m.det() / lambda1
    } else {
        0.5 * (tr - s)
    };
    Eigen2 {
        lambda1,
        lambda2,
        vec1: eigenvector(m, lambda1),
        vec2: eigenvector(m, lambda2),
    }
}

fn eigenvector(m: &Mat2, lambda: f64) -> StateVec {
    // Rows of (M - lambda I) are both orthogonal to the eigenvector; pick the
    // candidate with the larger norm to avoid a degenerate row.
    let v1 = StateVec::new(m.b, lambda - m.a);
    let v2 = StateVec::new(lambda - m.d, m.c);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    let n = v.norm();
    if n == 0.0 {
        // lambda I itself; any direction works.
        return StateVec::new(1.0, 0.0);
    }
    let v = v.scale(1.0 / n);
    // Deterministic sign: largest-magnitude component positive.
    if (v.minus.abs() >= v.plus.abs() && v.minus < 0.0) || (v.plus.abs() > v.minus.abs() && v.plus < 0.0)
    {
        v.scale(-1.0)
    } else {
        v
    }
}

/// 2-norm condition number via the singular values.
pub fn condition_number(m: &Mat2) -> f64 {
    let frob2 = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
    let det = m.det();
    let half = 0.5 * frob2;
    let gap = (half * half - det * det).max(0.0).sqrt();
    let s_max2 = half + gap;
    let s_min2 = half - gap;
    if s_min2 <= 0.0 {
        f64::INFINITY
    } else {
        (s_max2 / s_min2).sqrt()
    }
}
