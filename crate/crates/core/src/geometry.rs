//! Three-dimensional vector algebra: cross products, the skew matrix used by
//! the stochastic spin forcing, tangent projections and exact rotations.

use core::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use libm::{cos, sin, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// `self ∧ o`.
    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        sqrt(self.norm_sq())
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, a: f64) -> Vec3 {
        Vec3::new(self.x * a, self.y * a, self.z * a)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, a: f64) -> Vec3 {
        Vec3::new(self.x / a, self.y / a, self.z / a)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl MulAssign<f64> for Vec3 {
    #[inline]
    fn mul_assign(&mut self, a: f64) {
        *self = *self * a;
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl core::iter::Sum for Vec3 {
    fn sum<I: Iterator<Item = Vec3>>(iter: I) -> Vec3 {
        iter.fold(Vec3::ZERO, |a, b| a + b)
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn mul_vec(&self, b: Vec3) -> Vec3 {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * b.x + r[0][1] * b.y + r[0][2] * b.z,
            r[1][0] * b.x + r[1][1] * b.y + r[1][2] * b.z,
            r[2][0] * b.x + r[2][1] * b.y + r[2][2] * b.z,
        )
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rows[i][k] * o.rows[k][j]).sum();
            }
        }
        Mat3 { rows: out }
    }

    pub fn trace(&self) -> f64 {
        self.rows[0][0] + self.rows[1][1] + self.rows[2][2]
    }
}

/// Skew matrix Ω(u) with `Ω(u)·b = b ∧ u`, used to push Brownian increments
/// onto the plane orthogonal to `u`. Its rows are `(0, u₃, −u₂)`,
/// `(−u₃, 0, u₁)`, `(u₂, −u₁, 0)`, and `tr(ΩᵀΩ) = 2|u|²`.
pub fn omega_matrix(u: Vec3) -> Mat3 {
    Mat3 {
        rows: [[0.0, u.z, -u.y], [-u.z, 0.0, u.x], [u.y, -u.x, 0.0]],
    }
}

/// Component of `s` orthogonal to `v`: `s − (s·v̂)v̂`.
///
/// Returns `None` when `v` is the zero vector.
pub fn tangent_project(s: Vec3, v: Vec3) -> Option<Vec3> {
    let vv = v.norm_sq();
    if !(vv > 0.0) {
        return None;
    }
    Some(s - v * (s.dot(v) / vv))
}

/// Below this rotation angle the Rodrigues coefficients are evaluated by
/// their Taylor series to avoid cancellation in `1 − cos θ`.
const SMALL_ANGLE: f64 = 1e-4;

/// `sin θ / θ` and `(1 − cos θ) / θ²`.
fn rodrigues_coefficients(theta: f64) -> (f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0), 0.5 - t2 / 24.0 * (1.0 - t2 / 30.0))
    } else {
        let half = sin(0.5 * theta) / theta;
        (sin(theta) / theta, 2.0 * half * half)
    }
}

/// Exact flow of `u̇ = ω ∧ u` for time `dt`: rotates `u` about `ω` by the
/// angle `|ω|·dt`. The norm of `u` and its component along `ω` are preserved.
pub fn rotate_about(u: Vec3, omega: Vec3, dt: f64) -> Vec3 {
    let phi = omega * dt;
    let theta = phi.norm();
    if theta == 0.0 {
        return u;
    }
    let (a, b) = rodrigues_coefficients(theta);
    let pu = phi.cross(u);
    u + pu * a + phi.cross(pu) * b
}

/// Displacement `∫₀^dt u(t) dt` along the exact rotation computed by
/// [`rotate_about`].
pub fn rotation_arc(u: Vec3, omega: Vec3, dt: f64) -> Vec3 {
    let phi = omega * dt;
    let theta = phi.norm();
    if theta == 0.0 {
        return u * dt;
    }
    // ∫₀¹ sin(θτ)/θ… in closed form: (1−cos θ)/θ² and (θ − sin θ)/θ³.
    let (c1, c2) = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (0.5 - t2 / 24.0 * (1.0 - t2 / 30.0), (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0)) / 6.0)
    } else {
        let half = sin(0.5 * theta) / theta;
        (2.0 * half * half, (theta - sin(theta)) / (theta * theta * theta))
    };
    let pu = phi.cross(u);
    (u + pu * c1 + phi.cross(pu) * c2) * dt
}

/// Angle-preserving rescale of `u` to length `len`.
pub fn with_norm(u: Vec3, len: f64) -> Option<Vec3> {
    u.normalized().map(|d| d * len)
}

/// Cosine of the angle between two nonzero vectors.
pub fn cos_angle(a: Vec3, b: Vec3) -> Option<f64> {
    let d = sqrt(a.norm_sq() * b.norm_sq());
    if d > 0.0 {
        Some((a.dot(b) / d).clamp(-1.0, 1.0))
    } else {
        None
    }
}

/// Spherical direction from polar cosine and azimuth about `axis`.
pub fn direction_about(axis: Vec3, cos_theta: f64, phi: f64) -> Vec3 {
    let (e1, e2) = orthonormal_complement(axis);
    let sin_theta = sqrt((1.0 - cos_theta * cos_theta).max(0.0));
    axis * cos_theta + (e1 * cos(phi) + e2 * sin(phi)) * sin_theta
}

/// Two unit vectors completing the unit vector `n` to a right-handed
/// orthonormal frame `(e1, e2, n)`.
pub fn orthonormal_complement(n: Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let e1 = (helper - n * helper.dot(n)).normalized().unwrap_or(Vec3::X);
    let e2 = n.cross(e1);
    (e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn cross_of_known_vectors() {
        let c = Vec3::new(1.0, 2.0, 3.0).cross(Vec3::new(4.0, 5.0, 6.0));
        assert_eq!(c, Vec3::new(-3.0, 6.0, -3.0));
    }

    #[test]
    fn omega_acts_as_right_cross() {
        let u = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-0.5, 0.25, 2.0);
        assert!(close(omega_matrix(u).mul_vec(b), b.cross(u), 1e-15));
    }

    #[test]
    fn omega_gram_trace() {
        let u = Vec3::new(1.0, 2.0, 3.0);
        let m = omega_matrix(u);
        assert_eq!(m.transpose().mul_mat(&m).trace(), 28.0);
    }

    #[test]
    fn omega_is_skew() {
        let m = omega_matrix(Vec3::new(0.3, -1.1, 2.2));
        let t = m.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.rows[i][j], -t.rows[i][j]);
            }
        }
    }

    #[test]
    fn projection_removes_parallel_part() {
        let v = Vec3::new(0.0, 0.0, 2.0);
        let p = tangent_project(Vec3::new(1.0, 2.0, 3.0), v).unwrap();
        assert_eq!(p, Vec3::new(1.0, 2.0, 0.0));
        assert!(tangent_project(Vec3::X, Vec3::ZERO).is_none());
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = rotate_about(Vec3::X, Vec3::Z, core::f64::consts::FRAC_PI_2);
        assert!(close(r, Vec3::Y, 1e-15));
    }

    #[test]
    fn series_branch_matches_closed_form_near_threshold() {
        let (a_lo, b_lo) = rodrigues_coefficients(SMALL_ANGLE * 0.999_999);
        let t = SMALL_ANGLE * 1.000_001;
        let (a_hi, b_hi) = (sin(t) / t, (1.0 - cos(t)) / (t * t));
        assert!((a_lo - a_hi).abs() < 1e-12);
        assert!((b_lo - b_hi).abs() < 1e-8);
    }

    #[test]
    fn rodrigues_agrees_with_fine_rk4() {
        let omega = Vec3::new(0.3, -0.7, 1.1);
        let u0 = Vec3::new(1.0, 0.5, -0.25);
        let t = 1.7;
        let steps = 20_000;
        let h = t / steps as f64;
        let f = |u: Vec3| omega.cross(u);
        let mut u = u0;
        for _ in 0..steps {
            let k1 = f(u);
            let k2 = f(u + k1 * (h / 2.0));
            let k3 = f(u + k2 * (h / 2.0));
            let k4 = f(u + k3 * h);
            u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        assert!(close(rotate_about(u0, omega, t), u, 1e-12));
    }

    #[test]
    fn norm_survives_a_million_small_rotations() {
        let omega = Vec3::new(0.2, 0.9, -0.4);
        let mut u = Vec3::new(0.6, 0.0, 0.8);
        for _ in 0..1_000_000 {
            u = rotate_about(u, omega, 1e-3);
        }
        assert!((u.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn arc_matches_quadrature_of_rotation() {
        let omega = Vec3::new(0.0, 2.0, 1.0);
        let u = Vec3::new(1.0, 0.0, 0.3);
        for &dt in &[1e-6, 0.3, 2.0] {
            let n = 4000;
            let h = dt / n as f64;
            // Simpson's rule on the exact rotated velocity.
            let mut acc = Vec3::ZERO;
            for k in 0..=n {
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += rotate_about(u, omega, k as f64 * h) * w;
            }
            acc *= h / 3.0;
            assert!(close(rotation_arc(u, omega, dt), acc, 1e-12 * (1.0 + dt)));
        }
    }

    #[test]
    fn orthonormal_frame() {
        for n in [Vec3::X, Vec3::Y, Vec3::Z, Vec3::new(1.0, 1.0, 1.0).normalized().unwrap()] {
            let (e1, e2) = orthonormal_complement(n);
            assert!(e1.dot(n).abs() < 1e-15 && e2.dot(n).abs() < 1e-15);
            assert!((e1.norm() - 1.0).abs() < 1e-15 && (e2.norm() - 1.0).abs() < 1e-15);
            assert!(close(e1.cross(e2), n, 1e-15));
        }
    }
}
