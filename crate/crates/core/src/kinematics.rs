//! Forward kinematics of the 3R chain and the Jacobian determinant.
//!
//! The position chain, with `ci = cos(theta_i)`, `si = sin(theta_i)`,
//! `cai = cos(alpha_i)`, `sai = sin(alpha_i)`:
//!
//! ```text
//! x3 = a2 + a3 c3          y3 = ca2 a3 s3 - d3 sa2     z3 = sa2 a3 s3 + d3 ca2
//! x2 = c2 x3 - s2 y3 + a1
//! y2 = ca1 (s2 x3 + c2 y3) - sa1 z3 - sa1 d2
//! z2 = sa1 (s2 x3 + c2 y3) + ca1 z3 + ca1 d2
//! x  = c1 x2 - s1 y2       y  = s1 x2 + c1 y2          z  = z2
//! ```

use crate::model::{JointConfig, Manipulator};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkspacePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WorkspacePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &WorkspacePoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

/// Point of the half cross-section: `rho = sqrt(x^2 + y^2)`, same `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionPoint {
    pub rho: f64,
    pub z: f64,
}

impl CrossSectionPoint {
    pub fn new(rho: f64, z: f64) -> Self {
        Self { rho, z }
    }

    pub fn distance(&self, other: &CrossSectionPoint) -> f64 {
        ((self.rho - other.rho).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

/// Intermediate frame-2 position (before the theta1 rotation). The whole
/// cross-section geometry lives here: `rho^2 = x2^2 + y2^2`, `z = z2`.
pub(crate) fn chain_stage2(m: &Manipulator, theta2: f64, theta3: f64) -> (f64, f64, f64) {
    let p = &m.params;
    let (s2, c2) = theta2.sin_cos();
    let (s3, c3) = theta3.sin_cos();
    let (sa1, ca1) = p.alpha1.sin_cos();
    let (sa2, ca2) = p.alpha2.sin_cos();
    let x3 = p.a2 + p.a3 * c3;
    let y3 = ca2 * p.a3 * s3 - p.d3 * sa2;
    let z3 = sa2 * p.a3 * s3 + p.d3 * ca2;
    let x2 = c2 * x3 - s2 * y3 + p.a1;
    let t = s2 * x3 + c2 * y3;
    let y2 = ca1 * t - sa1 * z3 - sa1 * p.d2;
    let z2 = sa1 * t + ca1 * z3 + ca1 * p.d2;
    (x2, y2, z2)
}

/// End-tip position for a joint configuration.
pub fn forward(m: &Manipulator, q: &JointConfig) -> WorkspacePoint {
    let (x2, y2, z2) = chain_stage2(m, q.theta2, q.theta3);
    let (s1, c1) = q.theta1.sin_cos();
    WorkspacePoint::new(c1 * x2 - s1 * y2, s1 * x2 + c1 * y2, z2)
}

/// Projection onto the half cross-section.
pub fn cross_section(p: &WorkspacePoint) -> CrossSectionPoint {
    CrossSectionPoint::new(p.x.hypot(p.y), p.z)
}

/// Analytic Jacobian `d(x,y,z)/d(theta1,theta2,theta3)`.
pub fn jacobian(m: &Manipulator, q: &JointConfig) -> Matrix3<f64> {
    let p = &m.params;
    let (s1, c1) = q.theta1.sin_cos();
    let (s2, c2) = q.theta2.sin_cos();
    let (s3, c3) = q.theta3.sin_cos();
    let (sa1, ca1) = p.alpha1.sin_cos();
    let (sa2, ca2) = p.alpha2.sin_cos();

    let x3 = p.a2 + p.a3 * c3;
    let y3 = ca2 * p.a3 * s3 - p.d3 * sa2;
    let z3 = sa2 * p.a3 * s3 + p.d3 * ca2;
    let x3d = -p.a3 * s3;
    let y3d = ca2 * p.a3 * c3;
    let z3d = sa2 * p.a3 * c3;

    let x2 = c2 * x3 - s2 * y3 + p.a1;
    let t = s2 * x3 + c2 * y3;
    let y2 = ca1 * t - sa1 * z3 - sa1 * p.d2;

    // partials of (x2, y2, z2) wrt theta2
    let x2_t2 = -s2 * x3 - c2 * y3;
    let t_t2 = c2 * x3 - s2 * y3;
    let y2_t2 = ca1 * t_t2;
    let z2_t2 = sa1 * t_t2;

    // partials wrt theta3
    let x2_t3 = c2 * x3d - s2 * y3d;
    let t_t3 = s2 * x3d + c2 * y3d;
    let y2_t3 = ca1 * t_t3 - sa1 * z3d;
    let z2_t3 = sa1 * t_t3 + ca1 * z3d;

    let col1 = Vector3::new(-(s1 * x2 + c1 * y2), c1 * x2 - s1 * y2, 0.0);
    let col2 = Vector3::new(c1 * x2_t2 - s1 * y2_t2, s1 * x2_t2 + c1 * y2_t2, z2_t2);
    let col3 = Vector3::new(c1 * x2_t3 - s1 * y2_t3, s1 * x2_t3 + c1 * y2_t3, z2_t3);
    Matrix3::from_columns(&[col1, col2, col3])
}

/// Determinant of the full Jacobian.
pub fn det_jacobian(m: &Manipulator, q: &JointConfig) -> f64 {
    jacobian(m, q).determinant()
}

/// Reduced Jacobian determinant on the `(theta2, theta3)` torus.
///
/// For orthogonal models with `d3 = 0` this is the closed-form product
/// `(a2 + c3 a3)(c2 (s3 a2 - c3 sg2 d2) + s3 a1)` (up to the overall
/// `-sigma1` orientation); the full determinant equals `a3` times it.
/// Other models fall back to the numeric determinant at `theta1 = 0`.
pub fn det_jacobian_reduced(m: &Manipulator, theta2: f64, theta3: f64) -> f64 {
    if m.orthogonal && m.d3_is_zero() {
        let p = &m.params;
        let (s2, c2) = theta2.sin_cos();
        let (s3, c3) = theta3.sin_cos();
        let sg2 = m.sigma2();
        let first = p.a2 + c3 * p.a3;
        let second = c2 * (s3 * p.a2 - c3 * sg2 * p.d2) + s3 * p.a1;
        -m.sigma1() * first * second
    } else {
        det_jacobian(m, &JointConfig::new(0.0, theta2, theta3))
    }
}

/// Gradient of [`det_jacobian_reduced`] in `(theta2, theta3)`, by central
/// differences; used by the genericity check.
pub fn det_reduced_gradient(m: &Manipulator, theta2: f64, theta3: f64) -> (f64, f64) {
    let h = 1e-6;
    let d2 = (det_jacobian_reduced(m, theta2 + h, theta3)
        - det_jacobian_reduced(m, theta2 - h, theta3))
        / (2.0 * h);
    let d3 = (det_jacobian_reduced(m, theta2, theta3 + h)
        - det_jacobian_reduced(m, theta2, theta3 - h))
        / (2.0 * h);
    (d2, d3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::illustrative;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn fd_jacobian(m: &Manipulator, q: &JointConfig, h: f64) -> Matrix3<f64> {
        let mut j = Matrix3::zeros();
        for k in 0..3 {
            let mut qp = q.as_array();
            let mut qm = q.as_array();
            qp[k] += h;
            qm[k] -= h;
            let pp = forward(m, &JointConfig { theta1: qp[0], theta2: qp[1], theta3: qp[2] });
            let pm = forward(m, &JointConfig { theta1: qm[0], theta2: qm[1], theta3: qm[2] });
            j[(0, k)] = (pp.x - pm.x) / (2.0 * h);
            j[(1, k)] = (pp.y - pm.y) / (2.0 * h);
            j[(2, k)] = (pp.z - pm.z) / (2.0 * h);
        }
        j
    }

    #[test]
    fn zero_configuration() {
        let m = illustrative();
        let p = forward(&m, &JointConfig::new(0.0, 0.0, 0.0));
        assert_relative_eq!(p.x, 4.5, epsilon = 1e-12);
        assert_relative_eq!(p.y, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn published_configuration_lands_near_target() {
        // the rounded configuration (-0.9, -0.7, 2.5) maps near (2.5, 0, 0.5);
        // inputs are printed with 0.1 rad precision, hence the loose band
        let m = illustrative();
        let p = forward(&m, &JointConfig::new(-0.9, -0.7, 2.5));
        assert!(p.distance(&WorkspacePoint::new(2.5, 0.0, 0.5)) < 0.2, "{p:?}");
    }

    #[test]
    fn hand_evaluated_configuration() {
        let m = illustrative();
        let p = forward(&m, &JointConfig::new(0.2, -0.3, -1.9));
        assert!((p.x - 2.48).abs() < 0.01, "{p:?}");
        assert!((p.y - 0.08).abs() < 0.01, "{p:?}");
        assert!((p.z - 0.45).abs() < 0.01, "{p:?}");
    }

    #[test]
    fn cross_section_examples() {
        let c = cross_section(&WorkspacePoint::new(3.0, 4.0, 1.0));
        assert_relative_eq!(c.rho, 5.0);
        assert_relative_eq!(c.z, 1.0);
        let c = cross_section(&WorkspacePoint::new(0.0, 0.0, 2.0));
        assert_relative_eq!(c.rho, 0.0);
        assert_relative_eq!(c.z, 2.0);
    }

    #[test]
    fn jacobian_first_column_is_z_rotation() {
        let m = illustrative();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let q = JointConfig::new(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            let p = forward(&m, &q);
            let j = jacobian(&m, &q);
            assert_relative_eq!(j[(0, 0)], -p.y, epsilon = 1e-12);
            assert_relative_eq!(j[(1, 0)], p.x, epsilon = 1e-12);
            assert_relative_eq!(j[(2, 0)], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = illustrative();
        let q = JointConfig::new(0.3, 0.5, 0.7);
        let j = jacobian(&m, &q);
        let jf = fd_jacobian(&m, &q, 1e-5);
        let scale = j.norm();
        assert!((j - jf).norm() / scale < 1e-6, "rel err {}", (j - jf).norm() / scale);
    }

    #[test]
    fn det_independent_of_theta1() {
        let m = illustrative();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let t1 = rng.gen_range(-PI..PI);
            let t2 = rng.gen_range(-PI..PI);
            let t3 = rng.gen_range(-PI..PI);
            let d0 = det_jacobian(&m, &JointConfig::new(0.0, t2, t3));
            let d1 = det_jacobian(&m, &JointConfig::new(t1, t2, t3));
            assert!((d0 - d1).abs() < 1e-9, "theta1 dependence: {d0} vs {d1}");
        }
    }

    #[test]
    fn reduced_form_times_a3_equals_full_determinant() {
        let m = illustrative();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let t2 = rng.gen_range(-PI..PI);
            let t3 = rng.gen_range(-PI..PI);
            let red = det_jacobian_reduced(&m, t2, t3);
            let full = det_jacobian(&m, &JointConfig::new(0.0, t2, t3));
            assert_relative_eq!(full, m.params.a3 * red, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn reduced_form_value_from_spec_point() {
        // (theta2, theta3) = (0.5, 0.7): product form ~ 3.4737, full det ~ 5.2105
        let m = illustrative();
        let red = det_jacobian_reduced(&m, 0.5, 0.7);
        assert!((red - 3.4737).abs() < 1e-3, "red = {red}");
        let full = det_jacobian(&m, &JointConfig::new(0.0, 0.5, 0.7));
        assert!((full - 5.2105).abs() < 1e-3, "full = {full}");
    }

    #[test]
    fn first_factor_never_vanishes_when_a2_gt_a3() {
        // a2 > a3 for the illustrative model: |a2 + c3 a3| >= a2 - a3 > 0
        let m = illustrative();
        let mut min_first = f64::INFINITY;
        for k in 0..=1000 {
            let t3 = -PI + 2.0 * PI * k as f64 / 1000.0;
            let first = m.params.a2 + t3.cos() * m.params.a3;
            min_first = min_first.min(first.abs());
        }
        assert!(min_first >= m.params.a2 - m.params.a3 - 1e-12);
    }

    #[test]
    fn forward_is_2pi_periodic() {
        let m = illustrative();
        let q = JointConfig { theta1: 0.4, theta2: -1.1, theta3: 2.2 };
        let p0 = forward(&m, &q);
        for k in 0..3 {
            let mut arr = q.as_array();
            arr[k] += 2.0 * PI;
            let p1 =
                forward(&m, &JointConfig { theta1: arr[0], theta2: arr[1], theta3: arr[2] });
            assert!(p0.distance(&p1) < 1e-12);
        }
    }
}
