//! Inverse kinematics of the orthogonal family via the quartic in
//! `t = tan(theta3/2)`.
//!
//! Eliminating `theta1, theta2` from the position chain of an orthogonal
//! manipulator (`|cos a1| = |cos a2| = 0`, `a1 > 0`) leaves
//!
//! ```text
//! Q(c3, s3) = K^2 - 4 a1^2 (R - v^2)
//! K = R + Z + a1^2 - d3^2 - (a2^2 + a3^2 + d2^2) - 2 a2 a3 c3 - 2 sg2 d2 a3 s3
//! v = sg2 a3 s3 + d2,     R = x^2 + y^2,   Z = z^2
//! ```
//!
//! whose real zeros on the circle biject with the IK solutions (`K = 2 a1 x2`
//! recovers the second-frame position). The Weierstrass substitution turns
//! `Q` into the quartic `P(t)`; `theta3 = pi` (the substitution's blind spot)
//! is tested separately. Multiple roots are detected at the zeros of the
//! derivative polynomials so that double and triple solutions survive the
//! floating-point splitting of the root cluster.

use crate::kinematics::{chain_stage2, forward, WorkspacePoint};
use crate::model::{JointConfig, Manipulator};
use crate::poly;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Relative threshold below which the quartic's leading coefficient is
/// treated as zero (root at infinity, i.e. `theta3 = pi`).
pub const LEAD_TOL: f64 = 1e-10;
/// Cluster tolerance on `t` for merging near-equal polished roots.
pub const TOL_CLUSTER: f64 = 1e-6;
/// Relative threshold for the derivative-site multiplicity tests.
const MULT_TOL: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum IkError {
    #[error("model is not orthogonal; the quartic elimination does not apply")]
    NotOrthogonal,
    #[error("a1 = 0: the elimination divides by a1")]
    ZeroA1,
    #[error("degenerate branch: u^2 + d3^2 vanishes for every root")]
    DegenerateBranch,
}

/// Squared-radius / squared-height query `(R, Z)` with the sign of `z`
/// retained for back-substitution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IkQuery {
    pub r2: f64,
    pub z2: f64,
    pub z_sign: i8,
}

impl IkQuery {
    pub fn from_point(p: &WorkspacePoint) -> Self {
        Self {
            r2: p.x * p.x + p.y * p.y,
            z2: p.z * p.z,
            z_sign: if p.z > 0.0 {
                1
            } else if p.z < 0.0 {
                -1
            } else {
                0
            },
        }
    }
}

/// One inverse kinematic solution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IkSolution {
    pub config: JointConfig,
    /// 1 for a simple solution, 2/3/4 when solutions coincide there.
    pub multiplicity: u8,
    /// `|forward(config) - target|`.
    pub residual: f64,
    /// theta1 is indeterminate (target on the first joint axis); the
    /// canonical `theta1 = 0` representative is returned.
    pub free_theta1: bool,
    /// Root parameter `t = tan(theta3/2)` (infinite at `theta3 = pi`).
    pub t: f64,
}

/// Solution count with the multiplicity profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IkCount {
    pub distinct: usize,
    /// Multiplicities sorted descending; sums to at most 4.
    pub multiplicities: Vec<u8>,
}

impl IkCount {
    pub fn total(&self) -> usize {
        self.multiplicities.iter().map(|&m| m as usize).sum()
    }
}

/// Precomputed elimination constants of an orthogonal model.
pub(crate) struct OrthoElim {
    a1: f64,
    a2: f64,
    a3: f64,
    d2: f64,
    d3: f64,
    sg1: f64,
    sg2: f64,
    /// `a1^2 - d3^2 - (a2^2 + a3^2 + d2^2)`
    k_const: f64,
}

impl OrthoElim {
    pub(crate) fn new(m: &Manipulator) -> Result<Self, IkError> {
        if !m.orthogonal {
            return Err(IkError::NotOrthogonal);
        }
        if m.params.a1 <= 0.0 {
            return Err(IkError::ZeroA1);
        }
        let p = &m.params;
        Ok(Self {
            a1: p.a1,
            a2: p.a2,
            a3: p.a3,
            d2: p.d2,
            d3: p.d3,
            sg1: m.sigma1(),
            sg2: m.sigma2(),
            k_const: p.a1 * p.a1
                - p.d3 * p.d3
                - (p.a2 * p.a2 + p.a3 * p.a3 + p.d2 * p.d2),
        })
    }

    pub(crate) fn k_value(&self, c3: f64, s3: f64, sum_rz: f64) -> f64 {
        sum_rz + self.k_const - 2.0 * self.a2 * self.a3 * c3 - 2.0 * self.sg2 * self.d2 * self.a3 * s3
    }

    pub(crate) fn v_value(&self, s3: f64) -> f64 {
        self.sg2 * self.a3 * s3 + self.d2
    }

    /// `Q(theta3)` on the circle for a given `(R, Z)`.
    pub(crate) fn q_value(&self, theta3: f64, r2: f64, z2: f64) -> f64 {
        let (s3, c3) = theta3.sin_cos();
        let k = self.k_value(c3, s3, r2 + z2);
        let v = self.v_value(s3);
        k * k - 4.0 * self.a1 * self.a1 * (r2 - v * v)
    }

    /// Ascending coefficients of `P(t) = Q(c3(t), s3(t)) (1 + t^2)^2`.
    pub(crate) fn quartic(&self, r2: f64, z2: f64) -> [f64; 5] {
        let kap0 = r2 + z2 + self.k_const;
        // K(t) (1+t^2) = k2 t^2 + k1 t + k0
        let k2 = kap0 + 2.0 * self.a2 * self.a3;
        let k1 = -4.0 * self.sg2 * self.d2 * self.a3;
        let k0 = kap0 - 2.0 * self.a2 * self.a3;
        // v(t) (1+t^2) = v2 t^2 + v1 t + v0
        let v2 = self.d2;
        let v1 = 2.0 * self.sg2 * self.a3;
        let v0 = self.d2;
        let fa = 4.0 * self.a1 * self.a1;
        // squares of the two quadratics, ascending
        let sq = |a: f64, b: f64, c: f64| [c * c, 2.0 * b * c, b * b + 2.0 * a * c, 2.0 * a * b, a * a];
        let ks = sq(k2, k1, k0);
        let vs = sq(v2, v1, v0);
        let one = [1.0, 0.0, 2.0, 0.0, 1.0]; // (1+t^2)^2
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = ks[i] - fa * r2 * one[i] + fa * vs[i];
        }
        out
    }

    /// Back-substitutes one `theta3` root into a full configuration.
    /// Returns `None` when the branch is degenerate (`u^2 + d3^2 ~ 0`).
    fn back_substitute(
        &self,
        target: &WorkspacePoint,
        theta3: f64,
    ) -> Option<(JointConfig, bool)> {
        let (s3, c3) = theta3.sin_cos();
        let r2 = target.x * target.x + target.y * target.y;
        let z2 = target.z * target.z;
        let u = self.a2 + self.a3 * c3;
        let v = self.v_value(s3);
        let w = self.sg2 * self.d3;
        let den = u * u + self.d3 * self.d3;
        let scale = self.a1 + self.a2 + self.a3 + self.d2.abs() + self.d3.abs();
        if den < 1e-12 * scale * scale {
            return None;
        }
        let k = self.k_value(c3, s3, r2 + z2);
        let x2 = k / (2.0 * self.a1);
        let y2 = -self.sg1 * v;
        let sz = self.sg1 * target.z;
        let c2 = ((x2 - self.a1) * u - w * sz) / den;
        let s2 = (u * sz + w * (x2 - self.a1)) / den;
        let theta2 = s2.atan2(c2);
        let rxy2 = x2 * x2 + y2 * y2;
        let (theta1, free_theta1) = if rxy2 < (1e-9 * scale) * (1e-9 * scale) {
            (0.0, true)
        } else {
            let c1 = (target.x * x2 + target.y * y2) / rxy2;
            let s1 = (target.y * x2 - target.x * y2) / rxy2;
            (s1.atan2(c1), false)
        };
        Some((JointConfig::new(theta1, theta2, theta3), free_theta1))
    }
}

/// Coefficients of the inverse kinematic quartic for a squared-coordinate
/// query, ascending in `t = tan(theta3/2)`.
pub fn quartic_coefficients(m: &Manipulator, query: &IkQuery) -> Result<[f64; 5], IkError> {
    Ok(OrthoElim::new(m)?.quartic(query.r2, query.z2))
}

/// Solution-acceptance tolerance: `1e-8` times the model's length scale.
pub fn ik_tolerance(m: &Manipulator) -> f64 {
    1e-8 * m.length_scale()
}

fn push_candidate(
    out: &mut Vec<IkSolution>,
    elim: &OrthoElim,
    m: &Manipulator,
    target: &WorkspacePoint,
    theta3: f64,
    t: f64,
    multiplicity: u8,
    tol: f64,
) -> bool {
    if let Some((config, free_theta1)) = elim.back_substitute(target, theta3) {
        let residual = forward(m, &config).distance(target);
        if residual < tol {
            out.push(IkSolution { config, multiplicity, residual, free_theta1, t });
            return true;
        }
    }
    false
}

/// All inverse kinematic solutions at a workspace point, with multiplicities.
///
/// Solutions are ordered by `theta3`. Double/triple/quadruple solutions are
/// located at the real zeros of `P'`, `P''`, `P'''` respectively and verified
/// by the smallness of the lower derivatives relative to the coefficient
/// norm; the nearby simple roots they absorb are removed.
pub fn solve_ik(m: &Manipulator, target: &WorkspacePoint) -> Result<Vec<IkSolution>, IkError> {
    let elim = OrthoElim::new(m)?;
    let query = IkQuery::from_point(target);
    let p = elim.quartic(query.r2, query.z2);
    let norm = poly::max_abs_coeff(&p);
    let tol = ik_tolerance(m);
    let tol_mult = 10.0 * tol;
    let mut out: Vec<IkSolution> = Vec::new();

    if norm == 0.0 {
        // Q vanishes identically: only possible in degenerate geometries.
        return Err(IkError::DegenerateBranch);
    }

    let deg = poly::effective_degree(&p, LEAD_TOL);
    let pw: Vec<f64> = p[..=deg].to_vec();
    let d1 = poly::derivative(&pw);
    let d2 = poly::derivative(&d1);
    let d3 = poly::derivative(&d2);

    // scale of |P^{(j)}| near argument tau
    let pscale = |tau: f64, j: u32| norm * (1.0 + tau * tau).powf((4 - j) as f64 / 2.0);

    let mut simple = poly::real_roots(&pw, LEAD_TOL, 1e-7, TOL_CLUSTER);

    // theta3 = pi escape: leading coefficient of the full quartic ~ 0
    let mut pi_root = false;
    if p[4].abs() < LEAD_TOL * norm && deg < 4 {
        pi_root = true;
    }

    let mut degenerate_seen = false;
    let mut consumed = 0usize;

    // quadruple site
    let mut handled_all = false;
    if deg == 4 {
        if d3.len() == 2 && d3[1].abs() > 0.0 {
            let tau = -d3[0] / d3[1];
            if poly::eval(&pw, tau).abs() < MULT_TOL * pscale(tau, 0)
                && poly::eval(&d1, tau).abs() < MULT_TOL * pscale(tau, 1)
                && poly::eval(&d2, tau).abs() < MULT_TOL * pscale(tau, 2)
            {
                let theta3 = 2.0 * tau.atan();
                if push_candidate(&mut out, &elim, m, target, theta3, tau, 4, tol_mult) {
                    handled_all = true;
                } else {
                    degenerate_seen = true;
                }
            }
        }
    }

    if !handled_all {
        // triple sites: real roots of P''
        let mut triple_at: Option<f64> = None;
        if deg >= 3 {
            for tau in poly::real_roots(&d2, 1e-12, 1e-7, 1e-9) {
                if poly::eval(&pw, tau).abs() < MULT_TOL * pscale(tau, 0)
                    && poly::eval(&d1, tau).abs() < MULT_TOL * pscale(tau, 1)
                {
                    let theta3 = 2.0 * tau.atan();
                    if push_candidate(&mut out, &elim, m, target, theta3, tau, 3, tol_mult) {
                        triple_at = Some(tau);
                        consumed += 3;
                        break;
                    } else {
                        degenerate_seen = true;
                    }
                }
            }
        }
        let absorb_radius = |tau: f64| 1e-2 * (1.0 + tau.abs());
        if let Some(tau) = triple_at {
            simple.retain(|&t| (t - tau).abs() > absorb_radius(tau));
        }

        // double sites: real roots of P'
        if deg >= 2 {
            for tau in poly::real_roots(&d1, 1e-12, 1e-7, 1e-9) {
                if let Some(t3) = triple_at {
                    if (tau - t3).abs() <= absorb_radius(t3) {
                        continue;
                    }
                }
                if consumed + 2 > 4 {
                    break;
                }
                if poly::eval(&pw, tau).abs() < MULT_TOL * pscale(tau, 0) {
                    let theta3 = 2.0 * tau.atan();
                    if push_candidate(&mut out, &elim, m, target, theta3, tau, 2, tol_mult) {
                        consumed += 2;
                        simple.retain(|&t| (t - tau).abs() > absorb_radius(tau));
                    } else {
                        degenerate_seen = true;
                    }
                }
            }
        }

        // remaining simple roots
        for t in simple {
            if consumed >= 4 {
                break;
            }
            let theta3 = 2.0 * t.atan();
            if push_candidate(&mut out, &elim, m, target, theta3, t, 1, tol) {
                consumed += 1;
            } else {
                degenerate_seen = true;
            }
        }

        if pi_root && consumed < 4 {
            // verify Q(theta3 = pi) directly before accepting
            let q_pi = elim.q_value(PI, query.r2, query.z2);
            let qnorm = norm; // P and Q share the coefficient scale at t=0..1
            if q_pi.abs() < 1e-6 * qnorm
                && push_candidate(&mut out, &elim, m, target, PI, f64::INFINITY, 1, tol)
            {
                // accepted
            } else if q_pi.abs() < 1e-6 * qnorm {
                degenerate_seen = true;
            }
        }
    }

    if out.is_empty() && degenerate_seen {
        return Err(IkError::DegenerateBranch);
    }

    out.sort_by(|a, b| a.config.theta3.partial_cmp(&b.config.theta3).unwrap());
    Ok(out)
}

/// Distinct-solution count and multiplicity profile at a workspace point.
pub fn count_ik(m: &Manipulator, target: &WorkspacePoint) -> Result<IkCount, IkError> {
    let sols = solve_ik(m, target)?;
    let mut mult: Vec<u8> = sols.iter().map(|s| s.multiplicity).collect();
    mult.sort_unstable_by(|a, b| b.cmp(a));
    Ok(IkCount { distinct: sols.len(), multiplicities: mult })
}

/// Number of real roots of the quartic at a squared-coordinate query; the
/// cheap region-counting primitive used by the classification rasters.
pub fn real_solution_count(m: &Manipulator, r2: f64, z2: f64) -> Result<usize, IkError> {
    let elim = OrthoElim::new(m)?;
    let p = elim.quartic(r2, z2);
    let norm = poly::max_abs_coeff(&p);
    if norm == 0.0 {
        return Ok(0);
    }
    let mut n = poly::real_roots(&p, LEAD_TOL, 1e-7, TOL_CLUSTER).len();
    if p[4].abs() < LEAD_TOL * norm {
        // root at infinity: theta3 = pi
        n += 1;
    }
    Ok(n)
}

/// Internal access for the singularity module's cusp polishing: `Q` and its
/// first three `theta3`-derivatives plus the partials in `(R, Z)`.
pub(crate) fn q_system(
    m: &Manipulator,
    theta3: f64,
    r2: f64,
    z2: f64,
) -> Result<([f64; 3], [[f64; 3]; 3]), IkError> {
    let e = OrthoElim::new(m)?;
    let (s3, c3) = theta3.sin_cos();
    let k = e.k_value(c3, s3, r2 + z2);
    let k1 = 2.0 * e.a2 * e.a3 * s3 - 2.0 * e.sg2 * e.d2 * e.a3 * c3;
    let k2 = 2.0 * e.a2 * e.a3 * c3 + 2.0 * e.sg2 * e.d2 * e.a3 * s3;
    let k3 = -k1;
    let v = e.v_value(s3);
    let v1 = e.sg2 * e.a3 * c3;
    let v2 = -e.sg2 * e.a3 * s3;
    let v3 = -v1;
    let fa = 4.0 * e.a1 * e.a1;
    let q = k * k - fa * (r2 - v * v);
    let q1 = 2.0 * k * k1 + 2.0 * fa * v * v1;
    let q2 = 2.0 * k1 * k1 + 2.0 * k * k2 + 2.0 * fa * (v1 * v1 + v * v2);
    let q3 = 6.0 * k1 * k2 + 2.0 * k * k3 + 2.0 * fa * (3.0 * v1 * v2 + v * v3);
    let f = [q, q1, q2];
    let jac = [
        [q1, 2.0 * k - fa, 2.0 * k],
        [q2, 2.0 * k1, 2.0 * k1],
        [q3, 2.0 * k2, 2.0 * k2],
    ];
    Ok((f, jac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::illustrative;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn four_solutions_at_published_point() {
        let m = illustrative();
        let sols = solve_ik(&m, &WorkspacePoint::new(2.5, 0.0, 0.5)).unwrap();
        assert_eq!(sols.len(), 4);
        for s in &sols {
            assert!(s.residual < 1e-10);
            assert_eq!(s.multiplicity, 1);
        }
        // exact solutions under this chain (the printed values round these
        // with ~0.05 noise): theta3 ascending
        let expect = [
            (-2.8852, -2.9964, -0.2465),
            (0.1727, -0.3294, -1.8784 + 2.0 * PI - 2.0 * PI), // keep raw
            (-1.7800, -2.8236, 1.8412),
            (-0.8634, -0.6750, 2.4980),
        ];
        let mut got: Vec<[f64; 3]> = sols.iter().map(|s| s.config.as_array()).collect();
        got.sort_by(|a, b| a[2].partial_cmp(&b[2]).unwrap());
        let mut exp: Vec<[f64; 3]> =
            expect.iter().map(|&(a, b, c)| [a, b, c]).collect();
        exp.sort_by(|a, b| a[2].partial_cmp(&b[2]).unwrap());
        for (g, e) in got.iter().zip(exp.iter()) {
            for k in 0..3 {
                assert!((g[k] - e[k]).abs() < 2e-3, "{g:?} vs {e:?}");
            }
        }
    }

    #[test]
    fn unreachable_point_has_no_solutions() {
        let m = illustrative();
        let sols = solve_ik(&m, &WorkspacePoint::new(100.0, 0.0, 0.0)).unwrap();
        assert!(sols.is_empty());
    }

    #[test]
    fn coefficients_depend_on_z_through_square() {
        let m = illustrative();
        let a = quartic_coefficients(&m, &IkQuery { r2: 5.0, z2: 1.44, z_sign: 1 }).unwrap();
        let b = quartic_coefficients(&m, &IkQuery { r2: 5.0, z2: 1.44, z_sign: -1 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn roundtrip_random_configs() {
        let m = illustrative();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut tested = 0;
        for _ in 0..1000 {
            let q = JointConfig::new(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            // stay away from the singular set so the root structure is stable
            if crate::kinematics::det_jacobian_reduced(&m, q.theta2, q.theta3).abs() < 1e-3 {
                continue;
            }
            tested += 1;
            let p = forward(&m, &q);
            let sols = solve_ik(&m, &p).unwrap();
            let hit = sols.iter().any(|s| s.config.torus_distance(&q) < 1e-9);
            assert!(hit, "round trip missed {q:?}; got {sols:?}");
        }
        assert!(tested > 900);
    }

    #[test]
    fn z_mirror_symmetry_of_counts() {
        let m = illustrative();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = rng.gen_range(0.0..4.5);
            let z = rng.gen_range(0.0..3.0);
            let up = count_ik(&m, &WorkspacePoint::new(x, 0.0, z)).unwrap();
            let dn = count_ik(&m, &WorkspacePoint::new(x, 0.0, -z)).unwrap();
            assert_eq!(up, dn);
        }
    }

    #[test]
    fn theta1_rotation_invariance_of_counts() {
        let m = illustrative();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let r = rng.gen_range(0.5..4.0);
            let z = rng.gen_range(-2.0..2.0);
            let ang: f64 = rng.gen_range(-PI..PI);
            let a = count_ik(&m, &WorkspacePoint::new(r, 0.0, z)).unwrap();
            let b = count_ik(&m, &WorkspacePoint::new(r * ang.cos(), r * ang.sin(), z)).unwrap();
            assert_eq!(a.distinct, b.distinct);
        }
    }

    #[test]
    fn non_orthogonal_rejected() {
        let m = crate::model::Manipulator::validate(crate::model::DhParams::new(
            1.0, 2.0, 1.5, 1.0, 0.0, -1.0, 1.5,
        ))
        .unwrap();
        assert_eq!(
            solve_ik(&m, &WorkspacePoint::new(1.0, 0.0, 0.0)).unwrap_err(),
            IkError::NotOrthogonal
        );
    }

    #[test]
    fn a1_zero_rejected() {
        let m = crate::model::Manipulator::validate(crate::model::DhParams::new(
            0.0,
            2.0,
            1.5,
            1.0,
            0.0,
            -PI / 2.0,
            PI / 2.0,
        ))
        .unwrap();
        assert_eq!(
            solve_ik(&m, &WorkspacePoint::new(1.0, 0.0, 0.0)).unwrap_err(),
            IkError::ZeroA1
        );
    }

    #[test]
    fn multiplicity_sums_to_at_most_four() {
        let m = illustrative();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let x = rng.gen_range(0.0..5.0);
            let z = rng.gen_range(-3.0..3.0);
            let c = count_ik(&m, &WorkspacePoint::new(x, 0.0, z)).unwrap();
            assert!(c.total() <= 4, "{c:?} at ({x},{z})");
        }
    }
}
