//! Small real-polynomial helpers: evaluation, derivatives, and root finding
//! for degrees up to four (companion-matrix eigenvalues plus Newton polish).
//!
//! Coefficients are stored in ascending order: `c[0] + c[1] t + ... + c[n] t^n`.

use nalgebra::{Matrix2, Matrix3, Matrix4};
use num_complex::Complex64;

/// Horner evaluation, ascending coefficients.
pub fn eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

pub fn eval_complex(coeffs: &[f64], t: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
}

/// Coefficients of the derivative polynomial.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

pub fn max_abs_coeff(coeffs: &[f64]) -> f64 {
    coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
}

/// Effective degree after trimming leading coefficients below
/// `rel_tol * max|c|`.
pub fn effective_degree(coeffs: &[f64], rel_tol: f64) -> usize {
    let norm = max_abs_coeff(coeffs);
    if norm == 0.0 {
        return 0;
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].abs() < rel_tol * norm {
        deg -= 1;
    }
    deg
}

/// All complex roots of a real polynomial of degree <= 4 (after trimming the
/// leading coefficients at relative tolerance `lead_tol`).
pub fn complex_roots(coeffs: &[f64], lead_tol: f64) -> Vec<Complex64> {
    let deg = effective_degree(coeffs, lead_tol);
    let c = &coeffs[..=deg];
    match deg {
        0 => Vec::new(),
        1 => vec![Complex64::new(-c[0] / c[1], 0.0)],
        2 => quadratic_roots(c[0], c[1], c[2]),
        3 => {
            let m = Matrix3::new(
                0.0,
                0.0,
                -c[0] / c[3],
                1.0,
                0.0,
                -c[1] / c[3],
                0.0,
                1.0,
                -c[2] / c[3],
            );
            m.complex_eigenvalues().iter().copied().collect()
        }
        4 => {
            let m = Matrix4::new(
                0.0,
                0.0,
                0.0,
                -c[0] / c[4],
                1.0,
                0.0,
                0.0,
                -c[1] / c[4],
                0.0,
                1.0,
                0.0,
                -c[2] / c[4],
                0.0,
                0.0,
                1.0,
                -c[3] / c[4],
            );
            m.complex_eigenvalues().iter().copied().collect()
        }
        _ => unreachable!("degree above 4"),
    }
}

fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<Complex64> {
    let disc = Complex64::new(c1 * c1 - 4.0 * c2 * c0, 0.0);
    let sq = disc.sqrt();
    // the numerically stable split
    let q = -0.5 * (Complex64::new(c1, 0.0) + Complex64::new(c1.signum(), 0.0) * sq);
    if q.norm() > 0.0 {
        vec![q / c2, Complex64::new(c0, 0.0) / q]
    } else {
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
    }
}

/// Newton-polishes a real root candidate; keeps the best iterate.
pub fn polish_real_root(coeffs: &[f64], t0: f64) -> f64 {
    let d = derivative(coeffs);
    let mut t = t0;
    let mut best = t0;
    let mut best_abs = eval(coeffs, t0).abs();
    for _ in 0..20 {
        let f = eval(coeffs, t);
        let fp = eval(&d, t);
        if fp.abs() < 1e-300 {
            break;
        }
        let step = f / fp;
        t -= step;
        let fa = eval(coeffs, t).abs();
        if fa < best_abs {
            best_abs = fa;
            best = t;
        }
        if step.abs() < 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    best
}

/// Real roots of a degree <= 4 polynomial, polished, deduplicated at
/// `dedup_tol`, sorted ascending. A root is taken as real when its imaginary
/// part is below `imag_tol * (1 + |re|)`.
pub fn real_roots(coeffs: &[f64], lead_tol: f64, imag_tol: f64, dedup_tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for r in complex_roots(coeffs, lead_tol) {
        if r.im.abs() <= imag_tol * (1.0 + r.re.abs()) {
            let t = polish_real_root(coeffs, r.re);
            if !out.iter().any(|&u| (u - t).abs() <= dedup_tol * (1.0 + t.abs())) {
                out.push(t);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
