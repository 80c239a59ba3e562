//! Classical Gauss rules on `[-1, 1]`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::spectra::{symtridiag_eigs_first_components, SymTridiag};

/// Gauss–Legendre nodes (ascending) and weights for `int_{-1}^{1} f dx`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let k = (i + 1) as f64;
        let theta = PI * (k - 0.25) / (nf + 0.5);
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Chebyshev nodes (ascending) for the probability measure
/// `dx / (pi sqrt(1 - x^2))`; every weight is `1/n`.
pub fn gauss_chebyshev(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let nf = n as f64;
    let x = (1..=n)
        .rev()
        .map(|k| ((2 * k - 1) as f64 * PI / (2.0 * nf)).cos())
        .collect();
    (x, vec![1.0 / nf; n])
}

/// Recurrence coefficients `(b_k, a_{k+1})` of the Jacobi weight
/// `(1-x)^alpha (1+x)^beta`, `k = 0..n-1`.
pub fn jacobi_recurrence(alpha: f64, beta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let mut b = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        b.push(if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        });
        let k1 = kf + 1.0;
        let s1 = 2.0 * k1 + ab;
        let a2 = if k == 0 {
            4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0).powi(2) * (ab + 3.0))
        } else {
            4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab)
                / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0))
        };
        a.push(a2.sqrt());
    }
    (b, a)
}

/// Gauss–Jacobi nodes (ascending) and weights for the normalized Jacobi
/// probability measure, by Golub–Welsch.
pub fn gauss_jacobi(alpha: f64, beta: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert!(n >= 1);
    let (b, a) = jacobi_recurrence(alpha, beta, n);
    let t = SymTridiag::new(b, a[..n - 1].to_vec())?;
    symtridiag_eigs_first_components(&t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in [1usize, 2, 5, 16, 64, 301] {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for d in 0..(2 * n).min(40) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} d={d}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn two_point_legendre() {
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_rule_fourth_moment() {
        let (x, w) = gauss_chebyshev(7);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((q - 0.375).abs() < 1e-15);
    }

    #[test]
    fn jacobi_rule_matches_legendre_and_chebyshev() {
        let (x, w) = gauss_jacobi(0.0, 0.0, 9).unwrap();
        let (xl, wl) = gauss_legendre(9);
        for i in 0..9 {
            assert!((x[i] - xl[i]).abs() < 1e-14);
            assert!((w[i] - wl[i] / 2.0).abs() < 1e-14);
        }
        let (x, w) = gauss_jacobi(-0.5, -0.5, 9).unwrap();
        let (xc, wc) = gauss_chebyshev(9);
        for i in 0..9 {
            assert!((x[i] - xc[i]).abs() < 1e-14);
            assert!((w[i] - wc[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobi_one_one_second_moment() {
        // int x^2 (1-x^2) dx / int (1-x^2) dx = (4/15)/(4/3)
        let (x, w) = gauss_jacobi(1.0, 1.0, 6).unwrap();
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((q - 0.2).abs() < 1e-14);
    }
}
