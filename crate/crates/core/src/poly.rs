use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex polynomial in the power basis, lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCoeffs {
    coeffs: Vec<Complex64>,
}

impl PolynomialCoeffs {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        Self { coeffs }
    }

    pub fn monomial(n: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        Self { coeffs: c }
    }

    /// `prod (z - r)` over the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |c_k| |z|^k`, the natural scale for rounding errors in `eval`.
    pub fn abs_eval(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Reversed, conjugated coefficients: `z^n conj(p(1/conj z))`.
    pub fn reversed_conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    /// Power sums `sum_j z_j^l`, `l = 0..=max_l`, over the roots, computed
    /// from the coefficients by Newton's identities.
    pub fn power_sums(&self, max_l: usize) -> Vec<Complex64> {
        let n = self.degree();
        let lead = self.leading();
        // monic: z^n + a[n-1] z^{n-1} + ... + a[0]
        let a: Vec<Complex64> = self.coeffs.iter().map(|&c| c / lead).collect();
        let mut p = vec![Complex64::new(0.0, 0.0); max_l + 1];
        p[0] = Complex64::new(n as f64, 0.0);
        for k in 1..=max_l {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 1..=(k - 1).min(n) {
                s += a[n - i] * p[k - i];
            }
            if k <= n {
                s += a[n - k] * k as f64;
            }
            p[k] = -s;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn from_roots_expands() {
        let p = PolynomialCoeffs::from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(p.coeffs(), &[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn power_sums_match_direct_sums() {
        let roots = [c(0.5, 0.1), c(-0.3, 0.7), c(0.9, -0.2), c(0.0, 0.0)];
        let p = PolynomialCoeffs::from_roots(&roots);
        let sums = p.power_sums(9);
        for (l, s) in sums.iter().enumerate() {
            let direct: Complex64 = roots.iter().map(|r| r.powu(l as u32)).sum();
            assert!((s - direct).norm() < 1e-12, "l={l}: {s} vs {direct}");
        }
    }

    #[test]
    fn reversed_conj_of_monomial_is_one() {
        let p = PolynomialCoeffs::monomial(3).reversed_conj();
        assert_eq!(p.eval(c(0.3, 0.2)), c(1.0, 0.0));
    }
}
