//! Orthogonal polynomials on the real line.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Domain, DiscretizedMeasure};
use crate::spectra::{symtridiag_eigs, symtridiag_eigs_first_components, SymTridiag};
use crate::sum::{sum_with, Precision};

pub const BREAKDOWN_TOL: f64 = 1e-13;
pub const ORTHOGONALITY_TOL: f64 = 1e-8;
const OVERFLOW: f64 = 1e280;

/// Jacobi parameters of a measure on the line, enough to evaluate
/// `p_0, ..., p_n` and to form the `(n+1) x (n+1)` Jacobi matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiCoefficients {
    /// Total mass `mu(R)`.
    pub mass: f64,
    /// `a_1, ..., a_n`.
    pub a: Vec<f64>,
    /// `b_0, ..., b_n`.
    pub b: Vec<f64>,
    /// `||P_0||, ..., ||P_n||` for the monic polynomials, computed directly
    /// from the quadrature.
    pub norm_p: Vec<f64>,
}

impl JacobiCoefficients {
    /// Coefficients given directly; `b` must be one longer than `a`.
    pub fn new(mass: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "need one more b than a (got {} and {})",
                b.len(),
                a.len()
            )));
        }
        if !(mass > 0.0) || a.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument("mass and every a_k must be positive".into()));
        }
        let mut norm_p = vec![mass.sqrt()];
        for &ak in &a {
            let last = *norm_p.last().unwrap();
            norm_p.push(last * ak);
        }
        Ok(Self { mass, a, b, norm_p })
    }

    /// Highest degree `n` for which `p_n` is available.
    pub fn degree(&self) -> usize {
        self.a.len()
    }

    /// `sqrt(mass) * a_1 ... a_k`.
    pub fn norm_product(&self, k: usize) -> f64 {
        (0.5 * self.mass.ln() + self.a[..k].iter().map(|a| a.ln()).sum::<f64>()).exp()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.degree() {
            return Err(Error::InvalidArgument(format!(
                "degree {n} requested but coefficients only reach {}",
                self.degree()
            )));
        }
        Ok(())
    }

    /// Leading `k x k` block of the Jacobi matrix.
    pub fn jacobi_matrix(&self, k: usize) -> Result<SymTridiag> {
        if k == 0 || k > self.b.len() {
            return Err(Error::InvalidArgument(format!(
                "Jacobi matrix of size {k} not available (max {})",
                self.b.len()
            )));
        }
        SymTridiag::new(self.b[..k].to_vec(), self.a[..k - 1].to_vec())
    }
}

/// Discretized Stieltjes procedure.
pub fn jacobi_from_measure(m: &DiscretizedMeasure, n: usize) -> Result<JacobiCoefficients> {
    if m.domain() != Domain::RealLine {
        return Err(Error::WrongDomain {
            expected: "real-line",
        });
    }
    m.check_degree(n)?;
    let x = m.nodes();
    let w = m.weights();
    let prec = m.precision();
    let mass = m.mass();
    let dot = |u: &[f64], v: &[f64]| sum_with(prec, (0..x.len()).map(|i| w[i] * u[i] * v[i]));
    let breakdown = BREAKDOWN_TOL * mass;

    let mut values: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n + 1);
    values.push(vec![1.0 / mass.sqrt(); x.len()]);
    for k in 0..=n {
        let pk = &values[k];
        let xp: Vec<f64> = pk.iter().zip(x).map(|(p, x)| p * x).collect();
        let bk = dot(&xp, pk);
        b.push(bk);
        if k == n {
            break;
        }
        let mut q: Vec<f64> = xp.iter().zip(pk).map(|(xp, p)| xp - bk * p).collect();
        if k > 0 {
            let ak = a[k - 1];
            for (qi, pi) in q.iter_mut().zip(&values[k - 1]) {
                *qi -= ak * pi;
            }
        }
        let ak1 = dot(&q, &q).sqrt();
        if !(ak1 > breakdown) {
            return Err(Error::Breakdown {
                index: k + 1,
                value: ak1,
            });
        }
        q.iter_mut().for_each(|v| *v /= ak1);
        a.push(ak1);
        values.push(q);
    }

    let mut drift: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=i {
            let g = dot(&values[i], &values[j]);
            let target = if i == j { 1.0 } else { 0.0 };
            drift = drift.max((g - target).abs());
        }
    }
    if drift > ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalityDrift {
            drift,
            tolerance: ORTHOGONALITY_TOL,
        });
    }

    // monic norms straight from the quadrature
    let mut norm_p = Vec::with_capacity(n + 1);
    let mut prev = vec![0.0; x.len()];
    let mut cur = vec![1.0; x.len()];
    for k in 0..=n {
        norm_p.push(dot(&cur, &cur).sqrt());
        if k == n {
            break;
        }
        let a2 = if k == 0 { 0.0 } else { a[k - 1] * a[k - 1] };
        let next: Vec<f64> = (0..x.len())
            .map(|i| (x[i] - b[k]) * cur[i] - a2 * prev[i])
            .collect();
        prev = cur;
        cur = next;
    }
    Ok(JacobiCoefficients { mass, a, b, norm_p })
}

/// `p_0(x), ..., p_n(x)` by the three-term recurrence.
pub fn eval_orthonormal(c: &JacobiCoefficients, x: f64, n: usize) -> Result<Vec<f64>> {
    c.check(n)?;
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0 / c.mass.sqrt());
    for k in 0..n {
        let prev = if k == 0 { 0.0 } else { c.a[k - 1] * p[k - 1] };
        let next = ((x - c.b[k]) * p[k] - prev) / c.a[k];
        if !(next.abs() <= OVERFLOW) {
            return Err(Error::Overflow { x });
        }
        p.push(next);
    }
    Ok(p)
}

/// Values `K_n(x, x)` at a set of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDiagonal {
    pub degree: usize,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

impl KernelDiagonal {
    /// `lambda_n = 1 / K_n` at every point.
    pub fn christoffel(&self) -> Vec<f64> {
        self.values.iter().map(|k| 1.0 / k).collect()
    }
}

pub fn cd_kernel_diag(c: &JacobiCoefficients, points: &[f64], n: usize) -> Result<KernelDiagonal> {
    let values = points
        .iter()
        .map(|&x| Ok(sum_squares(&eval_orthonormal(c, x, n)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(KernelDiagonal {
        degree: n,
        points: points.to_vec(),
        values,
    })
}

/// `K_n(x, x)` at every node of a discretized measure.
pub fn kernel_at_nodes(c: &JacobiCoefficients, m: &DiscretizedMeasure, n: usize) -> Result<Vec<f64>> {
    Ok(cd_kernel_diag(c, m.nodes(), n)?.values)
}

fn sum_squares(p: &[f64]) -> f64 {
    sum_with(Precision::High, p.iter().map(|v| v * v))
}

/// Christoffel function `lambda_n(x) = 1 / K_n(x, x)`.
pub fn christoffel(c: &JacobiCoefficients, x: f64, n: usize) -> Result<f64> {
    Ok(1.0 / sum_squares(&eval_orthonormal(c, x, n)?))
}

/// The extremal polynomial `Q(x) = K_n(x0, x) / K_n(x0, x0)`.
#[derive(Debug, Clone)]
pub struct Minimizer {
    coefficients: JacobiCoefficients,
    degree: usize,
    /// `p_j(x0) / K_n(x0, x0)`: coordinates in the orthonormal basis.
    basis_coeffs: Vec<f64>,
}

impl Minimizer {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let p = eval_orthonormal(&self.coefficients, x, self.degree)?;
        Ok(p.iter().zip(&self.basis_coeffs).map(|(p, c)| p * c).sum())
    }

    /// `int |Q|^2 dmu` by quadrature.
    pub fn norm_sq(&self, m: &DiscretizedMeasure) -> Result<f64> {
        let mut acc = Vec::with_capacity(m.len());
        for (&x, &w) in m.nodes().iter().zip(m.weights()) {
            let q = self.eval(x)?;
            acc.push(w * q * q);
        }
        Ok(sum_with(Precision::High, acc))
    }

    /// `int |Q|^2 dmu` from orthonormality.
    pub fn norm_sq_exact(&self) -> f64 {
        sum_squares(&self.basis_coeffs)
    }
}

pub fn minimizer_polynomial(c: &JacobiCoefficients, x0: f64, n: usize) -> Result<Minimizer> {
    let p = eval_orthonormal(c, x0, n)?;
    let k = sum_squares(&p);
    if !(k > 0.0) {
        return Err(Error::Precondition("K_n(x0, x0) must be positive".into()));
    }
    Ok(Minimizer {
        coefficients: c.clone(),
        degree: n,
        basis_coeffs: p.iter().map(|v| v / k).collect(),
    })
}

/// Uniform probability measure on finitely many points of the line (or
/// angles on the circle), repeated according to multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingMeasure {
    pub domain: Domain,
    /// Sorted locations, or angles in `[0, 2pi)`.
    pub atoms: Vec<f64>,
}

impl CountingMeasure {
    pub fn new(domain: Domain, mut atoms: Vec<f64>) -> Self {
        atoms.sort_by(f64::total_cmp);
        Self { domain, atoms }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom_weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    /// `nu((-inf, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.atoms.partition_point(|&a| a <= t) as f64 / self.atoms.len() as f64
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.atoms
            .iter()
            .map(|&t| match self.domain {
                Domain::RealLine => Complex64::new(t, 0.0),
                Domain::UnitCircle => Complex64::from_polar(1.0, t),
            })
            .collect()
    }

    /// `int z^l dnu` for `l = 0..=max_l`.
    pub fn power_moments(&self, max_l: usize) -> Vec<Complex64> {
        let w = self.atom_weight();
        let mut out = vec![Complex64::new(0.0, 0.0); max_l + 1];
        for z in self.points() {
            let mut zl = Complex64::new(w, 0.0);
            for v in out.iter_mut() {
                *v += zl;
                zl *= z;
            }
        }
        out
    }
}

/// Zeros of `p_{n+1}`: the eigenvalues of the `(n+1) x (n+1)` Jacobi matrix.
pub fn zeros(c: &JacobiCoefficients, n: usize) -> Result<CountingMeasure> {
    let t = c.jacobi_matrix(n + 1)?;
    Ok(CountingMeasure {
        domain: Domain::RealLine,
        atoms: symtridiag_eigs(&t)?,
    })
}

/// `n`-point Gauss rule: nodes are the zeros of `p_n`, weights are
/// `lambda_{n-1}` at the nodes.
pub fn gauss_quadrature(c: &JacobiCoefficients, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss rule needs n >= 1".into()));
    }
    let t = c.jacobi_matrix(n)?;
    let (x, v) = symtridiag_eigs_first_components(&t)?;
    Ok((x, v.into_iter().map(|v| v * c.mass).collect()))
}

/// `(a_1 ... a_n)^{1/n}`.
pub fn geometric_mean_a(c: &JacobiCoefficients, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("geometric mean needs n >= 1".into()));
    }
    c.check(n)?;
    Ok((c.a[..n].iter().map(|a| a.ln()).sum::<f64>() / n as f64).exp())
}

/// True when `inner` strictly interlaces `outer` (one fewer point, each
/// inner point between consecutive outer points).
pub fn interlaces(inner: &[f64], outer: &[f64]) -> bool {
    outer.len() == inner.len() + 1
        && inner
            .iter()
            .enumerate()
            .all(|(i, &x)| outer[i] < x && x < outer[i + 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{discretize, parse_measure};
    use std::f64::consts::PI;

    fn coeffs(text: &str, m: usize, n: usize) -> JacobiCoefficients {
        let d = discretize(&parse_measure(text).unwrap(), m).unwrap();
        jacobi_from_measure(&d, n).unwrap()
    }

    #[test]
    fn chebyshev_coefficients() {
        let c = coeffs("chebyshev", 64, 5);
        assert!((c.a[0] - 0.5f64.sqrt()).abs() < 1e-10);
        for k in 1..5 {
            assert!((c.a[k] - 0.5).abs() < 1e-10);
        }
        assert!(c.b.iter().all(|b| b.abs() < 1e-10));
    }

    #[test]
    fn single_atom_breaks_down() {
        let d = discretize(&parse_measure("delta(0)").unwrap(), 16).unwrap();
        assert!(matches!(jacobi_from_measure(&d, 1), Err(Error::Breakdown { index: 1, .. })));
    }

    #[test]
    fn degree_cap_enforced() {
        let d = discretize(&parse_measure("legendre").unwrap(), 40).unwrap();
        assert!(matches!(jacobi_from_measure(&d, 11), Err(Error::DegreeCap { .. })));
    }

    #[test]
    fn chebyshev_values_at_one() {
        let c = coeffs("chebyshev", 64, 6);
        let p = eval_orthonormal(&c, 1.0, 6).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        for v in &p[1..] {
            assert!((v - 2f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn legendre_p2_at_zero() {
        let c = coeffs("legendre", 64, 2);
        let p = eval_orthonormal(&c, 0.0, 2).unwrap();
        assert!((p[2] + 5f64.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn chebyshev_kernel_and_christoffel_at_zero() {
        let c = coeffs("chebyshev", 64, 4);
        let k = cd_kernel_diag(&c, &[0.0], 4).unwrap();
        assert!((k.values[0] - 5.0).abs() < 1e-9);
        assert!((christoffel(&c, 0.0, 4).unwrap() - 0.2).abs() < 1e-10);
        let q = minimizer_polynomial(&c, 0.0, 4).unwrap();
        assert!((q.eval(0.0).unwrap() - 1.0).abs() < 1e-12);
        let d = discretize(&parse_measure("chebyshev").unwrap(), 64).unwrap();
        assert!((q.norm_sq(&d).unwrap() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn overflow_far_outside() {
        let c = coeffs("legendre", 800, 150);
        assert!(matches!(eval_orthonormal(&c, 1e6, 150), Err(Error::Overflow { .. })));
    }

    #[test]
    fn chebyshev_zeros() {
        let c = coeffs("chebyshev", 64, 4);
        let z = zeros(&c, 4).unwrap();
        for (k, &x) in z.atoms.iter().enumerate() {
            let expected = ((2 * (5 - k) - 1) as f64 * PI / 10.0).cos();
            assert!((x - expected).abs() < 1e-10);
        }
        let z0 = zeros(&c, 0).unwrap();
        assert_eq!(z0.atoms, vec![c.b[0]]);
    }

    #[test]
    fn free_jacobi_zeros() {
        let n = 6;
        let c = JacobiCoefficients::new(1.0, vec![0.5; n], vec![0.0; n + 1]).unwrap();
        let z = zeros(&c, n).unwrap();
        for (i, &x) in z.atoms.iter().enumerate() {
            let k = n + 1 - i;
            let expected = (k as f64 * PI / (n as f64 + 2.0)).cos();
            assert!((x - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn legendre_two_point_gauss() {
        let c = coeffs("legendre", 64, 2);
        let (x, w) = gauss_quadrature(&c, 2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-12 && (x[1] - r).abs() < 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        for (&xj, &wj) in x.iter().zip(&w) {
            assert!((christoffel(&c, xj, 1).unwrap() - wj).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_means() {
        let c = coeffs("chebyshev", 400, 50);
        let g = geometric_mean_a(&c, 50).unwrap();
        // a_1 = 1/sqrt(2) exceeds 1/2, so the mean sits just above 1/2
        assert!((g - 0.5 * 2f64.powf(1.0 / 100.0)).abs() < 1e-10);
        let flat = JacobiCoefficients::new(1.0, vec![0.3; 7], vec![0.0; 8]).unwrap();
        assert!((geometric_mean_a(&flat, 7).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn counting_measure_cdf() {
        let nu = CountingMeasure::new(Domain::RealLine, vec![0.5, -0.5, 0.0, 0.25]);
        assert_eq!(nu.cdf(-1.0), 0.0);
        assert_eq!(nu.cdf(0.0), 0.5);
        assert_eq!(nu.cdf(1.0), 1.0);
    }
}
