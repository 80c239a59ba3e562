//! Orthogonal polynomials on the unit circle.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{DiscretizedMeasure, Domain};
use crate::oprl::{CountingMeasure, KernelDiagonal, ORTHOGONALITY_TOL};
use crate::poly::PolynomialCoeffs;
use crate::spectra::{poly_roots, RootSet};
use crate::sum::{Accumulator, Precision};

/// Largest `n` for which POPUC zeros are taken from the coefficient form.
pub const COEFFICIENT_ROOT_CAP: usize = 64;
pub const UNIMODULARITY_TOL: f64 = 1e-8;
const EXHAUSTION_TOL: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerblunskyCoefficients {
    /// Total mass `mu(dD)`.
    pub mass: f64,
    /// `alpha_0, ..., alpha_{n-1}`.
    pub alpha: Vec<Complex64>,
    /// `rho_j = sqrt(1 - |alpha_j|^2)`.
    pub rho: Vec<f64>,
    /// `||Phi_0||, ..., ||Phi_n||` computed from the quadrature.
    pub monic_norms: Vec<f64>,
}

impl VerblunskyCoefficients {
    pub fn new(mass: f64, alpha: Vec<Complex64>) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidArgument("mass must be positive".into()));
        }
        if alpha.iter().any(|a| !(a.norm() < 1.0)) {
            return Err(Error::InvalidArgument("Verblunsky coefficients need |alpha| < 1".into()));
        }
        let rho: Vec<f64> = alpha.iter().map(|a| rho_of(*a)).collect();
        let mut monic_norms = vec![mass.sqrt()];
        for r in &rho {
            let last = *monic_norms.last().unwrap();
            monic_norms.push(last * r);
        }
        Ok(Self {
            mass,
            alpha,
            rho,
            monic_norms,
        })
    }

    pub fn degree(&self) -> usize {
        self.alpha.len()
    }

    /// `sqrt(mass) * rho_0 ... rho_{k-1}`.
    pub fn norm_product(&self, k: usize) -> f64 {
        (0.5 * self.mass.ln() + self.rho[..k].iter().map(|r| r.ln()).sum::<f64>()).exp()
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
}

fn rho_of(a: Complex64) -> f64 {
    // (1 - |a|)(1 + |a|) keeps precision when |a| is near 1
    let r = a.norm();
    ((1.0 - r) * (1.0 + r)).sqrt()
}

fn cdot(prec: Precision, w: &[f64], f: &[Complex64], g: &[Complex64]) -> Complex64 {
    let mut re = Accumulator::new(prec);
    let mut im = Accumulator::new(prec);
    for i in 0..w.len() {
        let v = f[i].conj() * g[i] * w[i];
        re.add(v.re);
        im.add(v.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Szegő recursion run against the quadrature, refreshing norms each step.
pub fn verblunsky_from_measure(m: &DiscretizedMeasure, n: usize) -> Result<VerblunskyCoefficients> {
    if m.domain() != Domain::UnitCircle {
        return Err(Error::WrongDomain {
            expected: "unit-circle",
        });
    }
    m.check_degree(n)?;
    let w = m.weights();
    let prec = m.precision();
    let z: Vec<Complex64> = m.points().collect();
    let mass = m.mass();
    let mut phi = vec![ONE; z.len()];
    let mut star = vec![ONE; z.len()];
    let mut alpha = Vec::with_capacity(n);
    let mut monic_norms = vec![mass.sqrt()];
    let mut orthonormal: Vec<Vec<Complex64>> = vec![phi.iter().map(|v| v / mass.sqrt()).collect()];
    for k in 0..n {
        let norm2 = monic_norms[k] * monic_norms[k];
        let zphi: Vec<Complex64> = phi.iter().zip(&z).map(|(p, z)| p * z).collect();
        let alpha_bar = cdot(prec, w, &star, &zphi) / norm2;
        let a = alpha_bar.conj();
        if !(a.norm() < 1.0 - EXHAUSTION_TOL) {
            return Err(Error::Breakdown {
                index: k,
                value: 1.0 - a.norm(),
            });
        }
        let next: Vec<Complex64> = zphi.iter().zip(&star).map(|(zp, s)| zp - alpha_bar * s).collect();
        let next_star: Vec<Complex64> = star.iter().zip(&zphi).map(|(s, zp)| s - a * zp).collect();
        phi = next;
        star = next_star;
        alpha.push(a);
        let norm = cdot(prec, w, &phi, &phi).re.sqrt();
        if !(norm > EXHAUSTION_TOL * mass.sqrt()) {
            return Err(Error::Breakdown {
                index: k + 1,
                value: norm,
            });
        }
        monic_norms.push(norm);
        orthonormal.push(phi.iter().map(|v| v / norm).collect());
    }

    let mut drift: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=i {
            let g = cdot(prec, w, &orthonormal[i], &orthonormal[j]);
            let target = if i == j { ONE } else { ZERO };
            drift = drift.max((g - target).norm());
        }
    }
    if drift > ORTHOGONALITY_TOL {
        return Err(Error::OrthogonalityDrift {
            drift,
            tolerance: ORTHOGONALITY_TOL,
        });
    }
    let rho = alpha.iter().map(|a| rho_of(*a)).collect();
    Ok(VerblunskyCoefficients {
        mass,
        alpha,
        rho,
        monic_norms,
    })
}

/// `(Phi_n(z), Phi_n^*(z), phi_n(z))`.
pub fn szego_eval(v: &VerblunskyCoefficients, z: Complex64, n: usize) -> Result<(Complex64, Complex64, Complex64)> {
    v.check(n)?;
    let (phi, star) = szego_pair(&v.alpha[..n], z);
    Ok((phi, star, phi / v.norm_product(n)))
}

fn szego_pair(alpha: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let (mut phi, mut star) = (ONE, ONE);
    for a in alpha {
        let zphi = z * phi;
        phi = zphi - a.conj() * star;
        star -= a * zphi;
    }
    (phi, star)
}

/// Coefficients of `Phi_n` and `Phi_n^*`.
pub fn monic_coefficients(v: &VerblunskyCoefficients, n: usize) -> Result<(PolynomialCoeffs, PolynomialCoeffs)> {
    v.check(n)?;
    let mut phi = vec![ONE];
    let mut star = vec![ONE];
    for a in &v.alpha[..n] {
        let k = phi.len();
        let mut next = vec![ZERO; k + 1];
        let mut next_star = vec![ZERO; k + 1];
        for j in 0..k {
            next[j + 1] += phi[j];
            next[j] -= a.conj() * star[j];
            next_star[j] += star[j];
            next_star[j + 1] -= a * phi[j];
        }
        phi = next;
        star = next_star;
    }
    Ok((PolynomialCoeffs::new(phi), PolynomialCoeffs::new(star)))
}

/// `K_n(e^{i theta}, e^{i theta}) = sum_{j <= n} |phi_j|^2`.
pub fn opuc_kernel_diag(v: &VerblunskyCoefficients, thetas: &[f64], n: usize) -> Result<KernelDiagonal> {
    v.check(n)?;
    let norms: Vec<f64> = (0..=n).map(|k| v.norm_product(k)).collect();
    let values = thetas
        .iter()
        .map(|&t| {
            let z = Complex64::from_polar(1.0, t);
            let (mut phi, mut star) = (ONE, ONE);
            let mut acc = Accumulator::new(Precision::High);
            acc.add(1.0 / (norms[0] * norms[0]));
            for (k, a) in v.alpha[..n].iter().enumerate() {
                let zphi = z * phi;
                phi = zphi - a.conj() * star;
                star -= a * zphi;
                acc.add(phi.norm_sqr() / (norms[k + 1] * norms[k + 1]));
            }
            acc.value()
        })
        .collect();
    Ok(KernelDiagonal {
        degree: n,
        points: thetas.to_vec(),
        values,
    })
}

/// `K_n` at every node of a circle measure.
pub fn kernel_at_nodes(v: &VerblunskyCoefficients, m: &DiscretizedMeasure, n: usize) -> Result<Vec<f64>> {
    Ok(opuc_kernel_diag(v, m.nodes(), n)?.values)
}

fn check_unimodular(beta: Complex64) -> Result<()> {
    if (beta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("beta = {beta} is not unimodular")));
    }
    Ok(())
}

/// Paraorthogonal polynomial `P_{n+1}(z, beta) = z Phi_n(z) - conj(beta) Phi_n^*(z)`.
pub fn popuc(v: &VerblunskyCoefficients, n: usize, beta: Complex64) -> Result<PolynomialCoeffs> {
    check_unimodular(beta)?;
    let (phi, star) = monic_coefficients(v, n)?;
    let mut c = vec![ZERO; n + 2];
    for (j, p) in phi.coeffs().iter().enumerate() {
        c[j + 1] += p;
    }
    for (j, s) in star.coeffs().iter().enumerate() {
        c[j] -= beta.conj() * s;
    }
    Ok(PolynomialCoeffs::new(c))
}

/// Zeros of a POPUC in coefficient form, as angles.
pub fn popuc_zeros(p: &PolynomialCoeffs) -> Result<CountingMeasure> {
    let roots = poly_roots(p)?;
    if !roots.converged {
        return Err(Error::NonConvergence {
            what: "POPUC root finder".into(),
            iterations: 500,
        });
    }
    let deviation = roots
        .roots
        .iter()
        .map(|r| (r.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if deviation > UNIMODULARITY_TOL {
        return Err(Error::Unimodularity { deviation });
    }
    Ok(CountingMeasure::new(
        Domain::UnitCircle,
        roots.roots.iter().map(|r| r.arg().rem_euclid(TAU)).collect(),
    ))
}

/// POPUC zeros from the recursion alone: the points where the Blaschke
/// product `e^{i theta} Phi_n / Phi_n^*` equals `conj(beta)`, located by
/// phase tracking and bisection.
pub fn popuc_zeros_angular(v: &VerblunskyCoefficients, n: usize, beta: Complex64) -> Result<CountingMeasure> {
    check_unimodular(beta)?;
    v.check(n)?;
    let alpha = &v.alpha[..n];
    let target = beta.conj();
    // phase of b(theta) / target, in (-pi, pi]
    let phase = |t: f64| -> f64 {
        let z = Complex64::from_polar(1.0, t);
        let (phi, star) = szego_pair(alpha, z);
        (z * phi / (star * target)).arg()
    };
    let count = n + 1;
    let grid = 64 * count;
    let h = TAU / grid as f64;
    let mut zeros = Vec::with_capacity(count);
    // keep the grid ends away from a zero
    let start = (0..8)
        .map(|j| h * j as f64 / 8.0)
        .find(|&t| phase(t).abs() > 1e-3)
        .unwrap_or(0.0);
    let mut stack: Vec<(f64, f64, f64, f64)> = Vec::new();
    for k in 0..grid {
        let (t0, t1) = (start + h * k as f64, start + h * (k + 1) as f64);
        stack.push((t0, phase(t0), t1, phase(t1)));
        while let Some((a, pa, b, pb)) = stack.pop() {
            let step = wrap(pb - pa);
            // a step is trusted once it is short and its phase change small
            if (step < 0.0 || step > 0.5 * PI) && b - a > 1e-14 {
                let mid = 0.5 * (a + b);
                let pm = phase(mid);
                stack.push((mid, pm, b, pb));
                stack.push((a, pa, mid, pm));
                continue;
            }
            // a zero lies where the unwrapped phase passes through 0 mod 2pi
            let crosses = pa < 0.0 && pa + step > 0.0 || pa == 0.0;
            if crosses {
                zeros.push(bisect_phase(&phase, a, pa, b));
            }
        }
    }
    if zeros.len() != count {
        return Err(Error::NonConvergence {
            what: format!("angular POPUC search found {} of {count} zeros", zeros.len()),
            iterations: grid,
        });
    }
    Ok(CountingMeasure::new(Domain::UnitCircle, zeros))
}

fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn bisect_phase<F: Fn(f64) -> f64>(phase: &F, mut a: f64, pa: f64, mut b: f64) -> f64 {
    if pa == 0.0 {
        return a;
    }
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let d = pa + wrap(phase(mid) - pa);
        if d < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    (0.5 * (a + b)).rem_euclid(TAU)
}

/// POPUC zeros by the method suited to the degree: coefficient roots for
/// `n <= 64`, phase tracking beyond (or when precision is lost).
pub fn popuc_zero_measure(v: &VerblunskyCoefficients, n: usize, beta: Complex64) -> Result<CountingMeasure> {
    if n <= COEFFICIENT_ROOT_CAP {
        match popuc_zeros(&popuc(v, n, beta)?) {
            Ok(nu) => return Ok(nu),
            Err(Error::Unimodularity { .. }) | Err(Error::NonConvergence { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    popuc_zeros_angular(v, n, beta)
}

/// Zeros of `Phi_n` (inside the disk).
pub fn opuc_zeros(v: &VerblunskyCoefficients, n: usize) -> Result<RootSet> {
    let (phi, _) = monic_coefficients(v, n)?;
    poly_roots(&phi)
}

/// Zeros of `Phi_n` as the eigenvalues of the `n x n` GGT (Hessenberg)
/// matrix, sorted by argument.
pub fn opuc_zeros_ggt(v: &VerblunskyCoefficients, n: usize) -> Result<Vec<Complex64>> {
    v.check(n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let a = |k: isize| if k < 0 { -ONE } else { v.alpha[k as usize] };
    let g = DMatrix::from_fn(n, n, |k, l| {
        if k <= l {
            let prod: f64 = v.rho[k..l].iter().product();
            -v.alpha[l].conj() * a(k as isize - 1) * prod
        } else if k == l + 1 {
            Complex64::new(v.rho[l], 0.0)
        } else {
            ZERO
        }
    });
    let schur = Schur::try_new(g, 1e-15, 10_000 * n).ok_or_else(|| Error::NonConvergence {
        what: "GGT Schur decomposition".into(),
        iterations: 10_000 * n,
    })?;
    let mut z: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or_else(|| Error::NonConvergence {
            what: "GGT Schur form".into(),
            iterations: 0,
        })?
        .iter()
        .copied()
        .collect();
    z.sort_by(|p, q| p.arg().total_cmp(&q.arg()));
    Ok(z)
}

/// `int |Q_n|^2 dmu` for the Fejér trial polynomial
/// `Q_n(e^{i theta}) = (n+1)^{-1} sum_{j<=n} e^{i j (theta - phi)}`.
pub fn fejer_trial_bound(m: &DiscretizedMeasure, phi: f64, n: usize) -> Result<f64> {
    if m.domain() != Domain::UnitCircle {
        return Err(Error::WrongDomain {
            expected: "unit-circle",
        });
    }
    let np1 = (n + 1) as f64;
    Ok(m.integrate(|t| {
        let x = t - phi;
        let s = (0.5 * x).sin();
        if s.abs() < 1e-6 {
            let q: Complex64 = (0..=n).map(|j| Complex64::from_polar(1.0, j as f64 * x)).sum();
            q.norm_sqr() / (np1 * np1)
        } else {
            let r = (0.5 * np1 * x).sin() / (np1 * s);
            r * r
        }
    }))
}

/// `(rho_0 ... rho_{n-1})^{1/n}`.
pub fn geometric_mean_rho(v: &VerblunskyCoefficients, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("geometric mean needs n >= 1".into()));
    }
    v.check(n)?;
    Ok((v.rho[..n].iter().map(|r| r.ln()).sum::<f64>() / n as f64).exp())
}

/// True when two equally sized angle sets alternate around the circle.
pub fn interlace_on_circle(a: &[f64], b: &[f64]) -> bool {
    if a.len() != b.len() || a.is_empty() {
        return false;
    }
    let mut all: Vec<(f64, bool)> = a.iter().map(|&t| (t.rem_euclid(TAU), true)).collect();
    all.extend(b.iter().map(|&t| (t.rem_euclid(TAU), false)));
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    all.windows(2).all(|p| p[0].1 != p[1].1 && p[0].0 < p[1].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{discretize, parse_measure};

    fn coeffs(text: &str, m: usize, n: usize) -> VerblunskyCoefficients {
        let d = discretize(&parse_measure(text).unwrap(), m).unwrap();
        verblunsky_from_measure(&d, n).unwrap()
    }

    #[test]
    fn lebesgue_has_zero_coefficients() {
        let v = coeffs("lebesgue_circle", 128, 20);
        assert!(v.alpha.iter().all(|a| a.norm() < 1e-14));
        let k = opuc_kernel_diag(&v, &[0.0, 1.0, 2.5], 20).unwrap();
        for val in k.values {
            assert!((val - 21.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bernstein_szego_single_coefficient() {
        let v = coeffs("bernstein_szego(0.5)", 256, 12);
        assert!((v.alpha[0] - Complex64::new(0.5, 0.0)).norm() < 1e-10);
        for a in &v.alpha[1..] {
            assert!(a.norm() < 1e-10);
        }
    }

    #[test]
    fn two_atoms_exhaust() {
        let d = discretize(&parse_measure("circle: 0.5*delta(0.3) + 0.5*delta(2)").unwrap(), 16).unwrap();
        assert!(matches!(verblunsky_from_measure(&d, 3), Err(Error::Breakdown { .. })));
    }

    #[test]
    fn szego_recursion_at_zero_returns_alpha() {
        let v = VerblunskyCoefficients::new(1.0, vec![Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4)]).unwrap();
        let (p2, _, _) = szego_eval(&v, ZERO, 2).unwrap();
        let (_, s1, _) = szego_eval(&v, ZERO, 1).unwrap();
        assert!((p2 + v.alpha[1].conj() * s1).norm() < 1e-15);
    }

    #[test]
    fn star_identity_on_circle() {
        let v = VerblunskyCoefficients::new(1.0, vec![Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4), Complex64::new(0.5, 0.5)]).unwrap();
        let (phi, star) = monic_coefficients(&v, 3).unwrap();
        for t in [0.0, 0.7, 2.0, 4.4] {
            let z = Complex64::from_polar(1.0, t);
            let direct = z.powu(3) * phi.eval(1.0 / z.conj()).conj();
            assert!((direct - star.eval(z)).norm() < 1e-13);
            let (p, s, _) = szego_eval(&v, z, 3).unwrap();
            assert!((p - phi.eval(z)).norm() < 1e-13);
            assert!((p.norm() - s.norm()).abs() < 1e-13);
        }
    }

    #[test]
    fn popuc_of_free_case() {
        let v = VerblunskyCoefficients::new(1.0, vec![ZERO; 5]).unwrap();
        let p = popuc(&v, 5, ONE).unwrap();
        assert_eq!(p.coeffs()[0], -ONE);
        assert_eq!(p.coeffs()[6], ONE);
        let i = Complex64::new(0.0, 1.0);
        let p = popuc(&v, 5, i).unwrap();
        assert_eq!(p.coeffs()[0], -i.conj());
        assert!(popuc(&v, 5, Complex64::new(1.1, 0.0)).is_err());
        let nu = popuc_zeros(&popuc(&v, 5, ONE).unwrap()).unwrap();
        for (k, t) in nu.atoms.iter().enumerate() {
            assert!((t - TAU * k as f64 / 6.0).abs() < 1e-12 || (k == 0 && (t - TAU).abs() < 1e-12));
        }
    }

    #[test]
    fn angular_and_coefficient_zeros_agree() {
        let v = coeffs("bernstein_szego(0.5)", 256, 10);
        let beta = Complex64::from_polar(1.0, 0.9);
        let a = popuc_zeros(&popuc(&v, 10, beta).unwrap()).unwrap();
        let b = popuc_zeros_angular(&v, 10, beta).unwrap();
        assert_eq!(a.len(), 11);
        for (x, y) in a.atoms.iter().zip(&b.atoms) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
        let c = popuc_zeros_angular(&v, 10, ONE).unwrap();
        assert!(interlace_on_circle(&b.atoms, &c.atoms));
    }

    #[test]
    fn fejer_bound_for_lebesgue() {
        let d = discretize(&parse_measure("lebesgue_circle").unwrap(), 128).unwrap();
        for n in [0usize, 3, 10] {
            let f = fejer_trial_bound(&d, 0.4, n).unwrap();
            assert!((f - 1.0 / (n as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_rho_mean() {
        let v = VerblunskyCoefficients::new(1.0, vec![Complex64::new(0.5, 0.0); 9]).unwrap();
        assert!((geometric_mean_rho(&v, 9).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ggt_zeros_match_coefficient_roots() {
        let v = coeffs("bernstein_szego(0.5) + 0.2*delta(1)", 256, 12);
        let mut a = opuc_zeros_ggt(&v, 12).unwrap();
        let mut b = opuc_zeros(&v, 12).unwrap().roots;
        let key = |p: &Complex64, q: &Complex64| p.arg().total_cmp(&q.arg());
        a.sort_by(key);
        b.sort_by(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-8, "{x} vs {y}");
        }
        // a triple zero at the origin is only resolved to about eps^(1/3)
        let v = coeffs("lebesgue_circle", 64, 3);
        assert!(opuc_zeros_ggt(&v, 3).unwrap().iter().all(|z| z.norm() < 1e-4));
    }
}
