//! Symmetric tridiagonal eigenvalues, polynomial roots and trace moments.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscretizedMeasure;
use crate::poly::PolynomialCoeffs;

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::InvalidArgument(format!(
                "off-diagonal length {} does not match diagonal length {}",
                off_diagonal.len(),
                diagonal.len()
            )));
        }
        if diagonal.iter().chain(&off_diagonal).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(Self {
            diagonal,
            off_diagonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diagonal[i].abs();
                if i > 0 {
                    s += self.off_diagonal[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off_diagonal[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diagonal[i];
            if i + 1 < n {
                m[i][i + 1] = self.off_diagonal[i];
                m[i + 1][i] = self.off_diagonal[i];
            }
        }
        m
    }
}

const QL_MAX_SWEEPS: usize = 60;

/// Implicit QL with Wilkinson-type shifts. When `first_row` is given it must
/// hold the first row of the accumulated eigenvector matrix (initially
/// `e_0`) and is rotated along.
fn implicit_ql(d: &mut [f64], e_in: &[f64], mut first_row: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(e_in);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::NonConvergence {
                    what: format!("tridiagonal QL at eigenvalue index {l} (of {n})"),
                    iterations: QL_MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = first_row.as_deref_mut() {
                    let f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues in ascending order.
pub fn symtridiag_eigs(t: &SymTridiag) -> Result<Vec<f64>> {
    let mut d = t.diagonal.clone();
    implicit_ql(&mut d, &t.off_diagonal, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) together with the squared first components of
/// the normalized eigenvectors: the Gauss nodes and weights of the
/// probability measure whose Jacobi matrix is `t`.
pub fn symtridiag_eigs_first_components(t: &SymTridiag) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = t.dim();
    let mut d = t.diagonal.clone();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    implicit_ql(&mut d, &t.off_diagonal, Some(&mut z))?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok((
        idx.iter().map(|&i| d[i]).collect(),
        idx.iter().map(|&i| z[i] * z[i]).collect(),
    ))
}

/// Residual `||(T - lambda) v|| / ||v||` for the eigenvector obtained by
/// three steps of inverse iteration at `lambda`.
pub fn inverse_iteration_residual(t: &SymTridiag, lambda: f64) -> f64 {
    let n = t.dim();
    if n == 1 {
        return (t.diagonal[0] - lambda).abs();
    }
    let scale = t.norm_inf().max(f64::MIN_POSITIVE);
    let shift = lambda + 4.0 * f64::EPSILON * scale;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..3 {
        v = tridiagonal_solve(t, shift, &v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut res = 0.0;
    for i in 0..n {
        let mut r = (t.diagonal[i] - lambda) * v[i];
        if i > 0 {
            r += t.off_diagonal[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            r += t.off_diagonal[i] * v[i + 1];
        }
        res += r * r;
    }
    res.sqrt() / norm
}

/// Solve `(T - shift) x = rhs` by Gaussian elimination with partial pivoting.
fn tridiagonal_solve(t: &SymTridiag, shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = t.dim();
    // rows stored as (sub, diag, sup, sup2) after pivoting
    let mut dl: Vec<f64> = t.off_diagonal.clone();
    let mut d: Vec<f64> = t.diagonal.iter().map(|x| x - shift).collect();
    let mut du: Vec<f64> = t.off_diagonal.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut b = rhs.to_vec();
    let tiny = f64::EPSILON * t.norm_inf().max(f64::MIN_POSITIVE);
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            let tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - f * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    x
}

/// `sum_k lambda_k^l`, the trace of `T^l`.
pub fn trace_moment_matrix(t: &SymTridiag, l: u32) -> Result<f64> {
    Ok(symtridiag_eigs(t)?.iter().map(|x| x.powi(l as i32)).sum())
}

/// Trace of the `l`-th power by dense matrix multiplication.
pub fn trace_power_dense(t: &SymTridiag, l: u32) -> f64 {
    let a = t.to_dense();
    let n = a.len();
    let mut p = vec![vec![0.0; n]; n];
    for (i, row) in p.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..l {
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if p[i][k] == 0.0 {
                    continue;
                }
                for j in k.saturating_sub(1)..(k + 2).min(n) {
                    q[i][j] += p[i][k] * a[k][j];
                }
            }
        }
        p = q;
    }
    (0..n).map(|i| p[i][i]).sum()
}

/// `P (T^l) P - (P T P)^l` where `P` projects onto the first `k`
/// coordinates; `t` must have size at least `k + l`.
pub fn compression_defect(t: &SymTridiag, k: usize, l: u32) -> Result<DMatrix<f64>> {
    if k == 0 || t.dim() < k + l as usize {
        return Err(Error::InvalidArgument(format!(
            "need a matrix of size >= {} (got {})",
            k + l as usize,
            t.dim()
        )));
    }
    let n = t.dim();
    let rows = t.to_dense();
    let big = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let small = big.view((0, 0), (k, k)).into_owned();
    let mut pb = DMatrix::<f64>::identity(n, n);
    let mut ps = DMatrix::<f64>::identity(k, k);
    for _ in 0..l {
        pb = &pb * &big;
        ps = &ps * &small;
    }
    Ok(pb.view((0, 0), (k, k)).into_owned() - ps)
}

/// Number of singular values above `rel_tol * sigma_max`, with the
/// singular values in decreasing order.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> (usize, Vec<f64>) {
    let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let cut = rel_tol * sv.first().copied().unwrap_or(0.0);
    (sv.iter().filter(|&&s| s > cut).count(), sv)
}

/// `int z^l K_n(z,z) dmu(z)` from kernel-diagonal values at the nodes of a
/// discretized measure (the trace of `Q_n M_z^l Q_n`).
pub fn trace_moment_kernel(m: &DiscretizedMeasure, kernel_diag: &[f64], l: u32) -> Complex64 {
    assert_eq!(kernel_diag.len(), m.len(), "kernel values must cover every node");
    m.points()
        .zip(m.weights())
        .zip(kernel_diag)
        .map(|((z, &w), &k)| z.powu(l) * (w * k))
        .sum()
}

/// Roots of a polynomial, with multiplicity, plus diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// `|p(root)|` for the monic normalization.
    pub residuals: Vec<f64>,
    /// Groups of roots closer than [`CLUSTER_TOL`]: (centre, multiplicity).
    pub clusters: Vec<(Complex64, usize)>,
    pub converged: bool,
}

pub const CLUSTER_TOL: f64 = 1e-6;
const ABERTH_MAX_ITER: usize = 500;
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Aberth–Ehrlich simultaneous iteration followed by Newton polishing.
pub fn poly_roots(p: &PolynomialCoeffs) -> Result<RootSet> {
    let lead = p.leading();
    if lead.norm() == 0.0 {
        return Err(Error::InvalidArgument("leading coefficient is zero".into()));
    }
    let n = p.degree();
    if n > 256 {
        return Err(Error::InvalidArgument(format!("degree {n} exceeds 256")));
    }
    let monic = PolynomialCoeffs::new(p.coeffs().iter().map(|c| c / lead).collect());
    if n == 0 {
        return Ok(RootSet {
            roots: vec![],
            residuals: vec![],
            clusters: vec![],
            converged: true,
        });
    }

    // Fujiwara-style root scale
    let c = monic.coeffs();
    let scale = (1..=n)
        .map(|k| c[n - k].norm().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        .max(1.0);
    let radius = (1.0 + 1.0 / n as f64) * scale;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 0.4 + GOLDEN_ANGLE * k as f64))
        .collect();
    let mut done = vec![false; n];
    let mut converged = false;
    for _ in 0..ABERTH_MAX_ITER {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (pv, dpv) = monic.eval_with_derivative(z[k]);
            let bound = 8.0 * f64::EPSILON * monic.abs_eval(z[k].norm());
            if pv.norm() <= bound {
                done[k] = true;
                continue;
            }
            let ratio = pv / dpv;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff.norm() > 0.0 {
                        sum += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * sum;
            let step = if denom.norm() > 0.0 && dpv.norm() > 0.0 {
                ratio / denom
            } else {
                Complex64::from_polar(1e-3 * radius, k as f64)
            };
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[k] -= step;
            if step.norm() <= f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            converged = true;
            break;
        }
    }

    // Newton polish; clustered roots are left alone
    for k in 0..n {
        for _ in 0..2 {
            let (pv, dpv) = monic.eval_with_derivative(z[k]);
            if dpv.norm() == 0.0 {
                break;
            }
            let step = pv / dpv;
            let nearest = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[j] - z[k]).norm())
                .fold(f64::INFINITY, f64::min);
            if step.norm() < 0.1 * nearest && step.re.is_finite() && step.im.is_finite() {
                let candidate = z[k] - step;
                if monic.eval(candidate).norm() <= pv.norm() {
                    z[k] = candidate;
                }
            }
        }
    }

    let residuals = z.iter().map(|&r| monic.eval(r).norm()).collect();
    Ok(RootSet {
        clusters: find_clusters(&z),
        roots: z,
        residuals,
        converged,
    })
}

fn find_clusters(z: &[Complex64]) -> Vec<(Complex64, usize)> {
    let n = z.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn root(g: &mut [usize], mut i: usize) -> usize {
        while g[i] != i {
            g[i] = g[g[i]];
            i = g[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() < CLUSTER_TOL {
                let (a, b) = (root(&mut group, i), root(&mut group, j));
                group[a] = b;
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let r = root(&mut group, i);
        match out.iter_mut().find(|(id, _, _)| *id == r) {
            Some(entry) => {
                entry.1 += z[i];
                entry.2 += 1;
            }
            None => out.push((r, z[i], 1)),
        }
    }
    out.into_iter()
        .filter(|(_, _, m)| *m > 1)
        .map(|(_, s, m)| (s / m as f64, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn free(n: usize) -> SymTridiag {
        SymTridiag::new(vec![0.0; n], vec![0.5; n - 1]).unwrap()
    }

    #[test]
    fn two_by_two_closed_form() {
        let t = SymTridiag::new(vec![0.0, 0.0], vec![0.5f64.sqrt()]).unwrap();
        let ev = symtridiag_eigs(&t).unwrap();
        let r = 0.5f64.sqrt();
        assert!((ev[0] + r).abs() < 1e-15 && (ev[1] - r).abs() < 1e-15);
    }

    #[test]
    fn one_by_one() {
        let t = SymTridiag::new(vec![0.7], vec![]).unwrap();
        assert_eq!(symtridiag_eigs(&t).unwrap(), vec![0.7]);
    }

    #[test]
    fn free_jacobi_spectrum() {
        for n in [3usize, 10, 57] {
            let ev = symtridiag_eigs(&free(n)).unwrap();
            let mut expected: Vec<f64> =
                (1..=n).map(|k| (k as f64 * PI / (n as f64 + 1.0)).cos()).collect();
            expected.sort_by(f64::total_cmp);
            for (a, b) in ev.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-13, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn first_components_sum_to_one() {
        let t = SymTridiag::new(vec![0.1, -0.3, 0.2, 0.0], vec![0.4, 0.6, 0.3]).unwrap();
        let (_, w) = symtridiag_eigs_first_components(&t).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_iteration_spot_checks() {
        let t = SymTridiag::new(
            (0..40).map(|i| (i as f64 * 0.37).sin()).collect(),
            (0..39).map(|i| 0.3 + 0.2 * (i as f64 * 0.11).cos()).collect(),
        )
        .unwrap();
        let ev = symtridiag_eigs(&t).unwrap();
        let scale = t.norm_inf();
        for &i in &[0usize, 7, 19, 31, 39] {
            let r = inverse_iteration_residual(&t, ev[i]);
            assert!(r <= 1e-10 * scale, "index {i}: residual {r}");
        }
    }

    #[test]
    fn trace_moments_of_free_matrix() {
        let t = free(8);
        assert!((trace_moment_matrix(&t, 0).unwrap() - 8.0).abs() < 1e-12);
        assert!(trace_moment_matrix(&t, 1).unwrap().abs() < 1e-12);
        assert!((trace_moment_matrix(&t, 2).unwrap() - 3.5).abs() < 1e-12);
        for l in 0..=20 {
            let a = trace_moment_matrix(&t, l).unwrap();
            let b = trace_power_dense(&t, l);
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300) + 1e-14, "l={l}");
        }
    }

    #[test]
    fn roots_of_unity() {
        let p = PolynomialCoeffs::from_roots(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ]);
        let rs = poly_roots(&p).unwrap();
        assert!(rs.converged);
        for target in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
            let t = Complex64::new(target.0, target.1);
            let best = rs.roots.iter().map(|r| (r - t).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-14, "{t}: {best}");
        }
    }

    #[test]
    fn double_root_within_relaxed_tolerance() {
        let half = Complex64::new(0.5, 0.0);
        let rs = poly_roots(&PolynomialCoeffs::from_roots(&[half, half])).unwrap();
        for r in &rs.roots {
            assert!((r - half).norm() < 1e-6, "{r}");
        }
        assert_eq!(rs.clusters.len(), 1);
        assert_eq!(rs.clusters[0].1, 2);
    }

    #[test]
    fn compression_defect_has_rank_at_most_l() {
        let t = SymTridiag::new(vec![0.1, -0.2, 0.3, 0.0, 0.2, -0.1, 0.05, 0.0], vec![0.5, 0.4, 0.6, 0.5, 0.45, 0.5, 0.55]).unwrap();
        for l in 1..=3u32 {
            let d = compression_defect(&t, 5, l).unwrap();
            let (rank, sv) = numerical_rank(&d, 1e-12);
            assert!(rank <= l as usize, "l={l}: {sv:?}");
        }
        assert!(compression_defect(&t, 5, 1).unwrap().iter().all(|v| *v == 0.0));
    }
}
