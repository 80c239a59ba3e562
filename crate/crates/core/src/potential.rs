//! Equilibrium measures, capacities, logarithmic potentials and balayage.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{integrate_singular, quadrature::gauss_legendre, Interval};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "intervals")]
pub enum Support {
    Intervals(Vec<Interval>),
    FullCircle,
}

/// Equilibrium measure of a finite union of intervals or of the unit circle.
///
/// For `E = [a_0, b_0] u ... u [a_{l-1}, b_{l-1}]` the density is
/// `|q(x)| / (pi sqrt|R(x)|)` with `R = prod (x - a_j)(x - b_j)` and `q` of
/// degree `l - 1`.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumMeasure {
    support: Support,
    /// Coefficients of `q` in powers of `u = (x - center) / scale`.
    #[serde(skip)]
    q_scaled: Vec<f64>,
    #[serde(skip)]
    center: f64,
    #[serde(skip)]
    scale: f64,
    capacity: f64,
    condition_number: Option<f64>,
}

impl EquilibriumMeasure {
    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn intervals(&self) -> &[Interval] {
        match &self.support {
            Support::Intervals(v) => v,
            Support::FullCircle => &[],
        }
    }

    pub fn is_circle(&self) -> bool {
        self.support == Support::FullCircle
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Condition number of the gap system (unions of two or more intervals).
    pub fn condition_number(&self) -> Option<f64> {
        self.condition_number
    }

    /// Endpoints `a_0 < b_0 < a_1 < ... < b_{l-1}`.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals().iter().flat_map(|i| [i.lo, i.hi]).collect()
    }

    /// Coefficients of `q` in powers of `x`, lowest first.
    pub fn gap_polynomial(&self) -> Vec<f64> {
        let n = self.q_scaled.len();
        let mut out = vec![0.0; n];
        // q(x) = sum c_k ((x - center)/scale)^k
        for (k, &c) in self.q_scaled.iter().enumerate() {
            let f = c / self.scale.powi(k as i32);
            let mut binom = 1.0;
            for j in 0..=k {
                out[j] += f * binom * (-self.center).powi((k - j) as i32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }

    fn q(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.scale;
        self.q_scaled.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    /// Sign of `q` on support interval `j`.
    fn sign(&self, j: usize) -> f64 {
        if (self.intervals().len() - 1 - j) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Density with respect to `dx`, or to `dtheta` on the circle.
    pub fn density(&self, x: f64) -> f64 {
        if self.is_circle() {
            return 1.0 / TAU;
        }
        let ends = self.endpoints();
        for (j, iv) in self.intervals().iter().enumerate() {
            if x > iv.lo && x < iv.hi {
                let r: f64 = ends.iter().map(|e| (x - e).abs()).product();
                return self.sign(j) * self.q(x) / (PI * r.sqrt());
            }
        }
        0.0
    }

    /// `rho((-inf, x])`, or `rho([0, theta])` on the circle.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.is_circle() {
            return (x / TAU).clamp(0.0, 1.0);
        }
        let mut total = 0.0;
        for (j, iv) in self.intervals().iter().enumerate() {
            if x >= iv.hi {
                total += self.interval_mass(j, 0.0);
            } else if x > iv.lo {
                let (mid, half) = (0.5 * (iv.lo + iv.hi), 0.5 * iv.len());
                let tx = ((x - mid) / half).clamp(-1.0, 1.0).acos();
                total += self.interval_mass(j, tx);
            }
        }
        total.clamp(0.0, 1.0)
    }

    /// `int_{theta=t_from}^{pi}` of the substituted density on interval `j`,
    /// which is the mass of `[a_j, x(t_from)]`.
    fn interval_mass(&self, j: usize, t_from: f64) -> f64 {
        let iv = self.intervals()[j];
        let others = other_endpoints(&self.endpoints(), iv.lo, iv.hi);
        let s = self.sign(j);
        let g = |t: f64| {
            let x = 0.5 * (iv.lo + iv.hi) + 0.5 * iv.len() * t.cos();
            s * self.q(x) / (PI * others.iter().map(|e| (x - e).abs()).product::<f64>().sqrt())
        };
        composite_gauss(&g, t_from, PI, 16, 32)
    }

    /// Total mass from the density.
    pub fn mass(&self) -> f64 {
        if self.is_circle() {
            return 1.0;
        }
        (0..self.intervals().len()).map(|j| self.interval_mass(j, 0.0)).sum()
    }
}

fn other_endpoints(ends: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    ends.iter().copied().filter(|&e| e != lo && e != hi).collect()
}

fn composite_gauss<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, panels: usize, nodes: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + h * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            total += 0.5 * h * wi * g(mid + 0.5 * h * xi);
        }
    }
    total
}

pub fn equilibrium_interval(a: f64, b: f64) -> Result<EquilibriumMeasure> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("degenerate interval [{a}, {b}]")));
    }
    Ok(EquilibriumMeasure {
        support: Support::Intervals(vec![Interval::new(a, b)]),
        q_scaled: vec![1.0],
        center: 0.5 * (a + b),
        scale: 0.5 * (b - a),
        capacity: 0.25 * (b - a),
        condition_number: None,
    })
}

pub fn equilibrium_circle() -> EquilibriumMeasure {
    EquilibriumMeasure {
        support: Support::FullCircle,
        q_scaled: vec![1.0],
        center: 0.0,
        scale: 1.0,
        capacity: 1.0,
        condition_number: None,
    }
}

/// `int_lo^hi x^k / sqrt|R(x)| dx` for `k < count`, by the substitution
/// `x = mid + half cos t` and the midpoint rule in `t`, doubled until stable.
fn substituted_moments(ends: &[f64], lo: f64, hi: f64, center: f64, scale: f64, count: usize) -> Result<Vec<f64>> {
    let others = other_endpoints(ends, lo, hi);
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let eval = |n: usize| -> Vec<f64> {
        let mut acc = vec![0.0; count];
        let h = PI / n as f64;
        for k in 0..n {
            let x = mid + half * (h * (k as f64 + 0.5)).cos();
            let r: f64 = others.iter().map(|e| (x - e).abs()).product::<f64>().sqrt();
            let u = (x - center) / scale;
            let mut p = h / r;
            for v in acc.iter_mut() {
                *v += p;
                p *= u;
            }
        }
        acc
    };
    let mut n = 64;
    let mut prev = eval(n);
    while n < 1 << 20 {
        n *= 2;
        let next = eval(n);
        let scale_ref = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = next.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff <= 1e-14 * scale_ref {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        what: "gap-system quadrature".into(),
        iterations: n,
    })
}

/// Equilibrium measure of a union of disjoint closed intervals.
pub fn equilibrium_union(intervals: &[Interval]) -> Result<EquilibriumMeasure> {
    if intervals.is_empty() {
        return Err(Error::InvalidArgument("need at least one interval".into()));
    }
    let mut ivs = intervals.to_vec();
    ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for iv in &ivs {
        if !(iv.lo < iv.hi) || !iv.lo.is_finite() || !iv.hi.is_finite() {
            return Err(Error::InvalidArgument(format!("degenerate interval [{}, {}]", iv.lo, iv.hi)));
        }
    }
    for w in ivs.windows(2) {
        if w[1].lo <= w[0].hi {
            return Err(Error::InvalidArgument(format!(
                "intervals [{}, {}] and [{}, {}] overlap",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
    }
    let l = ivs.len();
    if l == 1 {
        return equilibrium_interval(ivs[0].lo, ivs[0].hi);
    }
    let ends: Vec<f64> = ivs.iter().flat_map(|i| [i.lo, i.hi]).collect();
    let (lo, hi) = (ends[0], ends[2 * l - 1]);
    let (center, scale) = (0.5 * (lo + hi), 0.5 * (hi - lo));

    let mut a = DMatrix::<f64>::zeros(l, l);
    let mut rhs = DVector::<f64>::zeros(l);
    for j in 0..l - 1 {
        let g = substituted_moments(&ends, ivs[j].hi, ivs[j + 1].lo, center, scale, l)?;
        for k in 0..l {
            a[(j, k)] = g[k];
        }
    }
    for (j, iv) in ivs.iter().enumerate() {
        let s = if (l - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
        let m = substituted_moments(&ends, iv.lo, iv.hi, center, scale, l)?;
        for k in 0..l {
            a[(l - 1, k)] += s * m[k] / PI;
        }
    }
    rhs[l - 1] = 1.0;
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |m, v| m.max(*v));
    let smin = sv.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let condition = smax / smin;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Precondition(format!("gap system is singular (condition {condition:e})")))?;
    let mut e = EquilibriumMeasure {
        support: Support::Intervals(ivs),
        q_scaled: sol.iter().copied().collect(),
        center,
        scale,
        capacity: f64::NAN,
        condition_number: Some(condition),
    };
    let iv0 = e.intervals()[0];
    let probe = 0.5 * (iv0.lo + iv0.hi);
    e.capacity = log_potential(&e, Complex64::new(probe, 0.0))?.exp();
    Ok(e)
}

/// `int log|z - y| d rho_E(y)`.
pub fn log_potential(e: &EquilibriumMeasure, z: Complex64) -> Result<f64> {
    if e.is_circle() {
        return Ok(z.norm().max(1.0).ln());
    }
    let ends = e.endpoints();
    let mut total = 0.0;
    for (j, iv) in e.intervals().iter().enumerate() {
        let others = other_endpoints(&ends, iv.lo, iv.hi);
        let (mid, half) = (0.5 * (iv.lo + iv.hi), 0.5 * iv.len());
        let s = e.sign(j);
        let f = |t: f64| {
            let x = mid + half * t.cos();
            let w = s * e.q(x) / (PI * others.iter().map(|e| (x - e).abs()).product::<f64>().sqrt());
            w * (z - x).norm().ln()
        };
        let mut breaks = Vec::new();
        if z.im.abs() < 1e-12 * (1.0 + z.re.abs()) && z.re >= iv.lo && z.re <= iv.hi {
            breaks.push(((z.re - mid) / half).clamp(-1.0, 1.0).acos());
        }
        total += integrate_singular(&f, Interval::new(0.0, PI), &breaks, 256)?;
    }
    Ok(total)
}

/// Poisson kernel `(1 - r^2) / (1 - 2 r cos(theta - phi) + r^2)`, the
/// density of the balayage of `delta_{r e^{i phi}}` with respect to
/// `dtheta / 2pi`.
pub fn poisson_kernel(r: f64, phi: f64, theta: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * (theta - phi).cos() + r * r)
}

/// Balayage of a uniform measure on points of the closed disk onto the
/// circle, described by its moments `c_l = int z^l dnu`.
#[derive(Debug, Clone, Serialize)]
pub struct Balayage {
    pub moments: Vec<Complex64>,
    #[serde(skip)]
    points: Vec<Complex64>,
}

const MAX_BALAYAGE_ORDER: usize = 512;

pub fn balayage(points: &[Complex64], order: usize) -> Result<Balayage> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("balayage of an empty measure".into()));
    }
    if order > MAX_BALAYAGE_ORDER {
        return Err(Error::InvalidArgument(format!("order {order} exceeds {MAX_BALAYAGE_ORDER}")));
    }
    if let Some(p) = points.iter().find(|p| p.norm() > 1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!("atom {p} lies outside the closed disk")));
    }
    let w = 1.0 / points.len() as f64;
    let mut moments = vec![Complex64::new(0.0, 0.0); order + 1];
    for &z in points {
        let mut zl = Complex64::new(w, 0.0);
        for m in moments.iter_mut() {
            *m += zl;
            zl *= z;
        }
    }
    Ok(Balayage {
        moments,
        points: points.to_vec(),
    })
}

impl Balayage {
    pub fn order(&self) -> usize {
        self.moments.len() - 1
    }

    fn series(&self, theta: f64, taper: impl Fn(usize) -> f64) -> f64 {
        let l = self.order();
        let mut s = self.moments[0].re;
        for k in 1..=l {
            s += 2.0 * taper(k) * (self.moments[k] * Complex64::from_polar(1.0, -(k as f64) * theta)).re;
        }
        s
    }

    /// Cesàro (Fejér) mean of the Fourier series; nonnegative.
    pub fn density_fejer(&self, theta: f64) -> f64 {
        let l = self.order() as f64;
        self.series(theta, |k| 1.0 - k as f64 / (l + 1.0))
    }

    /// Plain partial sum of the Fourier series.
    pub fn density_dirichlet(&self, theta: f64) -> f64 {
        self.series(theta, |_| 1.0)
    }

    /// Exact Poisson-kernel density; `None` when an atom sits on the circle.
    pub fn density_exact(&self, theta: f64) -> Option<f64> {
        let w = 1.0 / self.points.len() as f64;
        let mut s = 0.0;
        for p in &self.points {
            let r = p.norm();
            if r >= 1.0 - 1e-12 {
                return None;
            }
            s += w * poisson_kernel(r, p.arg(), theta);
        }
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_density_and_capacity() {
        let e = equilibrium_interval(-1.0, 1.0).unwrap();
        assert!((e.density(0.0) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(e.capacity(), 0.5);
        let half = equilibrium_interval(-0.5, 0.5).unwrap();
        assert!((half.density(0.0) - 2.0 / PI).abs() < 1e-15);
        assert!((e.mass() - 1.0).abs() < 1e-12);
        assert!((e.cdf(0.0) - 0.5).abs() < 1e-14);
        // arcsine law
        assert!((e.cdf(0.3) - (0.5 + 0.3f64.asin() / PI)).abs() < 1e-12);
        assert!(equilibrium_interval(1.0, 1.0).is_err());
    }

    #[test]
    fn interval_potentials() {
        let e = equilibrium_interval(-1.0, 1.0).unwrap();
        let v0 = log_potential(&e, Complex64::new(0.0, 0.0)).unwrap();
        assert!((v0 - 0.5f64.ln()).abs() < 1e-10, "{v0}");
        let v2 = log_potential(&e, Complex64::new(2.0, 0.0)).unwrap();
        assert!((v2 - ((2.0 + 3f64.sqrt()) / 2.0).ln()).abs() < 1e-10, "{v2}");
    }

    #[test]
    fn circle_potential() {
        let c = equilibrium_circle();
        assert_eq!(log_potential(&c, Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        assert!((c.density(1.3) - 1.0 / TAU).abs() < 1e-16);
        assert_eq!(c.capacity(), 1.0);
    }

    #[test]
    fn symmetric_union() {
        let c = 0.5;
        let e = equilibrium_union(&[Interval::new(-1.0, -c), Interval::new(c, 1.0)]).unwrap();
        let q = e.gap_polynomial();
        assert!(q[0].abs() < 1e-12 && (q[1] - 1.0).abs() < 1e-10, "{q:?}");
        for &x in &[-0.9f64, -0.7, 0.55, 0.8, 0.99] {
            let expected = x.abs() / (PI * ((1.0 - x * x) * (x * x - c * c)).abs().sqrt());
            assert!((e.density(x) - expected).abs() < 1e-10 * expected);
        }
        assert!((e.mass() - 1.0).abs() < 1e-10);
        assert!((e.capacity() - (1.0 - c * c).sqrt() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn union_of_one_matches_interval() {
        let u = equilibrium_union(&[Interval::new(-0.3, 0.9)]).unwrap();
        let i = equilibrium_interval(-0.3, 0.9).unwrap();
        for x in [-0.2, 0.1, 0.5, 0.85] {
            assert!((u.density(x) - i.density(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn overlapping_intervals_rejected() {
        assert!(equilibrium_union(&[Interval::new(-1.0, 0.1), Interval::new(0.0, 1.0)]).is_err());
    }

    #[test]
    fn balayage_of_origin_is_uniform() {
        let b = balayage(&[Complex64::new(0.0, 0.0)], 8).unwrap();
        assert_eq!(b.moments[0], Complex64::new(1.0, 0.0));
        assert!(b.moments[1..].iter().all(|m| m.norm() == 0.0));
        assert!((b.density_fejer(0.4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn balayage_rejects_outside_points() {
        assert!(balayage(&[Complex64::new(1.1, 0.0)], 4).is_err());
    }
}
