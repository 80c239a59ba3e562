//! Finite-n experiments around the density of zeros and the CD kernel.

mod config;
mod experiments;
mod report;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{discretize, support_radius, DiscretizedMeasure, Domain, Interval, MeasureSpec, NodeKind};
use crate::oprl::{self, CountingMeasure, JacobiCoefficients};
use crate::opuc::{self, VerblunskyCoefficients};
use crate::potential::{equilibrium_circle, equilibrium_union, EquilibriumMeasure};
use crate::sum::{sum_with, Precision};

pub use config::{ExperimentConfig, ExperimentId, MeasureCase, CAP_L, CAP_M, CAP_N_CIRCLE, CAP_N_REAL};
pub use experiments::{run, spec_dominates};
pub use report::{Check, CheckKind, ExperimentReport, MetricTable, Timestamp};

/// Points of the fixed evaluation grid.
pub const GRID_POINTS: usize = 257;

/// 257 equispaced points strictly inside `[lo, hi]`.
pub fn grid(span: Interval) -> Vec<f64> {
    let h = span.len() / (GRID_POINTS + 1) as f64;
    (1..=GRID_POINTS).map(|j| span.lo + h * j as f64).collect()
}

/// A discretized measure with its recurrence coefficients.
#[derive(Debug, Clone)]
pub enum Model {
    Real {
        measure: DiscretizedMeasure,
        coefficients: JacobiCoefficients,
    },
    Circle {
        measure: DiscretizedMeasure,
        coefficients: VerblunskyCoefficients,
    },
}

/// Default quadrature resolution for coefficients up to `degree`.
pub fn default_resolution(degree: usize) -> usize {
    (4 * (degree + 1)).max(1024)
}

impl Model {
    pub fn new(spec: &MeasureSpec, resolution: usize, degree: usize, precision: Precision) -> Result<Self> {
        let measure = discretize(spec, resolution)?.with_precision(precision);
        Self::from_measure(measure, degree)
    }

    pub fn from_measure(measure: DiscretizedMeasure, degree: usize) -> Result<Self> {
        Ok(match measure.domain() {
            Domain::RealLine => {
                let coefficients = oprl::jacobi_from_measure(&measure, degree)?;
                Model::Real { measure, coefficients }
            }
            Domain::UnitCircle => {
                let coefficients = opuc::verblunsky_from_measure(&measure, degree)?;
                Model::Circle { measure, coefficients }
            }
        })
    }

    pub fn measure(&self) -> &DiscretizedMeasure {
        match self {
            Model::Real { measure, .. } | Model::Circle { measure, .. } => measure,
        }
    }

    pub fn domain(&self) -> Domain {
        self.measure().domain()
    }

    /// `K_n(x, x)` (or `K_n(e^{i theta}, e^{i theta})`) at arbitrary points.
    pub fn kernel(&self, points: &[f64], n: usize) -> Result<Vec<f64>> {
        match self {
            Model::Real { coefficients, .. } => Ok(oprl::cd_kernel_diag(coefficients, points, n)?.values),
            Model::Circle { coefficients, .. } => Ok(opuc::opuc_kernel_diag(coefficients, points, n)?.values),
        }
    }

    /// `K_0, ..., K_n` at one point.
    pub fn kernel_sequence(&self, x: f64, n: usize) -> Result<Vec<f64>> {
        match self {
            Model::Real { coefficients, .. } => {
                let p = oprl::eval_orthonormal(coefficients, x, n)?;
                let mut acc = 0.0;
                Ok(p.iter()
                    .map(|v| {
                        acc += v * v;
                        acc
                    })
                    .collect())
            }
            Model::Circle { coefficients, .. } => (0..=n)
                .map(|k| Ok(opuc::opuc_kernel_diag(coefficients, &[x], k)?.values[0]))
                .collect(),
        }
    }

    pub fn eta(&self, n: usize) -> Result<EtaMeasure> {
        let k = self.kernel(self.measure().nodes(), n)?;
        eta_measure(self.measure(), &k, n)
    }

    /// Zero counting measure of degree `n`: zeros of `p_n` on the line,
    /// zeros of the paraorthogonal `P_n(z, 1)` on the circle.
    pub fn nu(&self, n: usize) -> Result<CountingMeasure> {
        self.nu_beta(n, Complex64::new(1.0, 0.0))
    }

    pub fn nu_beta(&self, n: usize, beta: Complex64) -> Result<CountingMeasure> {
        if n == 0 {
            return Err(Error::InvalidArgument("zero counting measure needs degree >= 1".into()));
        }
        match self {
            Model::Real { coefficients, .. } => oprl::zeros(coefficients, n - 1),
            Model::Circle { coefficients, .. } => opuc::popuc_zero_measure(coefficients, n - 1, beta),
        }
    }

    /// `int z^l d nu` for the zeros of the orthogonal polynomial of degree
    /// `n` (inside the disk on the circle), `l = 0..=max_l`.
    pub fn op_zero_moments(&self, n: usize, max_l: usize) -> Result<Vec<Complex64>> {
        match self {
            Model::Real { .. } => Ok(self.nu(n)?.power_moments(max_l)),
            Model::Circle { coefficients, .. } => {
                let (phi, _) = opuc::monic_coefficients(coefficients, n)?;
                let s = phi.power_sums(max_l);
                Ok(s.into_iter().map(|v| v / n as f64).collect())
            }
        }
    }

    pub fn support_radius(&self) -> f64 {
        support_radius(self.measure())
    }

    /// `(a_1 ... a_n)^{1/n}` or `(rho_0 ... rho_{n-1})^{1/n}`.
    pub fn geometric_mean(&self, n: usize) -> Result<f64> {
        match self {
            Model::Real { coefficients, .. } => oprl::geometric_mean_a(coefficients, n),
            Model::Circle { coefficients, .. } => opuc::geometric_mean_rho(coefficients, n),
        }
    }
}

/// `d eta_n = (n+1)^{-1} K_n dmu` on the nodes of a discretized measure.
#[derive(Debug, Clone, Serialize)]
pub struct EtaMeasure {
    pub domain: Domain,
    pub degree: usize,
    pub nodes: Vec<f64>,
    /// `(n+1)^{-1} K_n` at every node.
    pub node_densities: Vec<f64>,
    /// `eta_n` mass carried by every node.
    pub weights: Vec<f64>,
    pub kinds: Vec<NodeKind>,
    pub ac_mass: f64,
    pub atom_mass: f64,
}

pub fn eta_measure(m: &DiscretizedMeasure, kernel: &[f64], n: usize) -> Result<EtaMeasure> {
    if kernel.len() != m.len() {
        return Err(Error::InvalidArgument(format!(
            "{} kernel values for {} nodes",
            kernel.len(),
            m.len()
        )));
    }
    let scale = 1.0 / (n + 1) as f64;
    let node_densities: Vec<f64> = kernel.iter().map(|k| k * scale).collect();
    let ac: Vec<f64> = m.ac_weights().iter().zip(&node_densities).map(|(w, d)| w * d).collect();
    let at: Vec<f64> = m.atom_masses().iter().zip(&node_densities).map(|(w, d)| w * d).collect();
    let weights = ac.iter().zip(&at).map(|(a, b)| a + b).collect();
    Ok(EtaMeasure {
        domain: m.domain(),
        degree: n,
        nodes: m.nodes().to_vec(),
        node_densities,
        weights,
        kinds: m.kinds().to_vec(),
        ac_mass: sum_with(Precision::High, ac),
        atom_mass: sum_with(Precision::High, at),
    })
}

impl EtaMeasure {
    pub fn mass(&self) -> f64 {
        sum_with(Precision::High, self.weights.iter().copied())
    }

    pub fn points(&self) -> Vec<Complex64> {
        self.nodes.iter().map(|&t| point(self.domain, t)).collect()
    }

    /// `int z^l d eta_n` for `l = 0..=max_l`.
    pub fn power_moments(&self, max_l: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); max_l + 1];
        for (z, &w) in self.points().into_iter().zip(&self.weights) {
            let mut zl = Complex64::new(w, 0.0);
            for v in out.iter_mut() {
                *v += zl;
                zl *= z;
            }
        }
        out
    }

    /// Total variation `sum |eta - other|` on a common node set.
    pub fn tv_distance(&self, other: &EtaMeasure) -> Result<f64> {
        if self.nodes != other.nodes {
            return Err(Error::InvalidArgument("measures live on different nodes".into()));
        }
        Ok(sum_with(
            Precision::High,
            self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()),
        ))
    }

    /// `eta_n` mass of the atoms inside `window`.
    pub fn atom_mass_in(&self, window: Interval) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.kinds)
            .filter(|((x, _), k)| **k == NodeKind::Atom && window.contains(**x))
            .map(|((_, w), _)| w)
            .sum()
    }
}

fn point(domain: Domain, t: f64) -> Complex64 {
    match domain {
        Domain::RealLine => Complex64::new(t, 0.0),
        Domain::UnitCircle => Complex64::from_polar(1.0, t),
    }
}

/// Kolmogorov distance between a discrete measure (sorted locations with
/// weights) and a continuous CDF.
pub fn kolmogorov_to_cdf<F: Fn(f64) -> f64>(atoms: &[f64], weights: &[f64], cdf: F) -> f64 {
    let mut below = 0.0;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < atoms.len() {
        let x = atoms[i];
        let f = cdf(x);
        worst = worst.max((below - f).abs());
        while i < atoms.len() && atoms[i] == x {
            below += weights[i];
            i += 1;
        }
        worst = worst.max((below - f).abs());
    }
    worst
}

/// Kolmogorov distance between two discrete measures.
pub fn kolmogorov_discrete(a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> f64 {
    let mut all: Vec<(f64, f64, f64)> = a.0.iter().zip(a.1).map(|(&x, &w)| (x, w, 0.0)).collect();
    all.extend(b.0.iter().zip(b.1).map(|(&x, &w)| (x, 0.0, w)));
    all.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut fa, mut fb, mut worst) = (0.0f64, 0.0f64, 0.0f64);
    let mut i = 0;
    while i < all.len() {
        let x = all[i].0;
        while i < all.len() && all[i].0 == x {
            fa += all[i].1;
            fb += all[i].2;
            i += 1;
        }
        worst = worst.max((fa - fb).abs());
    }
    worst
}

pub fn counting_weights(nu: &CountingMeasure) -> Vec<f64> {
    vec![nu.atom_weight(); nu.len()]
}

/// A compact set: a finite union of intervals or the whole circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SetSpec {
    Union(Vec<Interval>),
    Circle,
}

impl SetSpec {
    /// `"circle"`, or intervals `"[a,b]"` joined by `u`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("circle") {
            return Ok(SetSpec::Circle);
        }
        let mut out = Vec::new();
        for part in t.split(['u', 'U', '∪']) {
            let p = part.trim();
            let inner = p
                .strip_prefix('[')
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(|| Error::InvalidArgument(format!("expected '[a,b]' in set, found '{p}'")))?;
            let mut nums = inner.split(',').map(|s| s.trim().parse::<f64>());
            match (nums.next(), nums.next(), nums.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) if a < b => out.push(Interval::new(a, b)),
                _ => return Err(Error::InvalidArgument(format!("bad interval '{p}' in set"))),
            }
        }
        Ok(SetSpec::Union(out))
    }

    pub fn equilibrium(&self) -> Result<EquilibriumMeasure> {
        match self {
            SetSpec::Circle => Ok(equilibrium_circle()),
            SetSpec::Union(v) => equilibrium_union(v),
        }
    }

    pub fn hull(&self) -> Interval {
        match self {
            SetSpec::Circle => Interval::new(0.0, TAU),
            SetSpec::Union(v) => Interval::new(v[0].lo, v[v.len() - 1].hi),
        }
    }
}

impl std::fmt::Display for SetSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SetSpec::Circle => write!(f, "circle"),
            SetSpec::Union(v) => {
                let parts: Vec<String> = v.iter().map(|i| format!("[{},{}]", i.lo, i.hi)).collect();
                write!(f, "{}", parts.join("u"))
            }
        }
    }
}

/// The default set for a measure: the circle, or the closed hull of the
/// support on the line.
pub fn default_set(spec: &MeasureSpec) -> SetSpec {
    match spec.domain {
        Domain::UnitCircle => SetSpec::Circle,
        Domain::RealLine => SetSpec::Union(vec![spec.hull()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::parse_measure;
    use std::f64::consts::PI;

    #[test]
    fn grid_excludes_endpoints() {
        let g = grid(Interval::new(-1.0, 1.0));
        assert_eq!(g.len(), 257);
        assert!(g[0] > -1.0 && g[256] < 1.0);
        assert!(g[128].abs() < 1e-15);
    }

    #[test]
    fn eta_of_uniform_circle_is_uniform() {
        let model = Model::new(&parse_measure("lebesgue_circle").unwrap(), 256, 8, Precision::Standard).unwrap();
        let eta = model.eta(8).unwrap();
        assert!(eta.node_densities.iter().all(|d| (d - 1.0).abs() < 1e-12));
        assert!((eta.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eta_zero_is_mu() {
        let model = Model::new(&parse_measure("legendre + 0.5*delta(0.3)").unwrap(), 256, 2, Precision::Standard).unwrap();
        let eta = model.eta(0).unwrap();
        let m = model.measure();
        for (w, mw) in eta.weights.iter().zip(m.weights()) {
            assert!((w - mw / m.mass()).abs() < 1e-14);
        }
    }

    #[test]
    fn eta_mass_for_chebyshev() {
        let model = Model::new(&parse_measure("chebyshev").unwrap(), 256, 20, Precision::Standard).unwrap();
        assert!((model.eta(20).unwrap().mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kolmogorov_of_point_mass() {
        let d = kolmogorov_to_cdf(&[0.0], &[1.0], |x| 0.5 + x.asin() / PI);
        assert!((d - 0.5).abs() < 1e-15);
        let d = kolmogorov_discrete((&[0.0, 1.0], &[0.5, 0.5]), (&[0.0], &[1.0]));
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn set_parsing() {
        let s = SetSpec::parse("[-1,-0.5]u[0.5,1]").unwrap();
        assert_eq!(s.to_string(), "[-1,-0.5]u[0.5,1]");
        assert_eq!(SetSpec::parse("circle").unwrap(), SetSpec::Circle);
        assert!(SetSpec::parse("[1,0]").is_err());
        assert!(SetSpec::parse("(0,1)").is_err());
    }
}
