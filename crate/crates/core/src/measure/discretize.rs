//! Finite quadrature representations of measures.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::quadrature::{gauss_chebyshev, gauss_jacobi, gauss_legendre};
use super::{AcTerm, Builtin, Domain, Interval, MeasureSpec, Weight};
use crate::error::{Error, Result};
use crate::sum::{sum_with, Precision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    /// Quadrature node of the absolutely continuous part.
    Ac,
    /// Declared point mass (possibly sharing its node with an a.c. weight).
    Atom,
}

/// Nodes and positive weights standing in for a measure.
#[derive(Debug, Clone)]
pub struct DiscretizedMeasure {
    domain: Domain,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kinds: Vec<NodeKind>,
    ac_weights: Vec<f64>,
    atom_masses: Vec<f64>,
    spec: Option<MeasureSpec>,
    resolution: usize,
    precision: Precision,
}

impl DiscretizedMeasure {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Positions on the line, or angles in `[0, 2pi)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    /// Part of each node weight coming from the a.c. terms.
    pub fn ac_weights(&self) -> &[f64] {
        &self.ac_weights
    }

    /// Part of each node weight coming from point masses.
    pub fn atom_masses(&self) -> &[f64] {
        &self.atom_masses
    }

    /// Quadrature given directly: every node is treated as an a.c. node and
    /// the resolution is the node count.
    pub fn from_weights(domain: Domain, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidArgument("need equally many nodes and weights".into()));
        }
        if !nodes.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::InvalidArgument("nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        let n = nodes.len();
        Ok(Self {
            domain,
            kinds: vec![NodeKind::Ac; n],
            ac_weights: weights.clone(),
            atom_masses: vec![0.0; n],
            nodes,
            weights,
            spec: None,
            resolution: n,
            precision: Precision::Standard,
        })
    }

    /// The `MeasureSpec` this measure was discretized from, if any.
    pub fn spec(&self) -> Option<&MeasureSpec> {
        self.spec.as_ref()
    }

    /// The `M` the measure was discretized with.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    /// Nodes as points of the complex plane (`e^{i theta}` on the circle).
    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        let domain = self.domain;
        self.nodes.iter().map(move |&t| match domain {
            Domain::RealLine => Complex64::new(t, 0.0),
            Domain::UnitCircle => Complex64::from_polar(1.0, t),
        })
    }

    pub fn mass(&self) -> f64 {
        sum_with(Precision::High, self.weights.iter().copied())
    }

    pub fn has_ac_part(&self) -> bool {
        self.spec.as_ref().is_none_or(|s| !s.ac_terms.is_empty())
    }

    /// Largest polynomial degree the node set supports reliably; `None` for
    /// purely atomic measures.
    pub fn degree_cap(&self) -> Option<usize> {
        self.has_ac_part().then_some(self.resolution / 4)
    }

    /// Error unless `degree` is within [`Self::degree_cap`].
    pub fn check_degree(&self, degree: usize) -> Result<()> {
        match self.degree_cap() {
            Some(cap) if degree > cap => Err(Error::DegreeCap {
                degree,
                cap,
                resolution: self.resolution,
            }),
            _ => Ok(()),
        }
    }

    /// Weighted sum `sum_k w_k f(node_k)` honouring the precision flag.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        sum_with(
            self.precision,
            self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)),
        )
    }
}

/// Moments `int x^l dmu` (real line) or `int e^{-i l theta} dmu` (circle).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentVector {
    pub domain: Domain,
    pub values: Vec<Complex64>,
}

impl MomentVector {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }
}

const MAX_MOMENT_ORDER: usize = 512;

pub fn moments(m: &DiscretizedMeasure, order: usize) -> Result<MomentVector> {
    if order > MAX_MOMENT_ORDER {
        return Err(Error::InvalidArgument(format!(
            "moment order {order} exceeds {MAX_MOMENT_ORDER}"
        )));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); order + 1];
    for (&t, &w) in m.nodes.iter().zip(&m.weights) {
        let step = match m.domain {
            Domain::RealLine => Complex64::new(t, 0.0),
            Domain::UnitCircle => Complex64::from_polar(1.0, -t),
        };
        let mut z = Complex64::new(w, 0.0);
        for v in values.iter_mut() {
            *v += z;
            z *= step;
        }
    }
    Ok(MomentVector {
        domain: m.domain,
        values,
    })
}

/// `sup |z|` over the support.
pub fn support_radius(m: &DiscretizedMeasure) -> f64 {
    match m.domain {
        Domain::UnitCircle => 1.0,
        Domain::RealLine => match &m.spec {
            Some(spec) => {
                let h = spec.hull();
                h.lo.abs().max(h.hi.abs())
            }
            None => m.nodes.iter().fold(0.0, |r, x| r.max(x.abs())),
        },
    }
}

const MIN_PANEL_NODES: usize = 16;
const GRADING_RATIO: f64 = 0.25;
const MAX_GRADING_DEPTH: usize = 400;
const MASS_STABILITY_TOL: f64 = 1e-10;

/// Build the quadrature representation of `spec` with resolution `m`.
pub fn discretize(spec: &MeasureSpec, m: usize) -> Result<DiscretizedMeasure> {
    if m < 8 {
        return Err(Error::InvalidArgument(format!("resolution M = {m} is below 8")));
    }
    spec.validate()?;
    let mut cache = GaussCache::default();
    let mut raw: Vec<(f64, f64, f64)> = Vec::new();
    for term in &spec.ac_terms {
        let rule = term_rule(spec.domain, term, m, &mut cache)?;
        for &(t, w) in &rule.nodes {
            if !w.is_finite() {
                return Err(Error::Integrability(format!(
                    "weight {} is not finite at {t}",
                    term.weight
                )));
            }
            if w < 0.0 {
                return Err(Error::Semantic(format!(
                    "weight {} is negative at {t}",
                    term.weight
                )));
            }
            if w > 0.0 {
                raw.push((t, w, 0.0));
            }
        }
        if rule.needs_stability_check {
            let fine = term_rule(spec.domain, term, 2 * m, &mut cache)?;
            let a: f64 = sum_with(Precision::High, rule.nodes.iter().map(|p| p.1));
            let b: f64 = sum_with(Precision::High, fine.nodes.iter().map(|p| p.1));
            if !((a - b).abs() <= MASS_STABILITY_TOL * b.abs()) {
                return Err(Error::Integrability(format!(
                    "mass of term {} does not stabilize under refinement ({a:e} vs {b:e})",
                    term.weight
                )));
            }
        }
    }
    for pm in &spec.point_masses {
        raw.push((pm.location, 0.0, pm.mass));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut nodes: Vec<f64> = Vec::with_capacity(raw.len());
    let mut ac_weights: Vec<f64> = Vec::with_capacity(raw.len());
    let mut atom_masses: Vec<f64> = Vec::with_capacity(raw.len());
    for (t, w, a) in raw {
        if nodes.last() == Some(&t) {
            *ac_weights.last_mut().unwrap() += w;
            *atom_masses.last_mut().unwrap() += a;
        } else {
            nodes.push(t);
            ac_weights.push(w);
            atom_masses.push(a);
        }
    }
    if nodes.is_empty() {
        return Err(Error::Semantic("measure has zero total mass".into()));
    }
    let weights = ac_weights.iter().zip(&atom_masses).map(|(a, b)| a + b).collect();
    let kinds = atom_masses
        .iter()
        .map(|&a| if a > 0.0 { NodeKind::Atom } else { NodeKind::Ac })
        .collect();
    Ok(DiscretizedMeasure {
        domain: spec.domain,
        nodes,
        weights,
        kinds,
        ac_weights,
        atom_masses,
        spec: Some(spec.clone()),
        resolution: m,
        precision: Precision::Standard,
    })
}

/// Total mass by repeated refinement until two successive resolutions agree.
pub fn reference_mass(spec: &MeasureSpec) -> Result<f64> {
    let mut m = 256;
    let mut prev = discretize(spec, m)?.mass();
    while m < 1 << 15 {
        m *= 2;
        let next = discretize(spec, m)?.mass();
        if (next - prev).abs() <= 1e-14 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// `int log w dtheta/2pi` over the a.c. density; `-inf` when it diverges.
pub fn szego_integral(m: &DiscretizedMeasure) -> Result<f64> {
    if m.domain != Domain::UnitCircle {
        return Err(Error::WrongDomain {
            expected: "unit-circle",
        });
    }
    let Some(spec) = &m.spec else {
        return Err(Error::Precondition("Szego integral needs a measure specification".into()));
    };
    if spec.ac_terms.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let full = Domain::UnitCircle.default_interval();
    let mut breaks = Vec::new();
    for term in &spec.ac_terms {
        let s = term.support(spec.domain);
        breaks.push(s.lo);
        breaks.push(s.hi);
        breaks.extend(term.weight.critical_points(s));
    }
    let f = |t: f64| spec.ac_density(t).ln();
    let mut cache = GaussCache::default();
    let value = |res: usize, cache: &mut GaussCache| -> Result<f64> {
        match composite_rule(&f, full, &breaks, res, cache) {
            Ok(rule) => Ok(sum_with(
                Precision::High,
                rule.iter().map(|&(t, w)| w * f(t)),
            ) / TAU),
            Err(Error::Integrability(_)) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    };
    let res = m.resolution.max(64);
    let coarse = value(res, &mut cache)?;
    let fine = value(2 * res, &mut cache)?;
    if !coarse.is_finite() || !fine.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    if (coarse - fine).abs() > 1e-6 * (1.0 + fine.abs()) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(fine)
}

/// `int f` over `span` by the graded composite rule, split at `breaks`.
pub(crate) fn integrate_singular<F: Fn(f64) -> f64>(f: &F, span: Interval, breaks: &[f64], m: usize) -> Result<f64> {
    let mut cache = GaussCache::default();
    let rule = composite_rule(f, span, breaks, m, &mut cache)?;
    Ok(sum_with(Precision::High, rule.iter().map(|&(t, w)| w * f(t))))
}

struct TermRule {
    nodes: Vec<(f64, f64)>,
    needs_stability_check: bool,
}

fn term_rule(domain: Domain, term: &AcTerm, m: usize, cache: &mut GaussCache) -> Result<TermRule> {
    let c = term.coefficient;
    let support = term.support(domain);
    let full = match &term.weight {
        Weight::Builtin(b) => support == b.support(),
        Weight::Expr(_) => term.restriction.is_none() || support == domain.default_interval(),
    };
    if let (Weight::Builtin(b), true) = (&term.weight, full) {
        let nodes: Vec<(f64, f64)> = match b {
            Builtin::Legendre => {
                let (x, w) = cache.legendre(m);
                x.iter().zip(w).map(|(&x, &w)| (x, 0.5 * c * w)).collect()
            }
            Builtin::Chebyshev => {
                let (x, w) = gauss_chebyshev(m);
                x.into_iter().zip(w).map(|(x, w)| (x, c * w)).collect()
            }
            Builtin::Jacobi { alpha, beta } => {
                let (x, w) = gauss_jacobi(*alpha, *beta, m)?;
                x.into_iter().zip(w).map(|(x, w)| (x, c * w)).collect()
            }
            Builtin::LebesgueCircle | Builtin::BernsteinSzego { .. } => {
                periodic_grid(m, |t| c * b.density(t))
            }
        };
        return Ok(TermRule {
            nodes,
            needs_stability_check: false,
        });
    }
    let f = |t: f64| c * term.weight.eval(t);
    if domain == Domain::UnitCircle && full && is_smooth_periodic(&term.weight) {
        return Ok(TermRule {
            nodes: periodic_grid(m, f),
            needs_stability_check: true,
        });
    }
    let breaks = term.weight.critical_points(support);
    let rule = composite_rule(&f, support, &breaks, m, cache)?;
    let scale = match domain {
        Domain::RealLine => 1.0,
        Domain::UnitCircle => 1.0 / TAU,
    };
    Ok(TermRule {
        nodes: rule.into_iter().map(|(t, w)| (t, scale * w * f(t))).collect(),
        needs_stability_check: true,
    })
}

/// Uniform grid `theta_k = (2k + 1) pi / m` with weights `w(theta_k)/m`.
fn periodic_grid<F: Fn(f64) -> f64>(m: usize, w: F) -> Vec<(f64, f64)> {
    let h = TAU / m as f64;
    (0..m)
        .map(|k| {
            let t = h * (k as f64 + 0.5);
            (t, w(t) / m as f64)
        })
        .collect()
}

fn is_smooth_periodic(w: &Weight) -> bool {
    let Weight::Expr(e) = w else { return true };
    if !e.critical_points(0.0, TAU).is_empty() {
        return false;
    }
    (0..17).all(|k| {
        let t = 0.37 * k as f64;
        let (a, b) = (e.eval(t), e.eval(t + TAU));
        a.is_finite() && (a - b).abs() <= 1e-12 * (1.0 + a.abs())
    })
}

#[derive(Default)]
struct GaussCache {
    legendre: HashMap<usize, (Vec<f64>, Vec<f64>)>,
    jacobi: HashMap<u64, (Vec<f64>, Vec<f64>)>,
}

impl GaussCache {
    fn legendre(&mut self, n: usize) -> &(Vec<f64>, Vec<f64>) {
        self.legendre.entry(n).or_insert_with(|| gauss_legendre(n))
    }

    fn jacobi(&mut self, gamma: f64) -> Result<&(Vec<f64>, Vec<f64>)> {
        let key = gamma.to_bits();
        if !self.jacobi.contains_key(&key) {
            let rule = gauss_jacobi(0.0, gamma, MIN_PANEL_NODES)?;
            self.jacobi.insert(key, rule);
        }
        Ok(&self.jacobi[&key])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EndBehaviour {
    Smooth,
    /// Apparent exponent of the power law at the end, when one is visible.
    Singular(Option<f64>),
}

/// Classify the endpoint `at` of a piece by the apparent power law of `f`
/// approaching it from `direction`.
fn endpoint_behaviour<F: Fn(f64) -> f64>(f: &F, at: f64, direction: f64, len: f64) -> Result<EndBehaviour> {
    // log-slope between offsets d and 1e-3 d, using the offsets realized
    // after rounding
    let slope = |d: f64| -> Option<f64> {
        let (t1, t2) = (at + direction * d, at + direction * 1e-3 * d);
        let (s1, s2) = ((t1 - at) * direction, (t2 - at) * direction);
        let (f1, f2) = (f(t1), f(t2));
        if f1 == 0.0 && f2 == 0.0 {
            return Some(0.0);
        }
        let g = (f2 / f1).ln() / (s2 / s1).ln();
        g.is_finite().then_some(g)
    };
    let (Some(near), Some(far)) = (slope(1e-6 * len), slope(1e-5 * len)) else {
        return Ok(EndBehaviour::Singular(None));
    };
    if near == 0.0 && far == 0.0 && f(at + direction * 1e-6 * len) == 0.0 {
        return Ok(EndBehaviour::Smooth);
    }
    // the leading correction is linear in the offset
    let gamma = near - (far - near) / 9.0;
    if !gamma.is_finite() {
        return Ok(EndBehaviour::Singular(None));
    }
    if gamma <= -1.0 + 1e-3 {
        return Err(Error::Integrability(format!(
            "weight behaves like |t - {at}|^{gamma:.3} near {at}"
        )));
    }
    if gamma > -1e-3 && (gamma - gamma.round()).abs() < 1e-3 {
        Ok(EndBehaviour::Smooth)
    } else {
        Ok(EndBehaviour::Singular(Some(gamma)))
    }
}

/// Composite Gauss–Legendre rule for `int f` over `span`, split at
/// `breaks`, with geometric grading toward singular piece endpoints.
/// Returns nodes with plain quadrature weights (not multiplied by `f`).
fn composite_rule<F: Fn(f64) -> f64>(
    f: &F,
    span: Interval,
    breaks: &[f64],
    m: usize,
    cache: &mut GaussCache,
) -> Result<Vec<(f64, f64)>> {
    let mut pts: Vec<f64> = vec![span.lo, span.hi];
    pts.extend(breaks.iter().copied().filter(|&b| b > span.lo && b < span.hi));
    pts.sort_by(f64::total_cmp);
    let tol = 1e-12 * span.len().max(1.0);
    pts.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let h = span.len();
    let mut out = Vec::new();
    for piece in pts.windows(2) {
        let (p, q) = (piece[0], piece[1]);
        let len = q - p;
        if len <= 0.0 {
            continue;
        }
        let left = endpoint_behaviour(f, p, 1.0, len)?;
        let right = endpoint_behaviour(f, q, -1.0, len)?;
        match (left, right) {
            (EndBehaviour::Smooth, EndBehaviour::Smooth) => {
                push_gauss(&mut out, p, q, panel_nodes(m, len, h), cache);
            }
            (EndBehaviour::Singular(g), EndBehaviour::Smooth) => {
                graded(f, &mut out, (p, q), true, g, m, h, cache)?;
            }
            (EndBehaviour::Smooth, EndBehaviour::Singular(g)) => {
                graded(f, &mut out, (p, q), false, g, m, h, cache)?;
            }
            (EndBehaviour::Singular(g), EndBehaviour::Singular(g2)) => {
                let mid = 0.5 * (p + q);
                graded(f, &mut out, (p, mid), true, g, m, h, cache)?;
                graded(f, &mut out, (mid, q), false, g2, m, h, cache)?;
            }
        }
    }
    Ok(out)
}

fn panel_nodes(m: usize, len: f64, h: f64) -> usize {
    MIN_PANEL_NODES.max((m as f64 * len / h).ceil() as usize)
}

fn push_gauss(out: &mut Vec<(f64, f64)>, a: f64, b: f64, n: usize, cache: &mut GaussCache) {
    let (x, w) = cache.legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    out.extend(x.iter().zip(w).map(|(&x, &w)| (mid + half * x, half * w)));
}

/// Rule on `[end, end + dir d]` exact for `|t - end|^gamma` times low-degree
/// polynomials.
fn push_endpoint_rule(
    out: &mut Vec<(f64, f64)>,
    end: f64,
    dir: f64,
    d: f64,
    gamma: f64,
    cache: &mut GaussCache,
) -> Result<()> {
    let (x, w) = cache.jacobi(gamma)?;
    let scale = (0.5 * d).powf(gamma + 1.0) * super::jacobi_normalization(0.0, gamma);
    for (&x, &w) in x.iter().zip(w) {
        let t = end + dir * 0.5 * d * (1.0 + x);
        // the offset actually realized after rounding the node
        let s = (t - end) * dir;
        out.push((t, scale * w / s.powf(gamma)));
    }
    Ok(())
}

/// Panels `[d_{k+1}, d_k]` with `d_k = len r^k` measured from the singular
/// end, deepened until the innermost panel carries a negligible share. The
/// innermost panel uses a rule adapted to the apparent endpoint exponent.
#[allow(clippy::too_many_arguments)]
fn graded<F: Fn(f64) -> f64>(
    f: &F,
    out: &mut Vec<(f64, f64)>,
    (a, b): (f64, f64),
    singular_at_a: bool,
    gamma: Option<f64>,
    m: usize,
    h: f64,
    cache: &mut GaussCache,
) -> Result<()> {
    let len = b - a;
    let (end, dir) = if singular_at_a { (a, 1.0) } else { (b, -1.0) };
    let at = |d: f64| end + dir * d;
    let floor = 1e-8 * end.abs().max(len);
    let min_depth = (m as f64).log2().ceil() as usize;
    let mut panels: Vec<(f64, f64)> = Vec::new();
    let mut total = 0.0;
    let mut depth = 0;
    let mut outer = len;
    loop {
        let inner = outer * GRADING_RATIO;
        let (lo, hi) = ordered(at(inner), at(outer));
        let n = panel_nodes(m, hi - lo, h);
        let start = panels.len();
        push_gauss(&mut panels, lo, hi, n, cache);
        total += panels[start..].iter().map(|&(t, w)| w * f(t).abs()).sum::<f64>();
        depth += 1;
        outer = inner;
        let mut rule = Vec::new();
        match gamma {
            Some(g) => push_endpoint_rule(&mut rule, end, dir, inner, g, cache)?,
            None => {
                let (lo, hi) = ordered(at(0.0), at(inner));
                push_gauss(&mut rule, lo, hi, MIN_PANEL_NODES, cache);
            }
        }
        let rest: f64 = rule.iter().map(|&(t, w)| w * f(t).abs()).sum();
        if !rest.is_finite() {
            return Err(Error::Integrability(format!("weight is not finite near {end}")));
        }
        if depth >= min_depth && (rest <= 1e-15 * total || inner * GRADING_RATIO < floor) {
            panels.extend(rule);
            break;
        }
        if depth >= MAX_GRADING_DEPTH {
            return Err(Error::Integrability(format!(
                "graded quadrature toward {end} did not converge after {MAX_GRADING_DEPTH} levels"
            )));
        }
    }
    out.extend(panels);
    Ok(())
}

fn ordered(x: f64, y: f64) -> (f64, f64) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}
