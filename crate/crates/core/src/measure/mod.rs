//! `MeasureSpec`, the measure DSL and discretization.

mod discretize;
mod expr;
mod parse;
pub mod quadrature;

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use discretize::integrate_singular;
pub use discretize::{
    discretize, moments, reference_mass, support_radius, szego_integral, DiscretizedMeasure,
    MomentVector, NodeKind,
};
pub use expr::{Func, Variable, WeightExpr};
pub use parse::{parse_measure, parse_measure_in};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    RealLine,
    UnitCircle,
}

impl Domain {
    pub fn variable(self) -> Variable {
        match self {
            Domain::RealLine => Variable::X,
            Domain::UnitCircle => Variable::Theta,
        }
    }

    /// Default support used when an expression carries no restriction.
    pub fn default_interval(self) -> Interval {
        match self {
            Domain::RealLine => Interval::new(-1.0, 1.0),
            Domain::UnitCircle => Interval::new(0.0, TAU),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::RealLine => "real-line",
            Domain::UnitCircle => "unit-circle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval::new(lo, hi))
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Named weights. Every builtin is normalized to total mass one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `1/2` on `[-1, 1]`.
    Legendre,
    /// `1/(pi sqrt(1 - x^2))` on `[-1, 1]`.
    Chebyshev,
    /// `(1-x)^alpha (1+x)^beta`, normalized, on `[-1, 1]`.
    Jacobi { alpha: f64, beta: f64 },
    /// `dtheta / 2pi`.
    LebesgueCircle,
    /// `(1 - a^2) / |1 - a e^{i theta}|^2 dtheta/2pi`: the measure whose only
    /// nonzero Verblunsky coefficient is `alpha_0 = a`.
    BernsteinSzego { a: f64 },
}

impl Builtin {
    pub fn domain(self) -> Domain {
        match self {
            Builtin::Legendre | Builtin::Chebyshev | Builtin::Jacobi { .. } => Domain::RealLine,
            Builtin::LebesgueCircle | Builtin::BernsteinSzego { .. } => Domain::UnitCircle,
        }
    }

    pub fn support(self) -> Interval {
        self.domain().default_interval()
    }

    /// Jacobi exponents for the builtins of that family.
    pub fn jacobi_exponents(self) -> Option<(f64, f64)> {
        match self {
            Builtin::Legendre => Some((0.0, 0.0)),
            Builtin::Chebyshev => Some((-0.5, -0.5)),
            Builtin::Jacobi { alpha, beta } => Some((alpha, beta)),
            _ => None,
        }
    }

    pub fn density(self, t: f64) -> f64 {
        match self {
            Builtin::Legendre => 0.5,
            Builtin::Chebyshev => 1.0 / (PI * ((1.0 - t) * (1.0 + t)).sqrt()),
            Builtin::Jacobi { alpha, beta } => {
                (1.0 - t).powf(alpha) * (1.0 + t).powf(beta) / jacobi_normalization(alpha, beta)
            }
            Builtin::LebesgueCircle => 1.0,
            Builtin::BernsteinSzego { a } => (1.0 - a * a) / (1.0 - 2.0 * a * t.cos() + a * a),
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Builtin::Jacobi { alpha, beta } if alpha <= -1.0 || beta <= -1.0 => Err(
                Error::Semantic(format!("jacobi({alpha},{beta}): exponents must exceed -1")),
            ),
            Builtin::BernsteinSzego { a } if a.abs() >= 1.0 => Err(Error::Semantic(format!(
                "bernstein_szego({a}): parameter must satisfy |a| < 1"
            ))),
            _ => Ok(()),
        }
    }
}

/// `int_{-1}^{1} (1-x)^a (1+x)^b dx = 2^{a+b+1} B(a+1, b+1)`.
pub(crate) fn jacobi_normalization(alpha: f64, beta: f64) -> f64 {
    let ln = (alpha + beta + 1.0) * std::f64::consts::LN_2 + libm::lgamma(alpha + 1.0)
        + libm::lgamma(beta + 1.0)
        - libm::lgamma(alpha + beta + 2.0);
    ln.exp()
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Legendre => write!(f, "legendre"),
            Builtin::Chebyshev => write!(f, "chebyshev"),
            Builtin::Jacobi { alpha, beta } => write!(f, "jacobi({alpha},{beta})"),
            Builtin::LebesgueCircle => write!(f, "lebesgue_circle"),
            Builtin::BernsteinSzego { a } => write!(f, "bernstein_szego({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Builtin(Builtin),
    Expr(WeightExpr),
}

impl Weight {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Weight::Builtin(b) => b.density(t),
            Weight::Expr(e) => e.eval(t),
        }
    }

    pub fn critical_points(&self, within: Interval) -> Vec<f64> {
        match self {
            Weight::Builtin(b) if b.domain() == Domain::RealLine => [-1.0, 1.0]
                .into_iter()
                .filter(|&p| within.contains(p))
                .collect(),
            Weight::Builtin(_) => Vec::new(),
            Weight::Expr(e) => e.critical_points(within.lo, within.hi),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Builtin(b) => write!(f, "{b}"),
            Weight::Expr(e) => write!(f, "({e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcTerm {
    pub coefficient: f64,
    pub weight: Weight,
    pub restriction: Option<Interval>,
}

impl AcTerm {
    /// The interval the term lives on.
    pub fn support(&self, domain: Domain) -> Interval {
        let base = match &self.weight {
            Weight::Builtin(b) => b.support(),
            Weight::Expr(_) => domain.default_interval(),
        };
        match self.restriction {
            Some(r) => r,
            None => base,
        }
    }

    pub fn density(&self, domain: Domain, t: f64) -> f64 {
        if self.support(domain).contains(t) {
            self.coefficient * self.weight.eval(t)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub location: f64,
    pub mass: f64,
}

/// A positive measure: absolutely continuous terms plus finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureSpecJson", into = "MeasureSpecJson")]
pub struct MeasureSpec {
    pub domain: Domain,
    pub ac_terms: Vec<AcTerm>,
    pub point_masses: Vec<PointMass>,
}

impl MeasureSpec {
    pub fn new(domain: Domain, ac_terms: Vec<AcTerm>, point_masses: Vec<PointMass>) -> Result<Self> {
        let spec = Self {
            domain,
            ac_terms,
            point_masses,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ac_terms.is_empty() && self.point_masses.is_empty() {
            return Err(Error::Semantic("measure has no terms".into()));
        }
        let full = self.domain.default_interval();
        for term in &self.ac_terms {
            if !(term.coefficient > 0.0 && term.coefficient.is_finite()) {
                return Err(Error::Semantic(format!(
                    "coefficient {} must be positive and finite",
                    term.coefficient
                )));
            }
            match &term.weight {
                Weight::Builtin(b) => {
                    b.validate()?;
                    if b.domain() != self.domain {
                        return Err(Error::Semantic(format!(
                            "builtin {b} does not live on the {}",
                            self.domain.name()
                        )));
                    }
                }
                Weight::Expr(e) => {
                    let other = match self.domain {
                        Domain::RealLine => Variable::Theta,
                        Domain::UnitCircle => Variable::X,
                    };
                    if e.mentions(other) {
                        return Err(Error::Semantic(format!(
                            "variable {} is not valid on the {}",
                            other.name(),
                            self.domain.name()
                        )));
                    }
                }
            }
            if let Some(r) = term.restriction {
                if !(r.lo < r.hi) || !r.lo.is_finite() || !r.hi.is_finite() {
                    return Err(Error::Semantic(format!(
                        "restriction [{}, {}] is empty",
                        r.lo, r.hi
                    )));
                }
                let outer = match &term.weight {
                    Weight::Builtin(b) => b.support(),
                    Weight::Expr(_) if self.domain == Domain::UnitCircle => full,
                    Weight::Expr(_) => Interval::new(f64::NEG_INFINITY, f64::INFINITY),
                };
                if !outer.contains_interval(&r) {
                    return Err(Error::Semantic(format!(
                        "restriction [{}, {}] lies outside [{}, {}]",
                        r.lo, r.hi, outer.lo, outer.hi
                    )));
                }
            }
        }
        for pm in &self.point_masses {
            if !(pm.mass > 0.0 && pm.mass.is_finite()) {
                return Err(Error::Semantic(format!("mass {} must be positive", pm.mass)));
            }
            if !pm.location.is_finite() {
                return Err(Error::Semantic("atom location must be finite".into()));
            }
            if self.domain == Domain::UnitCircle && !(0.0..TAU).contains(&pm.location) {
                return Err(Error::Semantic(format!(
                    "atom angle {} outside [0, 2pi)",
                    pm.location
                )));
            }
        }
        Ok(())
    }

    /// Density of the absolutely continuous part (with respect to `dx`, or
    /// `dtheta/2pi` on the circle).
    pub fn ac_density(&self, t: f64) -> f64 {
        let t = match self.domain {
            Domain::UnitCircle => t.rem_euclid(TAU),
            Domain::RealLine => t,
        };
        self.ac_terms.iter().map(|term| term.density(self.domain, t)).sum()
    }

    /// Total mass when every term has a closed-form mass.
    pub fn closed_form_mass(&self) -> Option<f64> {
        let mut total: f64 = self.point_masses.iter().map(|p| p.mass).sum();
        for term in &self.ac_terms {
            match (&term.weight, term.restriction) {
                (Weight::Builtin(_), None) => total += term.coefficient,
                (Weight::Builtin(b), Some(r)) if r == b.support() => total += term.coefficient,
                _ => return None,
            }
        }
        Some(total)
    }

    /// Smallest interval containing the support.
    pub fn hull(&self) -> Interval {
        if self.domain == Domain::UnitCircle {
            return self.domain.default_interval();
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for term in &self.ac_terms {
            let s = term.support(self.domain);
            lo = lo.min(s.lo);
            hi = hi.max(s.hi);
        }
        for pm in &self.point_masses {
            lo = lo.min(pm.location);
            hi = hi.max(pm.location);
        }
        Interval::new(lo, hi)
    }

    /// Domain the DSL parser would infer from the terms alone.
    fn inferred_domain(&self) -> Option<Domain> {
        for term in &self.ac_terms {
            match &term.weight {
                Weight::Builtin(b) => return Some(b.domain()),
                Weight::Expr(e) => {
                    if let Some(v) = e.variable() {
                        return Some(match v {
                            Variable::X => Domain::RealLine,
                            Variable::Theta => Domain::UnitCircle,
                        });
                    }
                }
            }
        }
        None
    }

    /// `self + other`, both on the same domain.
    pub fn plus(&self, other: &MeasureSpec) -> Result<MeasureSpec> {
        if self.domain != other.domain {
            return Err(Error::Semantic("cannot add measures on different domains".into()));
        }
        let mut ac = self.ac_terms.clone();
        ac.extend(other.ac_terms.iter().cloned());
        let mut pm = self.point_masses.clone();
        pm.extend(other.point_masses.iter().copied());
        MeasureSpec::new(self.domain, ac, pm)
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inferred_domain().unwrap_or(Domain::RealLine) != self.domain {
            write!(f, "circle: ")?;
        }
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            Ok(())
        };
        for term in &self.ac_terms {
            sep(f)?;
            if term.coefficient != 1.0 {
                write!(f, "{}*", term.coefficient)?;
            }
            write!(f, "{}", term.weight)?;
            if let Some(r) = term.restriction {
                write!(f, " on [{},{}]", r.lo, r.hi)?;
            }
        }
        for pm in &self.point_masses {
            sep(f)?;
            if pm.mass != 1.0 {
                write!(f, "{}*", pm.mass)?;
            }
            write!(f, "delta({})", pm.location)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct AcTermJson {
    coefficient: f64,
    weight: String,
    #[serde(default)]
    restriction: Option<Interval>,
}

#[derive(Serialize, Deserialize)]
struct MeasureSpecJson {
    domain: Domain,
    ac_terms: Vec<AcTermJson>,
    #[serde(default)]
    point_masses: Vec<PointMass>,
}

impl TryFrom<MeasureSpecJson> for MeasureSpec {
    type Error = Error;

    fn try_from(j: MeasureSpecJson) -> Result<Self> {
        let mut ac_terms = Vec::with_capacity(j.ac_terms.len());
        for t in j.ac_terms {
            let weight = parse::parse_weight(&t.weight, j.domain)?;
            ac_terms.push(AcTerm {
                coefficient: t.coefficient,
                weight,
                restriction: t.restriction,
            });
        }
        MeasureSpec::new(j.domain, ac_terms, j.point_masses)
    }
}

impl From<MeasureSpec> for MeasureSpecJson {
    fn from(s: MeasureSpec) -> Self {
        MeasureSpecJson {
            domain: s.domain,
            ac_terms: s
                .ac_terms
                .into_iter()
                .map(|t| AcTermJson {
                    coefficient: t.coefficient,
                    weight: match t.weight {
                        Weight::Builtin(b) => b.to_string(),
                        Weight::Expr(e) => e.to_string(),
                    },
                    restriction: t.restriction,
                })
                .collect(),
            point_masses: s.point_masses,
        }
    }
}
