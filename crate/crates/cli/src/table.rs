use std::f64::consts::TAU;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use oplab::lab::{default_set, grid, MetricTable, Model, SetSpec};
use oplab::measure::{parse_measure, Domain, Interval, NodeKind};
use oplab::potential::{balayage, EquilibriumMeasure};
use oplab::{oprl, opuc};

use crate::output::{out_dir, write};
use crate::recur::build_model;
use crate::{Common, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// `K_n` and `lambda_n` on the evaluation grid.
    Kernel,
    /// Equilibrium density of a set.
    Density,
    /// Zeros of `p_n` or `Phi_n` (or of a paraorthogonal polynomial with --beta).
    Zeros,
    /// Balayage of an atom or of the zeros of `Phi_n`.
    Balayage,
    /// The measure `(n+1)^{-1} K_n dmu` node by node.
    Eta,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Kernel => "kernel",
            Kind::Density => "density",
            Kind::Zeros => "zeros",
            Kind::Balayage => "balayage",
            Kind::Eta => "eta",
        }
    }
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    measure: Option<String>,
    /// Degree(s); several are allowed for `kernel`.
    #[arg(long, value_delimiter = ',', default_value = "20")]
    n: Vec<usize>,
    /// Set for `density`: '[a,b]u[c,d]...' or 'circle'.
    #[arg(long)]
    set: Option<String>,
    /// Rows per interval for `density`.
    #[arg(long, default_value_t = 2049)]
    rows: usize,
    /// Fourier order for `balayage`.
    #[arg(long = "L", default_value_t = 64)]
    l: usize,
    /// Atom `r,phi` for `balayage` instead of a measure.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    /// Boundary angle for paraorthogonal zeros.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Quadrature resolution.
    #[arg(long = "M")]
    m: Option<usize>,
    #[command(flatten)]
    common: Common,
}

fn require_measure(a: &TableArgs) -> Result<&str, Failure> {
    a.measure
        .as_deref()
        .ok_or_else(|| Failure::Usage(format!("table {} needs --measure", a.kind.name())))
}

fn last_n(a: &TableArgs) -> usize {
    *a.n.last().expect("clap supplies a default")
}

fn circle_grid() -> Vec<f64> {
    grid(Interval::new(0.0, TAU))
}

fn kernel(a: &TableArgs) -> Result<MetricTable, Failure> {
    let nmax = *a.n.iter().max().unwrap();
    let model = build_model(require_measure(a)?, nmax, a.m, &a.common)?;
    let (var, points) = match model.domain() {
        Domain::RealLine => ("x", grid(parse_measure(require_measure(a)?)?.hull())),
        Domain::UnitCircle => ("theta", circle_grid()),
    };
    let mut t = MetricTable::new("kernel", &[var, "n", "K", "lambda"]);
    for &n in &a.n {
        for (x, k) in points.iter().zip(model.kernel(&points, n)?) {
            t.push(vec![*x, n as f64, k, 1.0 / k]);
        }
    }
    Ok(t)
}

/// Cosine-spaced rows in every interval plus a zero row at each endpoint,
/// where the density is not finite. The grid offset `1/sqrt(3)` cancels
/// the leading endpoint error of the trapezoid rule over the rows.
fn density_rows(e: &EquilibriumMeasure, rows: usize) -> Vec<(f64, f64)> {
    let shift = 1.0 / 3f64.sqrt();
    let mut out = Vec::new();
    for iv in e.intervals() {
        let (mid, half) = (0.5 * (iv.lo + iv.hi), 0.5 * iv.len());
        out.push((iv.lo, 0.0));
        for i in 0..rows {
            let t = std::f64::consts::PI * (i as f64 + shift) / (rows as f64 - 1.0 + 2.0 * shift);
            let x = mid - half * t.cos();
            out.push((x, e.density(x)));
        }
        out.push((iv.hi, 0.0));
    }
    out
}

fn density(a: &TableArgs) -> Result<MetricTable, Failure> {
    let set = match (&a.set, &a.measure) {
        (Some(s), _) => SetSpec::parse(s)?,
        (None, Some(m)) => default_set(&parse_measure(m)?),
        (None, None) => return Err(Failure::Usage("table density needs --set or --measure".into())),
    };
    if a.rows < 2 || a.rows > 100_000 {
        return Err(Failure::Usage(format!("--rows {} outside [2, 100000]", a.rows)));
    }
    let e = set.equilibrium()?;
    Ok(if e.is_circle() {
        let mut t = MetricTable::new("density", &["theta", "rho"]);
        for i in 0..=a.rows {
            let theta = TAU * i as f64 / a.rows as f64;
            t.push(vec![theta, e.density(theta)]);
        }
        t
    } else {
        let mut t = MetricTable::new("density", &["x", "rho"]);
        for (x, r) in density_rows(&e, a.rows) {
            t.push(vec![x, r]);
        }
        t
    })
}

fn zeros(a: &TableArgs) -> Result<MetricTable, Failure> {
    let n = last_n(a);
    let model = build_model(require_measure(a)?, n, a.m, &a.common)?;
    Ok(match (&model, a.beta) {
        (Model::Real { coefficients, .. }, None) => {
            let mut t = MetricTable::new("zeros", &["k", "x"]);
            let mut z = oprl::zeros(coefficients, n - 1)?.atoms;
            z.sort_by(f64::total_cmp);
            for (k, x) in z.into_iter().enumerate() {
                t.push(vec![(k + 1) as f64, x]);
            }
            t
        }
        (Model::Circle { coefficients, .. }, None) => {
            let mut t = MetricTable::new("zeros", &["k", "re", "im", "modulus"]);
            for (k, z) in opuc::opuc_zeros_ggt(coefficients, n)?.into_iter().enumerate() {
                t.push(vec![(k + 1) as f64, z.re, z.im, z.norm()]);
            }
            t
        }
        (Model::Circle { .. }, Some(beta)) => {
            let mut t = MetricTable::new("zeros", &["k", "theta"]);
            let nu = model.nu_beta(n, Complex64::from_polar(1.0, beta))?;
            for (k, theta) in nu.atoms.into_iter().enumerate() {
                t.push(vec![(k + 1) as f64, theta]);
            }
            t
        }
        (Model::Real { .. }, Some(_)) => return Err(Failure::Usage("--beta applies to circle measures".into())),
    })
}

fn balayage_table(a: &TableArgs) -> Result<MetricTable, Failure> {
    let points = match (&a.point, &a.measure) {
        (Some(p), _) if p.len() == 2 => vec![Complex64::from_polar(p[0], p[1])],
        (Some(_), _) => return Err(Failure::Usage("--point takes r,phi".into())),
        (None, Some(m)) => {
            let n = last_n(a);
            match build_model(m, n, a.m, &a.common)? {
                Model::Circle { coefficients, .. } => opuc::opuc_zeros_ggt(&coefficients, n)?,
                Model::Real { .. } => return Err(Failure::Usage("table balayage needs a circle measure".into())),
            }
        }
        (None, None) => return Err(Failure::Usage("table balayage needs --point r,phi or --measure".into())),
    };
    let b = balayage(&points, a.l)?;
    let mut t = MetricTable::new("balayage", &["theta", "fejer", "dirichlet", "poisson"]);
    for theta in circle_grid() {
        t.push(vec![
            theta,
            b.density_fejer(theta),
            b.density_dirichlet(theta),
            b.density_exact(theta).unwrap_or(f64::NAN),
        ]);
    }
    Ok(t)
}

fn eta(a: &TableArgs) -> Result<MetricTable, Failure> {
    let n = last_n(a);
    let text = require_measure(a)?;
    let spec = parse_measure(text)?;
    let model = build_model(text, n, a.m, &a.common)?;
    let e = model.eta(n)?;
    let var = if model.domain() == Domain::RealLine { "x" } else { "theta" };
    let mut t = MetricTable::new("eta", &[var, "kernel", "density", "weight", "atom"]);
    for i in 0..e.nodes.len() {
        let x = e.nodes[i];
        let atom = e.kinds[i] == NodeKind::Atom;
        let density = if atom { 0.0 } else { e.node_densities[i] * spec.ac_density(x) };
        t.push(vec![x, e.node_densities[i], density, e.weights[i], if atom { 1.0 } else { 0.0 }]);
    }
    Ok(t)
}

pub fn run(a: TableArgs) -> Result<(), Failure> {
    if a.n.iter().any(|&n| n == 0) {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let t = match a.kind {
        Kind::Kernel => kernel(&a)?,
        Kind::Density => density(&a)?,
        Kind::Zeros => zeros(&a)?,
        Kind::Balayage => balayage_table(&a)?,
        Kind::Eta => eta(&a)?,
    };
    let path = out_dir(&a.common)?.join(format!("table-{}.csv", a.kind.name()));
    write(&path, &t.to_csv())?;
    println!("{} rows ({}) -> {}", t.rows.len(), t.columns.join(","), path.display());
    Ok(())
}
