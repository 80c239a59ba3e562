use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ExperimentId, MeasureCase};
use super::report::{ExperimentReport, MetricTable};
use super::{
    counting_weights, default_resolution, default_set, grid, kolmogorov_discrete, kolmogorov_to_cdf, Model, SetSpec,
};
use crate::error::{Error, Result};
use crate::measure::{moments, quadrature::gauss_legendre, Domain, Interval, MeasureSpec, NodeKind};
use crate::oprl;
use crate::opuc;
use crate::potential::EquilibriumMeasure;
use crate::spectra::poly_roots;

/// Runs one experiment with defaults filled in.
pub fn run(id: ExperimentId, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let cfg = config.resolved(id)?;
    let value = serde_json::to_value(&cfg).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut r = ExperimentReport::new(id.as_str(), id.title(), value, cfg.seed);
    use ExperimentId::*;
    match id {
        Thm1_5 => dos_equivalence(&cfg, &mut r)?,
        Eq2_9 => moment_gap(&cfg, &mut r)?,
        Eq2_10a => eta_step(&cfg, &mut r)?,
        Prop2_6 => popuc_invariance(&cfg, &mut r)?,
        Thm3_1 => regularity(&cfg, &mut r, Some(Domain::UnitCircle))?,
        Thm5_1 => regularity(&cfg, &mut r, Some(Domain::RealLine))?,
        Thm1_4 => localization(&cfg, &mut r, Some(Domain::UnitCircle))?,
        Thm6_1 => localization(&cfg, &mut r, Some(Domain::RealLine))?,
        Thm1_6 => mate_nevai(&cfg, &mut r, Some(Domain::UnitCircle))?,
        Thm1_7 => mate_nevai(&cfg, &mut r, Some(Domain::RealLine))?,
        Thm7_1 => sandwich(&cfg, &mut r)?,
        Thm7_2 => comparison(&cfg, &mut r)?,
        Eq2_13 => widom(&cfg, &mut r)?,
        Eq2_17 => gauss_exactness(&cfg, &mut r)?,
        Eq2_20 => totik_chain(&cfg, &mut r)?,
    }
    Ok(r)
}

fn model(cfg: &ExperimentConfig, spec: &MeasureSpec, degree: usize) -> Result<Model> {
    let m = cfg.resolution.unwrap_or_else(|| default_resolution(degree));
    Model::new(spec, m, degree, cfg.precision)
}

fn set_of(case: &MeasureCase, spec: &MeasureSpec) -> Result<SetSpec> {
    let set = match &case.set {
        Some(s) => SetSpec::parse(s)?,
        None => default_set(spec),
    };
    let circle = set == SetSpec::Circle;
    if circle != (spec.domain == Domain::UnitCircle) {
        return Err(Error::InvalidArgument(format!(
            "set '{set}' does not match the {} measure '{}'",
            spec.domain.name(),
            case.measure
        )));
    }
    Ok(set)
}

fn require_domain(spec: &MeasureSpec, want: Option<Domain>) -> Result<()> {
    match want {
        Some(d) if d != spec.domain => Err(Error::WrongDomain {
            expected: match d {
                Domain::RealLine => "real-line",
                Domain::UnitCircle => "unit-circle",
            },
        }),
        _ => Ok(()),
    }
}

/// Last half of the sweep (at least one entry).
fn tail(sweep: &[usize]) -> &[usize] {
    let k = (sweep.len() / 2).max(1);
    &sweep[sweep.len() - k..]
}

fn eq_cdf<'a>(eq: &'a EquilibriumMeasure) -> impl Fn(f64) -> f64 + 'a {
    move |x| eq.cdf(x)
}

/// Equilibrium density with respect to `dx`, or `dtheta/2pi` on the circle.
fn eq_density(eq: &EquilibriumMeasure, x: f64) -> f64 {
    if eq.is_circle() {
        1.0
    } else {
        eq.density(x)
    }
}

fn dos_equivalence(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    for (case, spec) in cfg.cases()? {
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax + 1)?;
        let eq = set_of(&case, &spec)?.equilibrium()?;
        let cdf = eq_cdf(&eq);
        let mut t = MetricTable::new(
            &case.measure,
            &["n", "kolmogorov_nu", "kolmogorov_eta", "kolmogorov_nu_eta", "moment_gap"],
        );
        let mut floor = 0.0;
        for &n in &sweep {
            let nu = model.nu(n + 1)?;
            let nw = counting_weights(&nu);
            let eta = model.eta(n)?;
            let k_nu = kolmogorov_to_cdf(&nu.atoms, &nw, &cdf);
            let k_eta = kolmogorov_to_cdf(&eta.nodes, &eta.weights, &cdf);
            let k_both = kolmogorov_discrete((&nu.atoms, &nw), (&eta.nodes, &eta.weights));
            let gap = eta
                .power_moments(10)
                .iter()
                .zip(model.op_zero_moments(n + 1, 10)?)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            floor = eta
                .weights
                .iter()
                .zip(&eta.kinds)
                .filter(|(_, k)| **k == NodeKind::Ac)
                .map(|(w, _)| *w)
                .fold(0.0, f64::max);
            t.push(vec![n as f64, k_nu, k_eta, k_both, gap]);
        }
        let k_nu = t.column("kolmogorov_nu").unwrap();
        let k_eta = t.column("kolmogorov_eta").unwrap();
        let last = k_nu.len() - 1;
        let nf = sweep[last];
        r.trend(format!("{}: kolmogorov(nu_{{n+1}}, rho_E) at n={nf}", case.measure), k_nu[last], 0.05);
        r.trend(format!("{}: kolmogorov(eta_n, rho_E) at n={nf}", case.measure), k_eta[last], 0.05);
        r.trend(format!("{}: kolmogorov(nu) final vs first/4", case.measure), k_nu[last], k_nu[0] / 4.0);
        r.trend(format!("{}: kolmogorov(eta) final vs max(first/4, node weight)", case.measure), k_eta[last], (k_eta[0] / 4.0).max(floor));
        r.tables.push(t);
    }
    Ok(())
}

fn moment_gap(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    let order = cfg.order.unwrap_or(10);
    for (case, spec) in cfg.cases()? {
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax + 1)?;
        let radius = model.support_radius();
        let mut t = MetricTable::new(&case.measure, &["n", "l", "gap", "bound"]);
        for &n in &sweep {
            let eta = model.eta(n)?.power_moments(order);
            let nu = model.op_zero_moments(n + 1, order)?;
            let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
            for l in 0..=order {
                let gap = (eta[l] - nu[l]).norm();
                let bound = 2.0 * l as f64 * radius.powi(l as i32) / (n + 1) as f64 + 1e-9;
                t.push(vec![n as f64, l as f64, gap, bound]);
                if gap - bound > worst.0 {
                    worst = (gap - bound, gap, bound);
                }
            }
            r.bound(format!("{}: n={n} worst moment gap", case.measure), worst.1, worst.2);
        }
        r.tables.push(t);
    }
    Ok(())
}

fn eta_step(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    for (case, spec) in cfg.cases()? {
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax + 1)?;
        let mut t = MetricTable::new(&case.measure, &["n", "tv", "bound"]);
        for &n in &sweep {
            let tv = model.eta(n)?.tv_distance(&model.eta(n + 1)?)?;
            let bound = 2.0 / (n + 1) as f64;
            t.push(vec![n as f64, tv, bound]);
            r.bound(format!("{}: n={n} tv step", case.measure), tv, bound);
        }
        let tv = t.column("tv").unwrap();
        if sweep.len() >= 2 && tv.iter().all(|&v| v > 1e-13) {
            let xs: Vec<f64> = sweep.iter().map(|&n| (n as f64).ln()).collect();
            let ys: Vec<f64> = tv.iter().map(|v| v.ln()).collect();
            let slope = regression_slope(&xs, &ys);
            r.info(format!("{}: log-log slope of the tv step", case.measure), slope, 0.0);
        }
        r.tables.push(t);
    }
    Ok(())
}

fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn popuc_invariance(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    let order = cfg.order.unwrap_or(10);
    let pairs = cfg.beta_pairs.unwrap_or(5);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for (case, spec) in cfg.cases()? {
        require_domain(&spec, Some(Domain::UnitCircle))?;
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax)?;
        let Model::Circle { coefficients: v, .. } = &model else { unreachable!() };
        let mut t = MetricTable::new(
            &case.measure,
            &["n", "pair", "beta", "beta_prime", "max_excess", "unimodularity"],
        );
        for &n in &sweep {
            let mut dev_max: f64 = 0.0;
            let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
            for p in 0..pairs {
                let (t1, t2): (f64, f64) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
                let (b1, b2) = (Complex64::from_polar(1.0, t1), Complex64::from_polar(1.0, t2));
                let mut dev_pair: f64 = 0.0;
                for b in [b1, b2] {
                    if n <= opuc::COEFFICIENT_ROOT_CAP {
                        let roots = poly_roots(&opuc::popuc(v, n, b)?)?;
                        let d = roots.roots.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
                        dev_pair = dev_pair.max(d);
                    }
                }
                let m1 = model.nu_beta(n + 1, b1)?.power_moments(order);
                let m2 = model.nu_beta(n + 1, b2)?.power_moments(order);
                let mut excess = f64::NEG_INFINITY;
                for l in 0..=order {
                    let diff = (m1[l] - m2[l]).norm();
                    let bound = 4.0 * l as f64 / (n + 1) as f64 + 1e-9;
                    excess = excess.max(diff - bound);
                    if diff - bound > worst.0 {
                        worst = (diff - bound, diff, bound);
                    }
                }
                dev_max = dev_max.max(dev_pair);
                t.push(vec![n as f64, p as f64, t1, t2, excess, dev_pair]);
            }
            r.bound(format!("{}: n={n} worst beta-pair moment difference", case.measure), worst.1, worst.2);
            r.bound(format!("{}: n={n} max ||z|-1| of paraorthogonal zeros", case.measure), dev_max, opuc::UNIMODULARITY_TOL);
        }
        r.tables.push(t);
    }
    Ok(())
}

fn regularity(cfg: &ExperimentConfig, r: &mut ExperimentReport, domain: Option<Domain>) -> Result<()> {
    for (case, spec) in cfg.cases()? {
        require_domain(&spec, domain)?;
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax)?;
        let set = set_of(&case, &spec)?;
        let eq = set.equilibrium()?;
        let cap = eq.capacity();
        let cdf = eq_cdf(&eq);
        let mut t = MetricTable::new(&case.measure, &["n", "geometric_mean", "capacity", "kolmogorov_nu"]);
        for &n in &sweep {
            let gm = model.geometric_mean(n)?;
            let nu = model.nu(n)?;
            let k = kolmogorov_to_cdf(&nu.atoms, &counting_weights(&nu), &cdf);
            t.push(vec![n as f64, gm, cap, k]);
        }
        let last = t.rows.last().unwrap().clone();
        let tol = match &set {
            SetSpec::Union(v) if v.len() > 1 => 0.03,
            _ => 0.02,
        };
        let nf = sweep.last().unwrap();
        r.trend(format!("{}: |geometric mean - C(E)| at n={nf}", case.measure), (last[1] - cap).abs(), tol);
        r.trend(format!("{}: kolmogorov(nu_n, rho_E) at n={nf}", case.measure), last[3], 0.05);
        r.tables.push(t);
    }
    Ok(())
}

/// Composite Gauss–Legendre nodes and weights on `span`.
fn panel_rule(span: Interval, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = span.len() / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = span.lo + h * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

fn localization(cfg: &ExperimentConfig, r: &mut ExperimentReport, domain: Option<Domain>) -> Result<()> {
    let [lo, hi] = cfg.window.ok_or_else(|| Error::InvalidArgument("localization needs a window".into()))?;
    let window = Interval::new(lo, hi);
    for (case, spec) in cfg.cases()? {
        require_domain(&spec, domain)?;
        if window.len() <= 0.0 || !spec.hull().contains_interval(&window) {
            return Err(Error::Precondition(format!(
                "window [{lo}, {hi}] must lie inside the support hull of '{}'",
                case.measure
            )));
        }
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax)?;
        let eq = set_of(&case, &spec)?.equilibrium()?;
        let (qx, qw) = panel_rule(window, 64, 16);
        // circle integrals are taken against dtheta/2pi
        let norm = if spec.domain == Domain::UnitCircle { 1.0 / TAU } else { 1.0 };
        let w: Vec<f64> = qx.iter().map(|&x| spec.ac_density(x)).collect();
        if w.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Precondition(format!(
                "'{}' must have a positive weight on [{lo}, {hi}]",
                case.measure
            )));
        }
        let rho: Vec<f64> = qx.iter().map(|&x| eq_density(&eq, x)).collect();
        let atoms: Vec<f64> = spec.point_masses.iter().map(|p| p.location).collect();
        let g: Vec<f64> = grid(window)
            .into_iter()
            .filter(|x| atoms.iter().all(|a| (x - a).abs() > 0.1 * window.len()))
            .collect();
        let wg: Vec<f64> = g.iter().map(|&x| spec.ac_density(x)).collect();
        let rg: Vec<f64> = g.iter().map(|&x| eq_density(&eq, x)).collect();
        let mut t = MetricTable::new(&case.measure, &["n", "s1_atoms", "s2_l1", "min_ratio"]);
        for &n in &sweep {
            let eta = model.eta(n)?;
            let s1 = eta.atom_mass_in(window);
            let k = model.kernel(&qx, n)?;
            let scale = 1.0 / (n + 1) as f64;
            let s2: f64 = (0..qx.len())
                .map(|i| qw[i] * norm * (rho[i] - w[i] * k[i] * scale).abs())
                .sum();
            let kg = model.kernel(&g, n)?;
            let ratio = (0..g.len())
                .filter(|&i| rg[i] > 0.0)
                .map(|i| wg[i] * kg[i] * scale / rg[i])
                .fold(f64::INFINITY, f64::min);
            t.push(vec![n as f64, s1, s2, ratio]);
        }
        let s1 = t.column("s1_atoms").unwrap();
        let s2 = t.column("s2_l1").unwrap();
        let last = s1.len() - 1;
        let nf = sweep[last];
        r.trend(format!("{}: S1 final vs first/3", case.measure), s1[last], s1[0] / 3.0);
        r.trend(format!("{}: S1 at n={nf}", case.measure), s1[last], 0.05);
        r.trend(format!("{}: S2 final vs first/3", case.measure), s2[last], s2[0] / 3.0);
        let ratio = t.rows[last][3];
        r.info(format!("{}: one-sided liminf deficit 1 - min w K_n/((n+1) rho_E)", case.measure), 1.0 - ratio, 0.1);
        r.tables.push(t);
    }
    Ok(())
}

/// Nine grid points where the a.c. density is comfortably positive and no
/// atom sits nearby.
fn default_points(spec: &MeasureSpec, set: &SetSpec) -> Vec<f64> {
    let g = grid(set.hull());
    let h = g[1] - g[0];
    let inside = |x: f64| match set {
        SetSpec::Circle => true,
        SetSpec::Union(v) => v.iter().any(|i| x > i.lo && x < i.hi),
    };
    let cand: Vec<f64> = g
        .into_iter()
        .filter(|&x| inside(x))
        .filter(|&x| spec.point_masses.iter().all(|p| (x - p.location).abs() > 2.0 * h))
        .collect();
    let mut dens: Vec<f64> = cand.iter().map(|&x| spec.ac_density(x)).collect();
    dens.sort_by(f64::total_cmp);
    let floor = 0.25 * dens[dens.len() / 2];
    let ok: Vec<f64> = cand.into_iter().filter(|&x| spec.ac_density(x) >= floor).collect();
    let count = ok.len();
    (0..9).map(|k| ok[((2 * k + 1) * count) / 18]).collect()
}

fn mate_nevai(cfg: &ExperimentConfig, r: &mut ExperimentReport, domain: Option<Domain>) -> Result<()> {
    for (case, spec) in cfg.cases()? {
        require_domain(&spec, domain)?;
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        if sweep[0] == 0 {
            return Err(Error::InvalidArgument("n lambda_{n-1} needs n >= 1".into()));
        }
        let model = model(cfg, &spec, nmax - 1)?;
        let set = set_of(&case, &spec)?;
        let eq = set.equilibrium()?;
        let points = if cfg.points.is_empty() { default_points(&spec, &set) } else { cfg.points.clone() };
        let bounds: Vec<f64> = points.iter().map(|&x| spec.ac_density(x) / eq_density(&eq, x)).collect();
        if let Some(i) = bounds.iter().position(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(Error::Precondition(format!(
                "point {} is not where the weight and equilibrium density are positive",
                points[i]
            )));
        }
        let mut t = MetricTable::new(&case.measure, &["n", "point", "n_lambda", "bound", "lower_ratio"]);
        for &n in &sweep {
            let k = model.kernel(&points, n - 1)?;
            for (i, &x) in points.iter().enumerate() {
                let nl = n as f64 / k[i];
                t.push(vec![n as f64, x, nl, bounds[i], bounds[i] / nl]);
            }
        }
        let tail_ns = tail(&sweep);
        for (i, &x) in points.iter().enumerate() {
            let tail_max = t
                .rows
                .iter()
                .filter(|row| row[1] == x && tail_ns.contains(&(row[0] as usize)))
                .map(|row| row[2])
                .fold(f64::NEG_INFINITY, f64::max);
            r.trend(
                format!("{}: tail max n lambda_{{n-1}} at {x:.6}", case.measure),
                tail_max,
                1.05 * bounds[i],
            );
        }
        r.tables.push(t);
    }
    Ok(())
}

/// Interior grid of `count` points in `(lo, hi)`.
fn inner_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let h = (hi - lo) / (count + 1) as f64;
    (1..=count).map(|i| lo + h * i as f64).collect()
}

fn sandwich(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    let [lo, hi] = cfg.window.unwrap_or([-0.5, 0.5]);
    let a = hi;
    if !(a > 0.0 && a < 1.0 && (lo + a).abs() < 1e-12) {
        return Err(Error::InvalidArgument("the sandwich window must be [-a, a] with 0 < a < 1".into()));
    }
    for (case, spec) in cfg.cases()? {
        require_domain(&spec, Some(Domain::RealLine))?;
        if !Interval::new(-1.0, 1.0).contains_interval(&spec.hull()) {
            return Err(Error::Precondition(format!("'{}' must live on [-1, 1]", case.measure)));
        }
        if grid(Interval::new(-a, a)).iter().any(|&x| !(spec.ac_density(x) > 0.0)) {
            return Err(Error::Precondition(format!("'{}' must have a positive weight on [-a, a]", case.measure)));
        }
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax)?;
        let xs = inner_grid(-a, a, 33);
        let lower: Vec<f64> = xs.iter().map(|x| x.asin() / PI).collect();
        let upper: Vec<f64> = xs.iter().map(|x| (x / a).asin() / PI).collect();
        let mut t = MetricTable::new(&case.measure, &["n", "excess", "excess_half_normalization"]);
        for &n in &sweep {
            let nu = model.nu(n)?;
            let f: Vec<f64> = xs.iter().map(|&x| nu.cdf(x)).collect();
            let (mut e1, mut e2) = (0.0f64, 0.0f64);
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    let inc = f[j] - f[i];
                    let (lw, up) = (lower[j] - lower[i], upper[j] - upper[i]);
                    e1 = e1.max(lw - inc).max(inc - up);
                    e2 = e2.max(0.5 * lw - inc).max(inc - 0.5 * up);
                }
            }
            t.push(vec![n as f64, e1, e2]);
        }
        let last = t.rows.last().unwrap().clone();
        let nf = sweep.last().unwrap();
        r.trend(format!("{}: sandwich excess at n={nf}", case.measure), last[1], 0.05);
        r.info(format!("{}: sandwich excess, (2 pi)^-1 normalization, n={nf}", case.measure), last[2], 0.05);
        r.tables.push(t);
    }
    Ok(())
}

/// Checks `mu1 <= mu2` and `mu1 = mu2` on `window` term by term.
pub fn spec_dominates(mu1: &MeasureSpec, mu2: &MeasureSpec, window: Interval) -> Result<()> {
    if mu1.domain != mu2.domain {
        return Err(Error::Precondition("mu1 and mu2 live on different domains".into()));
    }
    let d = mu1.domain;
    let fail = |msg: String| Err(Error::Precondition(msg));
    for (i, t1) in mu1.ac_terms.iter().enumerate() {
        let s1 = t1.support(d);
        for t in &mu1.ac_terms[i + 1..] {
            if t.weight == t1.weight && t.support(d).intersect(&s1).is_some_and(|x| x.len() > 0.0) {
                return fail("mu1 has overlapping terms with the same weight".into());
            }
        }
        let covered = mu2.ac_terms.iter().any(|t2| {
            t2.weight == t1.weight && t2.coefficient >= t1.coefficient && t2.support(d).contains_interval(&s1)
        });
        if !covered {
            return fail(format!("term '{}' of mu1 is not dominated by a term of mu2", t1.weight));
        }
    }
    for p in &mu1.point_masses {
        let m2: f64 = mu2
            .point_masses
            .iter()
            .filter(|q| q.location == p.location)
            .map(|q| q.mass)
            .sum();
        if m2 < p.mass {
            return fail(format!("atom at {} of mu1 exceeds mu2", p.location));
        }
    }
    // equality on the window
    for t2 in &mu2.ac_terms {
        let Some(part) = t2.support(d).intersect(&window) else { continue };
        if part.len() <= 0.0 {
            continue;
        }
        let mut pieces: Vec<Interval> = mu1
            .ac_terms
            .iter()
            .filter(|t1| t1.weight == t2.weight && t1.coefficient == t2.coefficient)
            .filter_map(|t1| t1.support(d).intersect(&part))
            .collect();
        pieces.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        let mut reach = part.lo;
        for p in pieces {
            if p.lo <= reach {
                reach = reach.max(p.hi);
            }
        }
        if reach < part.hi {
            return fail(format!("mu1 and mu2 differ on the window through the term '{}'", t2.weight));
        }
    }
    for q in &mu2.point_masses {
        if q.location > window.lo && q.location < window.hi {
            let m1: f64 = mu1
                .point_masses
                .iter()
                .filter(|p| p.location == q.location)
                .map(|p| p.mass)
                .sum();
            if m1 != q.mass {
                return fail(format!("atom at {} differs between mu1 and mu2 on the window", q.location));
            }
        }
    }
    Ok(())
}

fn comparison(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    let (Some(t1), Some(t2)) = (&cfg.mu1, &cfg.mu2) else {
        return Err(Error::InvalidArgument("comparison needs mu1 and mu2".into()));
    };
    let mu1 = crate::measure::parse_measure(t1)?;
    let mu2 = crate::measure::parse_measure(t2)?;
    require_domain(&mu1, Some(Domain::RealLine))?;
    let [lo, hi] = cfg.window.unwrap_or([-0.5, 0.5]);
    spec_dominates(&mu1, &mu2, Interval::new(lo, hi))?;
    let sweep = cfg.sweep_for(Domain::RealLine)?;
    let nmax = *sweep.last().unwrap();
    let m1 = model(cfg, &mu1, nmax)?;
    let m2 = model(cfg, &mu2, nmax)?;
    let g = grid(Interval::new(lo, hi));
    let mut worst = vec![f64::NEG_INFINITY; nmax + 1];
    for &x in &g {
        let k1 = m1.kernel_sequence(x, nmax)?;
        let k2 = m2.kernel_sequence(x, nmax)?;
        for n in 0..=nmax {
            worst[n] = worst[n].max((k2[n] - k1[n]) / k1[n]);
        }
    }
    let mut ordering = MetricTable::new("kernel_ordering", &["n", "max_relative_excess"]);
    for (n, w) in worst.iter().enumerate() {
        ordering.push(vec![n as f64, *w]);
    }
    let overall = worst.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    r.bound(format!("K^(2)_n <= K^(1)_n on the grid for all n <= {nmax}"), overall, 1e-12);
    let xs = inner_grid(lo, hi, 33);
    let mut inc = MetricTable::new("increments", &["n", "max_excess"]);
    for &n in &sweep {
        let (nu1, nu2) = (m1.nu(n)?, m2.nu(n)?);
        let f1: Vec<f64> = xs.iter().map(|&x| nu1.cdf(x)).collect();
        let f2: Vec<f64> = xs.iter().map(|&x| nu2.cdf(x)).collect();
        let mut e = f64::NEG_INFINITY;
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                e = e.max((f2[j] - f2[i]) - (f1[j] - f1[i]));
            }
        }
        inc.push(vec![n as f64, e]);
    }
    let last = inc.rows.last().unwrap()[1];
    r.trend(format!("nu^(2) increments <= nu^(1) increments + 0.03 at n={nmax}"), last, 0.03);
    r.tables.push(ordering);
    r.tables.push(inc);
    Ok(())
}

fn widom(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    let order = cfg.order.unwrap_or(16);
    for (case, spec) in cfg.cases()? {
        require_domain(&spec, Some(Domain::UnitCircle))?;
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax)?;
        let Model::Circle { coefficients: v, .. } = &model else { unreachable!() };
        let mut t = MetricTable::new(&case.measure, &["n", "discrepancy", "max_distance_to_circle"]);
        for &n in &sweep {
            let z = opuc::opuc_zeros_ggt(v, n)?;
            let (disc, dist) = balayage_discrepancy(&z, order);
            t.push(vec![n as f64, disc, dist]);
        }
        let disc = t.column("discrepancy").unwrap();
        let dist = t.column("max_distance_to_circle").unwrap();
        let last = disc.len() - 1;
        r.trend(format!("{}: discrepancy final vs first/3", case.measure), disc[last], disc[0] / 3.0);
        let rise = dist.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        r.trend(format!("{}: largest increase of max zero distance to the circle", case.measure), rise, 0.0);
        r.tables.push(t);
    }
    Ok(())
}

/// `max_{j,k <= L} |int z^j conj(z)^k dnu - int e^{i(j-k)theta} dP*(nu)|`
/// for the counting measure on `z`, and the largest `1 - |z|`.
pub(crate) fn balayage_discrepancy(z: &[Complex64], order: usize) -> (f64, f64) {
    let n = z.len() as f64;
    let mut mixed = vec![vec![Complex64::new(0.0, 0.0); order + 1]; order + 1];
    for &p in z {
        let mut pj = Complex64::new(1.0 / n, 0.0);
        for row in mixed.iter_mut() {
            let mut pk = pj;
            for cell in row.iter_mut() {
                *cell += pk;
                pk *= p.conj();
            }
            pj *= p;
        }
    }
    let analytic: Vec<Complex64> = (0..=order).map(|j| mixed[j][0]).collect();
    let mut disc: f64 = 0.0;
    for j in 0..=order {
        for k in 0..=order {
            let target = if j >= k { analytic[j - k] } else { analytic[k - j].conj() };
            disc = disc.max((mixed[j][k] - target).norm());
        }
    }
    let dist = z.iter().map(|p| 1.0 - p.norm()).fold(f64::NEG_INFINITY, f64::max);
    (disc, dist)
}

fn gauss_exactness(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    for (case, spec) in cfg.cases()? {
        require_domain(&spec, Some(Domain::RealLine))?;
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax)?;
        let Model::Real { measure, coefficients } = &model else { unreachable!() };
        let exact = moments(measure, 2 * nmax - 1)?;
        let mut t = MetricTable::new(&case.measure, &["n", "degree", "relative_error"]);
        for &n in &sweep {
            let (x, w) = oprl::gauss_quadrature(coefficients, n)?;
            let mut worst: f64 = 0.0;
            for d in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let scale = measure.integrate(|y| y.abs().powi(d as i32));
                let err = (q - exact.values[d].re).abs() / scale;
                worst = worst.max(err);
                t.push(vec![n as f64, d as f64, err]);
            }
            r.bound(format!("{}: n={n} max relative error up to degree {}", case.measure, 2 * n - 1), worst, 1e-10);
        }
        r.tables.push(t);
    }
    Ok(())
}

fn totik_chain(cfg: &ExperimentConfig, r: &mut ExperimentReport) -> Result<()> {
    let max_m = cfg.order.unwrap_or(4).max(1);
    for (case, spec) in cfg.cases()? {
        require_domain(&spec, Some(Domain::RealLine))?;
        if !Interval::new(-1.0, 1.0).contains_interval(&spec.hull()) {
            return Err(Error::Precondition(format!(
                "'{}' must live on [-1, 1] so that ((1 +- x)/2)^m >= 0 on its hull",
                case.measure
            )));
        }
        let sweep = cfg.sweep_for(spec.domain)?;
        let nmax = *sweep.last().unwrap();
        let model = model(cfg, &spec, nmax + max_m)?;
        let Model::Real { coefficients, .. } = &model else { unreachable!() };
        let mut t = MetricTable::new(&case.measure, &["n", "m", "sign", "lhs", "gauss_sum", "rhs"]);
        for &n in &sweep {
            let eta = model.eta(n)?;
            let (mut id_err, mut excess): (f64, f64) = (0.0, f64::NEG_INFINITY);
            for m in 1..=max_m {
                let big_n = n + m;
                let (x, w) = oprl::gauss_quadrature(coefficients, big_n)?;
                let k = model.kernel(&x, n)?;
                for sign in [1.0, -1.0] {
                    let q = |y: f64| ((1.0 + sign * y) / 2.0).powi(m as i32);
                    let lhs: f64 = eta.nodes.iter().zip(&eta.weights).map(|(&y, &wt)| wt * q(y)).sum();
                    let scale = 1.0 / (n + 1) as f64;
                    let mid: f64 = (0..big_n).map(|j| w[j] * q(x[j]) * k[j] * scale).sum();
                    let rhs: f64 = x.iter().map(|&y| q(y)).sum::<f64>() * scale;
                    id_err = id_err.max((lhs - mid).abs() / lhs.abs().max(1.0));
                    excess = excess.max(lhs - rhs);
                    t.push(vec![n as f64, m as f64, sign, lhs, mid, rhs]);
                }
            }
            r.bound(format!("{}: n={n} Gauss identity for int Q K_n dmu/(n+1)", case.measure), id_err, 1e-10);
            r.bound(format!("{}: n={n} max (int Q d eta_n - (n+1)^-1 sum Q(x_j))", case.measure), excess, 1e-12);
        }
        r.tables.push(t);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::parse_measure;

    #[test]
    fn dominance_of_restricted_chebyshev() {
        let mu1 = parse_measure("chebyshev on [-0.5,0.5]").unwrap();
        let mu2 = parse_measure("chebyshev").unwrap();
        let w = Interval::new(-0.5, 0.5);
        spec_dominates(&mu1, &mu2, w).unwrap();
        assert!(spec_dominates(&mu2, &mu1, w).is_err());
        let mu3 = parse_measure("chebyshev + legendre").unwrap();
        assert!(spec_dominates(&mu1, &mu3, w).is_err());
        spec_dominates(&mu2, &mu2, w).unwrap();
    }

    #[test]
    fn balayage_discrepancy_vanishes_on_the_circle() {
        let z: Vec<Complex64> = (0..7).map(|k| Complex64::from_polar(1.0, 0.3 + k as f64)).collect();
        let (d, dist) = balayage_discrepancy(&z, 5);
        assert!(d < 1e-14 && dist.abs() < 1e-15);
        let (d, _) = balayage_discrepancy(&[Complex64::new(0.0, 0.0)], 0);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn tail_is_last_half() {
        assert_eq!(tail(&[10, 20, 40, 80, 160]), &[80, 160]);
        assert_eq!(tail(&[8, 16, 32, 64]), &[32, 64]);
        assert_eq!(tail(&[5]), &[5]);
    }
}
