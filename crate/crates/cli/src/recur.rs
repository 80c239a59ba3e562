use clap::Args;
use oplab::lab::{default_resolution, MetricTable, Model, CAP_M, CAP_N_CIRCLE, CAP_N_REAL};
use oplab::measure::{parse_measure, Domain};

use crate::output::{out_dir, slug, write};
use crate::{Common, Failure};

#[derive(Debug, Args)]
pub struct RecurArgs {
    /// Measure in the DSL, e.g. 'legendre + 0.5*delta(0.3)'.
    #[arg(long)]
    measure: String,
    /// Number of coefficients.
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Quadrature resolution.
    #[arg(long = "M")]
    m: Option<usize>,
    #[command(flatten)]
    common: Common,
}

pub fn check_caps(domain: Domain, n: usize, m: Option<usize>) -> Result<(), Failure> {
    let cap = match domain {
        Domain::RealLine => CAP_N_REAL,
        Domain::UnitCircle => CAP_N_CIRCLE,
    };
    if n == 0 || n > cap {
        return Err(Failure::Usage(format!("n = {n} outside [1, {cap}] for a {} measure", domain.name())));
    }
    if let Some(m) = m {
        if !(8..=CAP_M).contains(&m) {
            return Err(Failure::Usage(format!("M = {m} outside [8, {CAP_M}]")));
        }
    }
    Ok(())
}

pub fn build_model(
    measure: &str,
    degree: usize,
    m: Option<usize>,
    common: &Common,
) -> Result<Model, Failure> {
    let spec = parse_measure(measure)?;
    check_caps(spec.domain, degree, m)?;
    let precision = common.precision.map(Into::into).unwrap_or_default();
    Ok(Model::new(&spec, m.unwrap_or_else(|| default_resolution(degree)), degree, precision)?)
}

pub fn run(a: RecurArgs) -> Result<(), Failure> {
    let model = build_model(&a.measure, a.n, a.m, &a.common)?;
    let table = match &model {
        Model::Real { coefficients: c, .. } => {
            let mut t = MetricTable::new("recur", &["k", "a_k", "b_k"]);
            for k in 1..=a.n {
                t.push(vec![k as f64, c.a[k - 1], c.b[k - 1]]);
            }
            t
        }
        Model::Circle { coefficients: v, .. } => {
            let mut t = MetricTable::new("recur", &["j", "re_alpha", "im_alpha", "rho"]);
            for j in 0..a.n {
                t.push(vec![j as f64, v.alpha[j].re, v.alpha[j].im, v.rho[j]]);
            }
            t
        }
    };
    let path = out_dir(&a.common)?.join(format!("recur-{}-n{}.csv", slug(&a.measure), a.n));
    write(&path, &table.to_csv())?;
    println!(
        "{} coefficients of {} ({}, mass {:.15e}) -> {}",
        a.n,
        a.measure,
        model.domain().name(),
        model.measure().mass(),
        path.display()
    );
    Ok(())
}
