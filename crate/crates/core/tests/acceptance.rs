//! The thirteen acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::process::ExitCode;

use num_complex::Complex64;
use oplab::lab::{run, ExperimentConfig, ExperimentId, ExperimentReport, MeasureCase, Model};
use oplab::measure::{parse_measure, Interval};
use oplab::potential::{balayage, equilibrium_interval, equilibrium_union, log_potential, poisson_kernel};
use oplab::spectra::{compression_defect, numerical_rank, trace_moment_kernel, trace_moment_matrix};
use oplab::sum::Precision;
use oplab::{oprl, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_reports(reports: &[ExperimentReport]) -> Self {
        let failures: Vec<String> = reports
            .iter()
            .flat_map(|r| r.failures().map(move |c| format!("{}: {} ({:e} > {:e})", r.id, c.name, c.measured, c.limit)))
            .collect();
        let checks: usize = reports.iter().map(|r| r.checks.iter().filter(|c| c.is_hard()).count()).sum();
        if failures.is_empty() && reports.iter().all(|r| r.passed) {
            Outcome { passed: true, detail: format!("{checks} checks") }
        } else {
            Outcome { passed: false, detail: failures.join("; ") }
        }
    }
}

fn with_measures(measures: &[&str]) -> ExperimentConfig {
    ExperimentConfig {
        measures: measures.iter().map(|m| MeasureCase::new(m)).collect(),
        ..Default::default()
    }
}

fn report(id: ExperimentId, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run(id, cfg)
}

fn moment_gap() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[report(ExperimentId::Eq2_9, &ExperimentConfig::default())?]))
}

fn real_model(text: &str, degree: usize) -> Result<(Model, oprl::JacobiCoefficients)> {
    let spec = parse_measure(text)?;
    let model = Model::new(&spec, 4096, degree, Precision::High)?;
    let coefficients = match &model {
        Model::Real { coefficients, .. } => coefficients.clone(),
        Model::Circle { .. } => unreachable!("real measure expected"),
    };
    Ok((model, coefficients))
}

fn trace_identities() -> Result<Outcome> {
    let mut worst_trace = f64::NEG_INFINITY;
    let mut worst_rank = 0usize;
    let mut rank_ok = true;
    for text in ["chebyshev", "legendre", "jacobi(1,1)", "legendre + 0.5*delta(0.3)"] {
        let (model, c) = real_model(text, 64)?;
        let radius = model.support_radius();
        for n in [1usize, 2, 5, 10, 20, 40] {
            let kernel = oprl::kernel_at_nodes(&c, model.measure(), n)?;
            let t = c.jacobi_matrix(n + 1)?;
            for l in 1..=10u32 {
                let by_kernel = trace_moment_kernel(model.measure(), &kernel, l).re;
                let by_matrix = trace_moment_matrix(&t, l)?;
                let bound = 2.0 * l as f64 * radius.powi(l as i32);
                worst_trace = worst_trace.max((by_kernel - by_matrix).abs() - bound);
            }
        }
        for k in 1..=12usize {
            for l in 1..=10u32 {
                let big = c.jacobi_matrix(k + l as usize)?;
                let defect = compression_defect(&big, k, l)?;
                let scale = radius.powi(l as i32).max(1e-300);
                let (_, sv) = numerical_rank(&defect, 0.0);
                let rank = sv.iter().filter(|&&s| s > 1e-9 * scale).count();
                worst_rank = worst_rank.max(rank.saturating_sub(l as usize));
                rank_ok &= rank <= l as usize;
            }
        }
    }
    Ok(Outcome {
        passed: worst_trace <= 0.0 && rank_ok,
        detail: format!("max(|diff| - bound) = {worst_trace:e}, max rank excess = {worst_rank}"),
    })
}

fn zeros_are_eigenvalues() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for text in ["legendre", "chebyshev", "jacobi(1,1)", "jacobi(0.5,-0.5)", "jacobi(-0.5,0.5)"] {
        let (_, c) = real_model(text, 101)?;
        for n in (1..=100).step_by(3).chain([100]) {
            let zeros = oprl::zeros(&c, n)?;
            let scale = (0..=64)
                .map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / 65.0)
                .map(|x| oprl::eval_orthonormal(&c, x, n + 1).map(|p| p[n + 1].abs()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(1.0, f64::max);
            for &z in &zeros.atoms {
                let p = oprl::eval_orthonormal(&c, z, n + 1)?[n + 1];
                worst = worst.max(p.abs() / scale);
            }
        }
    }
    let (_, c) = real_model("chebyshev", 101)?;
    let mut cheb = 0.0f64;
    for n in 1..=100usize {
        let mut zeros = oprl::zeros(&c, n)?.atoms;
        zeros.sort_by(|a, b| b.total_cmp(a));
        for (k, z) in zeros.iter().enumerate() {
            let exact = ((2 * k + 1) as f64 * PI / (2 * n + 2) as f64).cos();
            cheb = cheb.max((z - exact).abs());
        }
    }
    Ok(Outcome {
        passed: worst <= 1e-7 && cheb <= 1e-8,
        detail: format!("max |p_(n+1)(z)|/scale = {worst:e}, chebyshev zero error = {cheb:e}"),
    })
}

fn gauss_exactness() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[report(ExperimentId::Eq2_17, &ExperimentConfig::default())?]))
}

fn popuc() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[report(ExperimentId::Prop2_6, &ExperimentConfig::default())?]))
}

fn tv_step() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[report(ExperimentId::Eq2_10a, &ExperimentConfig::default())?]))
}

fn regularity() -> Result<Outcome> {
    let real = report(ExperimentId::Thm5_1, &ExperimentConfig::default())?;
    let circle = report(ExperimentId::Thm3_1, &with_measures(&["lebesgue_circle"]))?;
    let mut out = Outcome::from_reports(&[real, circle]);
    let spec = parse_measure("lebesgue_circle")?;
    let model = Model::new(&spec, 4096, 64, Precision::High)?;
    let gm = model.geometric_mean(64)?;
    if gm != 1.0 {
        out.passed = false;
        out.detail.push_str(&format!("; circle geometric mean {gm:e} != 1"));
    }
    Ok(out)
}

fn dos() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[report(ExperimentId::Thm1_5, &with_measures(&["chebyshev", "legendre"]))?]))
}

fn localization() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[
        report(ExperimentId::Thm6_1, &ExperimentConfig::default())?,
        report(ExperimentId::Thm1_4, &ExperimentConfig::default())?,
    ]))
}

fn mate_nevai() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[
        report(ExperimentId::Thm1_7, &ExperimentConfig::default())?,
        report(ExperimentId::Thm1_6, &ExperimentConfig::default())?,
    ]))
}

fn comparison() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[
        report(ExperimentId::Thm7_2, &ExperimentConfig::default())?,
        report(ExperimentId::Thm7_1, &ExperimentConfig::default())?,
    ]))
}

fn potential_theory() -> Result<Outcome> {
    let mut spread = 0.0f64;
    let mut cap_err = 0.0f64;
    for (a, b) in [(-1.0, 1.0), (0.0, 3.0), (-2.0, -1.5)] {
        let e = equilibrium_interval(a, b)?;
        let values = (0..=32)
            .map(|i| a + (b - a) * (i as f64 + 0.5) / 33.5)
            .map(|x| log_potential(&e, Complex64::new(x, 0.0)))
            .collect::<Result<Vec<f64>>>()?;
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(*v), h.max(*v)));
        spread = spread.max(hi - lo);
        cap_err = cap_err.max((values[16].exp() - (b - a) / 4.0).abs().max((e.capacity() - (b - a) / 4.0).abs()));
    }

    let c = 0.5;
    let e = equilibrium_union(&[Interval { lo: -1.0, hi: -c }, Interval { lo: c, hi: 1.0 }])?;
    let mut density_err = 0.0f64;
    for i in 0..33 {
        let u = (i as f64 + 0.5) / 33.0;
        let x = c + (1.0 - c) * u;
        for x in [x, -x] {
            let exact = x.abs() / (PI * ((1.0 - x * x) * (x * x - c * c)).abs().sqrt());
            density_err = density_err.max((e.density(x) - exact).abs() / exact.max(1.0));
        }
    }

    let (r, phi) = (0.7, 1.1);
    let bal = balayage(&[Complex64::from_polar(r, phi)], 64)?;
    let mut poisson_err = 0.0f64;
    for j in 0..64 {
        let theta = 2.0 * PI * j as f64 / 64.0;
        poisson_err = poisson_err.max((bal.density_dirichlet(theta) - poisson_kernel(r, phi, theta)).abs());
    }

    Ok(Outcome {
        passed: spread <= 5e-6 && cap_err <= 5e-6 && density_err <= 1e-6 && poisson_err <= 1e-8,
        detail: format!(
            "robin spread {spread:e}, capacity error {cap_err:e}, union density error {density_err:e}, poisson error {poisson_err:e}"
        ),
    })
}

fn widom() -> Result<Outcome> {
    Ok(Outcome::from_reports(&[report(ExperimentId::Eq2_13, &ExperimentConfig::default())?]))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 13] = [
        ("moment gap bound", moment_gap),
        ("trace identities", trace_identities),
        ("zero/eigenvalue equivalence", zeros_are_eigenvalues),
        ("gaussian quadrature", gauss_exactness),
        ("popuc", popuc),
        ("tv step bound", tv_step),
        ("regularity", regularity),
        ("dos equivalence", dos),
        ("localization", localization),
        ("mate-nevai / totik bounds", mate_nevai),
        ("comparison", comparison),
        ("potential theory", potential_theory),
        ("widom / balayage", widom),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome { passed: false, detail: format!("error: {e}") });
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {:>2} {name}: {} [{:.1}s]",
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
