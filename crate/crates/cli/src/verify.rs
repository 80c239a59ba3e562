use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Args;
use oplab::lab::{run as run_experiment, ExperimentConfig, ExperimentId, ExperimentReport, MeasureCase, Timestamp};

use crate::output::{out_dir, slug, write};
use crate::{Common, Failure};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Experiment id (e.g. eq-2.9) or `all`.
    id: String,
    /// Measure(s) to run on; repeat the flag for several.
    #[arg(long)]
    measure: Vec<String>,
    /// Set E for the equilibrium measure, e.g. '[-1,-0.5]u[0.5,1]' or 'circle'.
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    mu1: Option<String>,
    #[arg(long)]
    mu2: Option<String>,
    /// Largest degree; the default sweep is cut at n and ends with n.
    #[arg(long)]
    n: Option<usize>,
    /// Explicit degree sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
    /// Moment order.
    #[arg(long = "L")]
    l: Option<usize>,
    /// Quadrature resolution.
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Window `a,b` for localization and comparison experiments.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    window: Option<Vec<f64>>,
    /// Evaluation points for the Mate-Nevai checks, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    points: Vec<f64>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Concurrent experiments for `verify all`.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    common: Common,
}

/// Reads a config file. An `experiment` key, if present, names the id it is meant for.
pub fn load_config(path: &Path) -> Result<(Option<String>, ExperimentConfig), Failure> {
    let text = std::fs::read_to_string(path)?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let experiment = match value.as_object_mut().and_then(|o| o.remove("experiment")) {
        None => None,
        Some(serde_json::Value::String(s)) => Some(s),
        Some(other) => return Err(Failure::Usage(format!("experiment must be a string, got {other}"))),
    };
    let cfg = serde_json::from_value(value).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((experiment, cfg))
}

fn build_config(a: &VerifyArgs) -> Result<(Option<String>, ExperimentConfig), Failure> {
    let (experiment, mut cfg) = match &a.config {
        Some(p) => load_config(p)?,
        None => (None, ExperimentConfig::default()),
    };
    if !a.measure.is_empty() {
        cfg.measures = a
            .measure
            .iter()
            .map(|m| match &a.set {
                Some(s) => MeasureCase::with_set(m, s),
                None => MeasureCase::new(m),
            })
            .collect();
    } else if a.set.is_some() {
        return Err(Failure::Usage("--set needs --measure".into()));
    }
    if a.mu1.is_some() {
        cfg.mu1 = a.mu1.clone();
    }
    if a.mu2.is_some() {
        cfg.mu2 = a.mu2.clone();
    }
    if a.n.is_some() {
        cfg.max_degree = a.n;
    }
    if !a.sweep.is_empty() {
        cfg.sweep = a.sweep.clone();
    }
    if a.l.is_some() {
        cfg.order = a.l;
    }
    if a.m.is_some() {
        cfg.resolution = a.m;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(w) = &a.window {
        if w.len() != 2 {
            return Err(Failure::Usage("--window takes a,b".into()));
        }
        cfg.window = Some([w[0], w[1]]);
    }
    if !a.points.is_empty() {
        cfg.points = a.points.clone();
    }
    if let Some(p) = a.common.precision {
        cfg.precision = p.into();
    }
    Ok((experiment, cfg))
}

fn ids(requested: &str, from_config: Option<&str>) -> Result<Vec<ExperimentId>, Failure> {
    if requested == "all" {
        return Ok(ExperimentId::ALL.to_vec());
    }
    let id: ExperimentId = requested.parse()?;
    if let Some(c) = from_config {
        if c != id.as_str() {
            return Err(Failure::Usage(format!("config is for '{c}' but '{id}' was requested")));
        }
    }
    Ok(vec![id])
}

/// Report JSON plus one CSV per table; returns the JSON path.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<PathBuf, Failure> {
    let json = serde_json::to_string_pretty(report).map_err(|e| Failure::Usage(e.to_string()))?;
    let path = dir.join(format!("{}.json", report.id));
    write(&path, &(json + "\n"))?;
    for (k, t) in report.tables.iter().enumerate() {
        write(&dir.join(&report.id).join(format!("{:02}-{}.csv", k + 1, slug(&t.name))), &t.to_csv())?;
    }
    Ok(path)
}

fn timed(id: ExperimentId, cfg: &ExperimentConfig) -> oplab::Result<ExperimentReport> {
    let start = Instant::now();
    let mut r = run_experiment(id, cfg)?;
    r.timestamp = Some(Timestamp {
        unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        runtime_ms: start.elapsed().as_millis() as u64,
    });
    Ok(r)
}

pub fn run(a: VerifyArgs) -> Result<(), Failure> {
    let (experiment, cfg) = build_config(&a)?;
    let ids = ids(&a.id, experiment.as_deref())?;
    if a.workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let dir = out_dir(&a.common)?;

    let results: Vec<Mutex<Option<oplab::Result<ExperimentReport>>>> = ids.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..a.workers.min(ids.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&id) = ids.get(i) else { break };
                *results[i].lock().unwrap() = Some(timed(id, &cfg));
            });
        }
    });

    let mut worst: Option<Failure> = None;
    let mut record = |f: Failure| {
        let rank = |f: &Failure| match f {
            Failure::Usage(_) => 3,
            Failure::Numerical(_) => 2,
            Failure::Assertion => 1,
        };
        if worst.as_ref().is_none_or(|w| rank(&f) > rank(w)) {
            worst = Some(f);
        }
    };
    for (id, slot) in ids.iter().zip(results) {
        match slot.into_inner().unwrap().expect("every experiment ran") {
            Ok(report) => {
                let path = write_report(&dir, &report)?;
                let hard = report.checks.iter().filter(|c| c.is_hard()).count();
                let failed = report.failures().count();
                let verdict = if report.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {id}: {}/{hard} hard checks hold -> {}", hard - failed, path.display());
                for c in report.failures() {
                    eprintln!("  {id}: {} measured {:e} > limit {:e}", c.name, c.measured, c.limit);
                }
                if !report.passed {
                    record(Failure::Assertion);
                }
            }
            Err(e) => {
                let f = Failure::from(e);
                let kind = if f.code() == 3 { "NUMERICAL" } else { "ERROR" };
                let msg = match &f {
                    Failure::Usage(m) | Failure::Numerical(m) => m.clone(),
                    Failure::Assertion => unreachable!(),
                };
                if ids.len() > 1 {
                    println!("{kind} {id}: {msg}");
                }
                record(f);
            }
        }
    }
    match worst {
        None => Ok(()),
        Some(Failure::Usage(_)) if ids.len() > 1 => Err(Failure::Usage("some experiments could not run".into())),
        Some(Failure::Numerical(_)) if ids.len() > 1 => {
            Err(Failure::Numerical("some experiments stopped on numerical errors".into()))
        }
        Some(f) => Err(f),
    }
}
