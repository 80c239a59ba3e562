use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn oplab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oplab"))
        .args(args)
        .env("OPLAB_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn strip_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn recur_legendre_matches_closed_form() {
    let t = TempDir::new().unwrap();
    let o = oplab(t.path(), &["recur", "--measure", "legendre", "--n", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv(&t.path().join("recur-legendre-n20.csv"));
    assert_eq!(header, ["k", "a_k", "b_k"]);
    assert_eq!(rows.len(), 20);
    for r in rows {
        let k = r[0];
        assert!((r[1] - k / (4.0 * k * k - 1.0).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn recur_circle_and_breakdown() {
    let t = TempDir::new().unwrap();
    let o = oplab(t.path(), &["recur", "--measure", "lebesgue_circle", "--n", "10"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv(&t.path().join("recur-lebesgue_circle-n10.csv"));
    assert_eq!(header, ["j", "re_alpha", "im_alpha", "rho"]);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[1].abs() < 1e-13 && r[2].abs() < 1e-13));

    let o = oplab(t.path(), &["recur", "--measure", "delta(0)", "--n", "5"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("breakdown"));
}

#[test]
fn usage_errors_exit_2() {
    let t = TempDir::new().unwrap();
    assert_eq!(code(&oplab(t.path(), &["recur", "--measure", "legendre +", "--n", "5"])), 2);
    assert_eq!(code(&oplab(t.path(), &["recur", "--measure", "legendre", "--n", "201"])), 2);
    assert_eq!(code(&oplab(t.path(), &["recur", "--measure", "legendre", "--M", "20001"])), 2);
    assert_eq!(code(&oplab(t.path(), &["verify", "thm-9.9"])), 2);
    assert_eq!(code(&oplab(t.path(), &["table", "bogus"])), 2);
    let o = oplab(t.path(), &["verify", "thm-7.2", "--mu1", "chebyshev", "--mu2", "chebyshev on [-0.5,0.5]"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("precondition"));
}

#[test]
fn verify_writes_schema_valid_deterministic_reports() {
    let t = TempDir::new().unwrap();
    let args = ["verify", "eq-2.9", "--measure", "chebyshev", "--n", "40", "--L", "10"];
    let o = oplab(t.path(), &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let path = t.path().join("eq-2.9.json");
    let first: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validate(&schema("report.schema.json"), &first).unwrap();
    assert!(first["timestamp"]["unix_seconds"].as_u64().unwrap() > 0);
    assert_eq!(first["config"]["max_degree"], 40);
    assert_eq!(first["config"]["order"], 10);

    let (header, _) = csv(&t.path().join("eq-2.9").join("01-chebyshev.csv"));
    assert_eq!(header, ["n", "l", "gap", "bound"]);

    assert_eq!(code(&oplab(t.path(), &args)), 0);
    let second: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(
        serde_json::to_string(&strip_timestamp(first)).unwrap(),
        serde_json::to_string(&strip_timestamp(second)).unwrap()
    );
}

#[test]
fn out_flag_beats_environment() {
    let env_dir = TempDir::new().unwrap();
    let out = TempDir::new().unwrap();
    let o = oplab(
        env_dir.path(),
        &["recur", "--measure", "chebyshev", "--n", "4", "--out", out.path().to_str().unwrap()],
    );
    assert_eq!(code(&o), 0);
    assert!(out.path().join("recur-chebyshev-n4.csv").exists());
    assert!(!env_dir.path().join("recur-chebyshev-n4.csv").exists());
}

#[test]
fn config_files_are_checked_and_applied() {
    let t = TempDir::new().unwrap();
    let cfg = t.path().join("cfg.json");
    let text = r#"{"experiment": "eq-2.17", "measures": [{"measure": "legendre"}], "sweep": [5, 10], "seed": 3}"#;
    fs::write(&cfg, text).unwrap();
    let v: Value = serde_json::from_str(text).unwrap();
    jsonschema::validate(&schema("config.schema.json"), &v).unwrap();

    let o = oplab(t.path(), &["verify", "eq-2.17", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(t.path().join("eq-2.17.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 3);
    assert_eq!(report["config"]["sweep"], serde_json::json!([5, 10]));

    assert_eq!(code(&oplab(t.path(), &["verify", "eq-2.9", "--config", cfg.to_str().unwrap()])), 2);
    fs::write(&cfg, r#"{"sweeps": [5]}"#).unwrap();
    assert_eq!(code(&oplab(t.path(), &["verify", "eq-2.17", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn density_table_integrates_to_one() {
    let t = TempDir::new().unwrap();
    let o = oplab(t.path(), &["table", "density", "--set", "[-1,-0.5]u[0.5,1]"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv(&t.path().join("table-density.csv"));
    assert_eq!(header, ["x", "rho"]);
    let total: f64 = rows.windows(2).map(|w| (w[1][0] - w[0][0]) * (w[0][1] + w[1][1]) / 2.0).sum();
    assert!((total - 1.0).abs() <= 1e-6, "{total}");
}

#[test]
fn zeros_table_is_sorted_inside_the_interval() {
    let t = TempDir::new().unwrap();
    assert_eq!(code(&oplab(t.path(), &["table", "zeros", "--measure", "legendre", "--n", "50"])), 0);
    let (header, rows) = csv(&t.path().join("table-zeros.csv"));
    assert_eq!(header, ["k", "x"]);
    assert_eq!(rows.len(), 50);
    assert!(rows.windows(2).all(|w| w[0][1] < w[1][1]));
    assert!(rows.iter().all(|r| r[1].abs() < 1.0));
}

#[test]
fn eta_table_flags_the_atom() {
    let t = TempDir::new().unwrap();
    let o = oplab(t.path(), &["table", "eta", "--measure", "legendre + 0.5*delta(0.3)", "--n", "40"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv(&t.path().join("table-eta.csv"));
    assert_eq!(header, ["x", "kernel", "density", "weight", "atom"]);
    let atoms: Vec<&Vec<f64>> = rows.iter().filter(|r| r[4] == 1.0).collect();
    assert_eq!(atoms.len(), 1);
    assert!((atoms[0][0] - 0.3).abs() < 1e-15);
    let mass: f64 = rows.iter().map(|r| r[3]).sum();
    assert!((mass - 1.0).abs() < 1e-10);
}

#[test]
fn kernel_and_balayage_tables() {
    let t = TempDir::new().unwrap();
    assert_eq!(code(&oplab(t.path(), &["table", "kernel", "--measure", "chebyshev", "--n", "10,20"])), 0);
    let (header, rows) = csv(&t.path().join("table-kernel.csv"));
    assert_eq!(header, ["x", "n", "K", "lambda"]);
    assert_eq!(rows.len(), 2 * 257);
    assert!(rows.iter().all(|r| (r[2] * r[3] - 1.0).abs() < 1e-12));

    assert_eq!(code(&oplab(t.path(), &["table", "balayage", "--point", "0.7,1.1", "--L", "64"])), 0);
    let (header, rows) = csv(&t.path().join("table-balayage.csv"));
    assert_eq!(header, ["theta", "fejer", "dirichlet", "poisson"]);
    assert!(rows.iter().all(|r| (r[2] - r[3]).abs() < 1e-8));
}

#[test]
fn verify_all_passes_and_every_report_validates() {
    let t = TempDir::new().unwrap();
    let o = oplab(t.path(), &["verify", "all", "--workers", "4"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 15);
    let report_schema = schema("report.schema.json");
    for entry in fs::read_dir(t.path()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            let v: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
            jsonschema::validate(&report_schema, &v).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
}

#[test]
fn measure_specs_match_their_schema() {
    let measure_schema = schema("measure.schema.json");
    for text in [
        "legendre + 0.5*delta(0.3)",
        "jacobi(0.5,-0.5) on [-1,0.5]",
        "abs(x) on [-1,1] + 0.1*chebyshev",
        "circle: (1+cos(theta)) + 0.2*delta(1)",
        "bernstein_szego(0.5)",
    ] {
        let spec = oplab::measure::parse_measure(text).unwrap();
        let v = serde_json::to_value(&spec).unwrap();
        jsonschema::validate(&measure_schema, &v).unwrap_or_else(|e| panic!("{text}: {e}"));
        let back: oplab::measure::MeasureSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
    }
    let bad = serde_json::json!({"domain": "real-line", "ac_terms": [], "point_masses": [{"location": 0.0, "mass": -1.0}]});
    assert!(jsonschema::validate(&measure_schema, &bad).is_err());
}
