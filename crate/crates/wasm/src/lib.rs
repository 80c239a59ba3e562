//! Browser bindings: each function returns a JSON string for the demo page.

use oplab::lab::{default_resolution, grid, Model, SetSpec};
use oplab::measure::{parse_measure, Domain, Interval};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_DEGREE: usize = 200;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn model(measure: &str, n: usize) -> Result<(Model, Domain), JsError> {
    if n == 0 || n > MAX_DEGREE {
        return Err(err(format!("n must be in 1..={MAX_DEGREE}")));
    }
    let spec = parse_measure(measure).map_err(err)?;
    let domain = spec.domain;
    let m = Model::new(&spec, default_resolution(n), n, Default::default()).map_err(err)?;
    Ok((m, domain))
}

/// Jacobi parameters `{a, b}` or Verblunsky coefficients `{re, im, rho}`.
#[wasm_bindgen]
pub fn recurrence(measure: &str, n: usize) -> Result<String, JsError> {
    let (m, _) = model(measure, n)?;
    let v = match &m {
        Model::Real { coefficients: c, .. } => json!({
            "domain": "real",
            "a": &c.a[..n],
            "b": &c.b[..n],
        }),
        Model::Circle { coefficients: v, .. } => json!({
            "domain": "circle",
            "re": v.alpha[..n].iter().map(|a| a.re).collect::<Vec<_>>(),
            "im": v.alpha[..n].iter().map(|a| a.im).collect::<Vec<_>>(),
            "rho": &v.rho[..n],
        }),
    };
    Ok(v.to_string())
}

/// `(n+1)^{-1} K_n` and the Christoffel function on the 257-point grid,
/// next to the equilibrium density of the measure's default set.
#[wasm_bindgen]
pub fn kernel(measure: &str, n: usize) -> Result<String, JsError> {
    let (m, domain) = model(measure, n)?;
    let spec = parse_measure(measure).map_err(err)?;
    let points = match domain {
        Domain::RealLine => grid(spec.hull()),
        Domain::UnitCircle => grid(Interval::new(0.0, std::f64::consts::TAU)),
    };
    let k = m.kernel(&points, n).map_err(err)?;
    let eq = oplab::lab::default_set(&spec).equilibrium().map_err(err)?;
    let scaled: Vec<f64> = k.iter().map(|v| v / (n + 1) as f64).collect();
    let rho: Vec<f64> = points.iter().map(|&x| eq.density(x)).collect();
    let weight: Vec<f64> = points.iter().map(|&x| spec.ac_density(x)).collect();
    Ok(json!({
        "points": points,
        "kernel": scaled,
        "lambda": k.iter().map(|v| 1.0 / v).collect::<Vec<_>>(),
        "weight": weight,
        "equilibrium": rho,
    })
    .to_string())
}

/// Equilibrium density of a set like `[-1,-0.5]u[0.5,1]`, with its capacity.
#[wasm_bindgen]
pub fn equilibrium(set: &str, rows: usize) -> Result<String, JsError> {
    let rows = rows.clamp(16, 4096);
    let e = SetSpec::parse(set).map_err(err)?.equilibrium().map_err(err)?;
    let (x, rho): (Vec<f64>, Vec<f64>) = if e.is_circle() {
        (0..rows)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / rows as f64;
                (t, e.density(t))
            })
            .unzip()
    } else {
        e.intervals()
            .iter()
            .flat_map(|iv| {
                let (mid, half) = (0.5 * (iv.lo + iv.hi), 0.5 * iv.len());
                (0..rows).map(move |i| mid - half * (std::f64::consts::PI * (i as f64 + 0.5) / rows as f64).cos())
            })
            .map(|x| (x, e.density(x)))
            .unzip()
    };
    Ok(json!({
        "circle": e.is_circle(),
        "capacity": e.capacity(),
        "endpoints": e.endpoints(),
        "x": x,
        "rho": rho,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_json() {
        let v: serde_json::Value = serde_json::from_str(&recurrence("chebyshev", 5).unwrap()).unwrap();
        assert_eq!(v["domain"], "real");
        assert!((v["a"][1].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_json() {
        let v: serde_json::Value = serde_json::from_str(&equilibrium("[-1,1]", 64).unwrap()).unwrap();
        assert!((v["capacity"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(v["x"].as_array().unwrap().len(), 64);
    }

    #[test]
    fn kernel_json() {
        let v: serde_json::Value = serde_json::from_str(&kernel("legendre", 10).unwrap()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 257);
    }
}
