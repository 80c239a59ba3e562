use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{parse_measure, Domain, MeasureSpec};
use crate::sum::Precision;

pub const CAP_N_REAL: usize = 200;
pub const CAP_N_CIRCLE: usize = 64;
pub const CAP_M: usize = 20000;
pub const CAP_L: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    Thm1_5,
    Eq2_9,
    Eq2_10a,
    Prop2_6,
    Thm3_1,
    Thm1_4,
    Thm5_1,
    Thm6_1,
    Thm1_6,
    Thm1_7,
    Thm7_1,
    Thm7_2,
    Eq2_13,
    Eq2_17,
    Eq2_20,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 15] = [
        ExperimentId::Thm1_5,
        ExperimentId::Eq2_9,
        ExperimentId::Eq2_10a,
        ExperimentId::Prop2_6,
        ExperimentId::Thm3_1,
        ExperimentId::Thm1_4,
        ExperimentId::Thm5_1,
        ExperimentId::Thm6_1,
        ExperimentId::Thm1_6,
        ExperimentId::Thm1_7,
        ExperimentId::Thm7_1,
        ExperimentId::Thm7_2,
        ExperimentId::Eq2_13,
        ExperimentId::Eq2_17,
        ExperimentId::Eq2_20,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Thm1_5 => "thm-1.5",
            ExperimentId::Eq2_9 => "eq-2.9",
            ExperimentId::Eq2_10a => "eq-2.10a",
            ExperimentId::Prop2_6 => "prop-2.6",
            ExperimentId::Thm3_1 => "thm-3.1",
            ExperimentId::Thm1_4 => "thm-1.4",
            ExperimentId::Thm5_1 => "thm-5.1",
            ExperimentId::Thm6_1 => "thm-6.1",
            ExperimentId::Thm1_6 => "thm-1.6",
            ExperimentId::Thm1_7 => "thm-1.7",
            ExperimentId::Thm7_1 => "thm-7.1",
            ExperimentId::Thm7_2 => "thm-7.2",
            ExperimentId::Eq2_13 => "eq-2.13",
            ExperimentId::Eq2_17 => "eq-2.17",
            ExperimentId::Eq2_20 => "eq-2.20",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ExperimentId::Thm1_5 => "zero counting measures and eta_n share weak limits",
            ExperimentId::Eq2_9 => "moment gap between eta_n and nu_{n+1}",
            ExperimentId::Eq2_10a => "total variation step of eta_n",
            ExperimentId::Prop2_6 => "boundary-parameter invariance of paraorthogonal zeros",
            ExperimentId::Thm3_1 => "regularity on the circle",
            ExperimentId::Thm1_4 => "localization on a circle arc",
            ExperimentId::Thm5_1 => "regularity on the line",
            ExperimentId::Thm6_1 => "localization on a real interval",
            ExperimentId::Thm1_6 => "Mate-Nevai upper bound on the circle",
            ExperimentId::Thm1_7 => "Totik upper bound on the line",
            ExperimentId::Thm7_1 => "Totik-Ullman sandwich",
            ExperimentId::Thm7_2 => "comparison of zero densities",
            ExperimentId::Eq2_13 => "Widom balayage of OPUC zeros",
            ExperimentId::Eq2_17 => "Gauss quadrature exactness",
            ExperimentId::Eq2_20 => "Gauss quadrature bound for eta_n",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = ExperimentId::ALL.iter().map(|i| i.as_str()).collect();
                Error::InvalidArgument(format!("unknown experiment '{s}' (known: {})", known.join(", ")))
            })
    }
}

/// A measure, optionally with the compact set it is studied on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureCase {
    pub measure: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
}

impl MeasureCase {
    pub fn new(measure: &str) -> Self {
        Self {
            measure: measure.to_string(),
            set: None,
        }
    }

    pub fn with_set(measure: &str, set: &str) -> Self {
        Self {
            measure: measure.to_string(),
            set: Some(set.to_string()),
        }
    }
}

/// Experiment parameters; unset fields take per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub measures: Vec<MeasureCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu2: Option<String>,
    /// Degrees; empty means the default sweep for each measure's domain.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<usize>,
    /// Truncates the sweep to degrees below this value and appends it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    /// Moment order `L`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Quadrature resolution `M`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_pairs: Option<usize>,
    pub seed: u64,
    pub precision: Precision,
}

pub(crate) const REAL_SWEEP: [usize; 5] = [10, 20, 40, 80, 160];
pub(crate) const CIRCLE_SWEEP: [usize; 4] = [8, 16, 32, 64];

const TWO_INTERVAL_WEIGHT: &str = "abs(x)/(pi*abs((1-x^2)*(x^2-0.25))^0.5)*(1+0.2*cos(x))";

impl ExperimentConfig {
    /// Defaults for `id` filled into every unset field.
    pub fn resolved(&self, id: ExperimentId) -> Result<Self> {
        use ExperimentId::*;
        let mut c = self.clone();
        if c.measures.is_empty() && !matches!(id, Thm7_2) {
            c.measures = match id {
                Thm1_5 => vec![
                    MeasureCase::new("chebyshev"),
                    MeasureCase::new("legendre"),
                    MeasureCase::new("lebesgue_circle"),
                ],
                Eq2_9 | Eq2_10a => vec![
                    MeasureCase::new("chebyshev"),
                    MeasureCase::new("legendre"),
                    MeasureCase::new("legendre + 0.5*delta(0.3)"),
                    MeasureCase::new("lebesgue_circle"),
                    MeasureCase::new("bernstein_szego(0.5)"),
                ],
                Prop2_6 => vec![MeasureCase::new("lebesgue_circle"), MeasureCase::new("bernstein_szego(0.5)")],
                Thm3_1 => vec![
                    MeasureCase::new("lebesgue_circle"),
                    MeasureCase::new("bernstein_szego(0.5)"),
                    MeasureCase::new("circle: (1+cos(theta))"),
                ],
                Thm1_4 => vec![MeasureCase::new("lebesgue_circle + 0.3*delta(1)")],
                Thm5_1 => vec![
                    MeasureCase::new("legendre"),
                    MeasureCase::new("abs(x) on [-1,1]"),
                    MeasureCase::with_set(
                        &format!("{TWO_INTERVAL_WEIGHT} on [-1,-0.5] + {TWO_INTERVAL_WEIGHT} on [0.5,1]"),
                        "[-1,-0.5]u[0.5,1]",
                    ),
                ],
                Thm6_1 => vec![MeasureCase::with_set("legendre + 0.5*delta(0.3)", "[-1,1]")],
                Thm1_6 => vec![MeasureCase::new("lebesgue_circle"), MeasureCase::new("circle: (1+cos(theta))")],
                Thm1_7 | Eq2_17 => vec![
                    MeasureCase::new("legendre"),
                    MeasureCase::new("chebyshev"),
                    MeasureCase::new("jacobi(1,1)"),
                ],
                Thm7_1 => vec![MeasureCase::new(
                    "legendre on [-0.5,0.5] + 0.02*legendre on [-1,-0.5] + 0.02*legendre on [0.5,1]",
                )],
                Eq2_13 => vec![MeasureCase::new("circle: 1 on [1.5707963267948966,4.71238898038469]")],
                Eq2_20 => vec![
                    MeasureCase::new("legendre"),
                    MeasureCase::new("chebyshev"),
                    MeasureCase::new("legendre + 0.5*delta(0.3)"),
                ],
                Thm7_2 => unreachable!(),
            };
        }
        if matches!(id, Thm7_2) {
            c.mu1.get_or_insert_with(|| "chebyshev on [-0.5,0.5]".into());
            c.mu2.get_or_insert_with(|| "chebyshev".into());
        }
        if c.sweep.is_empty() {
            c.sweep = match id {
                Eq2_17 => vec![5, 10, 20, 40],
                Thm7_2 | Eq2_20 => vec![10, 20, 40, 80],
                _ => Vec::new(),
            };
        }
        if c.order.is_none() {
            c.order = match id {
                Eq2_9 | Prop2_6 => Some(10),
                Eq2_13 => Some(16),
                Eq2_20 => Some(4),
                _ => None,
            };
        }
        if c.window.is_none() {
            c.window = match id {
                Thm1_4 => Some([0.25, 2.25]),
                Thm6_1 => Some([-0.8, 0.8]),
                Thm7_1 | Thm7_2 => Some([-0.5, 0.5]),
                _ => None,
            };
        }
        if c.beta_pairs.is_none() && id == Prop2_6 {
            c.beta_pairs = Some(5);
        }
        c.validate()?;
        Ok(c)
    }

    /// Caps: `n <= 200` on the line, `<= 64` on the circle, `M <= 20000`,
    /// `L <= 64`.
    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.resolution {
            if m > CAP_M || m < 8 {
                return Err(Error::InvalidArgument(format!("resolution {m} outside [8, {CAP_M}]")));
            }
        }
        if let Some(l) = self.order {
            if l > CAP_L {
                return Err(Error::InvalidArgument(format!("order {l} exceeds {CAP_L}")));
            }
        }
        if let Some([a, b]) = self.window {
            if !(a < b) {
                return Err(Error::InvalidArgument(format!("window [{a}, {b}] is empty")));
            }
        }
        for case in &self.measures {
            let spec = parse_measure(&case.measure)?;
            self.sweep_for(spec.domain)?;
        }
        for text in [&self.mu1, &self.mu2].into_iter().flatten() {
            let spec = parse_measure(text)?;
            self.sweep_for(spec.domain)?;
        }
        Ok(())
    }

    /// The sweep for a domain, checked against the caps.
    pub fn sweep_for(&self, domain: Domain) -> Result<Vec<usize>> {
        let (default, cap): (&[usize], usize) = match domain {
            Domain::RealLine => (&REAL_SWEEP, CAP_N_REAL),
            Domain::UnitCircle => (&CIRCLE_SWEEP, CAP_N_CIRCLE),
        };
        let mut s = if self.sweep.is_empty() { default.to_vec() } else { self.sweep.clone() };
        if let Some(n) = self.max_degree {
            s.retain(|&k| k < n);
            s.push(n);
        }
        if let Some(&n) = s.iter().find(|&&n| n > cap) {
            return Err(Error::InvalidArgument(format!(
                "degree {n} exceeds the {} cap {cap}",
                domain.name()
            )));
        }
        if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("sweep must be strictly increasing and non-empty".into()));
        }
        Ok(s)
    }

    pub(crate) fn cases(&self) -> Result<Vec<(MeasureCase, MeasureSpec)>> {
        self.measures
            .iter()
            .map(|c| Ok((c.clone(), parse_measure(&c.measure)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.as_str().parse::<ExperimentId>().unwrap(), id);
        }
        assert!("thm-9.9".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn every_default_config_resolves() {
        for id in ExperimentId::ALL {
            ExperimentConfig::default().resolved(id).unwrap();
        }
    }

    #[test]
    fn caps_enforced() {
        let c = ExperimentConfig {
            measures: vec![MeasureCase::new("lebesgue_circle")],
            sweep: vec![8, 100],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            order: Some(65),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn max_degree_truncates_the_sweep() {
        let c = ExperimentConfig {
            max_degree: Some(40),
            ..Default::default()
        };
        assert_eq!(c.sweep_for(Domain::RealLine).unwrap(), vec![10, 20, 40]);
        assert_eq!(c.sweep_for(Domain::UnitCircle).unwrap(), vec![8, 16, 32, 40]);
        let c = ExperimentConfig {
            max_degree: Some(5),
            ..Default::default()
        };
        assert_eq!(c.sweep_for(Domain::RealLine).unwrap(), vec![5]);
    }

    #[test]
    fn config_json_rejects_unknown_fields() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"sweeps": [1]}"#).is_err());
        let c: ExperimentConfig = serde_json::from_str(r#"{"sweep": [10, 20], "seed": 7}"#).unwrap();
        assert_eq!(c.seed, 7);
    }
}
