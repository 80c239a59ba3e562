use serde::{Deserialize, Serialize};

/// Summation mode for inner products and quadrature sums.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Standard,
    /// Neumaier-compensated summation (a second word carries the rounding error).
    High,
}

/// Running sum that honours a [`Precision`] setting.
#[derive(Debug, Clone, Copy)]
pub struct Accumulator {
    sum: f64,
    carry: f64,
    precision: Precision,
}

impl Accumulator {
    pub fn new(precision: Precision) -> Self {
        Self {
            sum: 0.0,
            carry: 0.0,
            precision,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        match self.precision {
            Precision::Standard => self.sum += x,
            Precision::High => {
                let t = self.sum + x;
                if self.sum.abs() >= x.abs() {
                    self.carry += (self.sum - t) + x;
                } else {
                    self.carry += (x - t) + self.sum;
                }
                self.sum = t;
            }
        }
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn sum_with<I: IntoIterator<Item = f64>>(precision: Precision, terms: I) -> f64 {
    let mut acc = Accumulator::new(precision);
    for t in terms {
        acc.add(t);
    }
    acc.value()
}
