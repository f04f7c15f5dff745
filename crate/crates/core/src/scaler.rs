//! Min-max scalers shared by the quantum and classical models.
//!
//! Inputs map per feature onto `[0, 1]`; targets map onto `[-1, 1]`, the range
//! of a Pauli-Z expectation.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureScaler {
    /// Fits per-column bounds. Constant columns are rejected.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Argument("cannot fit a scaler on zero rows".into()));
        };
        let d = first.len();
        let mut min = Vec::with_capacity(d);
        let mut max = Vec::with_capacity(d);
        for j in 0..d {
            let (lo, hi) = min_max(rows.iter().map(|r| r[j]));
            if !(hi > lo) {
                return Err(Error::Scaling {
                    column: format!("x{j}"),
                    value: lo,
                });
            }
            min.push(lo);
            max.push(hi);
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(x.iter()
            .enumerate()
            .map(|(j, v)| (v - self.min[j]) / (self.max[j] - self.min[j]))
            .collect())
    }

    /// Like [`FeatureScaler::encode`] but clamps into `[0, 1]`; the flag
    /// reports whether any coordinate had to be clamped.
    pub fn encode_clamped(&self, x: &[f64]) -> Result<(Vec<f64>, bool)> {
        let mut out = self.encode(x)?;
        let mut clamped = false;
        for v in out.iter_mut() {
            if *v < 0.0 || *v > 1.0 {
                clamped = true;
                *v = v.clamp(0.0, 1.0);
            }
        }
        Ok((out, clamped))
    }

    pub fn decode(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(u.iter()
            .enumerate()
            .map(|(j, v)| self.min[j] + v * (self.max[j] - self.min[j]))
            .collect())
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::dimension("input features", self.dim(), x.len()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub min: f64,
    pub max: f64,
}

impl TargetScaler {
    pub fn fit(targets: &[f64]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Argument("cannot fit a scaler on zero targets".into()));
        }
        let (min, max) = min_max(targets.iter().copied());
        if !(max > min) {
            return Err(Error::Scaling {
                column: "y".into(),
                value: min,
            });
        }
        Ok(Self { min, max })
    }

    /// `[min, max] -> [-1, 1]`
    pub fn encode(&self, y: f64) -> f64 {
        2.0 * (y - self.min) / (self.max - self.min) - 1.0
    }

    /// `[-1, 1] -> [min, max]`
    pub fn decode(&self, e: f64) -> f64 {
        self.min + 0.5 * (e + 1.0) * (self.max - self.min)
    }
}
