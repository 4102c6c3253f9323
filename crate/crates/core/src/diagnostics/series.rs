//! Tagged time series and power-law decay fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Named columns sampled on a strictly increasing time grid, with the settings
/// that produced them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSeries {
    pub name: String,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, Value>,
}

impl DiagnosticSeries {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn push(&mut self, t: f64, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::param(&self.name, format!("row has {} values, expected {}", row.len(), self.columns.len())));
        }
        if !t.is_finite() || self.times.last().is_some_and(|&l| t <= l) {
            return Err(Error::param(&self.name, format!("time {t} does not extend the grid")));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::param(&self.name, format!("non-finite value {v} at t = {t}")));
        }
        self.times.push(t);
        self.values.push(row);
        Ok(())
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.set_meta(key, value);
        self
    }

    pub fn set_meta(&mut self, key: &str, value: impl Serialize) {
        self.metadata.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[i]).collect()
    }

    pub fn column_named(&self, name: &str) -> Option<Vec<f64>> {
        self.columns.iter().position(|c| c == name).map(|i| self.column(i))
    }

    /// Checks the grid and value invariants (used after deserialization).
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.times.len() {
            return Err(Error::param(&self.name, "times and values differ in length"));
        }
        let mut copy = Self { times: vec![], values: vec![], ..self.clone() };
        for (t, row) in self.times.iter().zip(self.values.iter()) {
            copy.push(*t, row.clone())?;
        }
        Ok(())
    }
}

/// Backward running maximum `m(t) = max_{s ≥ t} v(s)`: the smallest non-increasing majorant.
pub fn majorant(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].max(out[i + 1]);
    }
    out
}

/// Values below this are excluded from decay fits.
pub const FIT_FLOOR: f64 = 1e-12;
pub const MIN_FIT_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitFlag {
    UpperBoundConsistent,
    Inconclusive,
}

/// Exponent compared against an upper bound `O(t^{−α+ε})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayTarget {
    pub alpha: f64,
    pub eps: f64,
}

impl Default for DecayTarget {
    fn default() -> Self {
        Self { alpha: 1.5, eps: 0.25 }
    }
}

/// Least-squares fit `log v = c − β log t` on a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t_min: f64,
    pub t_max: f64,
    pub beta: f64,
    pub log_prefactor: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub points: usize,
    /// Points in the window dropped for lying below the floor.
    pub excluded: usize,
    pub target: DecayTarget,
    pub flag: FitFlag,
}

impl DecayFit {
    pub fn consistent(&self) -> bool {
        self.flag == FitFlag::UpperBoundConsistent
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.log_prefactor - self.beta * t.ln()).exp()
    }
}

pub fn decay_fit(times: &[f64], values: &[f64], t_min: f64, t_max: f64, target: DecayTarget) -> Result<DecayFit> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(Error::param("window", format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
    }
    let mut xs = vec![];
    let mut ys = vec![];
    let mut excluded = 0;
    for (&t, &v) in times.iter().zip(values.iter()) {
        if t < t_min || t > t_max {
            continue;
        }
        if v > FIT_FLOOR && v.is_finite() {
            xs.push(t.ln());
            ys.push(v.ln());
        } else {
            excluded += 1;
        }
    }
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_FIT_POINTS, got: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let c = my - slope * mx;
    let residual = (xs.iter().zip(ys.iter()).map(|(x, y)| (y - c - slope * x).powi(2)).sum::<f64>() / nf).sqrt();
    let beta = -slope;
    let flag = if beta >= target.alpha - target.eps { FitFlag::UpperBoundConsistent } else { FitFlag::Inconclusive };
    Ok(DecayFit { t_min, t_max, beta, log_prefactor: c, residual, points: n, excluded, target, flag })
}

/// Fit of one column of a series.
pub fn decay_fit_series(
    series: &DiagnosticSeries,
    column: usize,
    t_min: f64,
    t_max: f64,
    target: DecayTarget,
) -> Result<DecayFit> {
    decay_fit(&series.times, &series.column(column), t_min, t_max, target)
}
