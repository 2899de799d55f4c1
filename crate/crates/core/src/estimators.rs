//! Point evaluation of the mean, ratio, exponential-ratio, regression,
//! Grover–Kaur and proposed dual-exponential estimators.
//!
//! Weighted families take their constants explicitly; choosing optimal
//! constants lives in [`crate::theory`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::PopulationParams;

/// Sample means of the observed (error-contaminated) variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub ybar: f64,
    pub xbar: f64,
    pub n: u64,
}

impl SampleSummary {
    pub fn new(ybar: f64, xbar: f64, n: u64) -> Self {
        Self { ybar, xbar, n }
    }

    /// `k1 = ybar - mu_y`
    pub fn k1(&self, params: &PopulationParams) -> f64 {
        self.ybar - params.mu_y
    }

    /// `k2 = xbar - mu_x`
    pub fn k2(&self, params: &PopulationParams) -> f64 {
        self.xbar - params.mu_x
    }
}

/// The two free constants of a weighted estimator family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub w1: f64,
    pub w2: f64,
}

impl WeightPair {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        if !(w1.is_finite() && w2.is_finite()) {
            return Err(Error::Weights(format!("weights must be finite, got ({w1}, {w2})")));
        }
        Ok(Self { w1, w2 })
    }

    /// Weights that reduce every weighted family to its unweighted parent.
    pub const UNIT: WeightPair = WeightPair { w1: 1.0, w2: 0.0 };
}

impl FromStr for WeightPair {
    type Err = Error;

    /// Parses `"w1,w2"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::Weights(format!("expected `w1,w2`, got `{s}`")));
        }
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::Weights(format!("`{t}` is not a number")))
        };
        WeightPair::new(parse(parts[0])?, parse(parts[1])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorId {
    /// Sample mean `ybar`.
    Mean,
    /// Ratio estimator.
    T1,
    /// Exponential ratio estimator.
    T2,
    /// Regression-type estimator.
    T3,
    /// Grover–Kaur exponential estimator.
    T4,
    /// Dual-exponential proposed class.
    Tp,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 6] = [
        EstimatorId::Mean,
        EstimatorId::T1,
        EstimatorId::T2,
        EstimatorId::T3,
        EstimatorId::T4,
        EstimatorId::Tp,
    ];

    pub fn is_weighted(self) -> bool {
        matches!(self, EstimatorId::T3 | EstimatorId::T4 | EstimatorId::Tp)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::Mean => "mean",
            EstimatorId::T1 => "t1",
            EstimatorId::T2 => "t2",
            EstimatorId::T3 => "t3",
            EstimatorId::T4 => "t4",
            EstimatorId::Tp => "tp",
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Format(format!("unknown estimator `{s}` (expected mean, t1, t2, t3, t4 or tp)"))
            })
    }
}

fn check_xbar(sample: &SampleSummary) -> Result<()> {
    if sample.xbar > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("xbar must be > 0, got {}", sample.xbar)))
    }
}

/// `exp((mu_x - xbar)/(mu_x + xbar))`
fn damping(xbar: f64, mu_x: f64) -> f64 {
    ((mu_x - xbar) / (mu_x + xbar)).exp()
}

pub fn ratio_point(sample: &SampleSummary, mu_x: f64) -> Result<f64> {
    check_xbar(sample)?;
    Ok(sample.ybar * mu_x / sample.xbar)
}

pub fn exp_ratio_point(sample: &SampleSummary, mu_x: f64) -> Result<f64> {
    check_xbar(sample)?;
    Ok(sample.ybar * damping(sample.xbar, mu_x))
}

pub fn regression_point(sample: &SampleSummary, mu_x: f64, w: WeightPair) -> f64 {
    w.w1 * sample.ybar + w.w2 * (mu_x - sample.xbar)
}

pub fn grover_kaur_point(sample: &SampleSummary, mu_x: f64, w: WeightPair) -> Result<f64> {
    check_xbar(sample)?;
    Ok(regression_point(sample, mu_x, w) * damping(sample.xbar, mu_x))
}

/// The proposed class: the regression part uses the average of a
/// product-exponential and a ratio-exponential adjustment of `ybar`, and the
/// whole is damped by the exponential ratio factor.
pub fn proposed_point(sample: &SampleSummary, mu_x: f64, w: WeightPair) -> Result<f64> {
    check_xbar(sample)?;
    let (xbar, ybar) = (sample.xbar, sample.ybar);
    let down = damping(xbar, mu_x);
    let up = ((xbar - mu_x) / (xbar + mu_x)).exp();
    let dual = (xbar / mu_x) * up + (mu_x / xbar) * down;
    Ok((w.w1 * (ybar / 2.0) * dual + w.w2 * (mu_x - xbar)) * down)
}

/// Evaluates any estimator. Weighted families require `weights`.
pub fn evaluate(
    id: EstimatorId,
    sample: &SampleSummary,
    mu_x: f64,
    weights: Option<WeightPair>,
) -> Result<f64> {
    let need = || {
        weights.ok_or_else(|| Error::Weights(format!("estimator {id} requires a weight pair")))
    };
    match id {
        EstimatorId::Mean => Ok(sample.ybar),
        EstimatorId::T1 => ratio_point(sample, mu_x),
        EstimatorId::T2 => exp_ratio_point(sample, mu_x),
        EstimatorId::T3 => Ok(regression_point(sample, mu_x, need()?)),
        EstimatorId::T4 => grover_kaur_point(sample, mu_x, need()?),
        EstimatorId::Tp => proposed_point(sample, mu_x, need()?),
    }
}
