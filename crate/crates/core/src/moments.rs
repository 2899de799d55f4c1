//! Population parameters and the second moments of the sample means under
//! additive measurement error.
//!
//! Observed values are `y_i = Y_i + u_i` and `x_i = X_i + v_i`, with `u`, `v`
//! zero-mean, mutually independent and independent of the truth. Sampling is
//! i.i.d. with `1/n` variance terms; no finite-population correction is applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seven population constants plus the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    pub mu_y: f64,
    pub mu_x: f64,
    pub sigma2_y: f64,
    pub sigma2_x: f64,
    pub rho: f64,
    pub sigma2_u: f64,
    pub sigma2_v: f64,
    pub n: u64,
}

impl PopulationParams {
    /// Builds and validates a parameter set.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mu_y: f64,
        mu_x: f64,
        sigma2_y: f64,
        sigma2_x: f64,
        rho: f64,
        sigma2_u: f64,
        sigma2_v: f64,
        n: u64,
    ) -> Result<Self> {
        let p = Self { mu_y, mu_x, sigma2_y, sigma2_x, rho, sigma2_u, sigma2_v, n };
        p.validate()?;
        Ok(p)
    }

    /// The Table 5.1 row of the consumption/income study.
    pub fn consumption_income() -> Self {
        Self {
            mu_y: 127.0,
            mu_x: 170.0,
            sigma2_y: 1278.0,
            sigma2_x: 3300.0,
            rho: 0.964,
            sigma2_u: 36.0,
            sigma2_v: 36.0,
            n: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidParam { field, reason: reason.into() })
        }
        let finite = [
            ("mu_y", self.mu_y),
            ("mu_x", self.mu_x),
            ("sigma2_y", self.sigma2_y),
            ("sigma2_x", self.sigma2_x),
            ("rho", self.rho),
            ("sigma2_u", self.sigma2_u),
            ("sigma2_v", self.sigma2_v),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return bad(field, format!("must be finite, got {value}"));
            }
        }
        if self.mu_x <= 0.0 {
            return bad("mu_x", format!("must be > 0, got {}", self.mu_x));
        }
        if self.sigma2_y <= 0.0 {
            return bad("sigma2_y", format!("must be > 0, got {}", self.sigma2_y));
        }
        if self.sigma2_x <= 0.0 {
            return bad("sigma2_x", format!("must be > 0, got {}", self.sigma2_x));
        }
        if self.rho.abs() > 1.0 {
            return bad("rho", format!("must lie in [-1, 1], got {}", self.rho));
        }
        if self.sigma2_u < 0.0 {
            return bad("sigma2_u", format!("must be >= 0, got {}", self.sigma2_u));
        }
        if self.sigma2_v < 0.0 {
            return bad("sigma2_v", format!("must be >= 0, got {}", self.sigma2_v));
        }
        if self.n < 2 {
            return bad("n", format!("must be >= 2, got {}", self.n));
        }
        Ok(())
    }

    /// Same population with both measurement-error variances set to zero.
    pub fn error_free(&self) -> Self {
        Self { sigma2_u: 0.0, sigma2_v: 0.0, ..*self }
    }

    pub fn with_n(&self, n: u64) -> Self {
        Self { n, ..*self }
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma2_y.sqrt()
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma2_x.sqrt()
    }

    /// Covariance of the true values, `rho * sigma_y * sigma_x`.
    pub fn cov_yx(&self) -> f64 {
        self.rho * (self.sigma2_y * self.sigma2_x).sqrt()
    }
}

/// Moments of `(ybar, xbar)` and the ratios used throughout the MSE formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedMoments {
    /// `E(k1^2) = (sigma2_y + sigma2_u)/n`
    pub v_ym: f64,
    /// `E(k2^2) = (sigma2_x + sigma2_v)/n`
    pub v_xm: f64,
    /// `E(k1 k2) = rho sigma_y sigma_x / n`
    pub v_yxm: f64,
    pub r_m: f64,
    pub c_x: f64,
    c_y: Option<f64>,
}

impl DerivedMoments {
    /// Coefficient of variation of y, `sigma_y/|mu_y|`. Undefined at `mu_y = 0`.
    pub fn c_y(&self) -> Result<f64> {
        self.c_y
            .ok_or_else(|| Error::Domain("C_y is undefined for mu_y = 0".into()))
    }
}

pub fn derive_moments(params: &PopulationParams) -> Result<DerivedMoments> {
    params.validate()?;
    let n = params.n as f64;
    Ok(DerivedMoments {
        v_ym: (params.sigma2_y + params.sigma2_u) / n,
        v_xm: (params.sigma2_x + params.sigma2_v) / n,
        v_yxm: params.cov_yx() / n,
        r_m: params.mu_y / params.mu_x,
        c_x: params.sigma_x() / params.mu_x,
        c_y: (params.mu_y != 0.0).then(|| params.sigma_y() / params.mu_y.abs()),
    })
}
