//! `key=value` parameter files.
//!
//! ```text
//! # consumption vs income
//! mu_y = 127
//! mu_x = 170
//! ...
//! ```

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::moments::PopulationParams;

const KEYS: [&str; 8] = ["mu_y", "mu_x", "sigma2_y", "sigma2_x", "rho", "sigma2_u", "sigma2_v", "n"];

pub fn parse_params(text: &str) -> Result<PopulationParams> {
    let mut values: HashMap<&str, &str> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::Format(format!("line {}: unknown key `{key}`", lineno + 1)));
        };
        if values.insert(known, value.trim()).is_some() {
            return Err(Error::Format(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    let real = |key: &'static str| -> Result<f64> {
        let v = values
            .get(key)
            .ok_or_else(|| Error::Format(format!("missing key `{key}`")))?;
        v.parse::<f64>()
            .map_err(|_| Error::Format(format!("`{key}`: `{v}` is not a number")))
    };
    let n_text = values.get("n").ok_or_else(|| Error::Format("missing key `n`".into()))?;
    let n = n_text
        .parse::<u64>()
        .map_err(|_| Error::Format(format!("`n`: `{n_text}` is not a non-negative integer")))?;
    PopulationParams::new(
        real("mu_y")?,
        real("mu_x")?,
        real("sigma2_y")?,
        real("sigma2_x")?,
        real("rho")?,
        real("sigma2_u")?,
        real("sigma2_v")?,
        n,
    )
}

pub fn load_params(path: &Path) -> Result<PopulationParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_params(&text)
}

pub fn format_params(p: &PopulationParams) -> String {
    format!(
        "mu_y={}\nmu_x={}\nsigma2_y={}\nsigma2_x={}\nrho={}\nsigma2_u={}\nsigma2_v={}\nn={}\n",
        p.mu_y, p.mu_x, p.sigma2_y, p.sigma2_x, p.rho, p.sigma2_u, p.sigma2_v, p.n
    )
}
