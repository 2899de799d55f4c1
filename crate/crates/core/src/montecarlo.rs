//! Seeded Monte Carlo oracle for the bias and MSE formulas.
//!
//! Every replication owns a ChaCha8 stream selected by `(root seed,
//! replication index)`, so results do not depend on how replications are
//! scheduled across threads. Per-replication squared errors are collected in
//! index order and reduced sequentially.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{evaluate, EstimatorId, SampleSummary, WeightPair};
use crate::moments::PopulationParams;
use crate::theory::{build_quadratic, optimize_weights, MseBreakdown, TpMode};

/// Distribution of the true `(X, Y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum TruthLaw {
    #[default]
    BivariateNormal,
}

/// Distribution of the measurement errors `u`, `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ErrorLaw {
    #[default]
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationModel {
    pub params: PopulationParams,
    pub law: TruthLaw,
    pub error_law: ErrorLaw,
}

impl PopulationModel {
    pub fn new(params: PopulationParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, law: TruthLaw::default(), error_law: ErrorLaw::default() })
    }
}

/// One unit of the population: true and observed values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Unit {
    pub true_x: f64,
    pub true_y: f64,
    pub x: f64,
    pub y: f64,
}

/// Draws units from a model, consuming four standard normals per unit.
struct UnitSampler {
    mu_x: f64,
    mu_y: f64,
    sigma_x: f64,
    sigma_y: f64,
    rho: f64,
    rho_c: f64,
    sigma_u: f64,
    sigma_v: f64,
}

impl UnitSampler {
    fn new(model: &PopulationModel) -> Self {
        let p = &model.params;
        Self {
            mu_x: p.mu_x,
            mu_y: p.mu_y,
            sigma_x: p.sigma_x(),
            sigma_y: p.sigma_y(),
            rho: p.rho,
            rho_c: (1.0 - p.rho * p.rho).max(0.0).sqrt(),
            sigma_u: p.sigma2_u.sqrt(),
            sigma_v: p.sigma2_v.sqrt(),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Unit {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let zu: f64 = rng.sample(StandardNormal);
        let zv: f64 = rng.sample(StandardNormal);
        let true_x = self.mu_x + self.sigma_x * z1;
        let true_y = self.mu_y + self.sigma_y * (self.rho * z1 + self.rho_c * z2);
        Unit {
            true_x,
            true_y,
            x: true_x + self.sigma_v * zv,
            y: true_y + self.sigma_u * zu,
        }
    }
}

fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Observed and true sample means of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationDraw {
    pub observed: SampleSummary,
    pub true_ybar: f64,
    pub true_xbar: f64,
}

pub fn draw_replication_detailed(model: &PopulationModel, seed: u64, index: u64) -> ReplicationDraw {
    let sampler = UnitSampler::new(model);
    let mut rng = replication_rng(seed, index);
    let n = model.params.n;
    let (mut sx, mut sy, mut tx, mut ty) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let unit = sampler.draw(&mut rng);
        sx += unit.x;
        sy += unit.y;
        tx += unit.true_x;
        ty += unit.true_y;
    }
    let nf = n as f64;
    ReplicationDraw {
        observed: SampleSummary::new(sy / nf, sx / nf, n),
        true_ybar: ty / nf,
        true_xbar: tx / nf,
    }
}

/// Sample means for replication `index`, or `None` when `xbar <= 0`.
pub fn draw_replication(model: &PopulationModel, seed: u64, index: u64) -> Option<SampleSummary> {
    let s = draw_replication_detailed(model, seed, index).observed;
    (s.xbar > 0.0).then_some(s)
}

/// Draws a whole population of `size` units from one seeded stream.
pub fn generate_population(model: &PopulationModel, size: usize, seed: u64) -> Vec<Unit> {
    let sampler = UnitSampler::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| sampler.draw(&mut rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WeightPolicy {
    /// For the unweighted estimators.
    None,
    Fixed(WeightPair),
    /// Weights minimizing the first-order MSE at the true parameters.
    OracleOptimal(TpMode),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub replications: u64,
    pub seed: u64,
    pub estimator: EstimatorId,
    pub weights: WeightPolicy,
    /// Worker threads; `0` uses the global rayon pool.
    pub workers: usize,
}

impl SimulationConfig {
    pub fn new(estimator: EstimatorId, replications: u64, seed: u64) -> Self {
        let weights = if estimator.is_weighted() {
            WeightPolicy::OracleOptimal(TpMode::Corrected)
        } else {
            WeightPolicy::None
        };
        Self { replications, seed, estimator, weights, workers: 0 }
    }

    pub fn with_weights(mut self, weights: WeightPolicy) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Resolves the weight policy to concrete weights for `params`.
    pub fn resolve_weights(&self, params: &PopulationParams) -> Result<Option<WeightPair>> {
        match (self.estimator.is_weighted(), self.weights) {
            (false, WeightPolicy::None) => Ok(None),
            (false, _) => Err(Error::Weights(format!(
                "estimator {} takes no weights",
                self.estimator
            ))),
            (true, WeightPolicy::None) => Err(Error::Weights(format!(
                "estimator {} requires weights or the oracle-optimal policy",
                self.estimator
            ))),
            (true, WeightPolicy::Fixed(w)) => Ok(Some(w)),
            (true, WeightPolicy::OracleOptimal(mode)) => {
                let q = build_quadratic(self.estimator, params, mode)?;
                Ok(Some(optimize_weights(&q)?.weights))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationResult {
    pub mean_estimate: f64,
    pub empirical_bias: f64,
    pub empirical_mse: f64,
    pub mc_standard_error_of_mse: f64,
    pub replications_used: u64,
    pub rejected_replications: u64,
    pub weights_used: Option<WeightPair>,
}

/// Per-replication estimates in index order; `None` marks a rejected draw.
pub fn replicate_estimates(
    model: &PopulationModel,
    config: &SimulationConfig,
) -> Result<Vec<Option<f64>>> {
    let weights = config.resolve_weights(&model.params)?;
    let (estimator, mu_x, seed) = (config.estimator, model.params.mu_x, config.seed);
    let work = || {
        (0..config.replications)
            .into_par_iter()
            .map(|i| {
                draw_replication(model, seed, i)
                    .map(|s| evaluate(estimator, &s, mu_x, weights))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()
    };
    if config.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Simulation(format!("thread pool: {e}")))?
            .install(work)
    }
}

pub fn run_simulation(model: &PopulationModel, config: &SimulationConfig) -> Result<SimulationResult> {
    if config.replications == 0 {
        return Err(Error::Simulation("replications must be >= 1".into()));
    }
    model.params.validate()?;
    let weights_used = config.resolve_weights(&model.params)?;
    let estimates = replicate_estimates(model, config)?;
    let mu_y = model.params.mu_y;

    let accepted: Vec<f64> = estimates.iter().flatten().copied().collect();
    let rejected = estimates.len() - accepted.len();
    if accepted.is_empty() {
        return Err(Error::Simulation(format!(
            "all {} replications rejected (xbar <= 0)",
            estimates.len()
        )));
    }
    let count = accepted.len() as f64;
    let mean_estimate = accepted.iter().sum::<f64>() / count;
    let squared: Vec<f64> = accepted.iter().map(|t| (t - mu_y).powi(2)).collect();
    let empirical_mse = squared.iter().sum::<f64>() / count;
    let spread = if accepted.len() > 1 {
        let ss: f64 = squared.iter().map(|s| (s - empirical_mse).powi(2)).sum();
        (ss / (count - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SimulationResult {
        mean_estimate,
        empirical_bias: mean_estimate - mu_y,
        empirical_mse,
        mc_standard_error_of_mse: spread / count.sqrt(),
        replications_used: accepted.len() as u64,
        rejected_replications: rejected as u64,
        weights_used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub empirical_mse: f64,
    pub theory_mse: f64,
    /// `(empirical - theory) / mc_standard_error`
    pub z: f64,
    pub k: f64,
    pub pass: bool,
}

/// Compares an empirical MSE with a theoretical total in units of the Monte
/// Carlo standard error.
pub fn compare_with_theory(result: &SimulationResult, breakdown: &MseBreakdown, k: f64) -> Result<Verdict> {
    compare_mse(result, breakdown.mse_total, k)
}

pub fn compare_mse(result: &SimulationResult, theory_mse: f64, k: f64) -> Result<Verdict> {
    let diff = result.empirical_mse - theory_mse;
    let z = if diff == 0.0 {
        0.0
    } else if result.mc_standard_error_of_mse > 0.0 {
        diff / result.mc_standard_error_of_mse
    } else {
        return Err(Error::DegenerateComparison {
            empirical: result.empirical_mse,
            theory: theory_mse,
        });
    };
    Ok(Verdict {
        empirical_mse: result.empirical_mse,
        theory_mse,
        z,
        k,
        pass: z.abs() <= k,
    })
}
