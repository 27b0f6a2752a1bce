//! Seeded synthetic datasets with controlled class imbalance. Predictors are
//! independent standard normals; the intercept (binary) or cutpoints
//! (ordinal) are solved by bisection so the expected class proportions match
//! the requested targets on the realized predictor draw.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Matrix, OutcomeKind};
use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::model::ModelFamily;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub family: ModelFamily,
    pub true_beta: Vec<f64>,
    /// Used only when `target_proportions` is absent (ordinal family).
    pub true_cutpoints: Option<Vec<f64>>,
    /// Class proportions (class 0..1 for binary, 1..K for ordinal); when
    /// present, intercept/cutpoints are solved to match them in expectation.
    pub target_proportions: Option<Vec<f64>>,
    pub seed: u64,
}

impl SimConfig {
    /// Binary generator with solved intercept; coefficients default to
    /// {+1.5, -1.5} (one predictor pushing toward class 1, one away).
    pub fn binary(n: usize, class1_proportion: f64, seed: u64) -> Self {
        SimConfig {
            n,
            family: ModelFamily::BinaryLogit,
            true_beta: vec![1.5, -1.5],
            true_cutpoints: None,
            target_proportions: Some(vec![1.0 - class1_proportion, class1_proportion]),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.true_beta.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one predictor coefficient required".into(),
            ));
        }
        if let Some(props) = &self.target_proportions {
            let expected = match self.family {
                ModelFamily::BinaryLogit => 2,
                ModelFamily::OrderedLogit { categories } => categories,
            };
            if props.len() != expected {
                return Err(Error::InvalidConfig(format!(
                    "{} proportions supplied, family has {expected} classes",
                    props.len()
                )));
            }
            if props.iter().any(|&p| p <= 0.0) {
                return Err(Error::InvalidConfig("proportions must be positive".into()));
            }
            if (props.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig("proportions must sum to 1".into()));
            }
        }
        if let ModelFamily::OrderedLogit { categories } = self.family {
            if categories < 2 {
                return Err(Error::InvalidConfig(
                    "ordinal family needs at least 2 categories".into(),
                ));
            }
            if self.target_proportions.is_none() {
                match &self.true_cutpoints {
                    None => {
                        return Err(Error::InvalidConfig(
                            "ordinal simulation needs target_proportions or true_cutpoints".into(),
                        ))
                    }
                    Some(c) => {
                        if c.len() != categories - 1 || c.windows(2).any(|w| w[1] <= w[0]) {
                            return Err(Error::InvalidCutpoints);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The generated dataset plus the solved latent-scale parameters.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub data: Dataset,
    /// Solved intercept (binary family).
    pub intercept: Option<f64>,
    /// Cutpoints actually used (ordinal family).
    pub cutpoints: Option<Vec<f64>>,
}

pub fn simulate(config: &SimConfig) -> Result<Simulated> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let n = config.n;
    let j = config.true_beta.len();
    let mut xdata = Vec::with_capacity(n * j);
    for _ in 0..n * j {
        xdata.push(rng.sample::<f64, _>(StandardNormal));
    }
    let x = Matrix::new(xdata, n, j)?;
    let eta: Vec<f64> = x
        .rows_iter()
        .map(|row| {
            row.iter()
                .zip(&config.true_beta)
                .map(|(xv, b)| xv * b)
                .sum()
        })
        .collect();
    let names: Vec<String> = (1..=j).map(|i| format!("x{i}")).collect();

    match config.family {
        ModelFamily::BinaryLogit => {
            let target = config
                .target_proportions
                .as_ref()
                .map(|p| p[1])
                .unwrap_or(0.5);
            // mean_i sigmoid(b0 + eta_i) is increasing in b0: bisect.
            let intercept =
                bisect(|b0| eta.iter().map(|e| sigmoid(b0 + e)).sum::<f64>() / n as f64 - target)?;
            let y: Vec<u32> = eta
                .iter()
                .map(|e| u32::from(rng.random::<f64>() < sigmoid(intercept + e)))
                .collect();
            let data = Dataset::new(y, x, names, OutcomeKind::Binary)?;
            Ok(Simulated {
                data,
                intercept: Some(intercept),
                cutpoints: None,
            })
        }
        ModelFamily::OrderedLogit { categories } => {
            let cutpoints = match &config.target_proportions {
                Some(props) => {
                    // P(y <= k) = mean_i sigmoid(c_k - eta_i): solve each c_k
                    // for the cumulative target, increasing by construction.
                    let mut cum = 0.0;
                    let mut cuts = Vec::with_capacity(categories - 1);
                    for &p in props.iter().take(categories - 1) {
                        cum += p;
                        let target = cum;
                        cuts.push(bisect(|c| {
                            eta.iter().map(|e| sigmoid(c - e)).sum::<f64>() / n as f64 - target
                        })?);
                    }
                    cuts
                }
                None => config.true_cutpoints.clone().expect("validated"),
            };
            let y: Vec<u32> = eta
                .iter()
                .map(|e| {
                    let u = rng.random::<f64>();
                    let mut k = categories as u32;
                    for (idx, c) in cutpoints.iter().enumerate() {
                        if u <= sigmoid(c - e) {
                            k = idx as u32 + 1;
                            break;
                        }
                    }
                    k
                })
                .collect();
            let data = Dataset::new(y, x, names, OutcomeKind::Ordinal { categories })?;
            Ok(Simulated {
                data,
                intercept: None,
                cutpoints: Some(cutpoints),
            })
        }
    }
}

/// Bisection for a monotone-increasing function on [-40, 40]; errors when the
/// bracket does not straddle a root (unattainable target given the betas).
fn bisect<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    let (flo, fhi) = (f(lo), f(hi));
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::InvalidConfig(
            "target proportion unattainable within the intercept bracket".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
