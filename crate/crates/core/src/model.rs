//! Weighted-likelihood Bayesian models: binary logistic and ordered logistic
//! regression as evaluable log-posterior densities with analytic gradients.
//!
//! The posterior raises each observation's likelihood contribution to its
//! weight: log p(theta | y) = log p(theta) + sum_i w_i * log p(y_i | theta).
//! With all weights 1 this is ordinary Bayesian updating.
//!
//! The ordered model uses the cumulative-logit parameterization
//! P(y <= k) = sigmoid(c_k - x.b). Cutpoints enter the sampler through the
//! log-difference transform (c_1 free, delta_k = log(c_{k+1} - c_k)) so the
//! sampled space is unconstrained; priors are Normal(0, cutpoint_prior_sd)
//! on c_1 and on each delta_k.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::{log_sigmoid, normal_log_pdf, sigmoid, softplus};
use crate::weights::ClassWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    BinaryLogit,
    OrderedLogit { categories: usize },
}

/// Model family, priors, and preprocessing choices for a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    /// Standard deviation of the Normal(0, sd) prior on every coefficient.
    pub prior_sd: f64,
    /// Binary family only; the ordered family absorbs intercepts into the
    /// cutpoints.
    pub include_intercept: bool,
    /// Standard deviation of the Normal(0, sd) priors on c_1 and each
    /// log-difference delta_k.
    pub cutpoint_prior_sd: f64,
    /// Center/scale predictors before fitting, replaying the transform at
    /// prediction time. Honored by the fit pipeline, not by `log_posterior`
    /// itself.
    pub standardize: bool,
}

impl ModelSpec {
    pub fn binary() -> Self {
        ModelSpec {
            family: ModelFamily::BinaryLogit,
            prior_sd: 1.0,
            include_intercept: true,
            cutpoint_prior_sd: 5.0,
            standardize: true,
        }
    }

    pub fn ordinal(categories: usize) -> Self {
        ModelSpec {
            family: ModelFamily::OrderedLogit { categories },
            prior_sd: 1.0,
            include_intercept: false,
            cutpoint_prior_sd: 5.0,
            standardize: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.prior_sd.is_finite() || self.prior_sd <= 0.0 {
            return Err(Error::InvalidConfig("prior_sd must be positive".into()));
        }
        if !self.cutpoint_prior_sd.is_finite() || self.cutpoint_prior_sd <= 0.0 {
            return Err(Error::InvalidConfig(
                "cutpoint_prior_sd must be positive".into(),
            ));
        }
        match self.family {
            ModelFamily::BinaryLogit => Ok(()),
            ModelFamily::OrderedLogit { categories } => {
                if categories < 2 {
                    return Err(Error::InvalidConfig(
                        "ordered-logit needs at least 2 categories".into(),
                    ));
                }
                if self.include_intercept {
                    return Err(Error::InvalidConfig(
                        "ordered-logit has no separate intercept term".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn n_categories(&self) -> usize {
        match self.family {
            ModelFamily::BinaryLogit => 2,
            ModelFamily::OrderedLogit { categories } => categories,
        }
    }

    pub fn n_cutpoints(&self) -> usize {
        match self.family {
            ModelFamily::BinaryLogit => 0,
            ModelFamily::OrderedLogit { categories } => categories - 1,
        }
    }

    /// Total parameter count (constrained and unconstrained coincide).
    pub fn n_params(&self, n_predictors: usize) -> usize {
        n_predictors + usize::from(self.include_intercept) + self.n_cutpoints()
    }

    pub fn param_names(&self, predictor_names: &[String]) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_params(predictor_names.len()));
        if self.include_intercept {
            names.push("intercept".to_string());
        }
        names.extend(predictor_names.iter().map(|n| format!("beta_{n}")));
        for k in 1..=self.n_cutpoints() {
            names.push(format!("cut_{k}"));
        }
        names
    }
}

/// Constrained model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub intercept: Option<f64>,
    pub beta: Vec<f64>,
    /// Strictly increasing; empty for the binary family.
    pub cutpoints: Vec<f64>,
}

impl ParameterVector {
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        if self.intercept.is_some() != spec.include_intercept {
            return Err(Error::DimensionMismatch(
                "intercept presence does not match spec".into(),
            ));
        }
        if self.cutpoints.len() != spec.n_cutpoints() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} cutpoints, got {}",
                spec.n_cutpoints(),
                self.cutpoints.len()
            )));
        }
        if self.cutpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCutpoints);
        }
        if self
            .cutpoints
            .iter()
            .chain(self.beta.iter())
            .chain(self.intercept.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidData("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Flat constrained layout: [intercept?, beta.., cutpoints..].
    pub fn to_constrained(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.beta.len() + self.cutpoints.len() + 1);
        if let Some(b0) = self.intercept {
            out.push(b0);
        }
        out.extend_from_slice(&self.beta);
        out.extend_from_slice(&self.cutpoints);
        out
    }

    pub fn from_constrained(spec: &ModelSpec, n_predictors: usize, row: &[f64]) -> Result<Self> {
        if row.len() != spec.n_params(n_predictors) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                spec.n_params(n_predictors),
                row.len()
            )));
        }
        let mut idx = 0;
        let intercept = if spec.include_intercept {
            idx += 1;
            Some(row[0])
        } else {
            None
        };
        let beta = row[idx..idx + n_predictors].to_vec();
        let cutpoints = row[idx + n_predictors..].to_vec();
        let pv = ParameterVector {
            intercept,
            beta,
            cutpoints,
        };
        pv.validate(spec)?;
        Ok(pv)
    }
}

/// Map constrained parameters to the unconstrained sampling space:
/// [intercept?, beta.., c_1, delta_1..delta_{K-2}].
pub fn to_unconstrained(spec: &ModelSpec, theta: &ParameterVector) -> Result<Vec<f64>> {
    theta.validate(spec)?;
    let mut z = Vec::with_capacity(spec.n_params(theta.beta.len()));
    if let Some(b0) = theta.intercept {
        z.push(b0);
    }
    z.extend_from_slice(&theta.beta);
    if !theta.cutpoints.is_empty() {
        z.push(theta.cutpoints[0]);
        for w in theta.cutpoints.windows(2) {
            z.push((w[1] - w[0]).ln());
        }
    }
    Ok(z)
}

/// Inverse of [`to_unconstrained`].
pub fn from_unconstrained(
    spec: &ModelSpec,
    n_predictors: usize,
    z: &[f64],
) -> Result<ParameterVector> {
    if z.len() != spec.n_params(n_predictors) {
        return Err(Error::DimensionMismatch(format!(
            "expected {} parameters, got {}",
            spec.n_params(n_predictors),
            z.len()
        )));
    }
    let mut idx = 0;
    let intercept = if spec.include_intercept {
        idx += 1;
        Some(z[0])
    } else {
        None
    };
    let beta = z[idx..idx + n_predictors].to_vec();
    idx += n_predictors;
    let mut cutpoints = Vec::with_capacity(spec.n_cutpoints());
    if spec.n_cutpoints() > 0 {
        let mut c = z[idx];
        cutpoints.push(c);
        for &delta in &z[idx + 1..] {
            c += delta.exp();
            cutpoints.push(c);
        }
    }
    Ok(ParameterVector {
        intercept,
        beta,
        cutpoints,
    })
}

/// Weighted log-posterior density over the constrained parameterization:
/// log p(theta) + sum_i w_i * log p(y_i | theta). The cutpoint prior block
/// carries the log-difference change-of-variable term, so this is a proper
/// density over (beta, cutpoints).
pub fn log_posterior(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    theta: &ParameterVector,
) -> Result<f64> {
    theta.validate(spec)?;
    check_dims(spec, data, weights, theta)?;
    let ll = log_likelihood_inner(spec, data, weights, theta, None);
    let mut lp = ll + log_prior_beta(spec, theta);
    if !theta.cutpoints.is_empty() {
        lp += cutpoint_prior_constrained(spec, &theta.cutpoints);
    }
    Ok(lp)
}

/// Weighted log-likelihood alone: sum_i w_i * log p(y_i | theta).
pub fn log_likelihood(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    theta: &ParameterVector,
) -> Result<f64> {
    theta.validate(spec)?;
    check_dims(spec, data, weights, theta)?;
    Ok(log_likelihood_inner(spec, data, weights, theta, None))
}

/// Log prior alone (constrained parameterization, matching [`log_posterior`]).
pub fn log_prior(spec: &ModelSpec, theta: &ParameterVector) -> Result<f64> {
    theta.validate(spec)?;
    let mut lp = log_prior_beta(spec, theta);
    if !theta.cutpoints.is_empty() {
        lp += cutpoint_prior_constrained(spec, &theta.cutpoints);
    }
    Ok(lp)
}

/// The sampling target: log-posterior expressed over the unconstrained
/// space, i.e. `log_posterior(constrain(z))` plus the transform's
/// log-Jacobian sum(delta_k).
pub fn log_posterior_unconstrained(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    z: &[f64],
) -> Result<f64> {
    let theta = from_unconstrained(spec, data.n_predictors(), z)?;
    check_dims(spec, data, weights, &theta)?;
    Ok(logp_grad_unconstrained(spec, data, weights, z, None))
}

/// Exact analytic gradient of the unconstrained sampling target at
/// z = to_unconstrained(theta). Covers the chain rule through the cutpoint
/// transform.
pub fn grad_log_posterior(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    theta: &ParameterVector,
) -> Result<Vec<f64>> {
    let z = to_unconstrained(spec, theta)?;
    grad_log_posterior_unconstrained(spec, data, weights, &z)
}

/// Gradient of [`log_posterior_unconstrained`] with respect to z.
pub fn grad_log_posterior_unconstrained(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    z: &[f64],
) -> Result<Vec<f64>> {
    let theta = from_unconstrained(spec, data.n_predictors(), z)?;
    check_dims(spec, data, weights, &theta)?;
    let mut grad = vec![0.0; z.len()];
    logp_grad_unconstrained(spec, data, weights, z, Some(&mut grad));
    Ok(grad)
}

/// Class probabilities for one predictor row at constrained parameters.
/// Binary: [P(y=0), P(y=1)]. Ordered: [P(y=1)..P(y=K)].
pub fn class_probabilities(
    spec: &ModelSpec,
    theta: &ParameterVector,
    x_row: &[f64],
) -> Result<Vec<f64>> {
    theta.validate(spec)?;
    if x_row.len() != theta.beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictors in row, {} coefficients",
            x_row.len(),
            theta.beta.len()
        )));
    }
    let eta = linear_predictor(theta, x_row);
    Ok(match spec.family {
        ModelFamily::BinaryLogit => vec![sigmoid(-eta), sigmoid(eta)],
        ModelFamily::OrderedLogit { categories } => (1..=categories)
            .map(|k| ordered_log_mass(&theta.cutpoints, eta, k).exp())
            .collect(),
    })
}

pub fn linear_predictor(theta: &ParameterVector, x_row: &[f64]) -> f64 {
    let mut eta = theta.intercept.unwrap_or(0.0);
    for (b, x) in theta.beta.iter().zip(x_row) {
        eta += b * x;
    }
    eta
}

/// Stable log P(y = k) for the cumulative-logit model, 1-based k.
pub(crate) fn ordered_log_mass(cutpoints: &[f64], eta: f64, k: usize) -> f64 {
    let n_cut = cutpoints.len();
    debug_assert!(k >= 1 && k <= n_cut + 1);
    if k == 1 {
        log_sigmoid(cutpoints[0] - eta)
    } else if k == n_cut + 1 {
        log_sigmoid(eta - cutpoints[n_cut - 1])
    } else {
        // log(sigmoid(b) - sigmoid(a)) with a < b, rewritten so no
        // subtraction of near-equal probabilities occurs.
        let a = cutpoints[k - 2] - eta;
        let b = cutpoints[k - 1] - eta;
        -a + (-(-(b - a)).exp()).ln_1p() - softplus(-a) - softplus(-b)
    }
}

fn check_dims(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    theta: &ParameterVector,
) -> Result<()> {
    if theta.beta.len() != data.n_predictors() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} predictors",
            theta.beta.len(),
            data.n_predictors()
        )));
    }
    if weights.len() != data.n_obs() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} observations",
            weights.len(),
            data.n_obs()
        )));
    }
    if let ModelFamily::OrderedLogit { categories } = spec.family {
        if data.outcome_kind.n_classes() > categories {
            return Err(Error::DimensionMismatch(format!(
                "data has {} outcome categories, model has {categories}",
                data.outcome_kind.n_classes()
            )));
        }
    }
    Ok(())
}

fn log_prior_beta(spec: &ModelSpec, theta: &ParameterVector) -> f64 {
    theta
        .intercept
        .iter()
        .chain(theta.beta.iter())
        .map(|&v| normal_log_pdf(v, 0.0, spec.prior_sd))
        .sum()
}

/// Prior over cutpoints as a density on the constrained space: Normal priors
/// on (c_1, delta_k) pushed through delta_k = log(c_{k+1} - c_k), hence the
/// -delta_k Jacobian term per difference.
fn cutpoint_prior_constrained(spec: &ModelSpec, cutpoints: &[f64]) -> f64 {
    let sd = spec.cutpoint_prior_sd;
    let mut lp = normal_log_pdf(cutpoints[0], 0.0, sd);
    for w in cutpoints.windows(2) {
        let delta = (w[1] - w[0]).ln();
        lp += normal_log_pdf(delta, 0.0, sd) - delta;
    }
    lp
}

/// Value (and optionally gradient) of the unconstrained sampling target.
/// Assumes dimensions already checked.
pub(crate) fn logp_grad_unconstrained(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    z: &[f64],
    grad: Option<&mut Vec<f64>>,
) -> f64 {
    let j = data.n_predictors();
    let theta = from_unconstrained(spec, j, z).expect("dimensions checked by caller");

    match spec.family {
        ModelFamily::BinaryLogit => {
            let mut g = grad;
            if let Some(ref mut g) = g {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
            let mut lp = log_likelihood_inner(spec, data, weights, &theta, g.as_deref_mut());
            lp += log_prior_beta(spec, &theta);
            if let Some(g) = g {
                let var = spec.prior_sd * spec.prior_sd;
                for (gi, zi) in g.iter_mut().zip(z) {
                    *gi -= zi / var;
                }
            }
            lp
        }
        ModelFamily::OrderedLogit { .. } => {
            let n_cut = spec.n_cutpoints();
            let mut grad_const = grad.as_ref().map(|_| vec![0.0; j + n_cut]);
            let mut lp = log_likelihood_inner(spec, data, weights, &theta, grad_const.as_mut());
            lp += log_prior_beta(spec, &theta);
            let cut_sd = spec.cutpoint_prior_sd;
            let cut_var = cut_sd * cut_sd;
            // Priors live on the unconstrained (c_1, delta) coordinates.
            lp += normal_log_pdf(z[j], 0.0, cut_sd);
            for &delta in &z[j + 1..] {
                lp += normal_log_pdf(delta, 0.0, cut_sd);
            }
            if let Some(g) = grad {
                let gc = grad_const.expect("allocated above");
                let var = spec.prior_sd * spec.prior_sd;
                for jj in 0..j {
                    g[jj] = gc[jj] - z[jj] / var;
                }
                // d c_m / d c_1 = 1 for every cutpoint m.
                let total: f64 = gc[j..].iter().sum();
                g[j] = total - z[j] / cut_var;
                // d c_m / d delta_k = exp(delta_k) for m > k: suffix sums.
                let mut suffix = 0.0;
                for k in (0..n_cut - 1).rev() {
                    suffix += gc[j + 1 + k];
                    let delta = z[j + 1 + k];
                    g[j + 1 + k] = suffix * delta.exp() - delta / cut_var;
                }
            }
            lp
        }
    }
}

/// Weighted log-likelihood, accumulating d/d(constrained coordinate) into
/// `grad` when given (layout [intercept?, beta.., cutpoints..]).
fn log_likelihood_inner(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    theta: &ParameterVector,
    mut grad: Option<&mut Vec<f64>>,
) -> f64 {
    let j = theta.beta.len();
    let has_intercept = theta.intercept.is_some();
    let mut ll = 0.0;
    match spec.family {
        ModelFamily::BinaryLogit => {
            for ((&y, x_row), &w) in data.y.iter().zip(data.x.rows_iter()).zip(&weights.values) {
                let eta = linear_predictor(theta, x_row);
                let yf = f64::from(y);
                ll += w * (yf * eta - softplus(eta));
                if let Some(g) = grad.as_deref_mut() {
                    let resid = w * (yf - sigmoid(eta));
                    let mut idx = 0;
                    if has_intercept {
                        g[0] += resid;
                        idx = 1;
                    }
                    for (gj, xj) in g[idx..idx + j].iter_mut().zip(x_row) {
                        *gj += resid * xj;
                    }
                }
            }
        }
        ModelFamily::OrderedLogit { .. } => {
            let cut = &theta.cutpoints;
            let n_cut = cut.len();
            for ((&y, x_row), &w) in data.y.iter().zip(data.x.rows_iter()).zip(&weights.values) {
                let eta = linear_predictor(theta, x_row);
                let k = y as usize;
                let lp = ordered_log_mass(cut, eta, k);
                ll += w * lp;
                if let Some(g) = grad.as_deref_mut() {
                    // d lp / d eta and d lp / d c_m for the one or two
                    // cutpoints bracketing category k.
                    let (d_eta, d_low, d_high) = if k == 1 {
                        let s = sigmoid(eta - cut[0]);
                        (-s, None, Some((0, s)))
                    } else if k == n_cut + 1 {
                        let s = sigmoid(cut[n_cut - 1] - eta);
                        (s, Some((n_cut - 1, -s)), None)
                    } else {
                        let a = cut[k - 2] - eta;
                        let b = cut[k - 1] - eta;
                        // sigma'(x) / P via logs; no cancellation.
                        let ra = (-softplus(a) - softplus(-a) - lp).exp();
                        let rb = (-softplus(b) - softplus(-b) - lp).exp();
                        (ra - rb, Some((k - 2, -ra)), Some((k - 1, rb)))
                    };
                    for (gj, xj) in g[..j].iter_mut().zip(x_row) {
                        *gj += w * d_eta * xj;
                    }
                    if let Some((m, d)) = d_low {
                        g[j + m] += w * d;
                    }
                    if let Some((m, d)) = d_high {
                        g[j + m] += w * d;
                    }
                }
            }
        }
    }
    ll
}
