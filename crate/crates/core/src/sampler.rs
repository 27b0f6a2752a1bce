//! Posterior sampling for the weighted models: Hamiltonian Monte Carlo with
//! dual-averaging step-size adaptation (default) and an adaptive random-walk
//! Metropolis fallback for gradient-free debugging.
//!
//! Determinism contract: every chain owns a ChaCha12 RNG seeded from the
//! config seed with the chain index as the stream, so results are
//! bit-identical for a given (inputs, seed) and invariant to whether chains
//! execute serially or in parallel.

use std::io::Write;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::diagnostics::{self, Diagnostics};
use crate::error::{Error, Result};
use crate::math::{mean, median, sample_sd};
use crate::model::{self, ModelSpec};
use crate::weights::ClassWeights;

/// An unnormalized log-density over an unconstrained space, with gradient,
/// plus the mapping back to the reported (constrained) parameterization.
pub trait Target: Sync {
    fn dim(&self) -> usize;

    /// Log density and gradient at `z`; `grad` has length `dim()`.
    fn logp_grad(&self, z: &[f64], grad: &mut [f64]) -> f64;

    fn logp(&self, z: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.dim()];
        self.logp_grad(z, &mut scratch)
    }

    /// Map unconstrained coordinates to the constrained parameters stored in
    /// [`PosteriorDraws`].
    fn constrain(&self, z: &[f64]) -> Vec<f64>;

    fn param_names(&self) -> Vec<String>;

    /// Starting point for a chain. Default: tight Normal(0, 0.1) draws.
    fn initial_position(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim())
            .map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GradientHmc,
    AdaptiveRandomWalk,
}

/// Chain, warmup, and adaptation controls. The seed is required from the
/// caller; nothing is seeded from the clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_chains: usize,
    pub n_warmup: usize,
    /// Post-warmup draws per chain.
    pub n_draws: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Dual-averaging target acceptance rate, in (0, 1).
    pub target_accept: f64,
    /// Fixed trajectory length for HMC; leapfrog count is
    /// round(trajectory_length / step size), clamped to max_leapfrog.
    pub trajectory_length: f64,
    pub max_leapfrog: usize,
    /// Starting step size, e.g. reused from a previous fit's adaptation;
    /// `None` runs the doubling/halving heuristic.
    pub init_step_size: Option<f64>,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        SamplerConfig {
            n_chains: 4,
            n_warmup: 1000,
            n_draws: 1000,
            seed,
            algorithm: Algorithm::GradientHmc,
            target_accept: 0.8,
            trajectory_length: 1.5,
            max_leapfrog: 64,
            init_step_size: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_chains < 1 {
            return Err(Error::InvalidConfig("n_chains must be at least 1".into()));
        }
        if self.n_draws < 1 {
            return Err(Error::InvalidConfig("n_draws must be at least 1".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::InvalidConfig(
                "target acceptance must lie in (0, 1)".into(),
            ));
        }
        if self.max_leapfrog < 1
            || !self.trajectory_length.is_finite()
            || self.trajectory_length <= 0.0
        {
            return Err(Error::InvalidConfig("invalid leapfrog controls".into()));
        }
        if let Some(eps) = self.init_step_size {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidConfig(
                    "init_step_size must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainStats {
    /// Mean Metropolis acceptance statistic over post-warmup iterations.
    pub accept_rate: f64,
    /// Step size after adaptation (proposal scale for the random walk).
    pub step_size: f64,
    pub divergences: usize,
}

/// Sampled draws in the constrained parameterization with per-parameter
/// convergence diagnostics and per-chain acceptance statistics.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub parameter_names: Vec<String>,
    pub n_chains: usize,
    pub n_draws: usize,
    draws: Vec<f64>,
    pub chain_stats: Vec<ChainStats>,
    pub diagnostics: Diagnostics,
}

impl PosteriorDraws {
    pub fn n_params(&self) -> usize {
        self.parameter_names.len()
    }

    pub fn n_total(&self) -> usize {
        self.n_chains * self.n_draws
    }

    /// Row `i` over all chains (chain-major: chain = i / n_draws).
    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_params();
        &self.draws[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.n_params())
    }

    pub fn column(&self, p: usize) -> Vec<f64> {
        self.rows().map(|r| r[p]).collect()
    }

    pub fn mean(&self, p: usize) -> f64 {
        mean(&self.column(p))
    }

    pub fn sd(&self, p: usize) -> f64 {
        sample_sd(&self.column(p))
    }

    pub fn median(&self, p: usize) -> f64 {
        median(&self.column(p))
    }

    pub fn mean_accept_rate(&self) -> f64 {
        mean(
            &self
                .chain_stats
                .iter()
                .map(|s| s.accept_rate)
                .collect::<Vec<_>>(),
        )
    }

    /// Average adapted step size across chains, reusable as
    /// `init_step_size` for refits on near-identical data.
    pub fn mean_step_size(&self) -> f64 {
        mean(
            &self
                .chain_stats
                .iter()
                .map(|s| s.step_size)
                .collect::<Vec<_>>(),
        )
    }

    /// Assemble draws that did not come from a sampler run (tests, external
    /// tools). Rows are chain-major; chain acceptance statistics are NaN.
    pub fn from_parts(
        parameter_names: Vec<String>,
        n_chains: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let p = parameter_names.len();
        if n_chains == 0 || rows.is_empty() || !rows.len().is_multiple_of(n_chains) {
            return Err(Error::InvalidConfig(format!(
                "{} rows do not split over {n_chains} chains",
                rows.len()
            )));
        }
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged draw rows".into()));
        }
        let n_draws = rows.len() / n_chains;
        let per_chain: Vec<Vec<Vec<f64>>> =
            rows.chunks(n_draws).map(|chunk| chunk.to_vec()).collect();
        let diagnostics = diagnostics::compute(&per_chain, &parameter_names);
        let draws = rows.into_iter().flatten().collect();
        Ok(PosteriorDraws {
            parameter_names,
            n_chains,
            n_draws,
            draws,
            chain_stats: vec![
                ChainStats {
                    accept_rate: f64::NAN,
                    step_size: f64::NAN,
                    divergences: 0,
                };
                n_chains
            ],
            diagnostics,
        })
    }

    /// One row per draw: parameter columns, then chain and iteration.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.parameter_names.clone();
        header.push("chain".into());
        header.push("iteration".into());
        wtr.write_record(&header)
            .map_err(|e| Error::InvalidData(format!("csv write failed: {e}")))?;
        for (i, row) in self.rows().enumerate() {
            let chain = i / self.n_draws;
            let iter = i % self.n_draws;
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(chain.to_string());
            record.push(iter.to_string());
            wtr.write_record(&record)
                .map_err(|e| Error::InvalidData(format!("csv write failed: {e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Draw from the weighted posterior defined by the model module.
pub fn sample(
    spec: &ModelSpec,
    data: &Dataset,
    weights: &ClassWeights,
    config: &SamplerConfig,
) -> Result<PosteriorDraws> {
    spec.validate()?;
    config.validate()?;
    if weights.len() != data.n_obs() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} observations",
            weights.len(),
            data.n_obs()
        )));
    }
    let target = ModelTarget {
        spec,
        data,
        weights,
    };
    sample_target(&target, config)
}

/// Generic driver: run every chain and assemble draws plus diagnostics.
pub fn sample_target<T: Target>(target: &T, config: &SamplerConfig) -> Result<PosteriorDraws> {
    config.validate()?;
    let outputs: Vec<ChainOutput> = (0..config.n_chains)
        .into_par_iter()
        .map(|chain_idx| run_chain(target, config, chain_idx))
        .collect::<Result<Vec<_>>>()?;

    let names = target.param_names();
    let p = names.len();
    let mut draws = Vec::with_capacity(config.n_chains * config.n_draws * p);
    let mut per_chain: Vec<Vec<Vec<f64>>> = Vec::with_capacity(config.n_chains);
    let mut stats = Vec::with_capacity(config.n_chains);
    for out in outputs {
        for row in &out.draws {
            draws.extend_from_slice(row);
        }
        per_chain.push(out.draws);
        stats.push(out.stats);
    }
    let diagnostics = diagnostics::compute(&per_chain, &names);
    Ok(PosteriorDraws {
        parameter_names: names,
        n_chains: config.n_chains,
        n_draws: config.n_draws,
        draws,
        chain_stats: stats,
        diagnostics,
    })
}

struct ChainOutput {
    draws: Vec<Vec<f64>>,
    stats: ChainStats,
}

fn run_chain<T: Target>(
    target: &T,
    config: &SamplerConfig,
    chain_idx: usize,
) -> Result<ChainOutput> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(chain_idx as u64 + 1);

    let dim = target.dim();
    let mut grad = vec![0.0; dim];
    let mut z = Vec::new();
    let mut lp = f64::NEG_INFINITY;
    let mut initialized = false;
    for _ in 0..100 {
        z = target.initial_position(&mut rng);
        lp = target.logp_grad(&z, &mut grad);
        if lp.is_finite() && grad.iter().all(|g| g.is_finite()) {
            initialized = true;
            break;
        }
    }
    if !initialized {
        return Err(Error::InitializationFailed { attempts: 100 });
    }

    match config.algorithm {
        Algorithm::GradientHmc => run_hmc(target, config, chain_idx, rng, z, lp, grad),
        Algorithm::AdaptiveRandomWalk => run_random_walk(target, config, chain_idx, rng, z, lp),
    }
}

fn run_hmc<T: Target>(
    target: &T,
    config: &SamplerConfig,
    chain_idx: usize,
    mut rng: ChaCha12Rng,
    mut z: Vec<f64>,
    mut lp: f64,
    mut grad: Vec<f64>,
) -> Result<ChainOutput> {
    let eps0 = match config.init_step_size {
        Some(eps) => eps,
        None => find_reasonable_epsilon(target, &z, lp, &grad, &mut rng),
    };
    let mut adapt = DualAveraging::new(eps0, config.target_accept);
    let mut eps = eps0;
    let mut divergences = 0usize;

    for _ in 0..config.n_warmup {
        let step = hmc_transition(target, &mut rng, &z, lp, &grad, eps, config);
        if step.divergent {
            divergences += 1;
        }
        if step.accepted {
            z = step.z;
            lp = step.lp;
            grad = step.grad;
        }
        adapt.update(step.alpha);
        eps = adapt.current();
    }
    eps = adapt.adapted();

    let mut draws = Vec::with_capacity(config.n_draws);
    let mut alpha_sum = 0.0;
    for _ in 0..config.n_draws {
        let step = hmc_transition(target, &mut rng, &z, lp, &grad, eps, config);
        if step.divergent {
            divergences += 1;
        }
        if step.accepted {
            z = step.z;
            lp = step.lp;
            grad = step.grad;
        }
        if !lp.is_finite() {
            return Err(Error::ChainDiverged { chain: chain_idx });
        }
        alpha_sum += step.alpha;
        draws.push(target.constrain(&z));
    }
    debug_assert_eq!(draws[0].len(), target.param_names().len());
    Ok(ChainOutput {
        draws,
        stats: ChainStats {
            accept_rate: alpha_sum / config.n_draws as f64,
            step_size: eps,
            divergences,
        },
    })
}

struct Transition {
    z: Vec<f64>,
    lp: f64,
    grad: Vec<f64>,
    alpha: f64,
    accepted: bool,
    divergent: bool,
}

fn hmc_transition<T: Target>(
    target: &T,
    rng: &mut ChaCha12Rng,
    z0: &[f64],
    lp0: f64,
    grad0: &[f64],
    eps: f64,
    config: &SamplerConfig,
) -> Transition {
    let dim = z0.len();
    let momentum: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let h0 = -lp0 + 0.5 * momentum.iter().map(|r| r * r).sum::<f64>();

    // Jitter the step size and draw the leapfrog count uniformly up to the
    // trajectory budget; fixed-length trajectories resonate on near-Gaussian
    // targets (antithetic draws that stall second-moment mixing).
    let eps = eps * rng.random_range(0.9..1.1);
    let n_base = ((config.trajectory_length / eps).round() as usize).clamp(1, config.max_leapfrog);
    let n_steps = rng.random_range(1..=n_base);

    let mut z = z0.to_vec();
    let mut r = momentum;
    let mut grad = grad0.to_vec();
    let mut lp = lp0;
    let mut finite = true;
    for (ri, gi) in r.iter_mut().zip(&grad) {
        *ri += 0.5 * eps * gi;
    }
    for step in 0..n_steps {
        for (zi, ri) in z.iter_mut().zip(&r) {
            *zi += eps * ri;
        }
        lp = target.logp_grad(&z, &mut grad);
        if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            finite = false;
            break;
        }
        let scale = if step + 1 == n_steps { 0.5 } else { 1.0 };
        for (ri, gi) in r.iter_mut().zip(&grad) {
            *ri += scale * eps * gi;
        }
    }

    let reject = |alpha: f64, divergent: bool| Transition {
        z: Vec::new(),
        lp: f64::NAN,
        grad: Vec::new(),
        alpha,
        accepted: false,
        divergent,
    };

    if !finite {
        return reject(0.0, true);
    }
    let h1 = -lp + 0.5 * r.iter().map(|ri| ri * ri).sum::<f64>();
    let delta = h0 - h1;
    if !delta.is_finite() || delta < -1000.0 {
        return reject(0.0, true);
    }
    let alpha = delta.min(0.0).exp();
    let accepted = rng.random::<f64>() < alpha;
    if accepted {
        Transition {
            z,
            lp,
            grad,
            alpha,
            accepted,
            divergent: false,
        }
    } else {
        reject(alpha, false)
    }
}

/// Doubling/halving heuristic for the starting step size: adjust until the
/// one-step acceptance probability crosses 1/2.
fn find_reasonable_epsilon<T: Target>(
    target: &T,
    z: &[f64],
    lp: f64,
    grad: &[f64],
    rng: &mut ChaCha12Rng,
) -> f64 {
    let dim = z.len();
    let momentum: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let h0 = -lp + 0.5 * momentum.iter().map(|r| r * r).sum::<f64>();

    let one_step = |eps: f64| -> f64 {
        let mut zt = z.to_vec();
        let mut r = momentum.clone();
        let mut g = grad.to_vec();
        for (ri, gi) in r.iter_mut().zip(&g) {
            *ri += 0.5 * eps * gi;
        }
        for (zi, ri) in zt.iter_mut().zip(&r) {
            *zi += eps * ri;
        }
        let lp1 = target.logp_grad(&zt, &mut g);
        if !lp1.is_finite() {
            return f64::NEG_INFINITY;
        }
        for (ri, gi) in r.iter_mut().zip(&g) {
            *ri += 0.5 * eps * gi;
        }
        let h1 = -lp1 + 0.5 * r.iter().map(|ri| ri * ri).sum::<f64>();
        h0 - h1
    };

    let mut eps = 1.0;
    let delta0 = one_step(eps);
    let direction: f64 = if delta0 > (0.5f64).ln() { 1.0 } else { -1.0 };
    for _ in 0..60 {
        let delta = one_step(eps);
        if direction * delta <= direction * (0.5f64).ln() {
            break;
        }
        eps *= (2.0f64).powf(direction);
        if !(1e-10..=1e3).contains(&eps) {
            break;
        }
    }
    eps.clamp(1e-10, 1e3)
}

/// Nesterov dual averaging on log step size (Hoffman & Gelman 2014).
struct DualAveraging {
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    m: f64,
    delta: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps0: f64, delta: f64) -> Self {
        DualAveraging {
            mu: (10.0 * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            m: 0.0,
            delta,
        }
    }

    fn update(&mut self, alpha: f64) {
        self.m += 1.0;
        let frac = 1.0 / (self.m + Self::T0);
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (self.delta - alpha);
        self.log_eps = self.mu - self.m.sqrt() / Self::GAMMA * self.h_bar;
        let w = self.m.powf(-Self::KAPPA);
        self.log_eps_bar = w * self.log_eps + (1.0 - w) * self.log_eps_bar;
    }

    fn current(&self) -> f64 {
        self.log_eps.exp()
    }

    fn adapted(&self) -> f64 {
        if self.m > 0.0 {
            self.log_eps_bar.exp()
        } else {
            self.log_eps.exp()
        }
    }
}

fn run_random_walk<T: Target>(
    target: &T,
    config: &SamplerConfig,
    chain_idx: usize,
    mut rng: ChaCha12Rng,
    mut z: Vec<f64>,
    mut lp: f64,
) -> Result<ChainOutput> {
    let mut scale = config.init_step_size.unwrap_or(0.5);
    let mut divergences = 0usize;

    for m in 1..=config.n_warmup {
        let proposal: Vec<f64> = z
            .iter()
            .map(|zi| zi + scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let lp_new = target.logp(&proposal);
        let alpha = if lp_new.is_finite() {
            (lp_new - lp).min(0.0).exp()
        } else {
            divergences += 1;
            0.0
        };
        if rng.random::<f64>() < alpha {
            z = proposal;
            lp = lp_new;
        }
        // Robbins-Monro on the log scale toward the target acceptance.
        scale = (scale.ln() + (alpha - config.target_accept) / (m as f64).powf(0.6)).exp();
        scale = scale.clamp(1e-8, 1e3);
    }

    let mut draws = Vec::with_capacity(config.n_draws);
    let mut alpha_sum = 0.0;
    for _ in 0..config.n_draws {
        let proposal: Vec<f64> = z
            .iter()
            .map(|zi| zi + scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let lp_new = target.logp(&proposal);
        let alpha = if lp_new.is_finite() {
            (lp_new - lp).min(0.0).exp()
        } else {
            divergences += 1;
            0.0
        };
        if rng.random::<f64>() < alpha {
            z = proposal;
            lp = lp_new;
        }
        if !lp.is_finite() {
            return Err(Error::ChainDiverged { chain: chain_idx });
        }
        alpha_sum += alpha;
        draws.push(target.constrain(&z));
    }
    Ok(ChainOutput {
        draws,
        stats: ChainStats {
            accept_rate: alpha_sum / config.n_draws as f64,
            step_size: scale,
            divergences,
        },
    })
}

/// The weighted-model posterior as a sampling target.
struct ModelTarget<'a> {
    spec: &'a ModelSpec,
    data: &'a Dataset,
    weights: &'a ClassWeights,
}

impl Target for ModelTarget<'_> {
    fn dim(&self) -> usize {
        self.spec.n_params(self.data.n_predictors())
    }

    fn logp_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        let mut g = vec![0.0; z.len()];
        let lp =
            model::logp_grad_unconstrained(self.spec, self.data, self.weights, z, Some(&mut g));
        grad.copy_from_slice(&g);
        lp
    }

    fn logp(&self, z: &[f64]) -> f64 {
        model::logp_grad_unconstrained(self.spec, self.data, self.weights, z, None)
    }

    fn constrain(&self, z: &[f64]) -> Vec<f64> {
        model::from_unconstrained(self.spec, self.data.n_predictors(), z)
            .expect("dimensions fixed by target")
            .to_constrained()
    }

    fn param_names(&self) -> Vec<String> {
        self.spec.param_names(&self.data.predictor_names)
    }

    /// Coefficients from Normal(0, 0.1); cutpoints from sorted uniform draws
    /// over [-2, 2], mapped through the log-difference transform.
    fn initial_position(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let n_coef = self.data.n_predictors() + usize::from(self.spec.include_intercept);
        let mut z: Vec<f64> = (0..n_coef)
            .map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let n_cut = self.spec.n_cutpoints();
        if n_cut > 0 {
            let mut cuts: Vec<f64> = (0..n_cut).map(|_| rng.random_range(-2.0..2.0)).collect();
            cuts.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
            z.push(cuts[0]);
            for w in cuts.windows(2) {
                // collisions from sorting are broken with a small floor
                z.push((w[1] - w[0]).max(1e-3).ln());
            }
        }
        z
    }
}
