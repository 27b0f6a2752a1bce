//! Weighted-likelihood (power-likelihood) Bayesian classification for
//! imbalanced data.
//!
//! Each observation's likelihood contribution is raised to a positive weight
//! before Bayesian updating:
//!
//! ```text
//! p(theta | y) ∝ p(theta) * prod_i p(y_i | theta)^{w_i},   w_i > 0, sum_i w_i = N
//! ```
//!
//! Weights are the inverse of each observation's class proportion,
//! normalized so they sum to the sample size — rare classes count for more
//! without changing the total information content. Supplying all-ones
//! weights recovers the ordinary unweighted analysis from the same code
//! path, so weighted and unweighted fits are directly comparable.
//!
//! The crate provides:
//! - [`weights`]: inverse-proportion weight computation and normalization.
//! - [`model`]: weighted binary-logit and ordered-logit log-posteriors with
//!   analytic gradients.
//! - [`sampler`]: HMC with dual-averaging step-size adaptation (plus an
//!   adaptive random-walk fallback) and convergence [`diagnostics`].
//! - [`predict`]: posterior predictive distributions, classification rules,
//!   and leave-one-out validation.
//! - [`metrics`]: threshold metrics, AUC, Brier and balanced variants,
//!   ranked probability score, calibration, and ordinal binary collapses.
//! - [`simdata`]: seeded synthetic datasets with controlled class imbalance.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod math;
pub mod metrics;
pub mod model;
pub mod predict;
pub mod sampler;
pub mod simdata;
pub mod weights;

pub use data::{Dataset, Matrix, OutcomeKind, Standardizer};
pub use error::{Error, Result};
pub use model::{ModelFamily, ModelSpec, ParameterVector};
pub use sampler::{Algorithm, PosteriorDraws, SamplerConfig};
pub use weights::{ClassWeights, WeightingMode};
