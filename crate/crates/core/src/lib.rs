//! State-count selection for Markov-switching autoregressive models.
//!
//! The crate compares an observed one-step prediction-error curve against a
//! reference curve obtained by clustering uniformly drawn stable AR filters
//! under the mismatch distance. The building blocks are exposed as separate
//! modules:
//!
//! - [`arcore`]: filter representation, roots, stationary moments and the
//!   mismatch distance (covariance, root, resultant and Monte-Carlo forms).
//! - [`sampler`]: uniform sampling of stable filters with bounded roots.
//! - [`clustering`]: k-medoids over an asymmetric distance matrix and the
//!   reference curve built from it.
//! - [`switching`]: Markov-switching AR simulation and EM fitting.
//! - [`gapselect`]: the gap selection rule, AIC/BIC baselines and the
//!   benchmark driver.
//! - [`formats`]: versioned CSV/JSON artifacts shared with the CLI.

pub mod arcore;
pub mod clustering;
pub mod error;
pub mod formats;
pub mod gapselect;
pub mod poly;
pub mod sampler;
pub mod seeding;
pub mod switching;

pub use arcore::{ArFilter, StationaryMoments};
pub use error::{Error, Result};
