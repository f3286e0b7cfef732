use serde::{Deserialize, Serialize};

use super::estep::e_step_design;
use super::init::{default_window, window_estimates, WindowEstimate};
use super::mstep::{m_step_design, q_function_design};
use super::{filter_from_gamma, Design, PosteriorWeights, SwitchingArModel};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Stop once the relative log-likelihood gain drops below this.
    pub tol: f64,
    /// Window length for re-seeding a degenerate state; defaults to
    /// `max(50, 5(L+1))` capped at the series length.
    pub window: Option<usize>,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            window: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: SwitchingArModel,
    /// Observed-data log-likelihood, one entry per E-step (entry 0 is the
    /// initial model).
    pub loglik_trace: Vec<f64>,
    /// Expected complete log-likelihood after each M-step.
    pub q_trace: Vec<f64>,
    /// Posterior-weighted mean squared one-step prediction error.
    pub mspe: f64,
    pub n_iter: usize,
    pub converged: bool,
    pub ridge_used: bool,
    /// Trace indices at which a degenerate state was re-seeded; the
    /// likelihood is only monotone between these points.
    pub reseeded_at: Vec<usize>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn loglik(&self) -> f64 {
        *self
            .loglik_trace
            .last()
            .expect("trace holds the initial E-step")
    }
}

pub(crate) fn mspe_design(
    model: &SwitchingArModel,
    weights: &PosteriorWeights,
    design: &Design,
) -> f64 {
    let mut total = 0.0;
    for t in 0..design.len() {
        for (k, f) in model.filters().iter().enumerate() {
            let g = weights.marginal(t, k);
            if g > 0.0 {
                total += g * design.residual(t, f).powi(2);
            }
        }
    }
    total / design.len() as f64
}

/// Posterior-weighted in-sample one-step squared prediction error of the
/// fitted model on `series`.
pub fn observed_mspe(fit: &FitResult, series: &[f64]) -> Result<f64> {
    let design = Design::new(series, fit.model.order())?;
    let e = e_step_design(&fit.model, &design)?;
    Ok(mspe_design(&fit.model, &e.weights, &design))
}

fn reseed(
    model: &SwitchingArModel,
    degenerate: &[usize],
    estimates: &[WindowEstimate],
) -> Result<SwitchingArModel> {
    let m = model.states();
    let mut filters = model.filters().to_vec();
    for &k in degenerate {
        let others: Vec<Vec<f64>> = (0..m)
            .filter(|&j| j != k)
            .map(|j| {
                let f = &filters[j];
                std::iter::once(f.intercept())
                    .chain(f.coeffs().iter().copied())
                    .collect()
            })
            .collect();
        let score = |e: &WindowEstimate| -> f64 {
            others
                .iter()
                .map(|g| {
                    g.iter()
                        .zip(&e.gamma)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .sum()
        };
        let best = estimates
            .iter()
            .max_by(|a, b| score(a).total_cmp(&score(b)))
            .ok_or_else(|| Error::invalid("no window estimates to re-seed from"))?;
        filters[k] = filter_from_gamma(&best.gamma, best.variance)?;
    }
    let u = 1.0 / m as f64;
    Ok(SwitchingArModel::from_parts_unchecked(
        filters,
        vec![vec![u; m]; m],
        vec![u; m],
    ))
}

/// EM from `init` until the relative log-likelihood gain falls below
/// `config.tol` or `config.max_iter` M-steps have run.
///
/// A state whose posterior mass drops below `M * 1e-6 * T` is re-seeded
/// once from the window estimate farthest from the other filters, with
/// transitions reset to uniform; a second occurrence stops the fit and
/// marks it not converged.
pub fn fit_em(series: &[f64], init: &SwitchingArModel, config: &EmConfig) -> Result<FitResult> {
    let (m, l, n) = (init.states(), init.order(), series.len());
    if n <= (l + 1).max(m * (l + 2)) {
        return Err(Error::invalid(format!(
            "series of length {n} is too short for {m} states of order {l}"
        )));
    }
    if !(config.tol >= 0.0) {
        return Err(Error::invalid("tolerance must be non-negative"));
    }
    let design = Design::new(series, l)?;
    let mut model = init.clone();
    let mut e = e_step_design(&model, &design)?;
    let mut loglik_trace = vec![e.loglik];
    let mut q_trace = Vec::new();
    let mut reseeded_at = Vec::new();
    let mut warnings = Vec::new();
    let mut ridge_used = false;
    let mut estimates: Option<Vec<WindowEstimate>> = None;
    let mut converged = false;
    let mut collapsed = false;
    let mut n_iter = 0;

    while n_iter < config.max_iter {
        n_iter += 1;
        let out = m_step_design(&e.weights, &design, &model)?;
        ridge_used |= !out.ridge_states.is_empty();
        q_trace.push(q_function_design(&out.model, &e.weights, &design));
        let mut next = out.model;
        let mut reseeded_now = false;
        if !out.degenerate_states.is_empty() {
            if !reseeded_at.is_empty() {
                warnings.push(format!(
                    "states {:?} degenerate again at iteration {n_iter}",
                    out.degenerate_states
                ));
                model = next;
                e = e_step_design(&model, &design)?;
                loglik_trace.push(e.loglik);
                collapsed = true;
                break;
            }
            if estimates.is_none() {
                let window = config.window.unwrap_or_else(|| default_window(l)).min(n);
                estimates = Some(window_estimates(series, l, window)?);
            }
            next = reseed(
                &next,
                &out.degenerate_states,
                estimates.as_deref().unwrap_or_default(),
            )?;
            warnings.push(format!(
                "re-seeded degenerate states {:?} at iteration {n_iter}",
                out.degenerate_states
            ));
            reseeded_now = true;
        }
        model = next;
        let prev = e.loglik;
        e = e_step_design(&model, &design)?;
        if reseeded_now {
            reseeded_at.push(loglik_trace.len());
        }
        loglik_trace.push(e.loglik);
        if !reseeded_now && e.loglik - prev < config.tol * prev.abs() {
            converged = true;
            break;
        }
    }
    if !converged && !collapsed {
        warnings.push(format!(
            "no convergence within {} iterations",
            config.max_iter
        ));
    }
    let mspe = mspe_design(&model, &e.weights, &design);
    Ok(FitResult {
        model,
        loglik_trace,
        q_trace,
        mspe,
        n_iter,
        converged,
        ridge_used,
        reseeded_at,
        warnings,
    })
}
