use std::f64::consts::PI;

use super::{filter_from_gamma, Design, PosteriorWeights, SwitchingArModel};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MStepOutcome {
    pub model: SwitchingArModel,
    /// States whose weighted Gram matrix needed the ridge fallback.
    pub ridge_states: Vec<usize>,
    /// States with posterior mass below `M * 1e-6 * T`; their parameters
    /// are carried over from the previous model.
    pub degenerate_states: Vec<usize>,
}

pub(crate) fn degenerate_threshold(states: usize, steps: usize) -> f64 {
    states as f64 * 1e-6 * steps as f64
}

/// Lower bound on any state's variance: a tiny fraction of the series'
/// own variance, so a state cannot collapse onto a handful of points.
pub(crate) fn variance_floor(design: &Design) -> f64 {
    let y = design.targets();
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (1e-6 * var).max(1e-300)
}

pub(crate) fn m_step_design(
    weights: &PosteriorWeights,
    design: &Design,
    previous: &SwitchingArModel,
) -> Result<MStepOutcome> {
    let m = previous.states();
    if weights.states() != m || weights.len() != design.len() || design.order() != previous.order()
    {
        return Err(Error::invalid(
            "posterior weights do not match the series and model",
        ));
    }
    let mass = weights.state_mass();
    let threshold = degenerate_threshold(m, design.len());
    let floor = variance_floor(design);
    let mut filters = Vec::with_capacity(m);
    let mut ridge_states = Vec::new();
    let mut degenerate_states = Vec::new();
    for (k, &mk) in mass.iter().enumerate() {
        if mk < threshold {
            degenerate_states.push(k);
            filters.push(previous.filter(k).clone());
            continue;
        }
        let w = weights.state_weights(k);
        let (gamma, ridge) = design.weighted_fit(Some(&w), 0..design.len())?;
        if ridge {
            ridge_states.push(k);
        }
        let mut f = filter_from_gamma(&gamma, 1.0)?;
        let rss: f64 = w
            .iter()
            .enumerate()
            .map(|(t, wt)| wt * design.residual(t, &f).powi(2))
            .sum();
        f.set_noise_variance((rss / mk).max(floor));
        filters.push(f);
    }

    let counts = weights.transition_counts();
    let transition = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let s: f64 = row.iter().sum();
            if s > 0.0 && !degenerate_states.contains(&i) {
                row.iter().map(|c| c / s).collect()
            } else {
                previous.transition()[i].clone()
            }
        })
        .collect();
    let initial = if weights.is_empty() {
        previous.initial().to_vec()
    } else {
        weights.marginal_row(0).to_vec()
    };
    Ok(MStepOutcome {
        model: SwitchingArModel::from_parts_unchecked(filters, transition, initial),
        ridge_states,
        degenerate_states,
    })
}

/// Closed-form maximiser of the expected complete log-likelihood given the
/// posteriors: weighted least squares per state, weighted residual
/// variance, normalised transition counts, and the first-step marginal as
/// the initial distribution.
pub fn m_step(
    weights: &PosteriorWeights,
    series: &[f64],
    previous: &SwitchingArModel,
) -> Result<MStepOutcome> {
    m_step_design(weights, &Design::new(series, previous.order())?, previous)
}

fn weighted_log(w: f64, p: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * p.ln()
    }
}

pub(crate) fn q_function_design(
    model: &SwitchingArModel,
    weights: &PosteriorWeights,
    design: &Design,
) -> f64 {
    let m = model.states();
    let mut q = 0.0;
    for t in 0..design.len() {
        for k in 0..m {
            let g = weights.marginal(t, k);
            if g == 0.0 {
                continue;
            }
            let f = model.filter(k);
            let v = f.noise_variance();
            let e = design.residual(t, f);
            q += g * (-0.5 * (2.0 * PI * v).ln() - e * e / (2.0 * v));
        }
    }
    for t in 1..design.len() {
        for i in 0..m {
            for j in 0..m {
                q += weighted_log(weights.pair(t, i, j), model.transition()[i][j]);
            }
        }
    }
    if !weights.is_empty() {
        for k in 0..m {
            q += weighted_log(weights.marginal(0, k), model.initial()[k]);
        }
    }
    q
}

/// Expected complete-data log-likelihood of `model` under fixed posteriors.
pub fn q_function(
    model: &SwitchingArModel,
    weights: &PosteriorWeights,
    series: &[f64],
) -> Result<f64> {
    Ok(q_function_design(
        model,
        weights,
        &Design::new(series, model.order())?,
    ))
}
