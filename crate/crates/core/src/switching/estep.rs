use std::f64::consts::PI;

use super::{Design, SwitchingArModel};
use crate::error::{Error, Result};

/// State posteriors given the whole series.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorWeights {
    states: usize,
    len: usize,
    marginal: Vec<f64>,
    /// Row `t - 1` holds `P(s_{t-1} = i, s_t = j | x)` for `t = 1..len`.
    pairwise: Vec<f64>,
}

impl PosteriorWeights {
    pub fn states(&self) -> usize {
        self.states
    }

    /// Number of modelled steps `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `P(s_t = m | x)`.
    pub fn marginal(&self, t: usize, m: usize) -> f64 {
        self.marginal[t * self.states + m]
    }

    pub fn marginal_row(&self, t: usize) -> &[f64] {
        &self.marginal[t * self.states..(t + 1) * self.states]
    }

    /// `P(s_{t-1} = i, s_t = j | x)` for `t >= 1`.
    pub fn pair(&self, t: usize, i: usize, j: usize) -> f64 {
        debug_assert!(t >= 1);
        let m = self.states;
        self.pairwise[(t - 1) * m * m + i * m + j]
    }

    /// Weights of state `m` over all steps.
    pub fn state_weights(&self, m: usize) -> Vec<f64> {
        (0..self.len).map(|t| self.marginal(t, m)).collect()
    }

    /// Expected number of steps spent in each state.
    pub fn state_mass(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.states];
        for row in self.marginal.chunks(self.states) {
            for (acc, g) in mass.iter_mut().zip(row) {
                *acc += g;
            }
        }
        mass
    }

    /// Summed pairwise posteriors, `sum_t P(s_{t-1} = i, s_t = j | x)`.
    pub fn transition_counts(&self) -> Vec<Vec<f64>> {
        let m = self.states;
        let mut counts = vec![vec![0.0; m]; m];
        for block in self.pairwise.chunks(m * m) {
            for i in 0..m {
                for j in 0..m {
                    counts[i][j] += block[i * m + j];
                }
            }
        }
        counts
    }

    #[cfg(test)]
    pub(crate) fn from_raw(
        states: usize,
        len: usize,
        marginal: Vec<f64>,
        pairwise: Vec<f64>,
    ) -> Self {
        Self {
            states,
            len,
            marginal,
            pairwise,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EStep {
    pub weights: PosteriorWeights,
    /// `ln p(x(L..N) | x(0..L))`.
    pub loglik: f64,
}

/// Log Gaussian density of every (step, state) residual, row-major.
pub(crate) fn log_emissions(model: &SwitchingArModel, design: &Design) -> Vec<f64> {
    let m = model.states();
    let consts: Vec<(f64, f64)> = model
        .filters()
        .iter()
        .map(|f| {
            let v = f.noise_variance();
            (-0.5 * (2.0 * PI * v).ln(), 0.5 / v)
        })
        .collect();
    let mut out = Vec::with_capacity(design.len() * m);
    for t in 0..design.len() {
        for (f, (c, h)) in model.filters().iter().zip(&consts) {
            let e = design.residual(t, f);
            out.push(c - h * e * e);
        }
    }
    out
}

pub(crate) fn e_step_design(model: &SwitchingArModel, design: &Design) -> Result<EStep> {
    if design.order() != model.order() {
        return Err(Error::invalid("design order differs from model order"));
    }
    let m = model.states();
    let n = design.len();
    let log_b = log_emissions(model, design);
    let mut b = vec![0.0; n * m];
    let mut shift = vec![0.0; n];
    for t in 0..n {
        let row = &log_b[t * m..(t + 1) * m];
        let mx = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        shift[t] = mx;
        for k in 0..m {
            b[t * m + k] = (row[k] - mx).exp();
        }
    }
    let tr = model.transition();

    let mut alpha = vec![0.0; n * m];
    let mut scale = vec![0.0; n];
    for t in 0..n {
        let mut c = 0.0;
        for j in 0..m {
            let prior = if t == 0 {
                model.initial()[j]
            } else {
                (0..m).map(|i| alpha[(t - 1) * m + i] * tr[i][j]).sum()
            };
            let a = prior * b[t * m + j];
            alpha[t * m + j] = a;
            c += a;
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::numerical(format!(
                "step {t} has zero likelihood under every reachable state"
            )));
        }
        scale[t] = c;
        for a in &mut alpha[t * m..(t + 1) * m] {
            *a /= c;
        }
    }

    let mut beta = vec![1.0; n * m];
    for t in (0..n.saturating_sub(1)).rev() {
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..m {
                s += tr[i][j] * b[(t + 1) * m + j] * beta[(t + 1) * m + j];
            }
            beta[t * m + i] = s / scale[t + 1];
        }
    }

    let mut marginal = vec![0.0; n * m];
    for t in 0..n {
        let row = &mut marginal[t * m..(t + 1) * m];
        let mut s = 0.0;
        for k in 0..m {
            row[k] = alpha[t * m + k] * beta[t * m + k];
            s += row[k];
        }
        // exact in theory; renormalise away rounding
        for g in row.iter_mut() {
            *g /= s;
        }
    }
    let mut pairwise = vec![0.0; n.saturating_sub(1) * m * m];
    for t in 1..n {
        let block = &mut pairwise[(t - 1) * m * m..t * m * m];
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                let v =
                    alpha[(t - 1) * m + i] * tr[i][j] * b[t * m + j] * beta[t * m + j] / scale[t];
                block[i * m + j] = v;
                s += v;
            }
        }
        for v in block.iter_mut() {
            *v /= s;
        }
    }

    let loglik = scale.iter().zip(&shift).map(|(c, s)| c.ln() + s).sum();
    Ok(EStep {
        weights: PosteriorWeights {
            states: m,
            len: n,
            marginal,
            pairwise,
        },
        loglik,
    })
}

/// Scaled forward-backward pass over `series`, conditioning on its first
/// `L` values.
pub fn e_step(model: &SwitchingArModel, series: &[f64]) -> Result<EStep> {
    e_step_design(model, &Design::new(series, model.order())?)
}
