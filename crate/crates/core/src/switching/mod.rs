//! Markov-switching AR model: simulation, forward-backward posteriors,
//! closed-form M-step, EM fitting and sliding-window initialisation.
//!
//! A series `x(0..N)` is modelled from index `L` on; the first `L` values
//! are the fixed conditioning history, so likelihoods and posteriors cover
//! `T = N - L` steps.
//!
//! The M-step maximises the expected complete log-likelihood with the
//! Gaussian term entering as `-(x + gamma^T x~)^2 / (2 sigma^2)`.

mod design;
mod em;
mod estep;
mod init;
mod mstep;
mod simulate;

use serde::{Deserialize, Serialize};

use crate::arcore::ArFilter;
use crate::error::{Error, Result};

pub use design::{least_squares_fit, Design};
pub use em::{fit_em, observed_mspe, EmConfig, FitResult, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use estep::{e_step, EStep, PosteriorWeights};
pub use init::{default_window, init_split, kmeans, window_estimates, WindowEstimate};
pub use mstep::{m_step, q_function, MStepOutcome};
pub use simulate::{simulate, Simulation};

const ROW_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchingArModel {
    /// Per-state filters; each filter's intercept is the state's `psi_0` and
    /// its noise variance is the state's `sigma_m^2`.
    filters: Vec<ArFilter>,
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
}

fn normalised(v: &[f64], what: &str) -> Result<Vec<f64>> {
    if v.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::invalid(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > ROW_TOL {
        return Err(Error::invalid(format!("{what} sums to {s}, not 1")));
    }
    Ok(v.iter().map(|p| p / s).collect())
}

impl SwitchingArModel {
    pub fn new(
        filters: Vec<ArFilter>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
    ) -> Result<Self> {
        let m = filters.len();
        if m == 0 {
            return Err(Error::invalid("a model needs at least one state"));
        }
        let l = filters[0].order();
        if filters.iter().any(|f| f.order() != l) {
            return Err(Error::invalid("all state filters must share one order"));
        }
        if transition.len() != m || transition.iter().any(|r| r.len() != m) {
            return Err(Error::invalid(format!("transition matrix must be {m}x{m}")));
        }
        if initial.len() != m {
            return Err(Error::invalid(format!(
                "initial distribution must have {m} entries"
            )));
        }
        let transition = transition
            .iter()
            .enumerate()
            .map(|(i, r)| normalised(r, &format!("transition row {i}")))
            .collect::<Result<Vec<_>>>()?;
        let initial = normalised(&initial, "initial distribution")?;
        Ok(Self {
            filters,
            transition,
            initial,
        })
    }

    /// Equal self-transition `stay` on the diagonal, the rest spread evenly.
    pub fn with_sticky_transition(filters: Vec<ArFilter>, stay: f64) -> Result<Self> {
        let m = filters.len();
        if !(0.0..=1.0).contains(&stay) {
            return Err(Error::invalid(
                "self-transition probability must lie in [0, 1]",
            ));
        }
        let transition = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| match (i == j, m) {
                        (true, _) => stay,
                        (false, 1) => 0.0,
                        (false, _) => (1.0 - stay) / (m - 1) as f64,
                    })
                    .collect()
            })
            .collect::<Vec<Vec<f64>>>();
        let transition = if m == 1 { vec![vec![1.0]] } else { transition };
        Self::new(filters, transition, vec![1.0 / m as f64; m])
    }

    pub fn states(&self) -> usize {
        self.filters.len()
    }

    pub fn order(&self) -> usize {
        self.filters[0].order()
    }

    pub fn filters(&self) -> &[ArFilter] {
        &self.filters
    }

    pub fn filter(&self, m: usize) -> &ArFilter {
        &self.filters[m]
    }

    pub fn variance(&self, m: usize) -> f64 {
        self.filters[m].noise_variance()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.filters.iter().map(ArFilter::noise_variance).collect()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// State `m` as `[psi_0, psi_1, .., psi_L]`.
    pub fn gamma(&self, m: usize) -> Vec<f64> {
        let f = &self.filters[m];
        std::iter::once(f.intercept())
            .chain(f.coeffs().iter().copied())
            .collect()
    }

    /// Relabel states: new state `i` is old state `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.states();
        let mut seen = vec![false; m];
        if perm.len() != m
            || perm
                .iter()
                .any(|&p| p >= m || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::invalid("not a permutation of the states"));
        }
        Ok(Self {
            filters: perm.iter().map(|&p| self.filters[p].clone()).collect(),
            transition: perm
                .iter()
                .map(|&i| perm.iter().map(|&j| self.transition[i][j]).collect())
                .collect(),
            initial: perm.iter().map(|&p| self.initial[p]).collect(),
        })
    }

    pub(crate) fn from_parts_unchecked(
        filters: Vec<ArFilter>,
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
    ) -> Self {
        Self {
            filters,
            transition,
            initial,
        }
    }
}

/// Filter from `[psi_0, psi_1, .., psi_L]` and a variance.
pub fn filter_from_gamma(gamma: &[f64], variance: f64) -> Result<ArFilter> {
    ArFilter::with_params(gamma[1..].to_vec(), gamma[0], variance)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Permutation `perm` minimising `sum_i |gamma_fit[perm[i]] - gamma_truth[i]|`
/// (Euclidean, intercept included). Both models must have the same state count.
pub fn align_states(fitted: &SwitchingArModel, truth: &SwitchingArModel) -> Result<Vec<usize>> {
    let m = truth.states();
    if fitted.states() != m || fitted.order() != truth.order() {
        return Err(Error::invalid("models differ in state count or order"));
    }
    let dist = |i: usize, j: usize| -> f64 {
        fitted
            .gamma(i)
            .iter()
            .zip(truth.gamma(j))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let best = permutations(m)
        .into_iter()
        .map(|p| {
            let cost: f64 = p.iter().enumerate().map(|(i, &pi)| dist(pi, i)).sum();
            (p, cost)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, _)| p)
        .expect("at least one permutation");
    Ok(best)
}
