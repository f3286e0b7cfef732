//! Gap-statistic choice of the number of AR states, with AIC/BIC baselines
//! and a seeded benchmark driver.

mod benchmark;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{ReferenceCache, ReferenceParams, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use crate::switching::{default_window, fit_em, init_split, EmConfig, FitResult, SwitchingArModel};

pub use benchmark::{
    report_to_csv, run_benchmark, scenario, simulate_instance, BenchmarkConfig, BenchmarkReport,
    InstanceRecord, Method, Scenario,
};

/// Smallest radius used for the reference batch.
pub const MIN_RADIUS: f64 = 0.05;
pub const DEFAULT_REF_ITERATIONS: usize = 32;
pub const MAX_REF_COUNT: usize = 1000;

/// `B` samples reference filters from the estimated radius, `U` from the
/// unit disc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "B")]
    Bounded,
    #[serde(rename = "U")]
    Unit,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "b" => Ok(Self::Bounded),
            "U" | "u" => Ok(Self::Unit),
            other => Err(Error::invalid(format!("unknown variant `{other}`, expected B or U"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub variant: Variant,
    pub em: EmConfig,
    /// Initialisation window; `max(50, 5(L+1))` when unset.
    pub window: Option<usize>,
    /// Filters per reference batch; `min(N, 1000)` when unset.
    pub ref_count: Option<usize>,
    pub ref_iterations: usize,
    pub delta: f64,
    /// Seed for initialisation.
    pub seed: u64,
    /// Seed for the reference batches.
    pub reference_seed: u64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Bounded,
            em: EmConfig::default(),
            window: None,
            ref_count: None,
            ref_iterations: DEFAULT_REF_ITERATIONS,
            delta: DEFAULT_DELTA,
            seed: 0,
            reference_seed: 0,
        }
    }
}

impl SelectConfig {
    /// Both seeds derived from one master seed.
    pub fn seeded(master: u64) -> Self {
        Self {
            seed: derive_seed(master, "select-init", 0),
            reference_seed: derive_seed(master, "select-reference", 0),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCurves {
    pub max_states: usize,
    /// `ln W^_M` for `M = 1..=max_states`.
    pub observed: Vec<f64>,
    /// `ln W_M` for `M = 1..=max_states`.
    pub reference: Vec<f64>,
    pub variant: Variant,
    pub r_estimated: f64,
    pub r_used: f64,
    pub selected_m: usize,
    /// Location of the largest gap, logged for comparison only.
    pub argmax_gap: usize,
    pub warnings: Vec<String>,
}

impl GapCurves {
    pub fn gap(&self) -> Vec<f64> {
        self.reference.iter().zip(&self.observed).map(|(r, o)| r - o).collect()
    }
}

/// Largest root modulus over the filters, capped at 1 and floored at
/// [`MIN_RADIUS`].
pub fn estimate_radius(model: &SwitchingArModel) -> Result<f64> {
    let mut r: f64 = 0.0;
    for f in model.filters() {
        r = r.max(f.max_root_modulus()?);
    }
    Ok(r.clamp(MIN_RADIUS, 1.0))
}

/// Smallest `M < M_max` (1-based) with `gap(M) >= gap(M+1)`, else `M_max`.
pub fn gap_rule(observed: &[f64], reference: &[f64]) -> usize {
    let gap: Vec<f64> = reference.iter().zip(observed).map(|(r, o)| r - o).collect();
    gap.windows(2).position(|w| w[0] >= w[1]).map_or(gap.len(), |i| i + 1)
}

/// 1-based position of the largest gap, earliest on ties.
pub fn argmax_gap(observed: &[f64], reference: &[f64]) -> usize {
    let mut best = (1, f64::NEG_INFINITY);
    for (i, (r, o)) in reference.iter().zip(observed).enumerate() {
        if r - o > best.1 {
            best = (i + 1, r - o);
        }
    }
    best.0
}

/// Free parameters of an `M`-state order-`L` model: filters with intercept
/// and variance, free transition entries and free initial probabilities.
pub fn parameter_count(states: usize, order: usize) -> usize {
    states * (order + 2) + states * (states - 1) + (states - 1)
}

/// AIC and BIC choices (1-based) over fits for `M = 1..`; ties go to the
/// smaller `M`.
pub fn aic_bic(fits: &[FitResult], n: usize) -> Result<(usize, usize)> {
    if fits.is_empty() {
        return Err(Error::invalid("no fits to compare"));
    }
    let ln_n = (n as f64).ln();
    let mut aic = (1, f64::INFINITY);
    let mut bic = (1, f64::INFINITY);
    for (i, fit) in fits.iter().enumerate() {
        let m = i + 1;
        let p = parameter_count(m, fit.model.order()) as f64;
        let ll = fit.loglik();
        let a = -2.0 * ll + 2.0 * p;
        let b = -2.0 * ll + p * ln_n;
        if a < aic.1 {
            aic = (m, a);
        }
        if b < bic.1 {
            bic = (m, b);
        }
    }
    Ok((aic.0, bic.0))
}

fn window_for(n: usize, order: usize, config: &SelectConfig) -> usize {
    config.window.unwrap_or_else(|| default_window(order).min(n))
}

/// EM fits for `M = 1..=max_states` from the split initialisation.
pub fn fit_all(series: &[f64], order: usize, max_states: usize, config: &SelectConfig) -> Result<Vec<FitResult>> {
    let inits = init_split(
        series,
        order,
        max_states,
        window_for(series.len(), order, config),
        config.seed,
    )?;
    fit_all_from(series, &inits, &config.em)
}

/// EM fits from the given initial models, run concurrently.
pub fn fit_all_from(series: &[f64], inits: &[SwitchingArModel], em: &EmConfig) -> Result<Vec<FitResult>> {
    inits.par_iter().map(|init| fit_em(series, init, em)).collect()
}

/// Radius used for the reference batch: 1 for `U`, otherwise the estimate
/// from the largest fit.
pub fn radius_for(fits: &[FitResult], variant: Variant) -> Result<(f64, f64)> {
    let last = fits.last().ok_or_else(|| Error::invalid("no fits"))?;
    let r_est = estimate_radius(&last.model)?;
    let r = match variant {
        Variant::Bounded => r_est,
        Variant::Unit => 1.0,
    };
    Ok((r_est, r))
}

pub fn reference_params(n: usize, order: usize, max_states: usize, radius: f64, config: &SelectConfig) -> ReferenceParams {
    ReferenceParams {
        order,
        radius,
        max_states,
        count: config.ref_count.unwrap_or(n.min(MAX_REF_COUNT)).max(max_states),
        iterations: config.ref_iterations,
        delta: config.delta,
        seed: config.reference_seed,
    }
}

/// Gap curves from precomputed fits.
pub fn select_from_fits(
    fits: &[FitResult],
    n: usize,
    config: &SelectConfig,
    cache: &ReferenceCache,
) -> Result<GapCurves> {
    let max_states = fits.len();
    let order = fits.first().ok_or_else(|| Error::invalid("no fits"))?.model.order();
    let (r_est, r) = radius_for(fits, config.variant)?;
    let params = reference_params(n, order, max_states, r, config);
    let w = cache.get_or_compute(&params)?;
    let reference: Vec<f64> = w.iter().map(|v| v.ln()).collect();
    Ok(curves_from(fits, reference, config.variant, r_est, crate::clustering::CurveKey::new(&params).radius()))
}

pub(crate) fn curves_from(fits: &[FitResult], reference: Vec<f64>, variant: Variant, r_est: f64, r_used: f64) -> GapCurves {
    let observed: Vec<f64> = fits.iter().map(|f| f.mspe.max(f64::MIN_POSITIVE).ln()).collect();
    let mut warnings = Vec::new();
    for (i, f) in fits.iter().enumerate() {
        if !f.converged {
            warnings.push(format!("fit with M = {} did not converge", i + 1));
        }
        warnings.extend(f.warnings.iter().map(|w| format!("M = {}: {w}", i + 1)));
    }
    GapCurves {
        max_states: fits.len(),
        selected_m: gap_rule(&observed, &reference),
        argmax_gap: argmax_gap(&observed, &reference),
        observed,
        reference,
        variant,
        r_estimated: r_est,
        r_used,
        warnings,
    }
}

/// Fit `M = 1..=max_states`, build the observed and reference curves and
/// apply the gap rule.
pub fn select(
    series: &[f64],
    order: usize,
    max_states: usize,
    config: &SelectConfig,
    cache: &ReferenceCache,
) -> Result<GapCurves> {
    if max_states == 0 {
        return Err(Error::invalid("M_max must be at least 1"));
    }
    let fits = fit_all(series, order, max_states, config)?;
    select_from_fits(&fits, series.len(), config, cache)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcore::ArFilter;
    use crate::switching::simulate;

    fn fake_fit(states: usize, order: usize, loglik: f64, mspe: f64, root: f64) -> FitResult {
        let f = ArFilter::new({
            let mut c = vec![0.0; order];
            c[0] = -root;
            c
        })
        .unwrap();
        FitResult {
            model: SwitchingArModel::with_sticky_transition(vec![f; states], 0.9).unwrap(),
            loglik_trace: vec![loglik],
            q_trace: vec![],
            mspe,
            n_iter: 1,
            converged: true,
            ridge_used: false,
            reseeded_at: vec![],
            warnings: vec![],
        }
    }

    #[test]
    fn radius_rules() {
        let zero = fake_fit(2, 2, 0.0, 1.0, 0.0);
        assert_eq!(estimate_radius(&zero.model).unwrap(), MIN_RADIUS);
        let unstable = fake_fit(1, 1, 0.0, 1.0, 1.3);
        assert_eq!(estimate_radius(&unstable.model).unwrap(), 1.0);
        let filters = [0.4, 0.7, 0.6].map(|r| ArFilter::new(vec![-r]).unwrap()).to_vec();
        let model = SwitchingArModel::with_sticky_transition(filters, 0.9).unwrap();
        assert!((estimate_radius(&model).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn gap_rule_cases() {
        // gaps 1, 3, 2, 4: first non-increase at M = 2
        assert_eq!(gap_rule(&[0.0; 4], &[1.0, 3.0, 2.0, 4.0]), 2);
        assert_eq!(argmax_gap(&[0.0; 4], &[1.0, 3.0, 2.0, 4.0]), 4);
        assert_eq!(gap_rule(&[0.0; 3], &[1.0, 2.0, 3.0]), 3);
        assert_eq!(gap_rule(&[0.0], &[5.0]), 1);
        // equal gaps satisfy the inequality
        assert_eq!(gap_rule(&[1.0, 1.0], &[2.0, 2.0]), 1);
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(parameter_count(1, 1), 3);
        assert_eq!(parameter_count(3, 4), 26);
    }

    #[test]
    fn equal_logliks_pick_one_state() {
        let fits: Vec<FitResult> = (1..=4).map(|m| fake_fit(m, 2, -100.0, 1.0, 0.3)).collect();
        assert_eq!(aic_bic(&fits, 1000).unwrap(), (1, 1));
        let mut better = fits.clone();
        better[2].loglik_trace = vec![-20.0];
        assert_eq!(aic_bic(&better, 1000).unwrap(), (3, 3));
    }

    fn small_config() -> SelectConfig {
        SelectConfig {
            ref_count: Some(100),
            ref_iterations: 3,
            ..SelectConfig::seeded(5)
        }
    }

    #[test]
    fn single_state_is_vacuous_and_deterministic() {
        let model = SwitchingArModel::new(vec![ArFilter::new(vec![-0.5]).unwrap()], vec![vec![1.0]], vec![1.0]).unwrap();
        let x = simulate(&model, 400, &[], 1).unwrap().series;
        let cache = ReferenceCache::in_memory();
        let c = select(&x, 1, 1, &small_config(), &cache).unwrap();
        assert_eq!(c.selected_m, 1);
        let a = select(&x, 1, 3, &small_config(), &cache).unwrap();
        let b = select(&x, 1, 3, &small_config(), &ReferenceCache::in_memory()).unwrap();
        assert_eq!(a, b);
        assert!(a.reference.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn unit_variant_uses_radius_one() {
        let model = SwitchingArModel::new(vec![ArFilter::new(vec![-0.3]).unwrap()], vec![vec![1.0]], vec![1.0]).unwrap();
        let x = simulate(&model, 400, &[], 2).unwrap().series;
        let cache = ReferenceCache::in_memory();
        let fits = fit_all(&x, 1, 2, &small_config()).unwrap();
        let u = select_from_fits(&fits, x.len(), &SelectConfig { variant: Variant::Unit, ..small_config() }, &cache).unwrap();
        let b = select_from_fits(&fits, x.len(), &small_config(), &cache).unwrap();
        assert_eq!(u.r_used, 1.0);
        assert!(b.r_used < 1.0);
        assert_eq!(u.observed, b.observed);
    }

    #[test]
    fn scaling_the_series_keeps_the_choice() {
        let f = |c: Vec<f64>, mu: f64| {
            let psi0 = ArFilter::intercept_for_mean(&c, mu);
            ArFilter::with_params(c, psi0, 1.0).unwrap()
        };
        let truth = SwitchingArModel::with_sticky_transition(vec![f(vec![-0.5], -2.0), f(vec![0.4], 2.0)], 0.98).unwrap();
        let x = simulate(&truth, 800, &[], 3).unwrap().series;
        let cfg = small_config();
        let inits = init_split(&x, 1, 3, 50, 1).unwrap();
        let c = 7.5;
        let scaled_x: Vec<f64> = x.iter().map(|v| v * c).collect();
        let scaled_inits: Vec<SwitchingArModel> = inits
            .iter()
            .map(|m| {
                let filters = m
                    .filters()
                    .iter()
                    .map(|f| ArFilter::with_params(f.coeffs().to_vec(), f.intercept() * c, f.noise_variance() * c * c).unwrap())
                    .collect();
                SwitchingArModel::new(filters, m.transition().to_vec(), m.initial().to_vec()).unwrap()
            })
            .collect();
        let cache = ReferenceCache::in_memory();
        let a = select_from_fits(&fit_all_from(&x, &inits, &cfg.em).unwrap(), x.len(), &cfg, &cache).unwrap();
        let b = select_from_fits(&fit_all_from(&scaled_x, &scaled_inits, &cfg.em).unwrap(), x.len(), &cfg, &cache).unwrap();
        assert_eq!(a.selected_m, b.selected_m);
        let shift = 2.0 * c.ln();
        for (o, s) in a.observed.iter().zip(&b.observed) {
            assert!((s - o - shift).abs() < 1e-3, "{o} {s}");
        }
    }
}
