use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ArFilter;
use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

const BATCHES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Batch-means standard error (the summands are serially correlated).
    pub std_error: f64,
}

/// Burn-in steps before averaging: `max(1000, ceil(10 L / (1 - max|root|)))`.
pub fn mc_burn_in(f: &ArFilter) -> Result<usize> {
    let rmax = f.max_root_modulus()?;
    if rmax >= 1.0 {
        return Err(Error::invalid("generating filter must be stable"));
    }
    let mixing = (10.0 * f.order() as f64 / (1.0 - rmax)).ceil();
    Ok(if mixing.is_finite() && mixing > 1000.0 {
        mixing as usize
    } else {
        1000
    })
}

/// Simulates the process generated by `a` and averages the excess squared
/// one-step error of predicting with `b` instead of `a`. Intercepts and the
/// noise variance of `a` are honoured.
pub fn distance_mc(a: &ArFilter, b: &ArFilter, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if n_samples < 2 {
        return Err(Error::invalid(
            "Monte-Carlo estimate needs at least two samples",
        ));
    }
    let l = a.order().max(b.order());
    let fa = a.padded_filter(l);
    let fb = b.padded_filter(l);
    let burn = mc_burn_in(&fa)?;
    let sigma = fa.noise_variance().sqrt();
    let mut rng = rng_from_seed(seed);

    // history[0] is x(n-1)
    let mut history = vec![fa.stationary_mean().unwrap_or(0.0); l];
    let step = |history: &mut Vec<f64>, rng: &mut crate::seeding::SeededRng| {
        let eps: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        let x = fa.predict(history) + eps;
        let err_b = x - fb.predict(history);
        history.rotate_right(1);
        history[0] = x;
        err_b * err_b - eps * eps
    };
    for _ in 0..burn {
        step(&mut history, &mut rng);
    }

    let batches = BATCHES.min(n_samples);
    let per_batch = n_samples / batches;
    let mut batch_means = Vec::with_capacity(batches);
    let mut total = 0.0;
    let mut count = 0usize;
    for k in 0..batches {
        let len = if k + 1 == batches {
            n_samples - per_batch * (batches - 1)
        } else {
            per_batch
        };
        let mut acc = 0.0;
        for _ in 0..len {
            acc += step(&mut history, &mut rng);
        }
        total += acc;
        count += len;
        batch_means.push(acc / len as f64);
    }
    let estimate = total / count as f64;
    let bm_mean = batch_means.iter().sum::<f64>() / batches as f64;
    let var = batch_means
        .iter()
        .map(|m| (m - bm_mean).powi(2))
        .sum::<f64>()
        / (batches - 1).max(1) as f64;
    Ok(McEstimate {
        estimate,
        std_error: (var / batches as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcore::{distance_cov, distance_full};

    #[test]
    fn burn_in_rule() {
        assert_eq!(
            mc_burn_in(&ArFilter::new(vec![-0.5]).unwrap()).unwrap(),
            1000
        );
        // 10 * 1 / (1 - 0.999) = 10000
        let slow = ArFilter::new(vec![-0.999]).unwrap();
        let b = mc_burn_in(&slow).unwrap();
        assert!((9999..=10001).contains(&b), "{b}");
    }

    #[test]
    fn deterministic_under_seed() {
        let a = ArFilter::new(vec![-0.5]).unwrap();
        let b = ArFilter::new(vec![-0.3]).unwrap();
        assert_eq!(
            distance_mc(&a, &b, 10_000, 3).unwrap(),
            distance_mc(&a, &b, 10_000, 3).unwrap()
        );
    }

    #[test]
    fn identical_filters_estimate_zero() {
        let a = ArFilter::new(vec![-0.5, 0.2]).unwrap();
        let mc = distance_mc(&a, &a, 100_000, 1).unwrap();
        assert!(mc.estimate.abs() <= 3.0 * mc.std_error + 1e-15);
    }

    #[test]
    fn ar1_canonical_pair() {
        let a = ArFilter::new(vec![-0.5]).unwrap();
        let b = ArFilter::new(vec![-0.3]).unwrap();
        let mc = distance_mc(&a, &b, 1_000_000, 11).unwrap();
        let exact = distance_cov(&a, &b).unwrap();
        assert!(
            (mc.estimate - exact).abs() < 3.0 * mc.std_error,
            "{mc:?} vs {exact}"
        );
        assert!(mc.std_error < 1e-3);
    }

    #[test]
    fn intercept_term_sign_confirmed_by_simulation() {
        // psi_A = (psi_0 = 1, psi_1 = -0.5), psi_B = (0, -0.5): same dynamics, B
        // ignores A's mean -2. The bias is psi_A0 (1 + s_B)/(1 + s_A) - psi_B0 = 1.
        let a = ArFilter::with_params(vec![-0.5], 1.0, 1.0).unwrap();
        let b = ArFilter::new(vec![-0.5]).unwrap();
        let mc = distance_mc(&a, &b, 400_000, 5).unwrap();
        assert!((mc.estimate - 1.0).abs() < 3.0 * mc.std_error, "{mc:?}");
        assert_eq!(distance_full(&a, &b).unwrap(), 1.0);

        // Identical filters with a nonzero intercept: the '+ psi_B0' reading
        // would give (2 psi_0)^2 = 4, the simulation gives ~0.
        let mc_same = distance_mc(&a, &a, 100_000, 6).unwrap();
        assert!(mc_same.estimate.abs() < 3.0 * mc_same.std_error + 1e-12);
        assert!(distance_full(&a, &a).unwrap().abs() < 1e-15);

        // Distinct intercepts and dynamics on both sides.
        let a2 = ArFilter::with_params(vec![-0.6, 0.2], 0.8, 1.5).unwrap();
        let b2 = ArFilter::with_params(vec![-0.2, 0.1], -0.4, 1.0).unwrap();
        let mc2 = distance_mc(&a2, &b2, 1_000_000, 7).unwrap();
        let closed = distance_full(&a2, &b2).unwrap();
        assert!(
            (mc2.estimate - closed).abs() < 3.0 * mc2.std_error,
            "{mc2:?} vs {closed}"
        );
        let plus_reading = distance_cov(&a2, &b2).unwrap()
            + (b2.one_plus_sum() / a2.one_plus_sum() * a2.intercept() + b2.intercept()).powi(2);
        assert!((mc2.estimate - plus_reading).abs() > 10.0 * mc2.std_error);
    }
}
