//! Uniform sampling of stable AR filters with roots inside a disc of radius `r`.
//!
//! Filters are built with the scaled Levinson step
//!
//! ```text
//! Lambda_0(z) = 1
//! Lambda_k(z) = z Lambda_{k-1}(z) + r^k alpha_k rev(Lambda_{k-1})(z / r^2)
//! ```
//!
//! with independent reflection coefficients `alpha_k = 2 beta_k - 1`,
//! `beta_k ~ Beta(floor(k/2) + 1, floor((k+1)/2))`. On coefficients this is
//! `lambda_{k,k} = r^k alpha_k` and
//! `lambda_{i,k} = lambda_{i,k-1} + lambda_{k,k} lambda_{k-i,k-1} / r^(2k-2i)`,
//! and the resulting `(lambda_{1,L}, .., lambda_{L,L})` is uniform on the set
//! of monic real polynomials whose roots all lie in `|z| < r`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::arcore::ArFilter;
use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;

/// Shape parameters `(a, b)` of the Beta law of `beta_k`.
pub fn beta_shape(k: usize) -> (f64, f64) {
    ((k / 2 + 1) as f64, k.div_ceil(2) as f64)
}

/// Draw `Beta(a, b)` as `X / (X + Y)` with `X ~ Gamma(a)`, `Y ~ Gamma(b)`.
fn beta_draw<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let ga = Gamma::new(a, 1.0).expect("positive shape");
    let gb = Gamma::new(b, 1.0).expect("positive shape");
    loop {
        let x = ga.sample(rng);
        let y = gb.sample(rng);
        let s = x + y;
        if s > 0.0 {
            return x / s;
        }
    }
}

/// Reflection coefficients `alpha_1..alpha_L`, each strictly inside (-1, 1).
pub fn sample_reflection<R: Rng + ?Sized>(order: usize, rng: &mut R) -> Vec<f64> {
    (1..=order)
        .map(|k| {
            let (a, b) = beta_shape(k);
            loop {
                let alpha = 2.0 * beta_draw(rng, a, b) - 1.0;
                if alpha.abs() < 1.0 {
                    break alpha;
                }
            }
        })
        .collect()
}

/// Coefficients `lambda_1..lambda_L` of `Lambda_L` from reflection coefficients.
pub fn coefficients_from_reflection(alphas: &[f64], radius: f64) -> Vec<f64> {
    let mut lambda: Vec<f64> = Vec::with_capacity(alphas.len());
    for (idx, &alpha) in alphas.iter().enumerate() {
        let k = idx + 1;
        let top = radius.powi(k as i32) * alpha;
        let prev = lambda.clone();
        for i in 1..k {
            lambda[i - 1] = prev[i - 1] + top * prev[k - i - 1] / radius.powi(2 * (k - i) as i32);
        }
        lambda.push(top);
    }
    lambda
}

pub fn sample_filter<R: Rng + ?Sized>(order: usize, radius: f64, rng: &mut R) -> Result<ArFilter> {
    validate(order, radius)?;
    let alphas = sample_reflection(order, rng);
    ArFilter::new(coefficients_from_reflection(&alphas, radius))
}

fn validate(order: usize, radius: f64) -> Result<()> {
    if order == 0 {
        return Err(Error::invalid("filter order must be at least 1"));
    }
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::invalid(format!(
            "radius must lie in (0, 1], got {radius}"
        )));
    }
    Ok(())
}

/// A reproducible batch of independent uniform draws from the stable region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterBatch {
    pub order: usize,
    pub radius: f64,
    pub seed: u64,
    pub filters: Vec<ArFilter>,
}

pub fn sample_batch(order: usize, radius: f64, count: usize, seed: u64) -> Result<FilterBatch> {
    validate(order, radius)?;
    if count == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let filters = (0..count)
        .map(|_| sample_filter(order, radius, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(filters.iter().all(|f| f
        .max_root_modulus()
        .map(|m| m < radius + 1e-9)
        .unwrap_or(false)));
    Ok(FilterBatch {
        order,
        radius,
        seed,
        filters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    #[test]
    fn beta_shapes() {
        assert_eq!(beta_shape(1), (1.0, 1.0));
        assert_eq!(beta_shape(2), (2.0, 1.0));
        assert_eq!(beta_shape(3), (2.0, 2.0));
        assert_eq!(beta_shape(4), (3.0, 2.0));
    }

    #[test]
    fn unit_radius_is_classical_levinson_step() {
        // r = 1: lambda_{i,k} = lambda_{i,k-1} + alpha_k lambda_{k-i,k-1}
        let a = [0.3, -0.5, 0.7];
        let got = coefficients_from_reflection(&a, 1.0);
        let k2 = [0.3 + (-0.5) * 0.3, -0.5];
        let k3 = [k2[0] + 0.7 * k2[1], k2[1] + 0.7 * k2[0], 0.7];
        for (g, e) in got.iter().zip(k3) {
            assert!((g - e).abs() < 1e-15);
        }
    }

    #[test]
    fn reflection_coefficients_inside_unit_interval() {
        let mut rng = rng_from_seed(4);
        for _ in 0..10_000 {
            assert!(sample_reflection(6, &mut rng).iter().all(|a| a.abs() < 1.0));
        }
    }

    #[test]
    fn stable_by_construction() {
        let mut rng = rng_from_seed(9);
        for order in 1..=6 {
            for &r in &[0.6, 0.8, 1.0] {
                for _ in 0..2000 {
                    let f = sample_filter(order, r, &mut rng).unwrap();
                    assert!(f.max_root_modulus().unwrap() < r + 1e-9);
                }
            }
        }
    }

    #[test]
    fn batch_is_deterministic_and_validated() {
        let a = sample_batch(3, 0.8, 50, 17).unwrap();
        let b = sample_batch(3, 0.8, 50, 17).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_batch(3, 0.8, 50, 18).unwrap());
        assert!(sample_batch(3, 0.8, 0, 1).is_err());
        assert!(sample_batch(0, 0.8, 1, 1).is_err());
        assert!(sample_batch(2, 1.2, 1, 1).is_err());
    }

    #[test]
    fn shrunken_triangle_at_radius_0_6() {
        let batch = sample_batch(2, 0.6, 10_000, 3).unwrap();
        let worst = batch
            .filters
            .iter()
            .map(|f| f.max_root_modulus().unwrap())
            .fold(0.0, f64::max);
        assert!(worst < 0.6);
        // scaled triangle: |lambda_2| < r^2, |lambda_1| < r + lambda_2 / r
        for f in &batch.filters {
            let (l1, l2) = (f.coeffs()[0], f.coeffs()[1]);
            assert!(l2.abs() < 0.36 && l1.abs() < 0.6 + l2 / 0.6);
        }
    }
}
